use std::fmt;

use super::BnError;

/// Largest arity a [`BooleanFunction`] may have.
pub const K_MAX: usize = 15;

/// Largest arity for which [`BooleanFunction::is_unate`] runs its exhaustive check.
pub const DEFAULT_UNATE_LIMIT: usize = 15;

/// A Boolean function of `k` inputs stored as a packed truth table.
///
/// Bit `m` of the table is the output for the assignment whose `i`-th input
/// equals bit `i` of `m` (input 0 is the least significant bit).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BooleanFunction {
    arity: usize,
    words: Vec<u64>,
}

impl BooleanFunction {
    /// Builds a function from its truth table, one `bool` per assignment.
    pub fn from_table(arity: usize, table: &[bool]) -> Result<Self, BnError> {
        check_arity(arity)?;
        if table.len() != 1 << arity {
            return Err(BnError::TableLength {
                arity,
                expected: 1 << arity,
                found: table.len(),
            });
        }
        let mut words = vec![0u64; word_count(arity)];
        for (m, &bit) in table.iter().enumerate() {
            if bit {
                words[m / 64] |= 1 << (m % 64);
            }
        }
        Ok(Self { arity, words })
    }

    /// Builds a function by evaluating `f` on every assignment index.
    pub fn from_fn(arity: usize, mut f: impl FnMut(usize) -> bool) -> Result<Self, BnError> {
        check_arity(arity)?;
        let mut words = vec![0u64; word_count(arity)];
        for m in 0..1usize << arity {
            if f(m) {
                words[m / 64] |= 1 << (m % 64);
            }
        }
        Ok(Self { arity, words })
    }

    /// Builds a function from packed 64-bit words; bits past `2^arity` must be zero.
    pub fn from_words(arity: usize, words: Vec<u64>) -> Result<Self, BnError> {
        check_arity(arity)?;
        if words.len() != word_count(arity) {
            return Err(BnError::TableLength {
                arity,
                expected: 1 << arity,
                found: words.len() * 64,
            });
        }
        if arity < 6 && words[0] >> (1u32 << arity) != 0 {
            return Err(BnError::TableLength {
                arity,
                expected: 1 << arity,
                found: 64 - words[0].leading_zeros() as usize,
            });
        }
        Ok(Self { arity, words })
    }

    pub fn identity() -> Self {
        Self::from_words(1, vec![0b10]).expect("valid table")
    }

    pub fn not() -> Self {
        Self::from_words(1, vec![0b01]).expect("valid table")
    }

    pub fn and2() -> Self {
        Self::from_words(2, vec![0b1000]).expect("valid table")
    }

    pub fn or2() -> Self {
        Self::from_words(2, vec![0b1110]).expect("valid table")
    }

    pub fn xor2() -> Self {
        Self::from_words(2, vec![0b0110]).expect("valid table")
    }

    /// The constant function of the given arity.
    pub fn constant(arity: usize, value: bool) -> Result<Self, BnError> {
        Self::from_fn(arity, |_| value)
    }

    #[inline]
    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Number of table entries, `2^arity`.
    #[inline]
    pub fn table_len(&self) -> usize {
        1 << self.arity
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Output for the assignment with integer encoding `index`.
    #[inline]
    pub fn eval_index(&self, index: usize) -> bool {
        debug_assert!(index < self.table_len());
        (self.words[index / 64] >> (index % 64)) & 1 == 1
    }

    /// Output for an explicit assignment of all `arity` inputs.
    pub fn eval(&self, assignment: &[bool]) -> Result<bool, BnError> {
        if assignment.len() != self.arity {
            return Err(BnError::AssignmentLength {
                expected: self.arity,
                found: assignment.len(),
            });
        }
        Ok(self.eval_index(pack_index(assignment)))
    }

    /// Whether input `position` has no influence on the output when the other
    /// inputs take the values in `others` (listed in input order, skipping
    /// `position`).
    pub fn is_insensitive(&self, others: &[bool], position: usize) -> Result<bool, BnError> {
        if position >= self.arity {
            return Err(BnError::PositionOutOfRange {
                position,
                arity: self.arity,
            });
        }
        if others.len() + 1 != self.arity {
            return Err(BnError::AssignmentLength {
                expected: self.arity - 1,
                found: others.len(),
            });
        }
        let co = pack_index(others);
        let (lo, hi) = split_at(co, position);
        Ok(self.eval_index(lo) == self.eval_index(hi))
    }

    /// Whether the function is unate: monotone in every input after fixing a
    /// polarity per input. Refuses arities above `limit`.
    pub fn is_unate(&self, limit: usize) -> Result<bool, BnError> {
        if self.arity > limit {
            return Err(BnError::UnateLimit {
                arity: self.arity,
                limit,
            });
        }
        for position in 0..self.arity {
            let mut rises = false;
            let mut falls = false;
            for co in 0..1usize << (self.arity - 1) {
                let (lo, hi) = split_at(co, position);
                match (self.eval_index(lo), self.eval_index(hi)) {
                    (false, true) => rises = true,
                    (true, false) => falls = true,
                    _ => {}
                }
                if rises && falls {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// The function with every output bit flipped.
    pub fn complement(&self) -> Self {
        let mut words: Vec<u64> = self.words.iter().map(|w| !w).collect();
        if self.arity < 6 {
            words[0] &= (1u64 << (1 << self.arity)) - 1;
        }
        Self {
            arity: self.arity,
            words,
        }
    }

    /// The function `a -> self(a ^ mask)`, flipping the inputs selected by `mask`.
    pub fn with_inputs_flipped(&self, mask: usize) -> Self {
        Self::from_fn(self.arity, |m| self.eval_index(m ^ mask)).expect("same arity")
    }

    /// Big-endian hex of the packed table, `ceil(2^k / 4)` digits.
    pub fn to_hex(&self) -> String {
        let digits = hex_digits(self.arity);
        let mut out = String::with_capacity(digits);
        for d in (0..digits).rev() {
            let bit = d * 4;
            let nibble = (self.words[bit / 64] >> (bit % 64)) & 0xf;
            out.push(char::from_digit(nibble as u32, 16).expect("nibble"));
        }
        out
    }

    /// Parses the big-endian hex form produced by [`to_hex`](Self::to_hex).
    pub fn from_hex(arity: usize, hex: &str) -> Result<Self, BnError> {
        check_arity(arity)?;
        let digits = hex_digits(arity);
        if hex.len() != digits {
            return Err(BnError::TableLength {
                arity,
                expected: 1 << arity,
                found: hex.len() * 4,
            });
        }
        let mut words = vec![0u64; word_count(arity)];
        for (pos, c) in hex.chars().rev().enumerate() {
            let nibble = c.to_digit(16).ok_or_else(|| BnError::BadHex(hex.to_string()))? as u64;
            let bit = pos * 4;
            words[bit / 64] |= nibble << (bit % 64);
        }
        Self::from_words(arity, words)
    }
}

impl fmt::Debug for BooleanFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BooleanFunction({}, 0x{})", self.arity, self.to_hex())
    }
}

fn check_arity(arity: usize) -> Result<(), BnError> {
    if arity == 0 || arity > K_MAX {
        return Err(BnError::Arity { arity, max: K_MAX });
    }
    Ok(())
}

fn word_count(arity: usize) -> usize {
    (1usize << arity).div_ceil(64)
}

fn hex_digits(arity: usize) -> usize {
    (1usize << arity).div_ceil(4)
}

/// Integer encoding of an assignment, element 0 as the least significant bit.
pub fn pack_index(bits: &[bool]) -> usize {
    bits.iter()
        .enumerate()
        .fold(0, |acc, (i, &b)| acc | (usize::from(b) << i))
}

/// Inserts a 0 and a 1 at bit `position` of the co-assignment `co`, returning
/// both full assignment indices.
#[inline]
pub fn split_at(co: usize, position: usize) -> (usize, usize) {
    let low = co & ((1 << position) - 1);
    let lo = low | ((co >> position) << (position + 1));
    (lo, lo | (1 << position))
}
