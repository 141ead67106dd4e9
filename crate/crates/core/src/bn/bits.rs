use std::fmt;
use std::str::FromStr;

use super::BnError;

macro_rules! bit_vector {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
        pub struct $name(pub Vec<bool>);

        impl $name {
            pub fn len(&self) -> usize {
                self.0.len()
            }

            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }

            pub fn bits(&self) -> &[bool] {
                &self.0
            }

            /// Low `len` bits of `value`, bit 0 first.
            pub fn from_index(value: u64, len: usize) -> Self {
                Self((0..len).map(|i| value >> i & 1 == 1).collect())
            }

            /// Integer encoding with element 0 as the least significant bit.
            /// Only meaningful for lengths up to 64.
            pub fn to_index(&self) -> u64 {
                self.0
                    .iter()
                    .enumerate()
                    .fold(0, |acc, (i, &b)| acc | (u64::from(b) << i))
            }

            /// Bitwise complement.
            pub fn complement(&self) -> Self {
                Self(self.0.iter().map(|b| !b).collect())
            }
        }

        impl std::borrow::Borrow<[bool]> for $name {
            fn borrow(&self) -> &[bool] {
                &self.0
            }
        }

        impl From<Vec<bool>> for $name {
            fn from(bits: Vec<bool>) -> Self {
                Self(bits)
            }
        }

        /// Bit string, element 0 first.
        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                for &b in &self.0 {
                    f.write_str(if b { "1" } else { "0" })?;
                }
                Ok(())
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}({})", stringify!($name), self)
            }
        }

        impl FromStr for $name {
            type Err = BnError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                s.chars()
                    .map(|c| match c {
                        '0' => Ok(false),
                        '1' => Ok(true),
                        _ => Err(BnError::BadBitString(s.to_string())),
                    })
                    .collect::<Result<Vec<_>, _>>()
                    .map(Self)
            }
        }
    };
}

bit_vector!(
    /// Values of the in-nodes, in network in-node order.
    InputVector
);
bit_vector!(
    /// Values of the out-nodes, in network out-node order.
    OutputVector
);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_string_round_trip() {
        let x: InputVector = "0110".parse().unwrap();
        assert_eq!(x.bits(), &[false, true, true, false]);
        assert_eq!(x.to_string(), "0110");
        assert_eq!(x.to_index(), 0b0110);
        assert_eq!(InputVector::from_index(6, 4), x);
        assert!("01x".parse::<OutputVector>().is_err());
    }
}
