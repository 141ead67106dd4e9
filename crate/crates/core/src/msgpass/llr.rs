use super::MsgError;

/// Default magnitude used in place of an infinite LLR.
pub const DEFAULT_CLAMP: f64 = 50.0;

/// Log-likelihood ratio `ln(p(x=0) / p(x=1))` of one binary variable.
/// Positive values favour 0.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Llr(pub f64);

impl Llr {
    pub const UNIFORM: Llr = Llr(0.0);

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// `(p(x=0), p(x=1))`
    #[inline]
    pub fn probs(self) -> (f64, f64) {
        llr_to_probs(self)
    }

    #[inline]
    pub fn p0(self) -> f64 {
        1.0 / (1.0 + (-self.0).exp())
    }

    #[inline]
    pub fn clamp(self, limit: f64) -> Llr {
        Llr(self.0.clamp(-limit, limit))
    }

    /// The clamped LLR pinning a variable to `bit`.
    #[inline]
    pub fn certain(bit: bool, limit: f64) -> Llr {
        if bit {
            Llr(-limit)
        } else {
            Llr(limit)
        }
    }
}

/// Converts an LLR to the normalized pair `(p0, p1)`.
#[inline]
pub fn llr_to_probs(l: Llr) -> (f64, f64) {
    let p1 = 1.0 / (1.0 + l.0.exp());
    let p0 = 1.0 / (1.0 + (-l.0).exp());
    (p0, p1)
}

/// Converts a possibly unnormalized mass pair to an LLR, clamped to
/// `[-limit, limit]`. A zero mass maps to the clamp on the other side.
pub fn probs_to_llr(p0: f64, p1: f64, limit: f64) -> Result<Llr, MsgError> {
    if !(p0 >= 0.0 && p1 >= 0.0 && p0.is_finite() && p1.is_finite()) {
        return Err(MsgError::InvalidMass { p0, p1 });
    }
    match (p0 == 0.0, p1 == 0.0) {
        (true, true) => Err(MsgError::ZeroMass),
        (false, true) => Ok(Llr(limit)),
        (true, false) => Ok(Llr(-limit)),
        (false, false) => Ok(Llr(p0.ln() - p1.ln()).clamp(limit)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform() {
        assert_eq!(llr_to_probs(Llr(0.0)), (0.5, 0.5));
    }

    #[test]
    fn certain_mass_clamps() {
        assert_eq!(probs_to_llr(1.0, 0.0, DEFAULT_CLAMP).unwrap(), Llr(DEFAULT_CLAMP));
        assert_eq!(probs_to_llr(0.0, 2.0, DEFAULT_CLAMP).unwrap(), Llr(-DEFAULT_CLAMP));
        assert_eq!(probs_to_llr(0.0, 0.0, DEFAULT_CLAMP), Err(MsgError::ZeroMass));
        assert!(probs_to_llr(-1.0, 1.0, DEFAULT_CLAMP).is_err());
    }

    #[test]
    fn quarter_three_quarters() {
        let l = probs_to_llr(0.25, 0.75, DEFAULT_CLAMP).unwrap();
        assert!((l.0 - (1.0f64 / 3.0).ln()).abs() < 1e-15);
        assert!((l.0 + 1.0986).abs() < 1e-4);
        // unnormalized pairs give the same ratio
        assert!((probs_to_llr(1.0, 3.0, DEFAULT_CLAMP).unwrap().0 - l.0).abs() < 1e-15);
    }

    #[test]
    fn probs_sum_to_one_and_stay_finite_at_clamp() {
        for v in [-DEFAULT_CLAMP, -3.0, 0.7, DEFAULT_CLAMP] {
            let (p0, p1) = Llr(v).probs();
            assert!((p0 + p1 - 1.0).abs() < 1e-15);
            assert!(p0 > 0.0 && p1 > 0.0);
            assert!((Llr(v).p0() - p0).abs() == 0.0);
        }
    }
}
