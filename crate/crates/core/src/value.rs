use serde::{Deserialize, Serialize};

/// Why a feature produced no usable number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpecialKind {
    NotANumber,
    Infinite,
    /// Precondition failure: zero variance, series too short, singular fit.
    DomainError,
}

/// Output of a feature applied to one series: either a finite real or a
/// tagged special value. The `Real` variant is finite by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FeatureValue {
    Real(f64),
    Special(SpecialKind),
}

impl FeatureValue {
    /// Classify a raw result: NaN and infinities become specials.
    pub fn from_f64(v: f64) -> Self {
        if v.is_nan() {
            FeatureValue::Special(SpecialKind::NotANumber)
        } else if v.is_infinite() {
            FeatureValue::Special(SpecialKind::Infinite)
        } else {
            FeatureValue::Real(v)
        }
    }

    pub fn domain_error() -> Self {
        FeatureValue::Special(SpecialKind::DomainError)
    }

    pub fn is_real(self) -> bool {
        matches!(self, FeatureValue::Real(_))
    }

    pub fn as_real(self) -> Option<f64> {
        match self {
            FeatureValue::Real(v) => Some(v),
            FeatureValue::Special(_) => None,
        }
    }

    /// Apply `f` to a real value; specials pass through untouched, and a
    /// non-finite result is demoted to a special rather than kept as `Real`.
    pub fn map(self, f: impl FnOnce(f64) -> f64) -> Self {
        match self {
            FeatureValue::Real(v) => FeatureValue::from_f64(f(v)),
            special => special,
        }
    }

    /// Combine two values; any special operand wins.
    pub fn combine(self, other: Self, f: impl FnOnce(f64, f64) -> f64) -> Self {
        match (self, other) {
            (FeatureValue::Real(a), FeatureValue::Real(b)) => FeatureValue::from_f64(f(a, b)),
            (FeatureValue::Special(k), _) => FeatureValue::Special(k),
            (_, FeatureValue::Special(k)) => FeatureValue::Special(k),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_f64_classifies() {
        assert_eq!(FeatureValue::from_f64(1.5), FeatureValue::Real(1.5));
        assert_eq!(
            FeatureValue::from_f64(f64::NAN),
            FeatureValue::Special(SpecialKind::NotANumber)
        );
        assert_eq!(
            FeatureValue::from_f64(f64::INFINITY),
            FeatureValue::Special(SpecialKind::Infinite)
        );
        assert_eq!(
            FeatureValue::from_f64(f64::NEG_INFINITY),
            FeatureValue::Special(SpecialKind::Infinite)
        );
    }

    #[test]
    fn specials_never_turn_real() {
        let s = FeatureValue::domain_error();
        assert_eq!(s.map(|v| v + 1.0), s);
        assert_eq!(s.combine(FeatureValue::Real(2.0), |a, b| a + b), s);
        assert_eq!(FeatureValue::Real(2.0).combine(s, |a, b| a + b), s);
        // real arithmetic that overflows or divides 0/0 is demoted, not kept
        assert_eq!(
            FeatureValue::Real(0.0).map(|v| v / v),
            FeatureValue::Special(SpecialKind::NotANumber)
        );
        assert_eq!(
            FeatureValue::Real(f64::MAX).map(|v| v * 2.0),
            FeatureValue::Special(SpecialKind::Infinite)
        );
    }
}
