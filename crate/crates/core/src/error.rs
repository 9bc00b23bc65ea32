use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("truncation cap exceeded in {what} (cap {cap})")]
    TruncationCapExceeded { what: &'static str, cap: usize },

    #[error("lower parameter {value} equals q^-{m} before the series terminates")]
    PoleInLowerParameter { value: f64, m: u64 },

    #[error("divergent series: {0}")]
    DivergentSeries(String),

    #[error("forms disagree: {first} vs {second} (tolerance {tolerance:e})")]
    FormMismatch {
        first: f64,
        second: f64,
        tolerance: f64,
    },

    #[error("negative base {base} raised to non-integer power {exponent}")]
    NegativeBaseFractionalPower { base: f64, exponent: f64 },

    #[error("degenerate parameter: {0}")]
    DegenerateParameter(String),

    #[error("singular Wronskian at x = {x}")]
    SingularWronskian { x: f64 },

    #[error("bilateral sum not summable within |k| <= {cap}")]
    NonSummable { cap: i64 },

    #[error("weight has a pole at x = {x}")]
    WeightPole { x: f64 },

    #[error("unknown function: {0}")]
    UnknownFunction(String),
}

pub type Result<T> = std::result::Result<T, QError>;

impl QError {
    /// Variant name, as shown by the command-line front end.
    pub fn kind(&self) -> &'static str {
        match self {
            QError::InvalidParameter(_) => "InvalidParameter",
            QError::TruncationCapExceeded { .. } => "TruncationCapExceeded",
            QError::PoleInLowerParameter { .. } => "PoleInLowerParameter",
            QError::DivergentSeries(_) => "DivergentSeries",
            QError::FormMismatch { .. } => "FormMismatch",
            QError::NegativeBaseFractionalPower { .. } => "NegativeBaseFractionalPower",
            QError::DegenerateParameter(_) => "DegenerateParameter",
            QError::SingularWronskian { .. } => "SingularWronskian",
            QError::NonSummable { .. } => "NonSummable",
            QError::WeightPole { .. } => "WeightPole",
            QError::UnknownFunction(_) => "UnknownFunction",
        }
    }

    /// True when the inputs themselves are outside the admissible range, as
    /// opposed to a numerical failure on admissible inputs.
    pub fn is_parameter_error(&self) -> bool {
        matches!(
            self,
            QError::InvalidParameter(_)
                | QError::PoleInLowerParameter { .. }
                | QError::NegativeBaseFractionalPower { .. }
                | QError::DegenerateParameter(_)
                | QError::WeightPole { .. }
                | QError::UnknownFunction(_)
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinds_and_classes() {
        let e = QError::UnknownFunction("foo".into());
        assert_eq!(e.kind(), "UnknownFunction");
        assert!(e.is_parameter_error());
        assert_eq!(e.to_string(), "unknown function: foo");
        let e = QError::NonSummable { cap: 200 };
        assert_eq!(e.kind(), "NonSummable");
        assert!(!e.is_parameter_error());
    }
}
