use thiserror::Error;

/// Failures raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter sits on (or within tolerance of) a zero of a denominator.
    #[error("singular parameter: {0}")]
    SingularParameter(String),

    #[error("size limit exceeded: {what} = {got}, maximum {max}")]
    SizeLimit {
        what: &'static str,
        got: usize,
        max: usize,
    },

    /// Parameter outside the region where a representation converges.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("branch error: {0}")]
    Branch(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("division by zero: {0}")]
    DivisionByZero(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Non-fatal diagnostics attached to a computed value.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    /// The determinant's condition estimate used more than half of the
    /// available mantissa bits.
    PrecisionExhausted { bits_lost: f64, mantissa_bits: u32 },
    /// A quadrature or truncation did not settle to the requested tolerance.
    Convergence { what: String, change: f64, tolerance: f64 },
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Warning::PrecisionExhausted {
                bits_lost,
                mantissa_bits,
            } => write!(
                f,
                "precision exhausted: condition estimate consumed {bits_lost:.1} of {mantissa_bits} bits"
            ),
            Warning::Convergence {
                what,
                change,
                tolerance,
            } => write!(f, "{what} not converged: change {change:.3e} > {tolerance:.3e}"),
        }
    }
}

/// A value together with the warnings produced while computing it.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnosed<V> {
    pub value: V,
    pub warnings: Vec<Warning>,
}

impl<V> Diagnosed<V> {
    pub fn clean(value: V) -> Self {
        Diagnosed {
            value,
            warnings: Vec::new(),
        }
    }

    pub fn is_clean(&self) -> bool {
        self.warnings.is_empty()
    }

    pub fn map<U>(self, f: impl FnOnce(V) -> U) -> Diagnosed<U> {
        Diagnosed {
            value: f(self.value),
            warnings: self.warnings,
        }
    }
}
