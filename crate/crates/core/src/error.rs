use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("quadratic form is not symmetric (|Q - Q^T| = {0:.3e})")]
    AsymmetricForm(f64),
    #[error("quadratic form does not commute with the complex structure (|QJ - JQ| = {0:.3e})")]
    NonInvariantForm(f64),
    #[error("quadratic form has wrong size: expected {expected}x{expected}, got {got} entries")]
    FormSize { expected: usize, got: usize },
    #[error("frequency vector has length {got}, expected {expected}")]
    FrequencySize { expected: usize, got: usize },
    #[error("sampling grid {0} is below the documented minimum {1}")]
    GridTooCoarse(usize, usize),
    #[error("no real rest point: |2(k + lambda)| = {0:.6} > 1")]
    NoRealAngle(f64),
    #[error("cutoff width eps = {0} outside (0, 1/4)")]
    BadCutoffWidth(f64),
    #[error("hyperbolic index needs nonzero eigenvalue signs (entry {0} is zero)")]
    DegenerateSign(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
