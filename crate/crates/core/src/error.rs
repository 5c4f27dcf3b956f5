use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("chord index m = {m} out of range 1..={max} for N = {n}")]
    ChordIndex { m: usize, n: usize, max: usize },

    #[error("beads {i} and {j} (nearly) coincide: distance {distance:e}")]
    SingularChord { i: usize, j: usize, distance: f64 },

    #[error("degenerate curve: speed {min_speed:e} is below 1e-8 of the mean {mean_speed:e}")]
    DegenerateCurve { min_speed: f64, mean_speed: f64 },

    #[error("loop is not unit-speed on [0, 2π): max |speed - 1| = {deviation:e}")]
    Parametrization { deviation: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical assumption violated: {0}")]
    NumericalAssumption(String),

    #[error("finite-difference step {h:e} is unstable: eigenvalues moved by {change:e} between h and h/2")]
    StepSize { h: f64, change: f64 },

    #[error("no bound state on the feasible set")]
    NoBoundState,

    #[error("loop spec: {0}")]
    Spec(String),
}

impl Error {
    /// Errors that come from a violated internal assumption rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NumericalAssumption(_) | Error::StepSize { .. })
    }
}
