use thiserror::Error;

/// Errors raised by the library. Every variant carries enough context to be
/// rendered directly by the CLI.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the function being evaluated.
    #[error("domain error: {0}")]
    Domain(String),

    /// The constitutive laws or run parameters are unusable for the request.
    #[error("configuration error: {0}")]
    Configuration(String),

    /// Boundary densities coincide, so the jump relation cannot fix the momentum.
    #[error("degenerate jump: u- = u+ = {0}; supply v* explicitly")]
    DegenerateJump(f64),

    /// The jump relations have no real solution for the requested states.
    #[error("no real jump: {0}")]
    NoRealJump(String),

    /// A root finder, quadrature or ODE integration failed to converge.
    #[error("solver error: {0}")]
    Solver(String),

    /// Density fell below the configured vacuum floor during time integration.
    #[error("vacuum floor {floor:e} breached at x = {x}, t = {t} (u = {value:e})")]
    Vacuum { x: f64, t: f64, value: f64, floor: f64 },

    /// The CFL time step collapsed.
    #[error("time step underflow at t = {t}: dt = {dt:e}")]
    Timestep { t: f64, dt: f64 },

    /// The caller violated an API contract (mismatched grids, empty data, ...).
    #[error("usage error: {0}")]
    Usage(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
