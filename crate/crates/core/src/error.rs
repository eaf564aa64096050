use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed structure config: {0}")]
    Config(String),

    #[error("identification F_{i}(x_{p}) = F_{j}(x_{q}) violated by {gap:e}")]
    IdentificationViolated {
        i: usize,
        p: usize,
        j: usize,
        q: usize,
        gap: f64,
    },

    #[error("invalid harmonic structure: {0}")]
    Harmonic(String),

    #[error("level {level} needs {required} cell slots, budget is {budget}")]
    BudgetExceeded {
        level: usize,
        required: u128,
        budget: usize,
    },

    #[error("resistance network is disconnected")]
    Disconnected,

    #[error("vertex {vertex} has nonpositive mass {mass}")]
    NonpositiveMass { vertex: usize, mass: f64 },

    #[error("eigensolver did not converge for index {index} after {iterations} iterations")]
    EigenNoConvergence { index: usize, iterations: usize },

    #[error("eigenpair {index} has generalized residual {residual:e} above {bound:e}")]
    EigenResidual {
        index: usize,
        residual: f64,
        bound: f64,
    },

    #[error("time must be positive, got {0}")]
    InvalidTime(f64),

    #[error("tail tolerance unachievable at t = {t}: best tail bound with available modes is {achievable:e}")]
    TruncationUnachievable { t: f64, achievable: f64 },

    #[error("kernel value {value:e} at (t={t}, x={x}, y={y}) is below -{tol:e}")]
    NegativeKernel {
        t: f64,
        x: usize,
        y: usize,
        value: f64,
        tol: f64,
    },

    #[error("adaptive quadrature did not reach tolerance {tol:e} (estimate {estimate:e})")]
    QuadratureNonConvergence { tol: f64, estimate: f64 },

    #[error("spectral window holds {points} points, at least {required} are needed")]
    WindowTooSmall { points: usize, required: usize },

    #[error("t = {t} is below the resolvable time {t_min:e} of this level")]
    Unresolvable { t: f64, t_min: f64 },

    #[error("grid has {points} points, at least {required} are needed")]
    GridTooShort { points: usize, required: usize },

    #[error("unsupported L^p exponent {0}")]
    InvalidExponent(f64),

    #[error("empty grid: {0}")]
    EmptyGrid(&'static str),

    #[error("no sampled points inside the cone at apex {apex}")]
    EmptyCone { apex: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("ball of radius {radius:e} at vertex {vertex} is below the level resolution {resolution:e}")]
    BelowResolution {
        vertex: usize,
        radius: f64,
        resolution: f64,
    },

    #[error("no density-point proxy available: {0}")]
    NoDensityPoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
