use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension {0} not supported (expected 1, 2 or 3)")]
    BadDimension(usize),
    #[error("axis {axis}: extent [{lo}, {hi}] is empty or not finite")]
    BadExtent { axis: usize, lo: f64, hi: f64 },
    #[error("axis {axis}: points per axis must be positive")]
    BadPoints { axis: usize },
    #[error("{cells} cells exceed the budget of {budget}")]
    BudgetExceeded { cells: u128, budget: usize },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("expected {expected} values, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("non-finite value at cell {cell}")]
    NonFinite { cell: usize },
    #[error("cell {cell} is outside the grid")]
    CellOutOfGrid { cell: usize },
    #[error("weight {index} = {weight} is outside [0, 1]")]
    WeightOutOfRange { index: usize, weight: f64 },
    #[error("fields {m} and {n} violate orthonormality by {deviation:e}")]
    NotOrthonormal { m: usize, n: usize, deviation: f64 },
    #[error("field {index} is not normalized (norm² = {norm_sq})")]
    NotNormalized { index: usize, norm_sq: f64 },
    #[error("field {index} is linearly dependent on its predecessors")]
    RankDeficient { index: usize },
    #[error("density vanishes identically")]
    ZeroDensity,
    #[error("field vanishes identically")]
    ZeroField,
    #[error("field vanishes on the ball")]
    ZeroOnBall,
    #[error("empty ensemble or mask")]
    Empty,
    #[error("ball mask is not connected under axis adjacency")]
    DisconnectedMask,
    #[error("spectral gap undefined for a single-cell mask")]
    GapUndefined,
    #[error("eigensolver did not converge after {iterations} iterations")]
    SolverNoConvergence { iterations: usize },
    #[error("total mass {available} is below the target mass {target}")]
    InsufficientMass { available: f64, target: f64 },
    #[error("target mass {0} must be finite and positive")]
    BadTargetMass(f64),
    #[error("support cell {cell} is not the center of any candidate")]
    MissingCenter { cell: usize },
    #[error("support cell {cell} is the center of several candidates")]
    DuplicateCenter { cell: usize },
    #[error("ball mass {mass} is outside the window [{lo}, {hi}]")]
    MassOutOfWindow { mass: f64, lo: f64, hi: f64 },
    #[error("line search stalled at step {step}")]
    LineSearchStalled { step: usize },
    #[error("invalid configuration: {0}")]
    BadConfig(&'static str),
}
