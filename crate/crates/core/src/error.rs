use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid cube: {0}")]
    InvalidCube(String),
    #[error("invalid grid function: {0}")]
    InvalidGrid(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("cube not resolvable by grid: {0}")]
    Unresolvable(String),
    #[error("cube {cube} lies outside the grid domain {domain}")]
    OutsideDomain { cube: String, domain: String },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("cube family required")]
    CubeFamilyRequired,
    #[error("empty cube family")]
    EmptyFamily,
    #[error("nonpositive weight sample at index {0}")]
    NonPositiveWeight(usize),
    #[error("PV truncation under-resolved: exclusion {exclusion} below cell diameter {diameter}")]
    PvUnderResolved { exclusion: f64, diameter: f64 },
    #[error("alpha = -1 operator evaluated inside the support; only far-field points are allowed")]
    HypersingularNearField,
    #[error("shift |h| = {norm} must exceed sqrt(dim) = {min}")]
    ShiftTooSmall { norm: f64, min: f64 },
    #[error("shifted source cube overlaps the evaluation cube")]
    Overlap,
    #[error("kernel fails condition (1): no cone where the symbol keeps one sign")]
    KernelFailsCone,
    #[error("oscillation decay not observed up to |h| = {h_max} (best proxy {best_proxy})")]
    OscillationDecayNotObserved { h_max: f64, best_proxy: f64 },
    #[error("decomposed commutator needs far-field points when alpha <= 0; use the combined-kernel form")]
    NearFieldDecomposed,
    #[error("commutator slot must be 1 or 2, got {0}")]
    InvalidSlot(usize),
    #[error("shifted cube escapes the grid: domain must cover {required}")]
    EscapesGrid { required: String },
    #[error("kernel invalid: {0}")]
    InvalidKernel(String),
}
