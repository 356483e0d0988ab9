use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error("photon number {n} outside supported range 0..={max}")]
    PhotonNumber { n: usize, max: usize },
    #[error("invalid branch index {0} (expected 1..=4)")]
    InvalidBranch(usize),
    #[error("Fock truncation discarded tail mass {tail_mass:e}")]
    Truncation { tail_mass: f64 },
    #[error("phase grid too coarse: overlap with target number state is {overlap}")]
    Aliased { overlap: f64 },
    #[error("phase integral did not converge: doubling the grid changed the result by {change:e}")]
    PhaseIntegralNotConverged { change: f64 },
    #[error("window quadrature did not converge: doubling the order changed the result by {relative_change:e} (relative)")]
    WindowNotConverged { relative_change: f64 },
    #[error("degenerate window: postselection probability {0:e} is too small to normalize")]
    DegenerateWindow(f64),
    #[error("transmissivity {0} outside (0, 1]")]
    Transmissivity(f64),
    #[error("mean loss {n_bar} outside [0, {limit}) for N = {n}")]
    MeanLoss { n_bar: f64, n: usize, limit: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;
