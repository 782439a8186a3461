use alloc::string::String;

/// Everything that can go wrong inside the engine.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: `{field}` {reason}")]
    InvalidConfig { field: &'static str, reason: String },

    #[error("Fourier component l = {l} cannot be represented with l_max = {l_max}")]
    FourierOutOfRange { l: i64, l_max: usize },

    #[error("eigensolver did not converge at k = {k}")]
    Eigensolver { k: f64 },

    #[error("could not pair left and right eigenvectors at k = {k}")]
    Pairing { k: f64 },

    #[error("only {found} states available at k index {k_index}, {needed} needed")]
    IncompleteBands { k_index: usize, found: usize, needed: usize },

    #[error("k = {k} is not on the grid")]
    MissingGridPoint { k: f64 },

    #[error("argument outside domain: {0}")]
    Domain(&'static str),

    #[error("base point lies on the curve (distance {distance:e})")]
    BaseOnCurve { distance: f64 },

    #[error("l = 0 coefficient of band {band} vanishes at k = {k}")]
    ZeroPivot { band: usize, k: f64 },

    #[error("bands {pair:?} are not separated ({count} exceptional points)")]
    BandsNotSeparated { pair: (usize, usize), count: usize },

    #[error("projection matrix is singular at k = {k} (sigma_min = {sigma:e})")]
    SingularProjection { k: f64, sigma: f64 },

    #[error("k = {k} is neither real nor conjugate-paired")]
    UnlabeledK { k: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;
