//! Plane-wave Bloch matrices, left/right eigensystems and band tracking.

mod bands;
mod bloch;
mod config;
mod potential;
mod solve;
mod track;

pub use bands::{dispersion, BandSet};
pub use bloch::{build_bloch_matrix, BlochMatrix};
pub use config::{fold, KGrid, ModelConfig, Tolerances};
pub use potential::{gauge_reduce, PotentialSpec};
pub use solve::{eigenvalues_k, solve_k, EigenState, KEigensystem};
pub use track::{order_and_track, OrderingEvent, OrderingLog, OrderingRule, TrackingAmbiguity};

pub(crate) use solve::cmp_re_im;
pub(crate) use track::coincide;
