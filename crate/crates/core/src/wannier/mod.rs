//! Bloch phase convention, band mixing and bi-orthogonal Wannier functions.

mod functions;
mod gauge;
mod phase;

pub use functions::{build_wannier, RealGrid, TrialSet, TrialSource, WannierSet};
pub use gauge::{diagonal_gauge, identity_gauge, projection_unitary, GaugeMethod, UnitaryMixing};
pub use phase::{fix_phases, rotate_phases, PhaseConvention, PHASE_RULE};

pub(crate) use functions::{mixed_coeffs, Synth};

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::ep::EpConfig;
use crate::error::Result;
use crate::spectra::{dispersion, ModelConfig, PotentialSpec};

/// Strength of the imaginary sine potential whose diagonal-gauge Wannier
/// functions serve as default trial functions.
pub const TRIAL_C: f64 = 200.0;

/// Diagonal-gauge Wannier functions of `V = c sin(2πx)` at `c = 200i` on the
/// grid of `cfg`, as trial functions for the projection method.
pub fn default_trials(cfg: &ModelConfig, n_x: usize) -> Result<TrialSet> {
    trials_at(Complex64::new(0.0, TRIAL_C), cfg, n_x)
}

pub fn trials_at(c: Complex64, cfg: &ModelConfig, n_x: usize) -> Result<TrialSet> {
    let mut cfg = *cfg;
    cfg.n_bands = 2;
    let bands = dispersion(&PotentialSpec::c_sin(c), &cfg)?;
    let (bands, _) = fix_phases(&bands)?;
    let u = diagonal_gauge(&bands, &EpConfig::default())?;
    let set = build_wannier(&bands, &u, n_x, (0, 0))?;
    Ok(TrialSet::from_wannier(
        &set,
        TrialSource {
            c,
            l_max: cfg.l_max,
            n_k: cfg.n_k,
            n_x,
        },
    ))
}

/// `α` (both energies real) or `β` (conjugate pair) at each k, plus the
/// checks that go with each region.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionCheck {
    pub labels: Vec<crate::ep::Region>,
    /// `max_{k in α} max_ij ||U_ij| - 1/√2|`.
    pub alpha_deviation: f64,
    /// `max_{k in β} max(|U_12|, |U_21|)`.
    pub beta_offdiag: f64,
}

pub fn region_check(bands: &crate::spectra::BandSet, u: &UnitaryMixing, tol: f64) -> Result<RegionCheck> {
    use crate::ep::{region_decompose, Region};
    let labels = region_decompose(bands, tol)?;
    let half = core::f64::consts::FRAC_1_SQRT_2;
    let mut alpha_deviation = 0.0f64;
    let mut beta_offdiag = 0.0f64;
    for (j, r) in labels.iter().enumerate() {
        match r {
            Region::Alpha => {
                for i in 0..4 {
                    alpha_deviation = alpha_deviation.max((u.get(j, i / 2, i % 2).norm() - half).abs());
                }
            }
            Region::Beta => {
                beta_offdiag = beta_offdiag.max(u.get(j, 0, 1).norm()).max(u.get(j, 1, 0).norm());
            }
        }
    }
    Ok(RegionCheck {
        labels,
        alpha_deviation,
        beta_offdiag,
    })
}
