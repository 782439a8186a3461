use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::hoppings_from_bands;
use crate::error::Result;
use crate::spectra::{dispersion, ModelConfig, PotentialSpec};
use crate::wannier::{identity_gauge, projection_unitary, TrialSet};

/// Which hopping ratio a scan records.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayRatio {
    /// `|t11^2 / t11^1|` from the projection gauge.
    NextNearest,
    /// `|t12^0 / t11^0|` from the projection gauge.
    InterToOnsite,
    /// `|t_nn^2 / t_nn^1|` for bands 1 and 2, each built from its own band.
    PerBand,
}

impl DecayRatio {
    pub fn columns(self) -> &'static [&'static str] {
        match self {
            DecayRatio::NextNearest => &["t11_2_over_t11_1"],
            DecayRatio::InterToOnsite => &["t12_0_over_t11_0"],
            DecayRatio::PerBand => &["t11_2_over_t11_1", "t22_2_over_t22_1"],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayRow {
    pub c: Complex64,
    pub values: Vec<f64>,
}

/// Hopping ratios of `V = c sin(2πx)` for each `c`. `trials` are only used by
/// the projection-gauge ratios.
pub fn hopping_decay_scan(
    c_values: &[Complex64],
    which: DecayRatio,
    cfg: &ModelConfig,
    trials: &TrialSet,
    n_x: usize,
) -> Result<Vec<DecayRow>> {
    let mut cfg = *cfg;
    cfg.n_bands = cfg.n_bands.max(2);
    c_values
        .iter()
        .map(|&c| {
            let bands = dispersion(&PotentialSpec::c_sin(c), &cfg)?.leading(2);
            let u = match which {
                DecayRatio::PerBand => identity_gauge(&bands.k, 2),
                _ => projection_unitary(&bands, trials, n_x)?,
            };
            let t = hoppings_from_bands(&bands, &u, 2)?;
            let values = match which {
                DecayRatio::NextNearest => vec![t.get(0, 0, 2).norm() / t.get(0, 0, 1).norm()],
                DecayRatio::InterToOnsite => vec![t.get(0, 1, 0).norm() / t.get(0, 0, 0).norm()],
                DecayRatio::PerBand => (0..2)
                    .map(|n| t.get(n, n, 2).norm() / t.get(n, n, 1).norm())
                    .collect(),
            };
            Ok(DecayRow { c, values })
        })
        .collect()
}
