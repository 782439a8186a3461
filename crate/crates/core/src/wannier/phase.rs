use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectra::BandSet;

/// Record of the Bloch phase rotations applied by [`fix_phases`].
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseConvention {
    pub rule: &'static str,
    /// `theta[n][j]`: the state at band `n`, grid point `j` was multiplied by
    /// `e^{-i theta}`.
    pub theta: Vec<Vec<f64>>,
}

pub const PHASE_RULE: &str = "u_0 real non-negative";

/// Rotate every retained right vector so that its `l = 0` coefficient is real
/// and non-negative. The left partner gets the same factor, which keeps
/// `ũ^dagger u` unchanged. The left `l = 0` coefficient is whatever duality
/// then dictates.
pub fn fix_phases(bands: &BandSet) -> Result<(BandSet, PhaseConvention)> {
    let mut out = bands.clone();
    let l0 = bands.config.l_max;
    let mut theta = Vec::with_capacity(bands.n_bands());
    for n in 0..bands.n_bands() {
        let mut row = Vec::with_capacity(bands.n_k());
        for j in 0..bands.n_k() {
            let pivot = bands.right[n][j][l0];
            if pivot.norm() < 1e-12 {
                return Err(Error::ZeroPivot { band: n, k: bands.k[j] });
            }
            let t = pivot.arg();
            let f = Complex64::from_polar(1.0, -t);
            for z in &mut out.right[n][j] {
                *z *= f;
            }
            for z in &mut out.left[n][j] {
                *z *= f;
            }
            // Remove the rounding residue so the pivot is exactly real.
            let p = &mut out.right[n][j][l0];
            *p = Complex64::new(p.norm(), 0.0);
            row.push(t);
        }
        theta.push(row);
    }
    Ok((out, PhaseConvention { rule: PHASE_RULE, theta }))
}

/// Multiply state `(n, j)` by `e^{i phi}` on both sides. Used to check that
/// derived quantities do not depend on Bloch phases.
pub fn rotate_phases(bands: &BandSet, phi: impl Fn(usize, usize) -> f64) -> BandSet {
    let mut out = bands.clone();
    for n in 0..bands.n_bands() {
        for j in 0..bands.n_k() {
            let f = Complex64::from_polar(1.0, phi(n, j));
            for z in &mut out.right[n][j] {
                *z *= f;
            }
            for z in &mut out.left[n][j] {
                *z *= f;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{dispersion, ModelConfig, PotentialSpec};

    #[test]
    fn free_band_unchanged() {
        let cfg = ModelConfig::new(6, 20, 1).unwrap();
        let b = dispersion(&PotentialSpec::free(), &cfg).unwrap();
        let (f, conv) = fix_phases(&b).unwrap();
        for j in 0..b.n_k() {
            for (x, y) in f.right[0][j].iter().zip(&b.right[0][j]) {
                assert!((x.norm() - y.norm()).abs() < 1e-15);
            }
            assert!(f.right[0][j][6].re > 0.0);
        }
        assert_eq!(conv.rule, PHASE_RULE);
    }

    #[test]
    fn rotated_state_obeys_convention_and_stays_dual() {
        let cfg = ModelConfig::new(20, 20, 2).unwrap();
        let b = dispersion(&PotentialSpec::c_sin(Complex64::new(0.0, 200.0)), &cfg).unwrap();
        let b = rotate_phases(&b, |n, j| 0.3 * (n + 1) as f64 + 0.1 * j as f64);
        let before = b.biorthonormality_residual();
        let (f, _) = fix_phases(&b).unwrap();
        for n in 0..2 {
            for j in 0..f.n_k() {
                let p = f.right[n][j][20];
                assert_eq!(p.im, 0.0);
                assert!(p.re >= 0.0);
            }
        }
        assert!((f.biorthonormality_residual() - before).abs() < 1e-12);
    }

    #[test]
    fn zero_pivot_is_reported() {
        let cfg = ModelConfig::new(3, 10, 2).unwrap();
        // Free band 2 near k = 0.3 is the m = -1 plane wave; its l = 0 entry is zero.
        let b = dispersion(&PotentialSpec::free(), &cfg).unwrap();
        assert!(matches!(fix_phases(&b), Err(Error::ZeroPivot { band: 1, .. })));
    }
}
