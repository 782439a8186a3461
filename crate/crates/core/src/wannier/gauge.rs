use alloc::vec::Vec;

use faer::Mat;
use num_complex::Complex64;

use super::functions::{RealGrid, Synth, TrialSet};
use crate::ep::{detect_eps, EpConfig};
use crate::error::{Error, Result};
use crate::linalg;
use crate::spectra::BandSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaugeMethod {
    Diagonal,
    Projection,
}

impl GaugeMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            GaugeMethod::Diagonal => "diagonal",
            GaugeMethod::Projection => "projection",
        }
    }
}

/// `U(k)` on every grid point, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMixing {
    pub method: GaugeMethod,
    pub n: usize,
    pub k: Vec<f64>,
    pub u: Vec<Vec<Complex64>>,
    /// Smallest singular value of the projection matrix at each k (projection
    /// only).
    pub sigma_min: Vec<f64>,
}

impl UnitaryMixing {
    pub fn get(&self, j: usize, row: usize, col: usize) -> Complex64 {
        self.u[j][row * self.n + col]
    }

    /// `max_k |U^dagger U - 1|`.
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for j in 0..self.k.len() {
            for a in 0..n {
                for b in 0..n {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for r in 0..n {
                        acc += self.get(j, r, a).conj() * self.get(j, r, b);
                    }
                    let want = if a == b { 1.0 } else { 0.0 };
                    worst = worst.max((acc - want).norm());
                }
            }
        }
        worst
    }
}

/// `U(k) = diag(e^{ik/4}, e^{-ik/4})` for bands 1 and 2, which places the two
/// Wannier centres at `-1/4` and `+1/4`. Only valid when the pair has no
/// exceptional points.
pub fn diagonal_gauge(bands: &BandSet, ep: &EpConfig) -> Result<UnitaryMixing> {
    let eps = detect_eps(bands, (0, 1), ep)?;
    if !eps.is_empty() {
        return Err(Error::BandsNotSeparated {
            pair: (0, 1),
            count: eps.len(),
        });
    }
    Ok(diagonal_unchecked(&bands.k))
}

/// `U(k) = 1` on `n` bands: each Wannier function is built from its own band.
pub fn identity_gauge(k: &[f64], n: usize) -> UnitaryMixing {
    let u = k
        .iter()
        .map(|_| {
            (0..n * n)
                .map(|i| Complex64::new(if i % (n + 1) == 0 { 1.0 } else { 0.0 }, 0.0))
                .collect()
        })
        .collect();
    UnitaryMixing {
        method: GaugeMethod::Diagonal,
        n,
        k: k.to_vec(),
        u,
        sigma_min: Vec::new(),
    }
}

pub(crate) fn diagonal_unchecked(k: &[f64]) -> UnitaryMixing {
    let zero = Complex64::new(0.0, 0.0);
    let u = k
        .iter()
        .map(|&k| {
            let mut m = alloc::vec![zero; 4];
            m[0] = Complex64::from_polar(1.0, k / 4.0);
            m[3] = Complex64::from_polar(1.0, -k / 4.0);
            m
        })
        .collect();
    UnitaryMixing {
        method: GaugeMethod::Diagonal,
        n: 2,
        k: k.to_vec(),
        u,
        sigma_min: Vec::new(),
    }
}

/// `U(k) = D (D^dagger D)^{-1/2}` with `D_{nn'}(k) = <ψ̃_k^n | g_{n'}>`, taken
/// as `E G^dagger` from the SVD `D = E F G^dagger`. The resulting Wannier
/// functions do not depend on the Bloch phases.
pub fn projection_unitary(bands: &BandSet, trials: &TrialSet, n_x: usize) -> Result<UnitaryMixing> {
    let grid = RealGrid::new(n_x, bands.n_k())?;
    let trials = trials.embed(grid)?;
    let n = trials.g.len();
    if n > bands.n_bands() {
        return Err(Error::IncompleteBands {
            k_index: 0,
            found: bands.n_bands(),
            needed: n,
        });
    }
    let synth = Synth::new(grid, bands.config.l_max);
    let big_n = bands.n_k() as f64;
    let norm = 1.0 / (big_n.sqrt() * n_x as f64);
    let mut u = Vec::with_capacity(bands.n_k());
    let mut sigma_min = Vec::with_capacity(bands.n_k());
    for (j, &k) in bands.k.iter().enumerate() {
        // G_k(s) = sum_cells e^{-ik cell} g(cell, s).
        let gk: Vec<Vec<Complex64>> = trials
            .g
            .iter()
            .map(|g| {
                let mut acc = alloc::vec![Complex64::new(0.0, 0.0); n_x];
                for cell in 0..grid.n_cells {
                    let c = cell as i64 - grid.first_cell();
                    let ph = Complex64::from_polar(1.0, -k * c as f64);
                    for (s, a) in acc.iter_mut().enumerate() {
                        *a += ph * g[cell * n_x + s];
                    }
                }
                acc
            })
            .collect();
        let d = Mat::from_fn(n, n, |row, col| {
            let ut = synth.periodic_part(&bands.left[row][j]);
            let mut acc = Complex64::new(0.0, 0.0);
            for s in 0..n_x {
                let ph = Complex64::from_polar(1.0, -k * grid.local_x(s));
                acc += ph * ut[s].conj() * gk[col][s];
            }
            acc * norm
        });
        let (unit, smin) = linalg::polar_unitary(&d).ok_or(Error::SingularProjection { k, sigma: 0.0 })?;
        if !(smin >= 1e-10) {
            return Err(Error::SingularProjection { k, sigma: smin });
        }
        u.push((0..n * n).map(|i| unit[(i / n, i % n)]).collect());
        sigma_min.push(smin);
    }
    Ok(UnitaryMixing {
        method: GaugeMethod::Projection,
        n,
        k: bands.k.clone(),
        u,
        sigma_min,
    })
}
