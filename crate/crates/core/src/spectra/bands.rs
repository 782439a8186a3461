use alloc::vec::Vec;

use num_complex::Complex64;

use super::bloch::build_bloch_matrix;
use super::config::{KGrid, ModelConfig};
use super::potential::PotentialSpec;
use super::solve::{solve_k, KEigensystem};
use super::track::{order_and_track, OrderingLog};
use crate::error::{Error, Result};
use crate::linalg;

/// Tracked, ordered bands on the k-grid. Band indices are zero-based; outer
/// vectors run over bands and inner vectors over grid points.
#[derive(Debug, Clone)]
pub struct BandSet {
    pub potential: PotentialSpec,
    pub config: ModelConfig,
    pub k: Vec<f64>,
    pub energies: Vec<Vec<Complex64>>,
    /// Plane-wave coefficients `u_l^n(k)`, unit norm.
    pub right: Vec<Vec<Vec<Complex64>>>,
    /// Plane-wave coefficients of the left partner, dual to `right`.
    pub left: Vec<Vec<Vec<Complex64>>>,
    pub self_overlap: Vec<Vec<f64>>,
    pub defective: Vec<Vec<bool>>,
    /// Every eigenvalue of the truncated matrix at each k.
    pub spectrum: Vec<Vec<Complex64>>,
    pub ordering_log: OrderingLog,
}

impl BandSet {
    pub fn n_bands(&self) -> usize {
        self.energies.len()
    }

    pub fn n_k(&self) -> usize {
        self.k.len()
    }

    pub fn grid(&self) -> KGrid {
        KGrid::new(self.n_k())
    }

    pub fn k_index(&self, k: f64) -> Result<usize> {
        self.grid().index_of(k).ok_or(Error::MissingGridPoint { k })
    }

    pub fn energy(&self, band: usize, j: usize) -> Complex64 {
        self.energies[band][j]
    }

    /// Copy keeping only the lowest `n` bands.
    pub fn leading(&self, n: usize) -> BandSet {
        let n = n.min(self.n_bands());
        let mut out = self.clone();
        out.energies.truncate(n);
        out.right.truncate(n);
        out.left.truncate(n);
        out.self_overlap.truncate(n);
        out.defective.truncate(n);
        out.config.n_bands = n;
        out
    }

    /// `max |ũ_{n'}^dagger u_n - delta_{nn'}|` over retained bands and all k,
    /// skipping states flagged as defective.
    pub fn biorthonormality_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.n_k() {
            for a in 0..self.n_bands() {
                if self.defective[a][j] {
                    continue;
                }
                for b in 0..self.n_bands() {
                    if self.defective[b][j] {
                        continue;
                    }
                    let want = if a == b { 1.0 } else { 0.0 };
                    let got = linalg::dot(&self.left[a][j], &self.right[b][j]);
                    worst = worst.max((got - want).norm());
                }
            }
        }
        worst
    }

    /// Relative residual `|H^dagger ũ - ε^* ũ| / (|ũ| max(1, |ε|))`, which
    /// checks that the left partner carries the conjugate eigenvalue.
    pub fn left_pairing_residual(&self) -> Result<f64> {
        let mut worst = 0.0f64;
        for j in 0..self.n_k() {
            let h = build_bloch_matrix(self.k[j], &self.potential, &self.config)?;
            let m = h.entries();
            let n = m.nrows();
            for b in 0..self.n_bands() {
                let e = self.energies[b][j].conj();
                let v = &self.left[b][j];
                let mut r = 0.0;
                for i in 0..n {
                    let mut acc = -e * v[i];
                    for (p, vp) in v.iter().enumerate() {
                        acc += m[(p, i)].conj() * vp;
                    }
                    r += acc.norm_sqr();
                }
                let scale = linalg::norm(v) * self.energies[b][j].norm().max(1.0);
                worst = worst.max(r.sqrt() / scale);
            }
        }
        Ok(worst)
    }

    /// Largest `|ε_n(k_{j+1}) - ε_n(k_j)| / Δk` over retained bands.
    pub fn max_slope(&self) -> f64 {
        let dk = self.grid().spacing();
        let mut worst = 0.0f64;
        for band in &self.energies {
            for w in band.windows(2) {
                worst = worst.max((w[1] - w[0]).norm() / dk);
            }
        }
        worst
    }
}

/// Solve on the whole grid and track bands. Per-k solves are independent and
/// run in parallel with the `parallel` feature; the result does not depend on
/// the evaluation order.
pub fn dispersion(pot: &PotentialSpec, cfg: &ModelConfig) -> Result<BandSet> {
    cfg.validate()?;
    let grid = cfg.k_grid();
    let systems = solve_all(grid.points(), pot, cfg)?;
    order_and_track(systems, pot, cfg)
}

#[cfg(feature = "parallel")]
fn solve_all(ks: &[f64], pot: &PotentialSpec, cfg: &ModelConfig) -> Result<Vec<KEigensystem>> {
    use rayon::prelude::*;
    ks.par_iter().map(|&k| solve_k(k, pot, cfg)).collect()
}

#[cfg(not(feature = "parallel"))]
fn solve_all(ks: &[f64], pot: &PotentialSpec, cfg: &ModelConfig) -> Result<Vec<KEigensystem>> {
    ks.iter().map(|&k| solve_k(k, pot, cfg)).collect()
}
