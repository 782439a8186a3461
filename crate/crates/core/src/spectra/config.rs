use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};

/// Numerical thresholds shared by the spectral routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Self-overlap below which a left/right pair is treated as defective.
    pub defect: f64,
    /// Overlap scores closer than this are a tracking tie.
    pub tracking_tie: f64,
    /// Relative tolerance for "these two numbers coincide" in band ordering.
    pub degeneracy: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            defect: 1e-6,
            tracking_tie: 1e-6,
            degeneracy: 1e-8,
        }
    }
}

/// Truncation and grid sizes. Lengths are in units of the lattice constant and
/// energies in units of `1/(2 M a^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelConfig {
    /// Plane waves run over `-l_max..=l_max`.
    pub l_max: usize,
    /// Number of k points, which is also the number of cells in the supercell.
    pub n_k: usize,
    pub n_bands: usize,
    pub tol: Tolerances,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            l_max: 40,
            n_k: 200,
            n_bands: 3,
            tol: Tolerances::default(),
        }
    }
}

impl ModelConfig {
    pub fn new(l_max: usize, n_k: usize, n_bands: usize) -> Result<Self> {
        let cfg = Self {
            l_max,
            n_k,
            n_bands,
            tol: Tolerances::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.l_max < 1 {
            return Err(Error::InvalidConfig {
                field: "l_max",
                reason: format!("must be at least 1, got {}", self.l_max),
            });
        }
        if self.n_k < 3 {
            return Err(Error::InvalidConfig {
                field: "n_k",
                reason: format!("must be at least 3, got {}", self.n_k),
            });
        }
        if self.n_bands < 1 || self.n_bands > self.dim() {
            return Err(Error::InvalidConfig {
                field: "n_bands",
                reason: format!("must lie in 1..={}, got {}", self.dim(), self.n_bands),
            });
        }
        let t = &self.tol;
        for (field, v) in [
            ("defect_tol", t.defect),
            ("tracking_tie", t.tracking_tie),
            ("degeneracy_tol", t.degeneracy),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig {
                    field,
                    reason: format!("must be positive, got {v}"),
                });
            }
        }
        Ok(())
    }

    /// Dimension of the plane-wave basis.
    pub fn dim(&self) -> usize {
        2 * self.l_max + 1
    }

    pub fn k_grid(&self) -> KGrid {
        KGrid::new(self.n_k)
    }
}

/// Uniform grid `k_j = pi (2j - n) / n`, `j = 1..=n`, on `(-pi, pi]`.
///
/// The last point is exactly `pi`, and for even `n` the grid contains `0`
/// and is symmetric under `k -> -k` apart from the unpaired `pi`.
#[derive(Debug, Clone, PartialEq)]
pub struct KGrid {
    points: Vec<f64>,
}

impl KGrid {
    pub fn new(n: usize) -> Self {
        let nf = n as f64;
        let points = (1..=n)
            .map(|j| PI * (2 * j as i64 - n as i64) as f64 / nf)
            .collect();
        Self { points }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.points.len() as f64
    }

    /// Index of the grid point `-k_j` (mod `2 pi`).
    pub fn mirror(&self, j: usize) -> usize {
        let n = self.points.len();
        // k_j <-> integer 2(j+1) - n; negation maps it to n - 2(j+1), i.e. j' = n - 2 - j mod n.
        (2 * n - 2 - j) % n
    }

    /// Index of the grid point equal to `k`, if any.
    pub fn index_of(&self, k: f64) -> Option<usize> {
        let h = self.spacing();
        self.points.iter().position(|&p| (p - k).abs() < 1e-9 * h)
    }
}

/// Reduce `k` to `(-pi, pi]`.
pub fn fold(k: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut r = k - two_pi * (k / two_pi).round();
    if r <= -PI {
        r += two_pi;
    }
    if r > PI {
        r -= two_pi;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_contains_pi_and_zero() {
        let g = KGrid::new(200);
        assert_eq!(*g.points().last().unwrap(), PI);
        assert!(g.index_of(0.0).is_some());
        assert_eq!(g.points()[g.index_of(0.0).unwrap()], 0.0);
        assert!(g.points()[0] > -PI);
    }

    #[test]
    fn grid_mirror_is_exact() {
        for n in [6, 7, 200] {
            let g = KGrid::new(n);
            for j in 0..n {
                let m = g.mirror(j);
                let want = fold(-g.points()[j]);
                assert_eq!(g.points()[m], want, "n = {n}, j = {j}");
            }
        }
    }

    #[test]
    fn odd_grid_has_pi_but_not_zero() {
        let g = KGrid::new(201);
        assert!(g.index_of(PI).is_some());
        assert!(g.index_of(0.0).is_none());
    }

    #[test]
    fn fold_maps_into_half_open_zone() {
        assert_eq!(fold(PI), PI);
        assert_eq!(fold(-PI), PI);
        assert!((fold(3.0 * PI + 0.25) - (-PI + 0.25)).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(matches!(
            ModelConfig::new(0, 200, 1),
            Err(Error::InvalidConfig { field: "l_max", .. })
        ));
        assert!(matches!(
            ModelConfig::new(2, 2, 1),
            Err(Error::InvalidConfig { field: "n_k", .. })
        ));
        assert!(matches!(
            ModelConfig::new(1, 10, 4),
            Err(Error::InvalidConfig { field: "n_bands", .. })
        ));
    }
}
