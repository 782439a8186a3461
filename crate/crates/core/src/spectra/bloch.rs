use core::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64;

use super::config::ModelConfig;
use super::potential::PotentialSpec;
use crate::error::{Error, Result};

/// Plane-wave matrix `H_lm(k) = (k + 2 pi m - A)^2 delta_lm + V_{l-m}` with
/// `l, m` in `-l_max..=l_max`. Row/column `i` holds plane wave `i - l_max`.
#[derive(Debug, Clone)]
pub struct BlochMatrix {
    pub k: f64,
    pub l_max: usize,
    entries: Mat<Complex64>,
}

impl BlochMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Entry for plane-wave indices `l, m`.
    pub fn get(&self, l: i64, m: i64) -> Complex64 {
        let o = self.l_max as i64;
        self.entries[((l + o) as usize, (m + o) as usize)]
    }

    pub fn entries(&self) -> &Mat<Complex64> {
        &self.entries
    }

    /// `H(k) v` for a coefficient vector in plane-wave order.
    pub fn apply(&self, v: &[Complex64]) -> alloc::vec::Vec<Complex64> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.entries[(i, j)] * v[j]).sum())
            .collect()
    }
}

pub fn build_bloch_matrix(k: f64, pot: &PotentialSpec, cfg: &ModelConfig) -> Result<BlochMatrix> {
    let l_max = cfg.l_max;
    for (l, _) in pot.components() {
        if l.unsigned_abs() as usize > 2 * l_max {
            return Err(Error::FourierOutOfRange { l, l_max });
        }
    }
    let n = cfg.dim();
    let o = l_max as i64;
    let a = pot.vector_a;
    let entries = Mat::from_fn(n, n, |i, j| {
        let l = i as i64 - o;
        let m = j as i64 - o;
        let mut h = pot.fourier(l - m);
        if i == j {
            let p = Complex64::new(k + 2.0 * PI * m as f64, 0.0) - a;
            h += p * p;
        }
        h
    });
    Ok(BlochMatrix { k, l_max, entries })
}
