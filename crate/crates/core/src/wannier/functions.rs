use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use super::gauge::{GaugeMethod, UnitaryMixing};
use crate::error::{Error, Result};
use crate::spectra::BandSet;

/// Real-space sampling of the `N`-cell supercell, `n_x` points per cell.
///
/// Sample `i` sits at `x = q / n_x` with `q = i - (N/2) n_x - n_x/2`, so cell
/// 0 covers `[-1/2, 1/2)` and every reflection or translation used here is an
/// integer map on `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RealGrid {
    pub n_x: usize,
    pub n_cells: usize,
}

impl RealGrid {
    pub fn new(n_x: usize, n_cells: usize) -> Result<Self> {
        if n_x < 2 || n_x % 2 != 0 {
            return Err(Error::InvalidConfig {
                field: "n_x",
                reason: format!("must be even and at least 2, got {n_x}"),
            });
        }
        Ok(Self { n_x, n_cells })
    }

    pub fn len(&self) -> usize {
        self.n_x * self.n_cells
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Index of the first cell, so that cell indices run over
    /// `-first_cell..n_cells - first_cell`.
    pub fn first_cell(&self) -> i64 {
        (self.n_cells / 2) as i64
    }

    pub fn q(&self, i: usize) -> i64 {
        i as i64 - self.first_cell() * self.n_x as i64 - (self.n_x / 2) as i64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.q(i) as f64 / self.n_x as f64
    }

    /// Cell index and in-cell sample of sample `i`.
    pub fn cell_of(&self, i: usize) -> (i64, usize) {
        ((i / self.n_x) as i64 - self.first_cell(), i % self.n_x)
    }

    /// Sample index of `q`, folded into the supercell, with the number of
    /// supercell lengths that were added.
    pub fn wrap(&self, q: i64) -> (usize, i64) {
        let len = self.len() as i64;
        let raw = q + self.first_cell() * self.n_x as i64 + (self.n_x / 2) as i64;
        (raw.rem_euclid(len) as usize, raw.div_euclid(len))
    }

    /// In-cell coordinate of sample `s`, in `[-1/2, 1/2)`.
    pub fn local_x(&self, s: usize) -> f64 {
        (s as f64 - (self.n_x / 2) as f64) / self.n_x as f64
    }
}

/// Synthesized supercell functions `(1/N) sum_k e^{ikx} sum_l c_l(k) e^{i2πlx}`
/// for one coefficient vector per k.
pub(crate) struct Synth {
    grid: RealGrid,
    l_max: usize,
    /// `e^{i 2π l x_s}` for in-cell samples, row `s`, column `l + l_max`.
    plane: Vec<Complex64>,
}

impl Synth {
    pub fn new(grid: RealGrid, l_max: usize) -> Self {
        let dim = 2 * l_max + 1;
        let mut plane = Vec::with_capacity(grid.n_x * dim);
        for s in 0..grid.n_x {
            let x = grid.local_x(s);
            for l in 0..dim {
                let lv = l as f64 - l_max as f64;
                plane.push(Complex64::from_polar(1.0, 2.0 * PI * lv * x));
            }
        }
        Self { grid, l_max, plane }
    }

    /// `u(x_s) = sum_l c_l e^{i2πl x_s}` on the in-cell samples.
    pub fn periodic_part(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let dim = 2 * self.l_max + 1;
        (0..self.grid.n_x)
            .map(|s| {
                let row = &self.plane[s * dim..(s + 1) * dim];
                row.iter().zip(coeffs).map(|(e, c)| e * c).sum()
            })
            .collect()
    }

    pub fn function(&self, ks: &[f64], coeffs: &[Vec<Complex64>]) -> Vec<Complex64> {
        let g = self.grid;
        let n = ks.len() as f64;
        // F_k(s) = e^{ik x_s} u_k(x_s).
        let f: Vec<Vec<Complex64>> = ks
            .iter()
            .zip(coeffs)
            .map(|(&k, c)| {
                let u = self.periodic_part(c);
                u.into_iter()
                    .enumerate()
                    .map(|(s, v)| v * Complex64::from_polar(1.0, k * g.local_x(s)))
                    .collect()
            })
            .collect();
        let mut out = vec![Complex64::new(0.0, 0.0); g.len()];
        for cell in 0..g.n_cells {
            let j = cell as i64 - g.first_cell();
            let phases: Vec<Complex64> = ks
                .iter()
                .map(|&k| Complex64::from_polar(1.0 / n, k * j as f64))
                .collect();
            for s in 0..g.n_x {
                out[cell * g.n_x + s] = phases.iter().zip(&f).map(|(p, fk)| p * fk[s]).sum();
            }
        }
        out
    }
}

/// Bi-orthogonal Wannier pairs on the supercell. Only the home-cell functions
/// are stored; `w_n^m(x) = w_n^0(x - m)` is produced by an index shift.
#[derive(Debug, Clone, PartialEq)]
pub struct WannierSet {
    pub grid: RealGrid,
    pub method: GaugeMethod,
    /// `w[n][i]`, home cell.
    pub w: Vec<Vec<Complex64>>,
    /// `w̃[n][i]`, home cell.
    pub wt: Vec<Vec<Complex64>>,
    /// Cell offsets `m` covered by checks and hopping extraction.
    pub cells: (i64, i64),
}

impl WannierSet {
    pub fn n_w(&self) -> usize {
        self.w.len()
    }

    /// Sign picked up per supercell wrap: Bloch functions on this grid obey
    /// `psi(x + N) = (-1)^N psi(x)`.
    fn wrap_sign(&self, wraps: i64) -> f64 {
        if self.grid.n_cells % 2 == 1 && wraps.rem_euclid(2) == 1 {
            -1.0
        } else {
            1.0
        }
    }

    fn at(&self, f: &[Complex64], q: i64) -> Complex64 {
        let (i, wraps) = self.grid.wrap(q);
        f[i] * self.wrap_sign(wraps)
    }

    /// `w_n^m` at grid coordinate `q`.
    pub fn w_at(&self, n: usize, m: i64, q: i64) -> Complex64 {
        self.at(&self.w[n], q - m * self.grid.n_x as i64)
    }

    pub fn wt_at(&self, n: usize, m: i64, q: i64) -> Complex64 {
        self.at(&self.wt[n], q - m * self.grid.n_x as i64)
    }

    /// Full sample vector of `w_n^m`.
    pub fn shifted(&self, n: usize, m: i64) -> Vec<Complex64> {
        (0..self.grid.len()).map(|i| self.w_at(n, m, self.grid.q(i))).collect()
    }

    pub fn shifted_tilde(&self, n: usize, m: i64) -> Vec<Complex64> {
        (0..self.grid.len()).map(|i| self.wt_at(n, m, self.grid.q(i))).collect()
    }

    /// Grid inner product `(1/n_x) sum_i a_i^* b_i`.
    pub fn inner(&self, a: &[Complex64], b: &[Complex64]) -> Complex64 {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>() / self.grid.n_x as f64
    }

    /// `max |<w̃_{n'}^{m'} | w_n^m> - δ δ|` over all pairs with `m, m'` in the
    /// stored cell range. Translation covariance reduces this to `m = 0`.
    pub fn biorthogonality_residual(&self) -> f64 {
        let (lo, hi) = self.cells;
        let span = hi - lo;
        let mut worst = 0.0f64;
        for b in 0..self.n_w() {
            let right = self.shifted(b, 0);
            for a in 0..self.n_w() {
                for d in -span..=span {
                    let left = self.shifted_tilde(a, d);
                    let want = if a == b && d == 0 { 1.0 } else { 0.0 };
                    worst = worst.max((self.inner(&left, &right) - want).norm());
                }
            }
        }
        worst
    }

    /// `max_q |w_n^0(shift - q) - w_n^0(q)|` relative to `max |w_n^0|`, for
    /// `x -> shift/n_x - x` reflections.
    pub fn reflection_residual(&self, n: usize, shift: i64) -> f64 {
        let peak = self.w[n].iter().map(|z| z.norm()).fold(0.0, f64::max);
        let mut worst = 0.0f64;
        for i in 0..self.grid.len() {
            let q = self.grid.q(i);
            worst = worst.max((self.w_at(n, 0, shift - q) - self.w[n][i]).norm());
        }
        worst / peak
    }

    /// `max_q |w_b^0(q) - [w_a^0(-q)]^*|` relative to `max |w_b^0|`.
    pub fn conjugate_flip_residual(&self, a: usize, b: usize) -> f64 {
        let peak = self.w[b].iter().map(|z| z.norm()).fold(0.0, f64::max);
        let mut worst = 0.0f64;
        for i in 0..self.grid.len() {
            let q = self.grid.q(i);
            worst = worst.max((self.w[b][i] - self.w_at(a, 0, -q).conj()).norm());
        }
        worst / peak
    }

    /// Mean position and variance under the weight `|w_n^0(x)|^2`.
    pub fn center_and_spread(&self, n: usize) -> (f64, f64) {
        let mut m0 = 0.0;
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        for (i, z) in self.w[n].iter().enumerate() {
            let x = self.grid.x(i);
            let p = z.norm_sqr();
            m0 += p;
            m1 += p * x;
            m2 += p * x * x;
        }
        let mean = m1 / m0;
        (mean, m2 / m0 - mean * mean)
    }

    /// Fraction of `sum |w_n^0|^2` within `|x - center| < radius`.
    pub fn mass_within(&self, n: usize, center: f64, radius: f64) -> f64 {
        let mut inside = 0.0;
        let mut total = 0.0;
        for (i, z) in self.w[n].iter().enumerate() {
            let p = z.norm_sqr();
            total += p;
            if (self.grid.x(i) - center).abs() < radius {
                inside += p;
            }
        }
        inside / total
    }
}

/// Mixed coefficient vectors `sum_{n'} U_{n'n}(k) v^{n'}(k)` for one band `n`.
pub(crate) fn mixed_coeffs(
    vecs: &[Vec<Vec<Complex64>>],
    u: &UnitaryMixing,
    n: usize,
) -> Vec<Vec<Complex64>> {
    let n_k = u.k.len();
    (0..n_k)
        .map(|j| {
            let dim = vecs[0][j].len();
            let mut c = vec![Complex64::new(0.0, 0.0); dim];
            for np in 0..u.n {
                let f = u.get(j, np, n);
                for (o, v) in c.iter_mut().zip(&vecs[np][j]) {
                    *o += f * v;
                }
            }
            c
        })
        .collect()
}

/// Build `w_n^0` and `w̃_n^0` for `n < U.n` from (phase-fixed) bands.
/// Both families use the same `U`; each pair is then rescaled so that
/// `<w̃_n^0|w_n^0> = 1` with the correction split equally between them.
pub fn build_wannier(bands: &BandSet, u: &UnitaryMixing, n_x: usize, cells: (i64, i64)) -> Result<WannierSet> {
    if u.n > bands.n_bands() {
        return Err(Error::IncompleteBands {
            k_index: 0,
            found: bands.n_bands(),
            needed: u.n,
        });
    }
    let grid = RealGrid::new(n_x, bands.n_k())?;
    let synth = Synth::new(grid, bands.config.l_max);
    let mut w = Vec::with_capacity(u.n);
    let mut wt = Vec::with_capacity(u.n);
    for n in 0..u.n {
        w.push(synth.function(&bands.k, &mixed_coeffs(&bands.right, u, n)));
        wt.push(synth.function(&bands.k, &mixed_coeffs(&bands.left, u, n)));
    }
    let mut set = WannierSet {
        grid,
        method: u.method,
        w,
        wt,
        cells,
    };
    for n in 0..u.n {
        let z = set.inner(&set.wt[n], &set.w[n]);
        let s = z.sqrt().inv();
        for v in &mut set.w[n] {
            *v *= s;
        }
        for v in &mut set.wt[n] {
            *v *= s.conj();
        }
    }
    Ok(set)
}

/// Where a trial set came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialSource {
    pub c: Complex64,
    pub l_max: usize,
    pub n_k: usize,
    pub n_x: usize,
}

/// Localized trial functions `g_n` and partners `g̃_n` on a supercell grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSet {
    pub grid: RealGrid,
    pub g: Vec<Vec<Complex64>>,
    pub gt: Vec<Vec<Complex64>>,
    pub source: TrialSource,
}

impl TrialSet {
    pub fn from_wannier(set: &WannierSet, source: TrialSource) -> Self {
        Self {
            grid: set.grid,
            g: set.w.clone(),
            gt: set.wt.clone(),
            source,
        }
    }

    /// Copy onto `target` cell by cell; cells outside the source supercell
    /// are zero. Sample spacing must match.
    pub fn embed(&self, target: RealGrid) -> Result<TrialSet> {
        if target.n_x != self.grid.n_x {
            return Err(Error::InvalidConfig {
                field: "n_x",
                reason: format!(
                    "trial functions use {} samples per cell, run uses {}",
                    self.grid.n_x, target.n_x
                ),
            });
        }
        if target == self.grid {
            return Ok(self.clone());
        }
        let map = |f: &Vec<Complex64>| -> Vec<Complex64> {
            let mut out = vec![Complex64::new(0.0, 0.0); target.len()];
            for (i, o) in out.iter_mut().enumerate() {
                let (cell, s) = target.cell_of(i);
                let src = cell + self.grid.first_cell();
                if src >= 0 && (src as usize) < self.grid.n_cells {
                    *o = f[src as usize * self.grid.n_x + s];
                }
            }
            out
        };
        Ok(TrialSet {
            grid: target,
            g: self.g.iter().map(map).collect(),
            gt: self.gt.iter().map(map).collect(),
            source: self.source,
        })
    }
}
