use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64;

use super::HoppingTable;
use crate::error::{Error, Result};
use crate::linalg;
use crate::spectra::BandSet;

/// Lattice model keeping hoppings up to a given distance between Wannier
/// centres.
#[derive(Debug, Clone, PartialEq)]
pub struct TbModel {
    pub table: HoppingTable,
    /// Centre of `w_n^0` in units of the lattice constant.
    pub centers: Vec<f64>,
}

impl TbModel {
    /// Two-band models take centres `-1/4, +1/4`, the geometry of the sine
    /// potential; otherwise all centres sit at the origin. `range = 1` keeps
    /// the nearest-neighbour chain plus the two inter-band rungs at distance
    /// `1/2`.
    pub fn new(table: &HoppingTable, range: usize) -> Self {
        let centers = if table.n == 2 { vec![-0.25, 0.25] } else { vec![0.0; table.n] };
        Self::with_centers(table, range, &centers)
    }

    /// Keep `t_{nn'}^m` when `|m + c_n - c_{n'}| <= range`.
    pub fn with_centers(table: &HoppingTable, range: usize, centers: &[f64]) -> Self {
        let mut kept = table.truncated(range + 1);
        let limit = range as f64 + 1e-9;
        for (a, b, m, _) in table.truncated(range + 1).iter() {
            if (m as f64 + centers[a] - centers[b]).abs() > limit {
                kept.set(a, b, m, Complex64::new(0.0, 0.0));
            }
        }
        Self {
            table: kept,
            centers: centers.to_vec(),
        }
    }

    pub fn n_bands(&self) -> usize {
        self.table.n
    }

    /// `H_t(k) = sum_m t^m e^{-ikm}`, row-major.
    pub fn h_t(&self, k: f64) -> Vec<Complex64> {
        let n = self.table.n;
        let mut h = vec![Complex64::new(0.0, 0.0); n * n];
        for (a, b, m, t) in self.table.iter() {
            h[a * n + b] += t * Complex64::from_polar(1.0, -k * m as f64);
        }
        h
    }

    /// Discriminant `((h11 - h22)/2)^2 + h12 h21` of a two-band model. For the
    /// PT form this is real and its sign separates real bands from
    /// conjugate pairs.
    pub fn radicand(&self, k: f64) -> Result<Complex64> {
        if self.table.n != 2 {
            return Err(Error::Domain("radicand needs a two-band model"));
        }
        let h = self.h_t(k);
        let half = (h[0] - h[3]) / 2.0;
        Ok(half * half + h[1] * h[2])
    }

    /// Eigenvalues of `H_t(k)` per grid point, `[band][k]`. Two-band models use
    /// `mean -/+ sqrt(radicand)` with the principal root (`+i` side on the
    /// cut), so band 1 is the lower one when real and the one with negative
    /// imaginary part when the pair is complex. Larger models are diagonalized and sorted by
    /// `(Re, Im)`.
    pub fn dispersion(&self, ks: &[f64]) -> Result<Vec<Vec<Complex64>>> {
        let n = self.table.n;
        let mut out = vec![Vec::with_capacity(ks.len()); n];
        for &k in ks {
            let h = self.h_t(k);
            let vals = match n {
                1 => vec![h[0]],
                2 => {
                    let mean = (h[0] + h[3]) / 2.0;
                    let mut root = self.radicand(k)?.sqrt();
                    // Rounding can put a negative real radicand just below the
                    // branch cut; keep the +i side so band 1 stays below.
                    if root.re.abs() <= 1e-12 * root.norm() && root.im < 0.0 {
                        root = -root;
                    }
                    vec![mean - root, mean + root]
                }
                _ => {
                    let m = Mat::from_fn(n, n, |a, b| h[a * n + b]);
                    let mut v = linalg::eigenvalues(&m).ok_or(Error::Eigensolver { k })?;
                    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
                    v
                }
            };
            for (band, e) in out.iter_mut().zip(vals) {
                band.push(e);
            }
        }
        Ok(out)
    }
}

/// Zeros of the two-band radicand in `(-π, π]`, located by sign changes of
/// its real part on `samples` points and refined by bisection. Only
/// meaningful when the radicand is real (PT models).
pub fn tb_ep_positions(model: &TbModel, samples: usize) -> Result<Vec<f64>> {
    if samples < 2 {
        return Err(Error::InvalidConfig {
            field: "samples",
            reason: "need at least two samples".into(),
        });
    }
    let f = |k: f64| model.radicand(k).map(|q| q.re);
    let h = 2.0 * PI / samples as f64;
    let mut roots = Vec::new();
    let mut k0 = -PI + h;
    let mut f0 = f(k0)?;
    for i in 1..=samples {
        let k1 = -PI + h * (i + 1) as f64;
        let f1 = f(k1)?;
        if f0 == 0.0 {
            roots.push(crate::spectra::fold(k0));
        } else if f0 * f1 < 0.0 {
            let (mut lo, mut hi, mut flo) = (k0, k1, f0);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let fm = f(mid)?;
                if fm * flo <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
            }
            roots.push(crate::spectra::fold(0.5 * (lo + hi)));
        }
        k0 = k1;
        f0 = f1;
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    Ok(roots)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandDeviation {
    pub max: f64,
    pub rms: f64,
    /// `max / bandwidth`.
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    /// Largest `(Re width + Im width)` among the compared continuum bands.
    pub bandwidth: f64,
    pub per_band: Vec<BandDeviation>,
    /// `[band][k]` lattice energies after matching to the continuum.
    pub tb: Vec<Vec<Complex64>>,
}

impl Comparison {
    pub fn max_normalized(&self) -> f64 {
        self.per_band.iter().map(|d| d.normalized).fold(0.0, f64::max)
    }
}

/// Compare the first `model.n_bands()` continuum bands with the lattice model
/// on the continuum grid. At each k the lattice eigenvalues are matched to
/// continuum bands by the assignment of least total distance, so band labels
/// never depend on either ordering rule.
pub fn compare(continuum: &BandSet, model: &TbModel) -> Result<Comparison> {
    let n = model.n_bands();
    if n > continuum.n_bands() {
        return Err(Error::IncompleteBands {
            k_index: 0,
            found: continuum.n_bands(),
            needed: n,
        });
    }
    let raw = model.dispersion(&continuum.k)?;
    let mut tb = vec![Vec::with_capacity(continuum.n_k()); n];
    for j in 0..continuum.n_k() {
        let cont: Vec<Complex64> = (0..n).map(|b| continuum.energy(b, j)).collect();
        let cand: Vec<Complex64> = (0..n).map(|b| raw[b][j]).collect();
        for (b, e) in match_energies(&cont, &cand).into_iter().enumerate() {
            tb[b].push(e);
        }
    }
    let mut bandwidth = 0.0f64;
    for b in 0..n {
        let e = &continuum.energies[b];
        let (mut rlo, mut rhi, mut ilo, mut ihi) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for z in e {
            rlo = rlo.min(z.re);
            rhi = rhi.max(z.re);
            ilo = ilo.min(z.im);
            ihi = ihi.max(z.im);
        }
        bandwidth = bandwidth.max((rhi - rlo) + (ihi - ilo));
    }
    let per_band = (0..n)
        .map(|b| {
            let d: Vec<f64> = (0..continuum.n_k())
                .map(|j| (continuum.energy(b, j) - tb[b][j]).norm())
                .collect();
            let max = d.iter().copied().fold(0.0, f64::max);
            let rms = (d.iter().map(|x| x * x).sum::<f64>() / d.len() as f64).sqrt();
            BandDeviation {
                max,
                rms,
                normalized: max / bandwidth,
            }
        })
        .collect();
    Ok(Comparison { bandwidth, per_band, tb })
}

/// Permutation of `cand` minimizing `sum |target_i - cand_p(i)|`: exhaustive
/// for up to three bands, greedy beyond.
fn match_energies(target: &[Complex64], cand: &[Complex64]) -> Vec<Complex64> {
    let n = target.len();
    if n <= 3 {
        let mut best = (f64::INFINITY, Vec::new());
        permutations(n, &mut Vec::new(), &mut |p| {
            let cost: f64 = p.iter().enumerate().map(|(i, &c)| (target[i] - cand[c]).norm()).sum();
            if cost < best.0 {
                best = (cost, p.iter().map(|&c| cand[c]).collect());
            }
        });
        return best.1;
    }
    let mut used = vec![false; n];
    target
        .iter()
        .map(|t| {
            let c = (0..n)
                .filter(|&c| !used[c])
                .min_by(|&a, &b| (t - cand[a]).norm().total_cmp(&(t - cand[b]).norm()))
                .unwrap_or(0);
            used[c] = true;
            cand[c]
        })
        .collect()
}

fn permutations(n: usize, prefix: &mut Vec<usize>, visit: &mut impl FnMut(&[usize])) {
    if prefix.len() == n {
        visit(prefix);
        return;
    }
    for c in 0..n {
        if !prefix.contains(&c) {
            prefix.push(c);
            permutations(n, prefix, visit);
            prefix.pop();
        }
    }
}
