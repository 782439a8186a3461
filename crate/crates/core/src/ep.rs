//! Exceptional points on the k axis, the |c| at which they annihilate,
//! conjugation symmetry of the spectrum and point-gap winding numbers.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectra::{coincide, dispersion, eigenvalues_k, fold, solve_k, BandSet, ModelConfig, PotentialSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpConfig {
    /// Largest refined eigenvalue gap accepted as a coalescence.
    pub energy_tol: f64,
    /// Largest bi-orthogonal self-overlap accepted as defective.
    pub defect_tol: f64,
    /// Golden-section iterations per candidate bracket.
    pub golden_depth: usize,
}

impl Default for EpConfig {
    fn default() -> Self {
        Self {
            energy_tol: 1e-5,
            defect_tol: 1e-6,
            golden_depth: 80,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExceptionalPoint {
    pub k: f64,
    pub bands: (usize, usize),
    /// Eigenvalue gap at the refined point.
    pub gap: f64,
    pub self_overlap: f64,
    pub energy: Complex64,
}

/// Refined gap minimum inside one bracket, whether or not it qualifies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Refinement {
    pub k: f64,
    pub gap: f64,
    pub self_overlap: f64,
    pub energy: Complex64,
}

/// The two eigenvalues closest to `target`, with their distance.
fn nearest_pair(values: &[Complex64], target: Complex64) -> Option<(usize, usize)> {
    if values.len() < 2 {
        return None;
    }
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| (values[a] - target).norm().total_cmp(&(values[b] - target).norm()));
    Some((idx[0], idx[1]))
}

fn gap_at(k: f64, target: Complex64, pot: &PotentialSpec, cfg: &ModelConfig) -> Result<f64> {
    let v = eigenvalues_k(fold(k), pot, cfg)?;
    let (a, b) = nearest_pair(&v, target).ok_or(Error::Eigensolver { k })?;
    Ok((v[a] - v[b]).norm())
}

/// Minimize the gap between the two eigenvalues nearest the (linearly
/// interpolated) pair midpoint over `[lo, hi]` by golden section, then
/// measure the self-overlap there.
pub fn refine_bracket(
    pot: &PotentialSpec,
    cfg: &ModelConfig,
    lo: f64,
    hi: f64,
    mid_lo: Complex64,
    mid_hi: Complex64,
    depth: usize,
) -> Result<Refinement> {
    let target = |k: f64| {
        let t = if hi > lo { (k - lo) / (hi - lo) } else { 0.0 };
        mid_lo * (1.0 - t) + mid_hi * t
    };
    let r = (5.0f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let mut f1 = gap_at(x1, target(x1), pot, cfg)?;
    let mut f2 = gap_at(x2, target(x2), pot, cfg)?;
    let (mut best_k, mut best_f) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    for _ in 0..depth {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            if x1 == x2 {
                break;
            }
            f1 = gap_at(x1, target(x1), pot, cfg)?;
            if f1 < best_f {
                best_f = f1;
                best_k = x1;
            }
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            if x1 == x2 {
                break;
            }
            f2 = gap_at(x2, target(x2), pot, cfg)?;
            if f2 < best_f {
                best_f = f2;
                best_k = x2;
            }
        }
    }
    let k = fold(best_k);
    let sys = solve_k(k, pot, cfg)?;
    let values: Vec<Complex64> = sys.energies().collect();
    let (ia, ib) = nearest_pair(&values, target(best_k)).ok_or(Error::Eigensolver { k })?;
    let sa = &sys.states[ia];
    let sb = &sys.states[ib];
    Ok(Refinement {
        k,
        gap: (sa.energy - sb.energy).norm(),
        self_overlap: sa.self_overlap.min(sb.self_overlap),
        energy: (sa.energy + sb.energy) / 2.0,
    })
}

/// Candidate brackets for band pair `(n, m)`: sign changes of
/// `Re[(ε_n - ε_m)^2]` between neighbouring grid points and grid-local minima
/// of `|ε_n - ε_m|`. The grid is treated as periodic.
fn candidate_brackets(bands: &BandSet, pair: (usize, usize)) -> Vec<(usize, usize)> {
    let n = bands.n_k();
    let d: Vec<Complex64> = (0..n)
        .map(|j| bands.energy(pair.0, j) - bands.energy(pair.1, j))
        .collect();
    let mut out = Vec::new();
    for j in 0..n {
        let jn = (j + 1) % n;
        if (d[j] * d[j]).re * (d[jn] * d[jn]).re < 0.0 {
            out.push((j, jn));
        }
    }
    for j in 0..n {
        let jp = (j + n - 1) % n;
        let jn = (j + 1) % n;
        let m = d[j].norm();
        if m <= d[jp].norm() && m < d[jn].norm() {
            out.push((jp, jn));
        }
    }
    out
}

/// Exceptional points between bands `pair.0` and `pair.1`: refined points
/// where the eigenvalue gap is below `energy_tol` and the self-overlap is
/// below `defect_tol`. Diabolic touchings keep a finite self-overlap and are
/// rejected.
pub fn detect_eps(bands: &BandSet, pair: (usize, usize), ep: &EpConfig) -> Result<Vec<ExceptionalPoint>> {
    let n = bands.n_k();
    let dk = bands.grid().spacing();
    let mut found: Vec<ExceptionalPoint> = Vec::new();
    for (j0, j1) in candidate_brackets(bands, pair) {
        let lo = bands.k[j0];
        // Unwrap across the zone boundary so that hi > lo.
        let steps = (j1 + n - j0) % n;
        let hi = lo + steps as f64 * dk;
        let mid = |j: usize| (bands.energy(pair.0, j) + bands.energy(pair.1, j)) / 2.0;
        let r = refine_bracket(&bands.potential, &bands.config, lo, hi, mid(j0), mid(j1), ep.golden_depth)?;
        if r.gap >= ep.energy_tol || r.self_overlap >= ep.defect_tol {
            continue;
        }
        let dup = found.iter().any(|e| {
            let d = (e.k - r.k).abs();
            d.min(2.0 * PI - d) < 0.5 * dk
        });
        if !dup {
            found.push(ExceptionalPoint {
                k: r.k,
                bands: pair,
                gap: r.gap,
                self_overlap: r.self_overlap,
                energy: r.energy,
            });
        }
    }
    found.sort_by(|a, b| a.k.total_cmp(&b.k));
    Ok(found)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    /// Largest parameter with exceptional points.
    pub below: f64,
    /// Smallest parameter without them.
    pub above: f64,
    pub estimate: f64,
}

/// Walk ascending `values` until the presence of exceptional points between
/// bands `pair` flips, then bisect the bracket to a width below `width`.
/// Returns `None` when no flip occurs in the range.
pub fn threshold_scan<F>(
    values: &[f64],
    builder: F,
    cfg: &ModelConfig,
    pair: (usize, usize),
    ep: &EpConfig,
    width: f64,
) -> Result<Option<Threshold>>
where
    F: Fn(f64) -> PotentialSpec,
{
    let has_ep = |x: f64| -> Result<bool> {
        let b = dispersion(&builder(x), cfg)?;
        Ok(!detect_eps(&b, pair, ep)?.is_empty())
    };
    let Some(&first) = values.first() else {
        return Ok(None);
    };
    let mut prev = (first, has_ep(first)?);
    let mut bracket = None;
    for &x in &values[1..] {
        let cur = (x, has_ep(x)?);
        if cur.1 != prev.1 {
            bracket = Some((prev, cur));
            break;
        }
        prev = cur;
    }
    let Some(((mut a, pa), (mut b, _))) = bracket else {
        return Ok(None);
    };
    while (b - a).abs() >= width {
        let m = 0.5 * (a + b);
        if has_ep(m)? == pa {
            a = m;
        } else {
            b = m;
        }
    }
    let (below, above) = if pa { (a, b) } else { (b, a) };
    Ok(Some(Threshold {
        below,
        above,
        estimate: 0.5 * (a + b),
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PtReport {
    /// Conjugation closure of the full spectrum at each k.
    pub per_k: Vec<bool>,
    /// Largest relative distance from an eigenvalue's conjugate to its match.
    pub max_residual: f64,
}

impl PtReport {
    pub fn all(&self) -> bool {
        self.per_k.iter().all(|&b| b)
    }
}

/// Is the eigenvalue multiset at each k closed under conjugation (relative
/// tolerance `tol`)?
pub fn pt_check(bands: &BandSet, tol: f64) -> PtReport {
    let mut per_k = Vec::with_capacity(bands.n_k());
    let mut max_residual = 0.0f64;
    for spec in &bands.spectrum {
        let mut used = vec![false; spec.len()];
        let mut worst = 0.0f64;
        for z in spec {
            let target = z.conj();
            let mut best = usize::MAX;
            let mut best_d = f64::INFINITY;
            for (i, w) in spec.iter().enumerate() {
                let d = (w - target).norm();
                if !used[i] && d < best_d {
                    best_d = d;
                    best = i;
                }
            }
            if best != usize::MAX {
                used[best] = true;
            }
            worst = worst.max(best_d / z.norm().max(1.0));
        }
        per_k.push(worst <= tol);
        max_residual = max_residual.max(worst);
    }
    PtReport { per_k, max_residual }
}

/// Winding number of the closed curve `k -> ε_band(k)` around `base`.
pub fn point_gap_winding(bands: &BandSet, band: usize, base: Complex64) -> Result<i64> {
    let e = &bands.energies[band];
    let distance = e.iter().map(|z| (z - base).norm()).fold(f64::INFINITY, f64::min);
    if distance < 1e-8 {
        return Err(Error::BaseOnCurve { distance });
    }
    let n = e.len();
    let mut total = 0.0;
    for j in 0..n {
        let a = e[j] - base;
        let b = e[(j + 1) % n] - base;
        total += (b / a).arg();
    }
    Ok((total / (2.0 * PI)).round() as i64)
}

/// Mean of `ε_band(k)` over the grid.
pub fn centroid(bands: &BandSet, band: usize) -> Complex64 {
    let e = &bands.energies[band];
    e.iter().sum::<Complex64>() / e.len() as f64
}

/// Are the two eigenvalues real (`α`) or a conjugate pair (`β`)?
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Alpha,
    Beta,
}

/// Label each k by the structure of bands 1 and 2. Where both conditions
/// hold (a real coalescence) the label is `Alpha`.
pub fn region_decompose(bands: &BandSet, tol: f64) -> Result<Vec<Region>> {
    (0..bands.n_k())
        .map(|j| {
            let a = bands.energy(0, j);
            let b = bands.energy(1, j);
            let real = a.im.abs() <= tol * a.norm().max(1.0) && b.im.abs() <= tol * b.norm().max(1.0);
            if real {
                Ok(Region::Alpha)
            } else if coincide(a.re, b.re, tol) && coincide(a.im, -b.im, tol) {
                Ok(Region::Beta)
            } else {
                Err(Error::UnlabeledK { k: bands.k[j] })
            }
        })
        .collect()
}

/// Collected results for one band pair.
#[derive(Debug, Clone, PartialEq)]
pub struct EpReport {
    pub ep_locations: Vec<ExceptionalPoint>,
    pub threshold: Option<Threshold>,
    /// `(band, winding around its centroid)`; only bands that do not touch
    /// their neighbours are included.
    pub windings: Vec<(usize, i64)>,
    pub pt: PtReport,
}

pub fn ep_report(bands: &BandSet, pair: (usize, usize), ep: &EpConfig, pt_tol: f64) -> Result<EpReport> {
    let ep_locations = detect_eps(bands, pair, ep)?;
    let mut windings = Vec::new();
    for band in 0..bands.n_bands() {
        if separated(bands, band) {
            if let Ok(w) = point_gap_winding(bands, band, centroid(bands, band)) {
                windings.push((band, w));
            }
        }
    }
    Ok(EpReport {
        ep_locations,
        threshold: None,
        windings,
        pt: pt_check(bands, pt_tol),
    })
}

/// No other retained band comes within `1e-6` of `band` at any grid point.
pub fn separated(bands: &BandSet, band: usize) -> bool {
    (0..bands.n_bands()).filter(|&o| o != band).all(|o| {
        (0..bands.n_k()).all(|j| (bands.energy(band, j) - bands.energy(o, j)).norm() > 1e-6)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cfg() -> ModelConfig {
        ModelConfig::new(12, 40, 3).unwrap()
    }

    #[test]
    fn weak_sine_has_two_symmetric_eps_near_zone_edge() {
        let b = dispersion(&PotentialSpec::c_sin(c(0.0, 5.0)), &cfg()).unwrap();
        let eps = detect_eps(&b, (0, 1), &EpConfig::default()).unwrap();
        assert_eq!(eps.len(), 2, "{eps:?}");
        assert!((eps[0].k + eps[1].k).abs() < 1e-6);
        assert!(eps[1].k > 2.0);
        for e in &eps {
            assert!(e.gap < 1e-5 && e.self_overlap < 1e-6);
        }
    }

    #[test]
    fn separated_and_hermitian_cases_have_none() {
        for cc in [c(0.0, 80.0), c(0.0, 0.0)] {
            let b = dispersion(&PotentialSpec::c_sin(cc), &cfg()).unwrap();
            assert!(detect_eps(&b, (0, 1), &EpConfig::default()).unwrap().is_empty());
        }
    }

    #[test]
    fn pt_closure() {
        let b = dispersion(&PotentialSpec::c_sin(c(0.0, 20.0)), &cfg()).unwrap();
        assert!(pt_check(&b, 1e-8).all());
        let b = dispersion(&PotentialSpec::free(), &cfg()).unwrap();
        assert!(pt_check(&b, 1e-8).all());
        let b = dispersion(&PotentialSpec::c_sin(c(20.0, 80.0)), &cfg()).unwrap();
        assert!(!pt_check(&b, 1e-8).all());
    }

    #[test]
    fn winding_of_circle_and_arc() {
        let pot = PotentialSpec::c_sin(c(0.0, 80.0)).with_vector_potential(c(0.0, 1.0));
        let b = dispersion(&pot, &cfg()).unwrap();
        assert_eq!(point_gap_winding(&b, 0, centroid(&b, 0)).unwrap().abs(), 1);
        let b = dispersion(&PotentialSpec::c_sin(c(0.0, 80.0)), &cfg()).unwrap();
        assert_eq!(point_gap_winding(&b, 0, centroid(&b, 0)).unwrap(), 0);
        let on = b.energy(0, 3);
        assert!(matches!(point_gap_winding(&b, 0, on), Err(Error::BaseOnCurve { .. })));
    }

    #[test]
    fn regions() {
        let b = dispersion(&PotentialSpec::c_sin(c(0.0, 80.0)), &cfg()).unwrap();
        assert!(region_decompose(&b, 1e-8).unwrap().iter().all(|r| *r == Region::Beta));
        let b = dispersion(&PotentialSpec::free(), &cfg()).unwrap();
        assert!(region_decompose(&b, 1e-8).unwrap().iter().all(|r| *r == Region::Alpha));
        let b = dispersion(&PotentialSpec::c_sin(c(0.0, 20.0)), &cfg()).unwrap();
        let r = region_decompose(&b, 1e-8).unwrap();
        let j0 = b.k_index(0.0).unwrap();
        let jpi = b.k_index(PI).unwrap();
        assert_eq!(r[j0], Region::Alpha);
        assert_eq!(r[jpi], Region::Beta);
        let b = dispersion(&PotentialSpec::c_sin(c(20.0, 80.0)), &cfg()).unwrap();
        assert!(matches!(region_decompose(&b, 1e-8), Err(Error::UnlabeledK { .. })));
    }
}
