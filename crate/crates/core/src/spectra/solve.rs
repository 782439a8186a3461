use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use faer::Mat;
use num_complex::Complex64;

use super::bloch::build_bloch_matrix;
use super::config::ModelConfig;
use super::potential::PotentialSpec;
use crate::error::{Error, Result};
use crate::linalg;

/// One right/left eigenpair of `H(k)`.
///
/// `right` has unit Euclidean norm. Unless `defective` is set, `left` is
/// scaled so that `left^dagger right = 1`.
#[derive(Debug, Clone)]
pub struct EigenState {
    pub energy: Complex64,
    pub right: Vec<Complex64>,
    pub left: Vec<Complex64>,
    /// `|left^dagger right| / (|left| |right|)`, zero at an exceptional point.
    pub self_overlap: f64,
    pub defective: bool,
}

/// All eigenpairs at one k, sorted by `(Re, Im)` of the energy.
#[derive(Debug, Clone)]
pub struct KEigensystem {
    pub k: f64,
    pub states: Vec<EigenState>,
}

impl KEigensystem {
    pub fn energies(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.states.iter().map(|s| s.energy)
    }
}

pub(crate) fn cmp_re_im(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

pub fn solve_k(k: f64, pot: &PotentialSpec, cfg: &ModelConfig) -> Result<KEigensystem> {
    let h = build_bloch_matrix(k, pot, cfg)?;
    solve_matrix(k, h.entries(), cfg.tol.defect)
}

/// Eigenvalues of `H(k)` only, sorted by `(Re, Im)`.
pub fn eigenvalues_k(k: f64, pot: &PotentialSpec, cfg: &ModelConfig) -> Result<Vec<Complex64>> {
    let h = build_bloch_matrix(k, pot, cfg)?;
    let mut v = linalg::eigenvalues(h.entries()).ok_or(Error::Eigensolver { k })?;
    v.sort_by(cmp_re_im);
    Ok(v)
}

pub(crate) fn solve_matrix(k: f64, h: &Mat<Complex64>, defect_tol: f64) -> Result<KEigensystem> {
    let n = h.nrows();
    let right = linalg::eig(h).ok_or(Error::Eigensolver { k })?;
    let left = linalg::eig(&linalg::adjoint(h)).ok_or(Error::Eigensolver { k })?;
    if right.values.len() != n || left.values.len() != n {
        return Err(Error::Eigensolver { k });
    }
    let col = |m: &Mat<Complex64>, j: usize| -> Vec<Complex64> { (0..n).map(|i| m[(i, j)]).collect() };
    let rvecs: Vec<Vec<Complex64>> = (0..n).map(|j| col(&right.vectors, j)).collect();
    let lvecs: Vec<Vec<Complex64>> = (0..n).map(|j| col(&left.vectors, j)).collect();

    let tie = |z: Complex64| 1e-8 * z.norm().max(1.0);

    // Greedy nearest-conjugate assignment, processing right states in a
    // fixed order; near-ties are broken by the largest normalized overlap.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| cmp_re_im(&right.values[a], &right.values[b]));
    let mut taken = vec![false; n];
    let mut partner = vec![usize::MAX; n];
    for &i in &order {
        let target = right.values[i].conj();
        let mut best = f64::INFINITY;
        for j in 0..n {
            if !taken[j] {
                best = best.min((left.values[j] - target).norm());
            }
        }
        if !best.is_finite() {
            return Err(Error::Pairing { k });
        }
        let mut pick = usize::MAX;
        let mut pick_score = -1.0;
        for j in 0..n {
            if taken[j] || (left.values[j] - target).norm() > best + tie(target) {
                continue;
            }
            let s = linalg::dot(&lvecs[j], &rvecs[i]).norm() / linalg::norm(&lvecs[j]);
            let s = if s.is_nan() { 0.0 } else { s };
            if s > pick_score {
                pick_score = s;
                pick = j;
            }
        }
        if pick == usize::MAX {
            return Err(Error::Pairing { k });
        }
        taken[pick] = true;
        partner[i] = pick;
    }

    let mut states: Vec<EigenState> = (0..n)
        .map(|i| EigenState {
            energy: right.values[i],
            right: rvecs[i].clone(),
            left: lvecs[partner[i]].clone(),
            self_overlap: 0.0,
            defective: false,
        })
        .collect();

    biorthogonalize_clusters(&mut states);

    for s in &mut states {
        let overlap = linalg::dot(&s.left, &s.right);
        let nl = linalg::norm(&s.left);
        let nr = linalg::norm(&s.right);
        s.self_overlap = overlap.norm() / (nl * nr);
        if s.self_overlap < defect_tol {
            s.defective = true;
        } else {
            let f = overlap.conj().inv();
            for z in &mut s.left {
                *z *= f;
            }
        }
    }
    states.sort_by(|a, b| cmp_re_im(&a.energy, &b.energy));
    Ok(KEigensystem { k, states })
}

/// Numerically degenerate pairs with independent eigenvectors: the
/// solver's bases for `H` and `H^dagger` need not be dual, so rotate the left
/// pair to make the 2x2 overlap block the identity.
fn biorthogonalize_clusters(states: &mut [EigenState]) {
    let tie = |z: Complex64| 1e-8 * z.norm().max(1.0);
    let n = states.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| cmp_re_im(&states[a].energy, &states[b].energy));
    let mut w = 0;
    while w + 1 < n {
        let a = order[w];
        let b = order[w + 1];
        let t = tie(states[b].energy);
        let clustered = (states[a].energy - states[b].energy).norm() <= t
            && (w + 2 >= n || (states[order[w + 2]].energy - states[b].energy).norm() > t);
        if !clustered {
            w += 1;
            continue;
        }
        // M = L^dagger R for the pair; new L = L (M^{-1})^dagger.
        let m00 = linalg::dot(&states[a].left, &states[a].right);
        let m01 = linalg::dot(&states[a].left, &states[b].right);
        let m10 = linalg::dot(&states[b].left, &states[a].right);
        let m11 = linalg::dot(&states[b].left, &states[b].right);
        let det = m00 * m11 - m01 * m10;
        let scale = linalg::norm(&states[a].left) * linalg::norm(&states[b].left);
        if det.norm() > 1e-6 * scale {
            let inv = [[m11 / det, -m01 / det], [-m10 / det, m00 / det]];
            let la = states[a].left.clone();
            let lb = states[b].left.clone();
            // Column c of L (M^{-1})^dagger = sum_r L_r conj(inv[c][r]).
            for (idx, row) in [(a, 0), (b, 1)] {
                states[idx].left = la
                    .iter()
                    .zip(&lb)
                    .map(|(&x, &y)| x * inv[row][0].conj() + y * inv[row][1].conj())
                    .collect();
            }
        }
        w += 2;
    }
}
