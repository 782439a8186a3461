//! Thin wrappers over faer for the dense problems that show up here: general
//! eigendecompositions of small Bloch matrices and polar factors of overlap
//! matrices.

use alloc::vec::Vec;

use faer::Mat;
use num_complex::Complex64;

/// Eigenvalues with unit-norm right eigenvectors stored column-wise.
#[derive(Debug, Clone)]
pub(crate) struct Eig {
    pub values: Vec<Complex64>,
    pub vectors: Mat<Complex64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Structure {
    Lower,
    Upper,
    Real,
    General,
}

fn classify(m: &Mat<Complex64>) -> Structure {
    let n = m.nrows();
    let mut lower = true;
    let mut upper = true;
    let mut real = true;
    for j in 0..n {
        for i in 0..n {
            let z = m[(i, j)];
            if z.im != 0.0 {
                real = false;
            }
            if z != Complex64::new(0.0, 0.0) {
                if i < j {
                    lower = false;
                }
                if i > j {
                    upper = false;
                }
            }
        }
    }
    // A diagonal matrix is both; either branch reads the diagonal.
    if lower {
        Structure::Lower
    } else if upper {
        Structure::Upper
    } else if real {
        Structure::Real
    } else {
        Structure::General
    }
}

pub(crate) fn max_abs(m: &Mat<Complex64>) -> f64 {
    let mut best = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            best = best.max(m[(i, j)].norm());
        }
    }
    best
}

/// Full eigendecomposition. Exactly triangular input is solved by reading
/// the diagonal (the isolated-eigenvalue step of balancing); exactly real
/// input goes through the real solver so that conjugate pairs come out
/// exactly conjugate.
pub(crate) fn eig(m: &Mat<Complex64>) -> Option<Eig> {
    let n = m.nrows();
    match classify(m) {
        Structure::Lower => Some(triangular_eig(m, true)),
        Structure::Upper => Some(triangular_eig(m, false)),
        Structure::Real => {
            let re = Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)].re);
            let e = re.eigen().ok()?;
            repair(m, collect(e.S().column_vector().iter().copied(), e.U()))
        }
        Structure::General => {
            let e = m.eigen().ok()?;
            repair(m, collect(e.S().column_vector().iter().copied(), e.U()))
        }
    }
}

/// The dense solvers can hand back a zero or non-finite column for one member
/// of an exactly repeated eigenvalue. Such clusters get their whole basis
/// replaced by the null space of `m - lambda` from an SVD.
fn repair(m: &Mat<Complex64>, mut e: Eig) -> Option<Eig> {
    let n = m.nrows();
    let bad = |v: &Mat<Complex64>, j: usize| {
        let mut s = 0.0;
        for i in 0..n {
            s += v[(i, j)].norm_sqr();
        }
        !s.is_finite() || s < 0.5
    };
    let tol = 1e-10 * max_abs(m).max(1.0);
    let mut done = alloc::vec![false; e.values.len()];
    for j in 0..e.values.len() {
        if done[j] || !bad(&e.vectors, j) {
            continue;
        }
        let lambda = e.values[j];
        if !lambda.re.is_finite() || !lambda.im.is_finite() {
            return None;
        }
        let cluster: Vec<usize> = (0..e.values.len())
            .filter(|&p| (e.values[p] - lambda).norm() <= tol)
            .collect();
        let shifted = Mat::from_fn(n, n, |r, c| if r == c { m[(r, c)] - lambda } else { m[(r, c)] });
        let svd = shifted.svd().ok()?;
        let v = svd.V();
        // Singular values come out in decreasing order.
        for (slot, &p) in cluster.iter().enumerate() {
            let col = n - cluster.len() + slot;
            for i in 0..n {
                e.vectors[(i, p)] = v[(i, col)];
            }
            done[p] = true;
        }
    }
    Some(e)
}

/// Eigenvalues only, using the same structure dispatch as [`eig`].
pub(crate) fn eigenvalues(m: &Mat<Complex64>) -> Option<Vec<Complex64>> {
    let n = m.nrows();
    match classify(m) {
        Structure::Lower | Structure::Upper => Some((0..n).map(|i| m[(i, i)]).collect()),
        Structure::Real => {
            let re = Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)].re);
            re.eigenvalues().ok()
        }
        Structure::General => m.eigenvalues().ok(),
    }
}

fn collect(
    values: impl Iterator<Item = Complex64>,
    u: faer::MatRef<'_, Complex64>,
) -> Eig {
    let values: Vec<Complex64> = values.collect();
    let n = u.nrows();
    let mut vectors = Mat::<Complex64>::from_fn(n, values.len(), |i, j| u[(i, j)]);
    normalize_columns(&mut vectors);
    Eig { values, vectors }
}

fn normalize_columns(v: &mut Mat<Complex64>) {
    for j in 0..v.ncols() {
        let mut s = 0.0;
        for i in 0..v.nrows() {
            s += v[(i, j)].norm_sqr();
        }
        let s = s.sqrt();
        if s > 0.0 {
            for i in 0..v.nrows() {
                v[(i, j)] /= s;
            }
        }
    }
}

/// Eigenvectors of a triangular matrix by substitution. Vanishing pivots
/// (repeated diagonal entries) are replaced by a tiny number, as LAPACK's
/// `trevc` does, so a Jordan block yields nearly parallel vectors instead of
/// a division by zero.
fn triangular_eig(m: &Mat<Complex64>, lower: bool) -> Eig {
    let n = m.nrows();
    let values: Vec<Complex64> = (0..n).map(|i| m[(i, i)]).collect();
    let small = f64::EPSILON * max_abs(m).max(f64::MIN_POSITIVE);
    let mut vectors = Mat::<Complex64>::zeros(n, n);
    for (i, &lambda) in values.iter().enumerate() {
        let mut v = alloc::vec![Complex64::new(0.0, 0.0); n];
        v[i] = Complex64::new(1.0, 0.0);
        if lower {
            for j in i + 1..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for (p, vp) in v.iter().enumerate().take(j).skip(i) {
                    acc += m[(j, p)] * vp;
                }
                v[j] = -acc / guarded(m[(j, j)] - lambda, small);
            }
        } else {
            for j in (0..i).rev() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (p, vp) in v.iter().enumerate().take(i + 1).skip(j + 1) {
                    acc += m[(j, p)] * vp;
                }
                v[j] = -acc / guarded(m[(j, j)] - lambda, small);
            }
        }
        // Rescale before overflow can build up along long chains.
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for (row, z) in v.into_iter().enumerate() {
            vectors[(row, i)] = z / norm;
        }
    }
    Eig { values, vectors }
}

fn guarded(d: Complex64, small: f64) -> Complex64 {
    if d.norm() < small {
        Complex64::new(small, 0.0)
    } else {
        d
    }
}

/// Conjugate transpose.
pub(crate) fn adjoint(m: &Mat<Complex64>) -> Mat<Complex64> {
    Mat::from_fn(m.ncols(), m.nrows(), |i, j| m[(j, i)].conj())
}

/// Unitary polar factor `D (D^† D)^{-1/2} = E G^†` from the SVD `D = E F G^†`,
/// together with the smallest singular value.
pub(crate) fn polar_unitary(d: &Mat<Complex64>) -> Option<(Mat<Complex64>, f64)> {
    let svd = d.svd().ok()?;
    let e = svd.U();
    let g = svd.V();
    let n = d.nrows();
    let smin = svd
        .S()
        .column_vector()
        .iter()
        .map(|s| s.re)
        .fold(f64::INFINITY, f64::min);
    let u = Mat::from_fn(n, d.ncols(), |i, j| {
        let mut acc = Complex64::new(0.0, 0.0);
        for p in 0..e.ncols() {
            acc += e[(i, p)] * g[(j, p)].conj();
        }
        acc
    });
    Some((u, smin))
}

/// `a^† b` for two coefficient vectors.
#[inline]
pub(crate) fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter()
        .zip(b)
        .fold(Complex64::new(0.0, 0.0), |acc, (x, y)| acc + x.conj() * y)
}

#[inline]
pub(crate) fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn residual(m: &Mat<Complex64>, e: &Eig) -> f64 {
        let n = m.nrows();
        let mut worst = 0.0f64;
        for (j, &lambda) in e.values.iter().enumerate() {
            for i in 0..n {
                let mut acc = c(0.0, 0.0);
                for p in 0..n {
                    acc += m[(i, p)] * e.vectors[(p, j)];
                }
                worst = worst.max((acc - lambda * e.vectors[(i, j)]).norm());
            }
        }
        worst
    }

    #[test]
    fn repeated_eigenvalue_with_lost_column_is_rebuilt() {
        let m = Mat::from_fn(4, 4, |i, j| match (i, j) {
            (0, 0) | (1, 1) => c(3.0, 0.0),
            (2, 2) => c(1.0, 0.0),
            (3, 3) => c(-2.0, 0.0),
            (2, 3) | (3, 2) => c(0.5, 0.0),
            _ => c(0.0, 0.0),
        });
        let mut e = eig(&m).unwrap();
        let lost = e.values.iter().position(|z| (z - c(3.0, 0.0)).norm() < 1e-12).unwrap();
        for i in 0..4 {
            e.vectors[(i, lost)] = c(f64::NAN, 0.0);
        }
        let e = repair(&m, e).unwrap();
        assert!(residual(&m, &e) < 1e-12);
        let cluster: Vec<usize> = (0..4).filter(|&j| (e.values[j] - c(3.0, 0.0)).norm() < 1e-12).collect();
        assert_eq!(cluster.len(), 2);
        let a: Vec<Complex64> = (0..4).map(|i| e.vectors[(i, cluster[0])]).collect();
        let b: Vec<Complex64> = (0..4).map(|i| e.vectors[(i, cluster[1])]).collect();
        assert!(dot(&a, &b).norm() < 1e-12);
        assert!((norm(&a) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn general_complex_matrix_satisfies_eigen_equation() {
        let m = Mat::from_fn(5, 5, |i, j| c((i + 2 * j) as f64, i as f64 - 0.5 * j as f64));
        let e = eig(&m).unwrap();
        assert!(residual(&m, &e) < 1e-10);
    }

    #[test]
    fn real_matrix_gives_exact_conjugate_pairs() {
        let m = Mat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => c(-1.0, 0.0),
            (1, 0) => c(1.0, 0.0),
            _ => c(3.0, 0.0),
        });
        let mut v = eig(&m).unwrap().values;
        v.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        assert_eq!(v[0], v[1].conj());
        assert!((v[1] - c(3.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn triangular_matrix_reads_diagonal() {
        let m = Mat::from_fn(3, 3, |i, j| {
            if i == j {
                c(i as f64 + 1.0, 0.5)
            } else if i > j {
                c(2.0, -1.0)
            } else {
                c(0.0, 0.0)
            }
        });
        let e = eig(&m).unwrap();
        for i in 0..3 {
            assert_eq!(e.values[i], m[(i, i)]);
        }
        assert!(residual(&m, &e) < 1e-12);
    }

    #[test]
    fn jordan_block_gives_parallel_vectors() {
        let m = Mat::from_fn(2, 2, |i, j| if i >= j { c(1.0, 0.0) } else { c(0.0, 0.0) });
        let e = eig(&m).unwrap();
        let a: Vec<Complex64> = (0..2).map(|i| e.vectors[(i, 0)]).collect();
        let b: Vec<Complex64> = (0..2).map(|i| e.vectors[(i, 1)]).collect();
        assert!((dot(&a, &b).norm() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn polar_factor_is_unitary() {
        let d = Mat::from_fn(2, 2, |i, j| c(1.0 + i as f64, (j as f64) - 0.3));
        let (u, smin) = polar_unitary(&d).unwrap();
        assert!(smin > 0.0);
        let uu = adjoint(&u) * &u;
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((uu[(i, j)] - c(want, 0.0)).norm() < 1e-12);
            }
        }
    }
}
