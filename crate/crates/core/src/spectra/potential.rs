use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

/// Scalar potential `V(x) = sum_l V_l e^{i 2 pi l x}` together with a constant
/// (possibly complex) vector potential `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec {
    scalar: BTreeMap<i64, Complex64>,
    pub vector_a: Complex64,
}

const I: Complex64 = Complex64::new(0.0, 1.0);

impl Default for PotentialSpec {
    fn default() -> Self {
        Self::free()
    }
}

impl PotentialSpec {
    pub fn free() -> Self {
        Self {
            scalar: BTreeMap::new(),
            vector_a: Complex64::new(0.0, 0.0),
        }
    }

    /// `V(x) = c sin(2 pi x)`.
    pub fn c_sin(c: Complex64) -> Self {
        Self::from_fourier([(1, -I * c / 2.0), (-1, I * c / 2.0)])
    }

    /// `V(x) = b cos(2 pi x) + c sin(2 pi x)`.
    pub fn b_cos_c_sin(b: f64, c: Complex64) -> Self {
        Self::from_fourier([(1, b / 2.0 - I * c / 2.0), (-1, b / 2.0 + I * c / 2.0)])
    }

    /// `V(x) = b e^{i 2 pi x}`.
    pub fn b_exp(b: f64) -> Self {
        Self::from_fourier([(1, Complex64::new(b, 0.0))])
    }

    /// Exact zeros are dropped so that structural checks see the true support.
    pub fn from_fourier(components: impl IntoIterator<Item = (i64, Complex64)>) -> Self {
        let mut scalar = BTreeMap::new();
        for (l, v) in components {
            let e = scalar.entry(l).or_insert(Complex64::new(0.0, 0.0));
            *e += v;
        }
        scalar.retain(|_, v| *v != Complex64::new(0.0, 0.0));
        Self {
            scalar,
            vector_a: Complex64::new(0.0, 0.0),
        }
    }

    pub fn with_vector_potential(mut self, a: Complex64) -> Self {
        self.vector_a = a;
        self
    }

    /// `V_l`, zero when absent.
    pub fn fourier(&self, l: i64) -> Complex64 {
        self.scalar.get(&l).copied().unwrap_or_default()
    }

    pub fn components(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.scalar.iter().map(|(&l, &v)| (l, v))
    }

    pub fn max_order(&self) -> i64 {
        self.scalar.keys().map(|l| l.abs()).max().unwrap_or(0)
    }

    /// Real-space value `V(x)`.
    pub fn eval(&self, x: f64) -> Complex64 {
        self.components()
            .map(|(l, v)| v * Complex64::from_polar(1.0, 2.0 * PI * l as f64 * x))
            .sum()
    }

    /// `V(-x)^* = V(x)` and real `A`: every `V_l` is real.
    pub fn is_pt_symmetric(&self) -> bool {
        self.vector_a.im == 0.0 && self.scalar.values().all(|v| v.im == 0.0)
    }

    /// `V(-x - 1/2) = V(x)` with `A = 0`, i.e. `V_l = (-1)^l V_{-l}`.
    pub fn is_reflection_symmetric(&self) -> bool {
        if self.vector_a != Complex64::new(0.0, 0.0) {
            return false;
        }
        self.components().all(|(l, v)| {
            let sign = if l.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            v == self.fourier(-l) * sign
        })
    }

    /// Non-zero `V_l` only above the diagonal index, which makes the Bloch
    /// matrix lower triangular.
    pub fn is_lower_triangular(&self) -> bool {
        self.scalar.keys().all(|&l| l > 0)
    }
}

/// Split a periodic vector potential `A(x)` into its mean `A_0` and the gauge
/// factor `exp(-i int_0^x [A(x') - A_0] dx')` sampled at `xs`.
///
/// Only `A_0` enters the spectrum; the factor multiplies the eigenfunctions.
pub fn gauge_reduce(
    a_fourier: &BTreeMap<i64, Complex64>,
    xs: &[f64],
) -> (Complex64, Vec<Complex64>) {
    let a0 = a_fourier.get(&0).copied().unwrap_or_default();
    let profile = xs
        .iter()
        .map(|&x| {
            let mut integral = Complex64::new(0.0, 0.0);
            for (&l, &al) in a_fourier {
                if l == 0 {
                    continue;
                }
                let q = 2.0 * PI * l as f64;
                let e = Complex64::from_polar(1.0, q * x) - 1.0;
                integral += al * e / (I * q);
            }
            (-I * integral).exp()
        })
        .collect();
    (a0, profile)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn sine_components() {
        let cc = c(0.0, 20.0);
        let p = PotentialSpec::c_sin(cc);
        assert_eq!(p.fourier(-1), I * cc / 2.0);
        assert_eq!(p.fourier(1), -I * cc / 2.0);
        assert_eq!(p.fourier(0), c(0.0, 0.0));
        assert_eq!(p.components().count(), 2);
        for x in [0.1, 0.37, -0.42] {
            let want = cc * (2.0 * PI * x).sin();
            assert!((p.eval(x) - want).norm() < 1e-12);
        }
    }

    #[test]
    fn b_cos_c_sin_matches_real_space() {
        let p = PotentialSpec::b_cos_c_sin(3.0, c(1.0, 2.0));
        for x in [0.05, 0.3, 0.77] {
            let want = 3.0 * (2.0 * PI * x).cos() + c(1.0, 2.0) * (2.0 * PI * x).sin();
            assert!((p.eval(x) - want).norm() < 1e-12);
        }
    }

    #[test]
    fn exponential_is_cos_plus_i_sin() {
        let a = PotentialSpec::b_exp(20.0);
        let b = PotentialSpec::b_cos_c_sin(20.0, c(0.0, 20.0));
        assert_eq!(a, b);
        assert!(a.is_lower_triangular());
    }

    #[test]
    fn symmetry_predicates() {
        let pt = PotentialSpec::c_sin(c(0.0, 20.0));
        assert!(pt.is_pt_symmetric());
        assert!(pt.is_reflection_symmetric());
        let gen = PotentialSpec::c_sin(c(20.0, 80.0));
        assert!(!gen.is_pt_symmetric());
        assert!(gen.is_reflection_symmetric());
        assert!(!pt.clone().with_vector_potential(I).is_pt_symmetric());
        assert!(!PotentialSpec::b_cos_c_sin(1.0, c(0.0, 1.0)).is_reflection_symmetric());
    }

    #[test]
    fn gauge_reduce_constant() {
        let mut a = BTreeMap::new();
        a.insert(0, c(0.0, 0.3));
        let (a0, prof) = gauge_reduce(&a, &[0.0, 0.25, -0.4]);
        assert_eq!(a0, c(0.0, 0.3));
        assert!(prof.iter().all(|z| *z == c(1.0, 0.0)));
        let (z, prof) = gauge_reduce(&BTreeMap::new(), &[0.1]);
        assert_eq!(z, c(0.0, 0.0));
        assert_eq!(prof[0], c(1.0, 0.0));
    }

    #[test]
    fn gauge_reduce_cosine_matches_closed_form_and_quadrature() {
        let mut a = BTreeMap::new();
        a.insert(0, I);
        a.insert(1, c(1.0, 0.0));
        a.insert(-1, c(1.0, 0.0));
        let xs: Vec<f64> = (0..16).map(|i| -0.5 + i as f64 / 16.0).collect();
        let (a0, prof) = gauge_reduce(&a, &xs);
        assert_eq!(a0, I);
        for (&x, &p) in xs.iter().zip(&prof) {
            let closed = (-I * (2.0 * PI * x).sin() / PI).exp();
            assert!((p - closed).norm() < 1e-12);
            // Midpoint rule for int_0^x 2 cos(2 pi t) dt.
            let n = 4000;
            let h = x / n as f64;
            let integral: f64 = (0..n)
                .map(|i| 2.0 * (2.0 * PI * (i as f64 + 0.5) * h).cos() * h)
                .sum();
            assert!((p - (-I * integral).exp()).norm() < 1e-6);
        }
    }
}
