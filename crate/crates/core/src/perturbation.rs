//! Closed-form small-matrix oracles for the gaps at the zone edge and centre,
//! and their measured counterparts.

use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectra::{cmp_re_im, BandSet, OrderingRule};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Gap `ε_2(π) - ε_1(π)` of the two-plane-wave block for `V = c sin(2πx)`,
/// whose eigenvalues are `π^2 ∓ c/2`.
pub fn first_order_gap(c: Complex64) -> Complex64 {
    c
}

/// Gap `ε_3(0) - ε_2(0)` from the three-plane-wave block (`l = -1, 0, 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondOrderGap {
    /// Difference of the two exact block eigenvalues next to `4π^2`, ordered by
    /// real then imaginary part.
    pub exact: Complex64,
    /// `-c^2 / (8π^2)`.
    pub leading: Complex64,
    /// `|c|^2 / (8π^2)`, the size of the shift of one level.
    pub single_sided: f64,
}

pub fn second_order_gap(c: Complex64) -> SecondOrderGap {
    let e0 = 4.0 * PI * PI;
    // Eigenvalues are 4π^2 and (4π^2 ± sqrt(16π^4 + 2c^2)) / 2.
    let s = (Complex64::new(e0 * e0, 0.0) + c * c * 2.0).sqrt();
    let plus = (s + e0) / 2.0;
    let minus = (-s + e0) / 2.0;
    let e0c = Complex64::new(e0, 0.0);
    let near = if (plus - e0c).norm() <= (minus - e0c).norm() { plus } else { minus };
    let (lo, hi) = if cmp_re_im(&near, &e0c).is_le() { (near, e0c) } else { (e0c, near) };
    SecondOrderGap {
        exact: hi - lo,
        leading: -c * c / (8.0 * PI * PI),
        single_sided: c.norm_sqr() / (8.0 * PI * PI),
    }
}

/// Gap at `k = π` for `V = b e^{i2πx} + δc sin(2πx)`:
/// `2 sqrt((b - iδc/2)(iδc/2))` with the principal root.
pub fn ep_response_gap(b: f64, delta_c: Complex64) -> Result<Complex64> {
    if !(b > 0.0) {
        return Err(Error::Domain("b must be positive"));
    }
    let h = I * delta_c / 2.0;
    Ok(((Complex64::new(b, 0.0) - h) * h).sqrt() * 2.0)
}

/// Potential parameters recovered from the `l = ±1` Fourier components of a
/// `b cos(2πx) + c sin(2πx)` potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapParameters {
    pub b: Complex64,
    pub c: Complex64,
    /// `c - ib`, the deviation from the triangular point `c = ib`.
    pub delta_c: Complex64,
    pub vector_a: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    /// `ε_2(π) - ε_1(π)`.
    pub delta1: Complex64,
    /// `ε_3(0) - ε_2(0)`; absent with fewer than three bands.
    pub delta2: Option<Complex64>,
    pub analytic_delta1: Option<Complex64>,
    pub analytic_delta2: Option<SecondOrderGap>,
    /// Absent when the potential has harmonics other than `l = ±1`.
    pub parameters: Option<GapParameters>,
    /// Ordering rules that fixed the sign of each gap.
    pub rule_at_pi: Option<OrderingRule>,
    pub rule_at_zero: Option<OrderingRule>,
}

pub fn measure_gaps(bands: &BandSet) -> Result<GapReport> {
    let jpi = bands.k_index(PI)?;
    let j0 = bands.k_index(0.0)?;
    if bands.n_bands() < 2 {
        return Err(Error::IncompleteBands {
            k_index: jpi,
            found: bands.n_bands(),
            needed: 2,
        });
    }
    let delta1 = bands.energy(1, jpi) - bands.energy(0, jpi);
    let delta2 = (bands.n_bands() >= 3).then(|| bands.energy(2, j0) - bands.energy(1, j0));

    let pot = &bands.potential;
    let parameters = pot.components().all(|(l, _)| l.abs() == 1).then(|| {
        let v1 = pot.fourier(1);
        let vm1 = pot.fourier(-1);
        let b = v1 + vm1;
        let c = I * (v1 - vm1);
        GapParameters {
            b,
            c,
            delta_c: c - I * b,
            vector_a: pot.vector_a,
        }
    });
    let zero = Complex64::new(0.0, 0.0);
    let (analytic_delta1, analytic_delta2) = match parameters {
        Some(p) if p.vector_a == zero && p.b == zero => {
            (Some(first_order_gap(p.c)), Some(second_order_gap(p.c)))
        }
        Some(p) if p.vector_a == zero && p.b.im == 0.0 && p.b.re > 0.0 => {
            (ep_response_gap(p.b.re, p.delta_c).ok(), None)
        }
        _ => (None, None),
    };
    Ok(GapReport {
        delta1,
        delta2,
        analytic_delta1,
        analytic_delta2,
        parameters,
        rule_at_pi: bands.ordering_log.rule_at(jpi, 0),
        rule_at_zero: bands.ordering_log.rule_at(j0, 1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{dispersion, ModelConfig, PotentialSpec};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Characteristic polynomial of the 3x3 block at k = 0, evaluated directly.
    fn block_det(cc: Complex64, z: Complex64) -> Complex64 {
        let e = Complex64::new(4.0 * PI * PI, 0.0);
        let a = I * cc / 2.0;
        let b = -I * cc / 2.0;
        // Rows: [e - z, a, 0], [b, -z, a], [0, b, e - z].
        (e - z) * ((-z) * (e - z) - a * b) - a * (b * (e - z))
    }

    #[test]
    fn first_order_is_identity() {
        assert_eq!(first_order_gap(c(0.0, 5.0)), c(0.0, 5.0));
        assert_eq!(first_order_gap(c(3.0, 4.0)), c(3.0, 4.0));
        assert_eq!(first_order_gap(c(0.0, 0.0)), c(0.0, 0.0));
    }

    #[test]
    fn second_order_roots_solve_the_block() {
        for cc in [c(0.0, 5.0), c(0.0, 20.0), c(3.0, 7.0)] {
            let g = second_order_gap(cc);
            let e0 = c(4.0 * PI * PI, 0.0);
            // 4π^2 is a root, and so is the partner at 4π^2 ∓ exact.
            assert!(block_det(cc, e0).norm() < 1e-6);
            let partner = if block_det(cc, e0 - g.exact).norm() < block_det(cc, e0 + g.exact).norm() {
                e0 - g.exact
            } else {
                e0 + g.exact
            };
            assert!(block_det(cc, partner).norm() < 1e-6 * (1.0 + partner.norm().powi(3)));
        }
        assert_eq!(second_order_gap(c(0.0, 0.0)).exact, c(0.0, 0.0));
    }

    #[test]
    fn second_order_small_c_matches_leading_term() {
        let g = second_order_gap(c(0.0, 5.0));
        assert!(g.exact.im.abs() < 1e-12);
        assert!(g.exact.re > 0.0);
        assert!((g.exact - g.leading).norm() / g.leading.norm() < 0.01);
        assert!((g.single_sided - 25.0 / (8.0 * PI * PI)).abs() < 1e-12);
        assert!((g.single_sided - 0.3166).abs() < 1e-4);
    }

    #[test]
    fn ep_response_values() {
        let g = ep_response_gap(20.0, c(0.0, 5.0)).unwrap();
        assert!((g - c(0.0, 15.0)).norm() < 1e-12);
        let g = ep_response_gap(20.0, c(0.0, -5.0)).unwrap();
        assert!(g.im.abs() < 1e-12 && g.re > 0.0);
        assert!((g.re - 2.0 * (17.5f64 * 2.5).sqrt()).abs() < 1e-12);
        assert_eq!(ep_response_gap(20.0, c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        assert_eq!(ep_response_gap(0.0, c(0.0, 1.0)), Err(Error::Domain("b must be positive")));
    }

    #[test]
    fn ep_response_square_root_scaling() {
        let a = ep_response_gap(20.0, c(0.0, 0.01)).unwrap();
        let b = ep_response_gap(20.0, c(0.0, 0.04)).unwrap();
        assert!((b.norm() / a.norm() - 2.0).abs() < 0.01);
    }

    #[test]
    fn measured_gaps_for_small_c() {
        let cfg = ModelConfig::new(10, 20, 3).unwrap();
        let r = measure_gaps(&dispersion(&PotentialSpec::c_sin(c(0.0, 5.0)), &cfg).unwrap()).unwrap();
        assert!((r.delta1 - c(0.0, 5.0)).norm() / 5.0 < 0.05);
        let d2 = r.delta2.unwrap();
        let exact = r.analytic_delta2.unwrap().exact;
        assert!(d2.im.abs() < 1e-6);
        assert!((d2 - exact).norm() / exact.norm() < 0.1);
        assert_eq!(r.rule_at_pi, Some(OrderingRule::ByImag));
        assert_eq!(r.parameters.unwrap().c, c(0.0, 5.0));
    }

    #[test]
    fn measured_gaps_vanish_without_potential() {
        let cfg = ModelConfig::new(10, 20, 3).unwrap();
        let r = measure_gaps(&dispersion(&PotentialSpec::free(), &cfg).unwrap()).unwrap();
        assert_eq!(r.delta1, c(0.0, 0.0));
        assert_eq!(r.delta2, Some(c(0.0, 0.0)));
    }

    #[test]
    fn complex_c_gap_has_both_parts() {
        let cfg = ModelConfig::new(20, 20, 3).unwrap();
        let r = measure_gaps(&dispersion(&PotentialSpec::c_sin(c(20.0, 80.0)), &cfg).unwrap()).unwrap();
        assert!(r.delta1.re.abs() > 1e-3 && r.delta1.im.abs() > 1e-3);
    }

    #[test]
    fn odd_grid_reports_missing_zero() {
        let cfg = ModelConfig::new(10, 21, 3).unwrap();
        let b = dispersion(&PotentialSpec::c_sin(c(0.0, 5.0)), &cfg).unwrap();
        assert_eq!(measure_gaps(&b), Err(Error::MissingGridPoint { k: 0.0 }));
    }
}
