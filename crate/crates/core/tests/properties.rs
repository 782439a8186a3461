use std::f64::consts::PI;

use nhband_core::ep::pt_check;
use nhband_core::spectra::{dispersion, eigenvalues_k, fold, ModelConfig, PotentialSpec};
use nhband_core::tightbinding::{hoppings_from_bands, HoppingTable, Provenance, TbModel};
use nhband_core::wannier::{fix_phases, identity_gauge, projection_unitary, rotate_phases, trials_at, GaugeMethod};
use nhband_core::Complex64;
use proptest::prelude::*;

fn small() -> ModelConfig {
    ModelConfig::new(8, 12, 2).unwrap()
}

fn complex(range: f64) -> impl Strategy<Value = Complex64> {
    (-range..range, -range..range).prop_map(|(re, im)| Complex64::new(re, im))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fold_lands_in_zone(k in -50.0f64..50.0) {
        let f = fold(k);
        prop_assert!(f > -PI && f <= PI);
        let turns = (k - f) / (2.0 * PI);
        prop_assert!((turns - turns.round()).abs() < 1e-9);
    }

    #[test]
    fn pt_potential_spectrum_is_conjugation_closed(a in 0.0f64..60.0) {
        let b = dispersion(&PotentialSpec::c_sin(Complex64::new(0.0, a)), &small()).unwrap();
        let r = pt_check(&b, 1e-8);
        prop_assert!(r.all(), "residual {}", r.max_residual);
    }

    #[test]
    fn bloch_states_are_biorthonormal(c in complex(40.0)) {
        let b = dispersion(&PotentialSpec::c_sin(c), &small()).unwrap();
        prop_assert!(b.biorthonormality_residual() < 1e-8);
    }

    #[test]
    fn lower_triangular_potential_keeps_free_spectrum(v in 0.5f64..40.0, k in -PI..PI) {
        let cfg = small();
        let mut got = eigenvalues_k(k, &PotentialSpec::b_exp(v), &cfg).unwrap();
        got.sort_by(|a, b| a.re.total_cmp(&b.re));
        let l = cfg.l_max as i64;
        let mut want: Vec<f64> = (-l..=l).map(|m| (k + 2.0 * PI * m as f64).powi(2)).collect();
        want.sort_by(f64::total_cmp);
        for (g, w) in got.iter().zip(&want) {
            prop_assert!((g - Complex64::new(*w, 0.0)).norm() < 1e-8 * w.max(1.0));
        }
    }

    #[test]
    fn phase_fixing_forgets_input_phases(seed in 0u64..1000, a in 40.0f64..120.0) {
        let b = dispersion(&PotentialSpec::c_sin(Complex64::new(0.0, a)), &small()).unwrap();
        let phi = |n: usize, j: usize| ((seed as f64 + 1.0) * (n as f64 + 0.37) * (j as f64 + 1.3)).sin() * PI;
        let (x, _) = fix_phases(&b).unwrap();
        let (y, _) = fix_phases(&rotate_phases(&b, phi)).unwrap();
        for n in 0..2 {
            for j in 0..b.n_k() {
                for (p, q) in x.right[n][j].iter().zip(&y.right[n][j]) {
                    prop_assert!((p - q).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn intraband_hoppings_do_not_depend_on_phases(seed in 0u64..1000, a in 40.0f64..120.0) {
        let b = dispersion(&PotentialSpec::c_sin(Complex64::new(0.0, a)), &small()).unwrap();
        let u = identity_gauge(&b.k, 2);
        let t0 = hoppings_from_bands(&b, &u, 2).unwrap();
        let rotated = rotate_phases(&b, |n, j| (seed as f64 * 0.1 + n as f64 + j as f64 * 0.7).cos() * 3.0);
        let t1 = hoppings_from_bands(&rotated, &u, 2).unwrap();
        prop_assert!(t0.max_difference(&t1) < 1e-10);
    }

    #[test]
    fn hermitian_lattice_model_has_real_bands(
        d in prop::array::uniform2(-5.0f64..5.0),
        hop in prop::array::uniform3(complex(3.0)),
        k in -PI..PI,
    ) {
        let prov = Provenance { method: GaugeMethod::Projection, potential: PotentialSpec::free(), l_max: 1, n_k: 1 };
        let mut t = HoppingTable::zeros(2, 1, prov);
        t.set(0, 0, 0, Complex64::new(d[0], 0.0));
        t.set(1, 1, 0, Complex64::new(d[1], 0.0));
        for (a, m, z) in [(0, 1, hop[0]), (1, 1, hop[1])] {
            t.set(a, a, m, z);
            t.set(a, a, -m, z.conj());
        }
        t.set(0, 1, 0, hop[2]);
        t.set(1, 0, 0, hop[2].conj());
        let e = TbModel::new(&t, 1).dispersion(&[k]).unwrap();
        for band in &e {
            prop_assert!(band[0].im.abs() < 1e-9);
        }
        prop_assert!(e[0][0].re <= e[1][0].re + 1e-12);
    }

    #[test]
    fn two_band_closed_form_matches_trace_and_determinant(
        hop in prop::array::uniform4(complex(3.0)),
        k in -PI..PI,
    ) {
        let prov = Provenance { method: GaugeMethod::Projection, potential: PotentialSpec::free(), l_max: 1, n_k: 1 };
        let mut t = HoppingTable::zeros(2, 1, prov);
        t.set(0, 0, 0, hop[0]);
        t.set(1, 1, 0, hop[1]);
        t.set(0, 1, 0, hop[2]);
        t.set(1, 0, 0, hop[3]);
        let model = TbModel::new(&t, 1);
        let h = model.h_t(k);
        let e = model.dispersion(&[k]).unwrap();
        let (a, b) = (e[0][0], e[1][0]);
        prop_assert!((a + b - (h[0] + h[3])).norm() < 1e-10);
        prop_assert!((a * b - (h[0] * h[3] - h[1] * h[2])).norm() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn projection_mixing_is_unitary(a in 15.0f64..120.0) {
        let cfg = small();
        let trials = trials_at(Complex64::new(0.0, 200.0), &cfg, 16).unwrap();
        let b = dispersion(&PotentialSpec::c_sin(Complex64::new(0.0, a)), &cfg).unwrap();
        let u = projection_unitary(&b, &trials, 16).unwrap();
        prop_assert!(u.unitarity_residual() < 1e-10);
    }
}
