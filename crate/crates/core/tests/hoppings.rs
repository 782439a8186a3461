use nhband_core::spectra::{dispersion, ModelConfig, PotentialSpec};
use nhband_core::tightbinding::{hoppings_from_bands, hoppings_real_space, HoppingTable};
use nhband_core::wannier::{build_wannier, projection_unitary, trials_at, TrialSet};
use nhband_core::Complex64;

const N_X: usize = 64;

fn table(trials: &TrialSet, c: f64) -> (HoppingTable, HoppingTable) {
    let cfg = ModelConfig::default();
    let b = dispersion(&PotentialSpec::c_sin(Complex64::new(0.0, c)), &cfg).unwrap().leading(2);
    let u = projection_unitary(&b, trials, N_X).unwrap();
    let k_route = hoppings_from_bands(&b, &u, 2).unwrap();
    let set = build_wannier(&b, &u, N_X, (-2, 2)).unwrap();
    let x_route = hoppings_real_space(&b, &u, &set, 2).unwrap();
    (k_route, x_route)
}

#[test]
fn hoppings_barely_depend_on_trial_source() {
    let cfg = ModelConfig::default();
    let t200 = trials_at(Complex64::new(0.0, 200.0), &cfg, N_X).unwrap();
    let t400 = trials_at(Complex64::new(0.0, 400.0), &cfg, N_X).unwrap();
    let (a, a_real) = table(&t200, 20.0);
    let (b, _) = table(&t400, 20.0);

    // Momentum-space and real-space routes agree below the band crossing too.
    assert!(a.max_difference(&a_real) < 1e-8, "{}", a.max_difference(&a_real));

    let floor = 1e-2 * a.iter().map(|(_, _, _, t)| t.norm()).fold(0.0, f64::max);
    let mut worst = 0.0f64;
    for ((_, _, _, x), (_, _, _, y)) in a.iter().zip(b.iter()) {
        if x.norm() > floor {
            worst = worst.max((x.norm() - y.norm()).abs() / x.norm());
        }
    }
    assert!(worst < 0.02, "largest relative change {worst}");
}
