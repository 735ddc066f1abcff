use std::f64::consts::LN_2;

use excited_vdw::dissimilar::*;
use excited_vdw::identical::*;
use excited_vdw::options::{EvalOptions, Fb0Sign};
use excited_vdw::params::{dipole_magnitude_for_gamma, AtomPairConfig, AtomSpec, EvalPoint};
use nalgebra::Vector3;
use proptest::prelude::*;

fn unit_vec() -> impl Strategy<Value = Vector3<f64>> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
        .prop_filter("non-degenerate", |(x, y, z)| (x * x + y * y + z * z) > 0.05)
        .prop_map(|(x, y, z)| Vector3::new(x, y, z).normalize())
}

fn pair(wb: f64, mu_a: Vector3<f64>, mu_b: Vector3<f64>, sep: Vector3<f64>) -> AtomPairConfig {
    AtomPairConfig::new(
        AtomSpec::new(1.0, 0.05, mu_a).unwrap(),
        AtomSpec::new(wb, 0.05, mu_b).unwrap(),
        sep,
    )
    .unwrap()
}

fn identical(mu_a: Vector3<f64>, mu_b: Vector3<f64>, sep: Vector3<f64>) -> IdenticalConfig {
    IdenticalConfig::from_pair(&pair(1.0, mu_a, mu_b, sep))
}

fn opts() -> EvalOptions {
    EvalOptions::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // [DERIVED] algebraic-sum oracle
    #[test]
    fn identical_net_is_sum_of_atoms(kr in 0.5..8.0f64, gt in 0.1..3.0f64, n in unit_vec(), a in unit_vec(), b in unit_vec()) {
        let c = identical(a, b, n * kr);
        let t = EvalPoint::new(gt / 0.05).unwrap();
        prop_assume!(t.t > kr);
        let fa = force_a_identical(&c, t, &opts()).unwrap();
        let fb = force_b_identical(&c, t, &opts()).unwrap();
        let net = net_force_identical(&c, t, &opts()).unwrap();
        let scale = fa.total.norm() + fb.total.norm();
        prop_assert!((fa.total + fb.total - net.total).norm() <= 1e-12 * scale);
    }

    // [DERIVED] block-sum oracle
    #[test]
    fn dissimilar_net_is_sum_of_atoms(kr in 0.5..8.0f64, eps in 1e-4..1e-3f64, n in unit_vec(), a in unit_vec(), b in unit_vec()) {
        let c = pair(1.0 - eps, a, b, n * kr);
        let t = EvalPoint::new(20.0).unwrap();
        let fa = force_a_dissimilar(&c, t, &opts()).unwrap();
        let fb = force_b_dissimilar(&c, t, &opts()).unwrap();
        let net = net_force_dissimilar(&c, t, &opts()).unwrap();
        let scale = fa.total.norm() + fb.total.norm();
        prop_assert!((fa.total + fb.total - net.total).norm() <= 1e-12 * scale);
        let stationary = fa.resonant_over_delta + fa.resonant_sum_freq + fb.resonant_over_delta + fb.resonant_sum_freq;
        prop_assert!((stationary - net.resonant_over_delta).norm() <= 1e-12 * fa.resonant_over_delta.norm());
    }

    // [DERIVED] every force is bilinear in μ_A·G·μ_B, hence quartic in a common dipole scale
    #[test]
    fn forces_scale_as_fourth_power_of_dipoles(s in 0.1..10.0f64, kr in 0.5..6.0f64, n in unit_vec(), a in unit_vec(), b in unit_vec()) {
        let t = EvalPoint::new(30.0).unwrap();
        let f1 = force_a_dissimilar(&pair(0.9, a, b, n * kr), t, &opts()).unwrap().total;
        let fs = force_a_dissimilar(&pair(0.9, a * s, b * s, n * kr), t, &opts()).unwrap().total;
        prop_assert!((fs - f1 * s.powi(4)).norm() <= 1e-9 * fs.norm());
        let g1 = net_force_identical(&identical(a, b, n * kr), t, &opts()).unwrap().total;
        let gs = net_force_identical(&identical(a * s, b * s, n * kr), t, &opts()).unwrap().total;
        prop_assert!((gs - g1 * s.powi(4)).norm() <= 1e-12 * gs.norm());
    }

    // [DERIVED] R → -R flips every force
    #[test]
    fn forces_are_odd_under_inversion(kr in 0.5..6.0f64, n in unit_vec(), a in unit_vec(), b in unit_vec()) {
        let t = EvalPoint::new(30.0).unwrap();
        let f = force_b_dissimilar(&pair(0.9, a, b, n * kr), t, &opts()).unwrap().total;
        let g = force_b_dissimilar(&pair(0.9, a, b, -n * kr), t, &opts()).unwrap().total;
        prop_assert!((f + g).norm() <= 1e-9 * f.norm());
    }
}

// [DERIVED] momentum balance against the net force, one-photon blocks
#[test]
fn identical_conservation_on_grid() {
    let g = 1e-8;
    let mag = dipole_magnitude_for_gamma(1.0, g);
    let a = Vector3::new(0.3, 0.8, -0.4).normalize() * mag;
    let b = Vector3::new(-0.5, 0.2, 0.9).normalize() * mag;
    for kr in [1.5, 2.5, 4.0] {
        for gt in [0.5, 1.0] {
            let c = IdenticalConfig::from_pair(
                &AtomPairConfig::new(
                    AtomSpec::new(1.0, g, a).unwrap(),
                    AtomSpec::new(1.0, g, b).unwrap(),
                    Vector3::new(0.3, -0.2, 1.0).normalize() * kr,
                )
                .unwrap(),
            );
            let t = EvalPoint::new(gt / g).unwrap();
            let f = net_force_identical(&c, t, &opts()).unwrap().total;
            let p = momentum_rate_identical(&c, t, &opts()).unwrap().value;
            let r = (p + f).norm() / f.norm();
            assert!(r < 1e-6, "kR={kr} ΓT={gt}: {r:e}");
        }
    }
}

// [DERIVED] the imbalance left by the sum-frequency terms is first order in Δ/ω
#[test]
fn dissimilar_conservation_residual_is_order_detuning() {
    let g = 1e-8;
    for d in [1e-2, 1e-3, 1e-4] {
        let mag = dipole_magnitude_for_gamma(1.0, g);
        let c = AtomPairConfig::new(
            AtomSpec::new(1.0, g, Vector3::new(0.3, 0.8, -0.4).normalize() * mag).unwrap(),
            AtomSpec::new(1.0 - d, g, Vector3::new(-0.5, 0.2, 0.9).normalize() * mag).unwrap(),
            Vector3::new(0.3, -0.2, 1.0).normalize() * 2.5,
        )
        .unwrap();
        let t = EvalPoint::new(1.0 / g).unwrap();
        let f = net_force_dissimilar(&c, t, &opts()).unwrap().total;
        let p = momentum_rate_dissimilar(&c, t, &opts()).unwrap().value;
        let r = (p + f).norm() / f.norm();
        assert!(r < 10.0 * d, "Δ/ω={d}: {r:e}");
    }
}

// [REFERENCE] off-resonant block changes sign at Γ_A T = ln 2
#[test]
fn off_resonant_block_vanishes_at_ln2() {
    let gamma = 1e-3;
    let c = IdenticalConfig::new(1.0, gamma, Vector3::new(0.2, 0.5, 0.8), Vector3::new(0.0, 0.4, 1.9)).unwrap();
    let at = |x: f64| {
        force_a_identical(&c, EvalPoint::new(x / gamma).unwrap(), &opts())
            .unwrap()
            .off_resonant
    };
    let reference = at(3.0);
    assert!(at(LN_2 * (1.0 - 1e-9)).dot(&reference) < 0.0);
    assert!(at(LN_2 * (1.0 + 1e-9)).dot(&reference) > 0.0);
    assert!(at(LN_2).norm() < 1e-15 * reference.norm());
}

// [TRIVIAL] axial symmetry
#[test]
fn momentum_is_axial_for_dipoles_along_separation() {
    let z = Vector3::z();
    let c = IdenticalConfig::new(1.0, 0.01, z * 0.1, z * 2.0).unwrap();
    let p = momentum_rate_identical(&c, EvalPoint::new(50.0).unwrap(), &opts()).unwrap().value;
    assert!(p.x.abs() <= 1e-14 * p.norm() && p.y.abs() <= 1e-14 * p.norm());
    assert!(p.z != 0.0);
}

// [REFERENCE] forward and backward emission differ
#[test]
fn emission_breaks_parity() {
    let c = pair(0.95, Vector3::new(0.3, 0.8, -0.4), Vector3::new(-0.5, 0.2, 0.9), Vector3::z() * 2.0);
    let t = EvalPoint::new(30.0).unwrap();
    let em = DissimilarEmission::new(&c, t, &opts()).unwrap();
    let fwd = em.rate(&Vector3::new(0.4, 0.1, 0.6)).unwrap();
    let bwd = em.rate(&Vector3::new(0.4, 0.1, -0.6)).unwrap();
    assert!((fwd - bwd).abs() > 1e-6 * fwd.abs().max(bwd.abs()));
}

// [TRIVIAL] crossed dipoles
#[test]
fn crossed_dipoles_give_exact_zeros() {
    let c = pair(0.9, Vector3::x(), Vector3::y(), Vector3::z() * 2.0);
    let t = EvalPoint::new(50.0).unwrap();
    assert_eq!(force_a_dissimilar(&c, t, &opts()).unwrap().total, Vector3::zeros());
    assert_eq!(energy_b_dissimilar(&c, t, &opts()).unwrap().total, 0.0);
    assert_eq!(momentum_rate_dissimilar(&c, t, &opts()).unwrap().value, Vector3::zeros());
    let id = identical(Vector3::x(), Vector3::y(), Vector3::z() * 2.0);
    assert_eq!(net_force_identical(&id, t, &opts()).unwrap().total, Vector3::zeros());
    assert_eq!(emission_rate_identical(&id, t, &Vector3::new(0.1, 0.2, 0.3), &opts()).unwrap(), 0.0);
}

// [DERIVED] block-difference oracle for the literal FB0 sign
#[test]
fn printed_fb0_sign_breaks_additivity_by_t_linear_pattern() {
    let c = identical(Vector3::new(0.3, 0.8, -0.4), Vector3::new(-0.5, 0.2, 0.9), Vector3::new(0.5, 0.1, 1.8));
    let t = EvalPoint::new(10.0).unwrap();
    let printed = EvalOptions {
        fb0_sign: Fb0Sign::AsPrinted,
        ..opts()
    };
    let a = force_b_identical(&c, t, &printed).unwrap();
    let b = force_b_identical(&c, t, &opts()).unwrap();
    assert_eq!(a.frequency_derivative, b.frequency_derivative);
    assert!((a.t_linear + b.t_linear).norm() <= 1e-15 * a.t_linear.norm());
}

// [DERIVED] energy/force asymmetry: off blocks pair up, resonant blocks do not
#[test]
fn energy_gradient_differs_from_force_on_resonant_blocks() {
    let c = pair(0.9, Vector3::new(0.3, 0.8, -0.4), Vector3::new(-0.5, 0.2, 0.9), Vector3::new(0.3, -0.2, 1.0) * 2.0);
    let t = EvalPoint::new(30.0).unwrap();
    let h = 1e-4;
    let resonant = |sep: Vector3<f64>| {
        let w = energy_a_dissimilar(&AtomPairConfig { separation: sep, ..c }, t, &opts()).unwrap();
        w.resonant_over_delta + w.resonant_cos + w.resonant_sin + w.resonant_sum_freq
    };
    let grad = Vector3::from_fn(|j, _| {
        let e = Vector3::ith(j, h);
        (resonant(c.separation + e) - resonant(c.separation - e)) / (2.0 * h)
    });
    let f = force_a_dissimilar(&c, t, &opts()).unwrap();
    let fr = f.resonant_over_delta + f.resonant_cos + f.resonant_sin + f.resonant_sum_freq;
    assert!((fr - grad / 2.0).norm() > 1e-3 * fr.norm());
}
