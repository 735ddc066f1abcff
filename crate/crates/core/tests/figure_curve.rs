use excited_vdw::figure::*;
use excited_vdw::options::EvalOptions;

fn curves(spec: &FigureSpec) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<bool>) {
    let rows = figure_net_force_curve(spec, &EvalOptions::default()).unwrap();
    (
        rows.iter().map(|r| r.k0r).collect(),
        rows.iter().map(|r| r.net_identical_normalized).collect(),
        rows.iter().map(|r| r.net_dissimilar_normalized).collect(),
        rows.iter().map(|r| r.validity_flag).collect(),
    )
}

// [REFERENCE] first zero near 1.3 and extremum near 2.5 for identical atoms
#[test]
fn identical_curve_features() {
    let (x, y, _, _) = curves(&FigureSpec::default());
    let f = curve_features(&x, &y, 1.3);
    assert!((f.first_zero.unwrap() - 1.3).abs() <= 0.15, "{f:?}");
    assert!((f.extremum.unwrap() - 2.5).abs() <= 0.2, "{f:?}");
}

// [REFERENCE] dissimilar curve peaks near 1.3
#[test]
fn dissimilar_curve_maximum() {
    let (x, _, y, _) = curves(&FigureSpec::default());
    let f = curve_features(&x, &y, 0.0);
    assert!((f.extremum.unwrap() - 1.3).abs() <= 0.15, "{f:?}");
}

// [REFERENCE] the perturbative domain starts around the vertical line of the figure
#[test]
fn validity_flag_off_below_threshold() {
    let (x, _, _, v) = curves(&FigureSpec::default());
    for (k, ok) in x.iter().zip(&v) {
        if *k < 1.3 {
            assert!(!ok, "flag set at k0R={k}");
        }
        if *k > 1.5 && *k < 5.0 {
            assert!(ok, "flag clear at k0R={k}");
        }
    }
}

// [DERIVED] the stationary detuned force decays as e^{-Γ_A T} and its
// normalization does not depend on T
#[test]
fn dissimilar_curve_decays_with_observation_time() {
    let spec = FigureSpec {
        points: 8,
        ..Default::default()
    };
    let a = figure_net_force_curve(&spec, &EvalOptions::default()).unwrap();
    let b = figure_net_force_curve(&FigureSpec { gamma_t: 2.0, ..spec }, &EvalOptions::default()).unwrap();
    for (ra, rb) in a.iter().zip(&b) {
        let r = rb.net_dissimilar_normalized / ra.net_dissimilar_normalized;
        assert!((r - (-1f64).exp()).abs() < 1e-12, "{r}");
    }
}

// [REFERENCE] raw detuned force is of order 1/(ΔT) times the identical one
#[test]
fn dissimilar_raw_magnitude_is_suppressed_by_delta_t() {
    let spec = FigureSpec::default();
    let rows = figure_net_force_curve(&spec, &EvalOptions::default()).unwrap();
    let delta_t = spec.delta_ratio * spec.gamma_t / spec.gamma_ratio;
    let peak = |f: &dyn Fn(&FigureRow) -> f64| rows.iter().map(|r| f(r).abs()).fold(0.0, f64::max);
    let raw_ratio = peak(&|r| r.net_dissimilar_normalized) / peak(&|r| r.net_identical_normalized) / delta_t;
    assert!(raw_ratio * delta_t > 0.1 && raw_ratio * delta_t < 10.0, "{raw_ratio:e}");
}

#[test]
fn equal_components_model_runs() {
    let spec = FigureSpec {
        dipoles: DipoleModel::EqualComponents,
        points: 16,
        ..Default::default()
    };
    let rows = figure_net_force_curve(&spec, &EvalOptions::default()).unwrap();
    assert_eq!(rows.len(), 16);
    assert_eq!(rows[0].k0r, 0.5);
    assert_eq!(rows[15].k0r, 8.0);
}
