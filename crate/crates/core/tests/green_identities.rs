use std::f64::consts::PI;

use excited_vdw::green::{contraction_bundle, green_imag_freq, green_real_freq};
use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use proptest::prelude::*;

/// Printed formula evaluated with complex wavenumber.
fn printed(k: Complex64, sep: &Vector3<f64>) -> Matrix3<Complex64> {
    let r = sep.norm();
    let n = sep / r;
    let nn = n * n.transpose();
    let alpha = Matrix3::identity() - nn;
    let beta = Matrix3::identity() - nn * 3.0;
    let i = Complex64::i();
    let x = k * r;
    let pre = k * (i * x).exp() / (-4.0 * PI);
    alpha.map(|v| Complex64::new(v, 0.0)) * (pre / x)
        + beta.map(|v| Complex64::new(v, 0.0)) * (pre * (i / (x * x) - 1.0 / (x * x * x)))
}

fn contract(m: &Matrix3<Complex64>, a: &Vector3<f64>, b: &Vector3<f64>) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..3 {
        for j in 0..3 {
            s += m[(i, j)] * a[i] * b[j];
        }
    }
    s
}

fn rel(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / scale
}

fn unit_vec() -> impl Strategy<Value = Vector3<f64>> {
    (-1.0..1.0f64, 0.0..2.0 * PI).prop_map(|(c, p)| {
        let s = (1.0 - c * c).sqrt();
        Vector3::new(s * p.cos(), s * p.sin(), c)
    })
}

#[test]
fn value_matches_printed_formula() {
    let sep = Vector3::new(0.3, 0.5, -0.8);
    for k in [0.2, 1.0, 4.5] {
        let g = green_real_freq(k, &sep).unwrap();
        let p = printed(Complex64::new(k, 0.0), &sep);
        assert!((g.value - p).norm() < 1e-14 * p.norm());
    }
}

#[test]
fn imaginary_axis_matches_complex_substitution() {
    let dir = Vector3::new(1.0, -2.0, 0.5).normalize();
    for qr in [0.1, 1.0, 10.0] {
        let r = 1.7;
        let q = qr / r;
        let sep = dir * r;
        let g = green_imag_freq(q, &sep).unwrap();
        let p = printed(Complex64::new(0.0, q), &sep);
        let diff = (g.value.map(|v| Complex64::new(v, 0.0)) - p).norm();
        assert!(diff < 1e-12 * p.norm(), "qR = {qr}: {diff:e}");
    }
}

#[test]
fn near_field_imaginary_part() {
    let k = 1.3;
    let sep = Vector3::new(0.2, 0.4, -0.3).normalize() * (1e-3 / k);
    let g = green_real_freq(k, &sep).unwrap();
    let target = Matrix3::<f64>::identity() * (-k / (6.0 * PI));
    let err = (g.value.map(|z| z.im) - target).norm() / target.norm();
    assert!(err < 1e-5, "{err:e}");
}

fn fd_check(mu_a: &Vector3<f64>, mu_b: &Vector3<f64>, k: f64, sep: &Vector3<f64>) -> f64 {
    let b = contraction_bundle(mu_a, mu_b, k, sep).unwrap();
    let c = |k: f64, s: &Vector3<f64>| contract(&printed(Complex64::new(k, 0.0), s), mu_a, mu_b);
    let h = 1e-5 * sep.norm();
    let hk = 1e-5 * k;
    let mut grad = [Complex64::new(0.0, 0.0); 3];
    let mut dgrad = [Complex64::new(0.0, 0.0); 3];
    for (j, (g, dg)) in grad.iter_mut().zip(dgrad.iter_mut()).enumerate() {
        let mut e = Vector3::zeros();
        e[j] = h;
        *g = (c(k, &(sep + e)) - c(k, &(sep - e))) / (2.0 * h);
        let gk = |kk: f64| (c(kk, &(sep + e)) - c(kk, &(sep - e))) / (2.0 * h);
        *dg = (gk(k + hk) - gk(k - hk)) / (2.0 * hk);
    }
    let dk = (c(k + hk, sep) - c(k - hk, sep)) / (2.0 * hk);

    let stack = |re: &Vector3<f64>, im: &Vector3<f64>| [re[0], re[1], re[2], im[0], im[1], im[2]];
    let norm6 = |v: &[f64; 6]| v.iter().map(|x| x * x).sum::<f64>().sqrt();

    let an = stack(&b.grad_re, &b.grad_im);
    let fd = [grad[0].re, grad[1].re, grad[2].re, grad[0].im, grad[1].im, grad[2].im];
    let e_grad = an.iter().zip(&fd).map(|(a, f)| (a - f).powi(2)).sum::<f64>().sqrt() / norm6(&an);

    let an = stack(&b.domega_grad_re, &b.domega_grad_im);
    let fd = [dgrad[0].re, dgrad[1].re, dgrad[2].re, dgrad[0].im, dgrad[1].im, dgrad[2].im];
    let e_dgrad = an.iter().zip(&fd).map(|(a, f)| (a - f).powi(2)).sum::<f64>().sqrt() / norm6(&an);

    let scale = (b.domega_re.powi(2) + b.domega_im.powi(2)).sqrt();
    let e_dk = rel(b.domega_re, dk.re, scale).max(rel(b.domega_im, dk.im, scale));

    e_grad.max(e_dgrad).max(e_dk)
}

#[test]
fn gradients_match_finite_differences_at_kr_two() {
    let sep = Vector3::new(0.6, -0.8, 1.2).normalize() * 2.0;
    let err = fd_check(&Vector3::new(0.3, 0.9, -0.2), &Vector3::new(-0.7, 0.1, 0.6), 1.0, &sep);
    assert!(err < 1e-6, "{err:e}");
}

#[test]
fn imaginary_axis_gradient_matches_finite_differences() {
    let sep = Vector3::new(0.6, -0.8, 1.2);
    let q = 0.9;
    let g = green_imag_freq(q, &sep).unwrap();
    let h = 1e-5 * sep.norm();
    for j in 0..3 {
        let mut e = Vector3::zeros();
        e[j] = h;
        let fd = (green_imag_freq(q, &(sep + e)).unwrap().value - green_imag_freq(q, &(sep - e)).unwrap().value) / (2.0 * h);
        assert!((fd - g.grad[j]).norm() < 1e-7 * g.grad[j].norm().max(g.value.norm() / sep.norm()));
    }
    let hq = 1e-5 * q;
    let fd = (green_imag_freq(q + hq, &sep).unwrap().value - green_imag_freq(q - hq, &sep).unwrap().value) / (2.0 * hq);
    assert!((fd - g.omega_deriv).norm() < 1e-7 * g.omega_deriv.norm());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transpose_symmetry(k in 0.05..20.0f64, r in 0.05..5.0f64, n in unit_vec()) {
        let g = green_real_freq(k, &(n * r)).unwrap();
        let scale = g.value.norm();
        for i in 0..3 {
            for j in 0..3 {
                prop_assert!((g.value[(i, j)] - g.value[(j, i)]).norm() <= 1e-14 * scale);
            }
        }
    }

    #[test]
    fn parity(k in 0.05..20.0f64, r in 0.05..5.0f64, n in unit_vec()) {
        let p = green_real_freq(k, &(n * r)).unwrap();
        let m = green_real_freq(k, &(-n * r)).unwrap();
        prop_assert!((p.value - m.value).norm() <= 1e-14 * p.value.norm());
        for j in 0..3 {
            prop_assert!((p.grad[j] + m.grad[j]).norm() <= 1e-14 * p.grad[j].norm().max(1e-300));
        }
    }

    #[test]
    fn bundle_symmetric_under_dipole_swap(k in 0.1..10.0f64, r in 0.1..5.0f64, n in unit_vec(), a in unit_vec(), b in unit_vec()) {
        let x = contraction_bundle(&a, &b, k, &(n * r)).unwrap();
        let y = contraction_bundle(&b, &a, k, &(n * r)).unwrap();
        let s = x.re.abs() + x.im.abs();
        prop_assert!((x.re - y.re).abs() <= 1e-14 * s);
        prop_assert!((x.im - y.im).abs() <= 1e-14 * s);
        prop_assert!((x.grad_re - y.grad_re).norm() <= 1e-13 * (x.grad_re.norm() + x.grad_im.norm()));
    }

    #[test]
    fn analytic_derivatives_match_finite_differences(kr in 0.3..10.0f64, n in unit_vec(), a in unit_vec(), b in unit_vec()) {
        let k = 1.0;
        let err = fd_check(&a, &b, k, &(n * (kr / k)));
        prop_assert!(err < 1e-6, "kR = {}: {:e}", kr, err);
    }

    #[test]
    fn imaginary_axis_is_real_and_agrees(qr in 0.1..10.0f64, n in unit_vec()) {
        let r = 1.3;
        let g = green_imag_freq(qr / r, &(n * r)).unwrap();
        let p = printed(Complex64::new(0.0, qr / r), &(n * r));
        prop_assert!((g.value.map(|v| Complex64::new(v, 0.0)) - p).norm() <= 1e-12 * p.norm());
    }
}
