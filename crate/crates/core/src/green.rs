//! Free-space dyadic Green tensor of the electric field.
//!
//! The real-frequency tensor follows the sign convention
//!
//! ```text
//! G(kR) = (k e^{ikR} / -4π) [ α/(kR) + i β/(kR)^2 - β/(kR)^3 ]
//! ```
//!
//! with `α = I - R̂R̂` and `β = I - 3R̂R̂`, so that `Im G → -(k/6π) I` as
//! `kR → 0`. On the imaginary axis `k = iq` the same expression becomes the
//! real tensor `-(e^{-qR}/4πR) [α + β/(qR) + β/(qR)^2]`, which is evaluated
//! directly in that form.
//!
//! Internally every tensor is `a(R) α + b(R) β`; gradients and frequency
//! derivatives come from closed-form derivatives of the two radial
//! coefficients plus the derivative of `R̂R̂`.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};

const MIN_KR: f64 = 1e-8;

/// The two transverse/longitudinal projector combinations of the Green tensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projectors {
    /// `I - R̂R̂`
    pub alpha: Matrix3<f64>,
    /// `I - 3R̂R̂`
    pub beta: Matrix3<f64>,
}

pub fn projectors(separation: &Vector3<f64>) -> Result<Projectors> {
    let n = unit(separation)?;
    let nn = n * n.transpose();
    let id = Matrix3::identity();
    Ok(Projectors {
        alpha: id - nn,
        beta: id - nn * 3.0,
    })
}

/// A Green tensor together with its derivatives.
///
/// `grad[j]` is `∂G/∂R_j` with respect to the separation vector. For the
/// imaginary-axis tensor the frequency derivatives are taken with respect to
/// `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenEval<T: nalgebra::Scalar> {
    pub value: Matrix3<T>,
    pub grad: [Matrix3<T>; 3],
    pub omega_deriv: Matrix3<T>,
    /// Mixed derivative `∂_ω ∂G/∂R_j`.
    pub omega_grad: [Matrix3<T>; 3],
}

/// Scalar contraction `μ_A·G·μ_B` split into real and imaginary parts, with
/// spatial gradients and derivatives with respect to `ω = k`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ContractionBundle {
    pub re: f64,
    pub im: f64,
    pub grad_re: Vector3<f64>,
    pub grad_im: Vector3<f64>,
    pub domega_re: f64,
    pub domega_im: f64,
    pub domega_grad_re: Vector3<f64>,
    pub domega_grad_im: Vector3<f64>,
}

/// Radial coefficients of `G = a α + b β` and their derivatives in `R` and in
/// the frequency variable.
#[derive(Debug, Clone, Copy)]
struct Radial<T> {
    a: T,
    b: T,
    a_r: T,
    b_r: T,
    a_k: T,
    b_k: T,
    a_kr: T,
    b_kr: T,
}

fn unit(separation: &Vector3<f64>) -> Result<Vector3<f64>> {
    if !separation.iter().all(|x| x.is_finite()) {
        return Err(Error::invalid("separation", "must be finite"));
    }
    let r = separation.norm();
    if r == 0.0 {
        return Err(Error::CoincidentAtoms);
    }
    Ok(separation / r)
}

fn real_radial(k: f64, r: f64) -> Radial<Complex64> {
    let i = Complex64::i();
    let x = k * r;
    let e = -Complex64::from_polar(1.0, x) / (4.0 * PI * r);
    let u = i / x - 1.0 / (x * x);
    let du = -i / (x * x) + 2.0 / (x * x * x);
    let ddu = 2.0 * i / (x * x * x) - 6.0 / (x * x * x * x);

    let e_r = e * (i * k - 1.0 / r);
    let e_k = i * r * e;
    let e_kr = -x * e;

    Radial {
        a: e,
        b: e * u,
        a_r: e_r,
        b_r: e_r * u + e * k * du,
        a_k: e_k,
        b_k: e_k * u + e * r * du,
        a_kr: e_kr,
        b_kr: e_kr * u + e_r * r * du + e_k * k * du + e * (du + x * ddu),
    }
}

fn imag_radial(q: f64, r: f64) -> Radial<f64> {
    let y = q * r;
    let f = -(-y).exp() / (4.0 * PI * r);
    let v = 1.0 / y + 1.0 / (y * y);
    let dv = -1.0 / (y * y) - 2.0 / (y * y * y);
    let ddv = 2.0 / (y * y * y) + 6.0 / (y * y * y * y);

    let f_r = f * (-q - 1.0 / r);
    let f_q = -r * f;
    let f_qr = y * f;

    Radial {
        a: f,
        b: f * v,
        a_r: f_r,
        b_r: f_r * v + f * q * dv,
        a_k: f_q,
        b_k: f_q * v + f * r * dv,
        a_kr: f_qr,
        b_kr: f_qr * v + f_r * r * dv + f_q * q * dv + f * (dv + y * ddv),
    }
}

/// Builds `P I - Q R̂R̂` together with its gradient, where `P = a + b`,
/// `Q = a + 3b`.
fn assemble<T>(p: T, q: T, p_r: T, q_r: T, n: &Vector3<f64>, r: f64) -> (Matrix3<T>, [Matrix3<T>; 3])
where
    T: nalgebra::Scalar + Copy + std::ops::Mul<f64, Output = T> + std::ops::Sub<Output = T> + std::ops::Add<Output = T> + Zero,
{
    let mut value = Matrix3::from_element(T::zero());
    let mut grad = [value; 3];
    for a in 0..3 {
        for b in 0..3 {
            let delta = if a == b { 1.0 } else { 0.0 };
            value[(a, b)] = p * delta - q * (n[a] * n[b]);
            for (j, g) in grad.iter_mut().enumerate() {
                let dj = |i: usize| if i == j { 1.0 } else { 0.0 };
                let dnn = (dj(a) * n[b] + dj(b) * n[a] - 2.0 * n[a] * n[b] * n[j]) / r;
                g[(a, b)] = p_r * (n[j] * delta) - q_r * (n[j] * n[a] * n[b]) - q * dnn;
            }
        }
    }
    (value, grad)
}

fn tensor_eval<T>(rad: Radial<T>, n: &Vector3<f64>, r: f64) -> GreenEval<T>
where
    T: nalgebra::Scalar
        + Copy
        + std::ops::Mul<f64, Output = T>
        + std::ops::Sub<Output = T>
        + std::ops::Add<Output = T>
        + Zero,
{
    let pq = |a: T, b: T| (a + b, a + b * 3.0);
    let (p, q) = pq(rad.a, rad.b);
    let (p_r, q_r) = pq(rad.a_r, rad.b_r);
    let (p_k, q_k) = pq(rad.a_k, rad.b_k);
    let (p_kr, q_kr) = pq(rad.a_kr, rad.b_kr);
    let (value, grad) = assemble(p, q, p_r, q_r, n, r);
    let (omega_deriv, omega_grad) = assemble(p_k, q_k, p_kr, q_kr, n, r);
    GreenEval {
        value,
        grad,
        omega_deriv,
        omega_grad,
    }
}

fn check_k(k: f64, r: f64) -> Result<()> {
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::invalid("k", format!("must be positive and finite, got {k}")));
    }
    if k * r < MIN_KR {
        return Err(Error::NearFieldUnderflow { kr: k * r });
    }
    Ok(())
}

/// Green tensor at real wavenumber `k`, with gradient and `∂_k` at fixed `R`.
pub fn green_real_freq(k: f64, separation: &Vector3<f64>) -> Result<GreenEval<Complex64>> {
    let n = unit(separation)?;
    let r = separation.norm();
    check_k(k, r)?;
    Ok(tensor_eval(real_radial(k, r), &n, r))
}

/// Green tensor on the imaginary axis, `G(iq)`, in its explicitly real form.
///
/// The frequency derivative fields hold `∂_q`. At `q = 0` the tensor diverges;
/// integrands that need the small-`q` region use [`imag_axis_q2_contraction`].
pub fn green_imag_freq(q: f64, separation: &Vector3<f64>) -> Result<GreenEval<f64>> {
    let n = unit(separation)?;
    let r = separation.norm();
    if !(q.is_finite() && q >= 0.0) {
        return Err(Error::invalid("q", format!("must be non-negative and finite, got {q}")));
    }
    Ok(tensor_eval(imag_radial(q, r), &n, r))
}

fn contract(m: &Matrix3<Complex64>, mu_a: &Vector3<f64>, mu_b: &Vector3<f64>) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..3 {
        for j in 0..3 {
            acc += m[(i, j)] * (mu_a[i] * mu_b[j]);
        }
    }
    acc
}

fn contract_grad(g: &[Matrix3<Complex64>; 3], mu_a: &Vector3<f64>, mu_b: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let mut re = Vector3::zeros();
    let mut im = Vector3::zeros();
    for j in 0..3 {
        let c = contract(&g[j], mu_a, mu_b);
        re[j] = c.re;
        im[j] = c.im;
    }
    (re, im)
}

/// All contractions of `μ_A·G(k)·μ_B` used by the force, energy and emission
/// formulas, from a single tensor evaluation.
pub fn contraction_bundle(
    mu_a: &Vector3<f64>,
    mu_b: &Vector3<f64>,
    k: f64,
    separation: &Vector3<f64>,
) -> Result<ContractionBundle> {
    let g = green_real_freq(k, separation)?;
    let value = contract(&g.value, mu_a, mu_b);
    let dk = contract(&g.omega_deriv, mu_a, mu_b);
    let (grad_re, grad_im) = contract_grad(&g.grad, mu_a, mu_b);
    let (domega_grad_re, domega_grad_im) = contract_grad(&g.omega_grad, mu_a, mu_b);
    Ok(ContractionBundle {
        re: value.re,
        im: value.im,
        grad_re,
        grad_im,
        domega_re: dk.re,
        domega_im: dk.im,
        domega_grad_re,
        domega_grad_im,
    })
}

/// Dipole geometry shared by all contractions at a fixed separation.
#[derive(Debug, Clone, Copy)]
pub(crate) struct DipoleGeometry {
    n: Vector3<f64>,
    r: f64,
    /// `μ_A·μ_B`
    s: f64,
    /// `(μ_A·R̂)(μ_B·R̂)`
    p: f64,
    grad_p: Vector3<f64>,
}

impl DipoleGeometry {
    pub(crate) fn new(mu_a: &Vector3<f64>, mu_b: &Vector3<f64>, separation: &Vector3<f64>) -> Result<Self> {
        let n = unit(separation)?;
        let r = separation.norm();
        let (an, bn) = (mu_a.dot(&n), mu_b.dot(&n));
        let p = an * bn;
        Ok(DipoleGeometry {
            n,
            r,
            s: mu_a.dot(mu_b),
            p,
            grad_p: (mu_a * bn + mu_b * an - n * (2.0 * p)) / r,
        })
    }

    pub(crate) fn distance(&self) -> f64 {
        self.r
    }
}

/// `q^2 μ_A·G(iq)·μ_B` and its gradient, finite at `q = 0`.
///
/// Uses `q^2 G(iq) = -(e^{-qR}/4πR) [q^2 α + (q/R + 1/R^2) β]`.
pub(crate) fn imag_axis_q2_contraction(q: f64, geo: &DipoleGeometry) -> (f64, Vector3<f64>) {
    let r = geo.r;
    let f = -(-q * r).exp() / (4.0 * PI * r);
    let f_r = f * (-q - 1.0 / r);
    let w = q / r + 1.0 / (r * r);
    let w_r = -q / (r * r) - 2.0 / (r * r * r);

    let a = q * q * f;
    let b = f * w;
    let a_r = q * q * f_r;
    let b_r = f_r * w + f * w_r;

    let (p, qq) = (a + b, a + 3.0 * b);
    let (p_r, qq_r) = (a_r + b_r, a_r + 3.0 * b_r);
    let value = p * geo.s - qq * geo.p;
    let grad = geo.n * (p_r * geo.s - qq_r * geo.p) - geo.grad_p * qq;
    (value, grad)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fro<T: nalgebra::ComplexField>(m: &Matrix3<T>) -> f64
    where
        T::RealField: Into<f64>,
    {
        m.norm().into()
    }

    #[test]
    fn projectors_axis_aligned() {
        let p = projectors(&Vector3::new(0.0, 0.0, 2.0)).unwrap();
        assert_eq!(p.alpha, Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, 0.0)));
        assert_eq!(p.beta, Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -2.0)));
        let z = Vector3::z();
        assert_eq!(z.dot(&(p.alpha * z)), 0.0);
        assert_eq!(z.dot(&(p.beta * z)), -2.0);
    }

    #[test]
    fn projectors_reject_zero_separation() {
        assert_eq!(projectors(&Vector3::zeros()), Err(Error::CoincidentAtoms));
    }

    #[test]
    fn projector_traces() {
        let p = projectors(&Vector3::new(0.3, -1.2, 0.7)).unwrap();
        assert!((p.alpha.trace() - 2.0).abs() < 1e-15);
        assert!(p.beta.trace().abs() < 1e-15);
        let n = Vector3::new(0.3, -1.2, 0.7).normalize();
        assert!((p.alpha * n).norm() < 1e-15);
        assert!((p.beta * n + 2.0 * n).norm() < 1e-15);
    }

    #[test]
    fn axial_dipole_real_frequency() {
        let (k, r) = (1.7, 0.9);
        let sep = Vector3::new(0.0, 0.0, r);
        let mu = Vector3::z();
        let b = contraction_bundle(&mu, &mu, k, &sep).unwrap();
        let i = Complex64::i();
        let x = k * r;
        let expected = k * Complex64::from_polar(1.0, x) / (2.0 * PI) * (i / (x * x) - 1.0 / (x * x * x));
        assert!((b.re - expected.re).abs() < 1e-14 * expected.norm());
        assert!((b.im - expected.im).abs() < 1e-14 * expected.norm());
    }

    #[test]
    fn axial_dipole_imaginary_axis() {
        let (q, r) = (0.8, 1.3);
        let g = green_imag_freq(q, &Vector3::new(0.0, 0.0, r)).unwrap();
        let y = q * r;
        let expected = (-y).exp() / (2.0 * PI * r) * (1.0 / y + 1.0 / (y * y));
        assert!((g.value[(2, 2)] - expected).abs() < 1e-14 * expected);
    }

    #[test]
    fn imaginary_axis_envelope() {
        let r = 2.0;
        let g = green_imag_freq(50.0 / r, &Vector3::new(r, 0.0, 0.0)).unwrap();
        let bound = (-50.0f64).exp() / (4.0 * PI * r) * 2.0;
        assert!(g.value.iter().all(|x| x.abs() < bound));
    }

    #[test]
    fn far_field_is_transverse_one_over_r() {
        let (k, r) = (1.0, 1e3);
        let g = green_real_freq(k, &Vector3::new(0.0, r, 0.0)).unwrap();
        let leading = k / (4.0 * PI * k * r) * 2f64.sqrt();
        let rel = (fro(&g.value) - leading).abs() / leading;
        assert!(rel < 2e-3, "{rel}");
    }

    #[test]
    fn near_field_underflow_is_an_error() {
        let e = green_real_freq(1.0, &Vector3::new(0.0, 0.0, 1e-9)).unwrap_err();
        assert!(matches!(e, Error::NearFieldUnderflow { .. }));
    }

    #[test]
    fn crossed_dipoles_bundle_is_zero() {
        let b = contraction_bundle(&Vector3::x(), &Vector3::y(), 2.0, &Vector3::new(0.0, 0.0, 1.0)).unwrap();
        assert_eq!(b, ContractionBundle::default());
    }

    #[test]
    fn scaled_imaginary_axis_matches_tensor() {
        let sep = Vector3::new(0.4, -0.3, 1.1);
        let (mu_a, mu_b) = (Vector3::new(1.0, 0.2, -0.5), Vector3::new(-0.3, 0.9, 0.4));
        let geo = DipoleGeometry::new(&mu_a, &mu_b, &sep).unwrap();
        for q in [0.05, 0.7, 4.0] {
            let g = green_imag_freq(q, &sep).unwrap();
            let (v, grad) = imag_axis_q2_contraction(q, &geo);
            let direct = q * q * mu_a.dot(&(g.value * mu_b));
            assert!((v - direct).abs() < 1e-13 * direct.abs());
            for j in 0..3 {
                let d = q * q * mu_a.dot(&(g.grad[j] * mu_b));
                assert!((grad[j] - d).abs() < 1e-12 * grad.norm());
            }
        }
        let (v0, _) = imag_axis_q2_contraction(0.0, &geo);
        let r = sep.norm();
        let expected = -(geo.s - 3.0 * geo.p) / (4.0 * PI * r * r * r);
        assert!((v0 - expected).abs() < 1e-15 * expected.abs());
    }
}
