//! Numerical integration: adaptive Gauss-Kronrod on finite intervals, the
//! imaginary-frequency integrals over `q ∈ [0, ∞)`, and a product rule over
//! the unit sphere.

use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::green::{imag_axis_q2_contraction, DipoleGeometry};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// `(n_theta, n_phi)`; `n_theta` is split evenly between the two
    /// hemispheres.
    pub angular_nodes: (usize, usize),
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        QuadratureSettings {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_subdivisions: 60,
            angular_nodes: (128, 64),
        }
    }
}

impl QuadratureSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::invalid("rel_tol", "must be positive"));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::invalid("abs_tol", "must be positive"));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::invalid("max_subdivisions", "must be at least 1"));
        }
        let (nt, np) = self.angular_nodes;
        if nt < 8 || np < 8 {
            return Err(Error::invalid("angular_nodes", "node counts must be at least 8"));
        }
        if nt % 4 != 0 || np % 2 != 0 {
            return Err(Error::invalid(
                "angular_nodes",
                "n_theta must be a multiple of 4 and n_phi even",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult<V> {
    pub value: V,
    pub error_estimate: V,
    pub evaluations: usize,
}

impl<V: Default> QuadratureResult<V> {
    fn zero() -> Self {
        QuadratureResult {
            value: V::default(),
            error_estimate: V::default(),
            evaluations: 0,
        }
    }
}

// 21-point Kronrod extension of the 10-point Gauss rule; abscissae in
// decreasing order, the last one is the centre.
const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208980876102,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];
// Gauss weights for XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

#[derive(Debug, Clone, Copy)]
struct Panel<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: [f64; N],
}

impl<const N: usize> Panel<N> {
    fn err_norm(&self) -> f64 {
        norm(&self.error)
    }
}

fn norm<const N: usize>(v: &[f64; N]) -> f64 {
    v.iter().fold(0.0, |acc, &x| acc.hypot(x))
}

fn gk21<const N: usize, F: Fn(f64) -> [f64; N]>(f: &F, a: f64, b: f64) -> Panel<N> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = [0.0; N];
    let mut gauss = [0.0; N];
    let mut abs_k = [0.0; N];
    for i in 0..N {
        kron[i] = WGK[10] * fc[i];
        abs_k[i] = WGK[10] * fc[i].abs();
    }
    let mut samples = Vec::with_capacity(21);
    samples.push(fc);
    for j in 0..10 {
        let x = h * XGK[j];
        let f1 = f(c - x);
        let f2 = f(c + x);
        for i in 0..N {
            kron[i] += WGK[j] * (f1[i] + f2[i]);
            abs_k[i] += WGK[j] * (f1[i].abs() + f2[i].abs());
            if j % 2 == 1 {
                gauss[i] += WG[j / 2] * (f1[i] + f2[i]);
            }
        }
        samples.push(f1);
        samples.push(f2);
    }
    let mut value = [0.0; N];
    let mut error = [0.0; N];
    for i in 0..N {
        let mean = 0.5 * kron[i];
        let mut asc = WGK[10] * (fc[i] - mean).abs();
        for (j, pair) in samples[1..].chunks(2).enumerate() {
            asc += WGK[j] * ((pair[0][i] - mean).abs() + (pair[1][i] - mean).abs());
        }
        asc *= h.abs();
        let mut err = ((kron[i] - gauss[i]) * h).abs();
        if asc != 0.0 && err != 0.0 {
            err = asc * (200.0 * err / asc).powf(1.5).min(1.0);
        }
        let resabs = abs_k[i] * h.abs();
        if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            err = err.max(50.0 * f64::EPSILON * resabs);
        }
        value[i] = kron[i] * h;
        error[i] = err;
    }
    Panel { a, b, value, error }
}

/// Globally adaptive Gauss-Kronrod integration of a vector-valued integrand
/// over `[a, b]`, starting from the panels delimited by `breakpoints`.
///
/// Converges when the Euclidean norm of the summed error estimate is below
/// `max(abs_tol, rel_tol·‖value‖)`.
pub fn integrate_adaptive<const N: usize, F>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    settings: &QuadratureSettings,
) -> Result<QuadratureResult<[f64; N]>>
where
    F: Fn(f64) -> [f64; N],
{
    let mut edges = vec![a];
    let mut interior: Vec<f64> = breakpoints.iter().copied().filter(|&x| x > a && x < b).collect();
    interior.sort_by(|x, y| x.total_cmp(y));
    interior.dedup();
    edges.extend(interior);
    edges.push(b);

    let mut panels: Vec<Panel<N>> = edges.windows(2).map(|w| gk21(&f, w[0], w[1])).collect();
    let mut evaluations = 21 * panels.len();

    loop {
        let mut value = [0.0; N];
        let mut error = [0.0; N];
        for p in &panels {
            for i in 0..N {
                value[i] += p.value[i];
                error[i] += p.error[i];
            }
        }
        let target = settings.abs_tol.max(settings.rel_tol * norm(&value));
        let finite = value.iter().chain(&error).all(|x| x.is_finite());
        if finite && norm(&error) <= target {
            return Ok(QuadratureResult {
                value,
                error_estimate: error,
                evaluations,
            });
        }
        if !finite || panels.len() >= settings.max_subdivisions {
            return Err(Error::QuadratureNotConverged {
                estimate: norm(&value),
                error: norm(&error),
                evaluations,
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err_norm().total_cmp(&y.1.err_norm()))
            .map(|(i, _)| i)
            .expect("at least one panel");
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        panels.push(gk21(&f, p.a, mid));
        panels.push(gk21(&f, mid, p.b));
        evaluations += 42;
    }
}

/// Upper limit beyond which `e^{-m qR} (1+qR)^3` is negligible.
fn cutoff(decay: f64, r: f64, settings: &QuadratureSettings) -> f64 {
    let eps = 1e-3 * settings.rel_tol.min(settings.abs_tol);
    let mut y: f64 = 1.0;
    while (-decay * y).exp() * (1.0 + y).powi(3) > eps {
        y *= 1.1;
    }
    y / r
}

fn breakpoints(k_a: f64, k_b: f64, r: f64) -> [f64; 4] {
    [k_a, k_b, 1.0 / r, 5.0 / r]
}

fn check_wavenumbers(k_a: f64, k_b: f64) -> Result<()> {
    for (name, k) in [("k_a", k_a), ("k_b", k_b)] {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::invalid(name, format!("must be positive and finite, got {k}")));
        }
    }
    Ok(())
}

/// Splits dipoles into unit directions and magnitudes so that tolerances act
/// on dimensionless integrals.
fn unit_dipoles(mu_a: &Vector3<f64>, mu_b: &Vector3<f64>) -> Option<(Vector3<f64>, Vector3<f64>, f64)> {
    let (ma, mb) = (mu_a.norm(), mu_b.norm());
    if ma == 0.0 || mb == 0.0 {
        None
    } else {
        Some((mu_a / ma, mu_b / mb, ma * mb))
    }
}

/// `∫₀^∞ dq/π (q² - k_A k_B) q² μ_A·G(iq)·μ_B / ((q² + k_A²)(q² + k_B²))`
pub fn integral_semi_resonant(
    k_a: f64,
    k_b: f64,
    mu_a: &Vector3<f64>,
    mu_b: &Vector3<f64>,
    separation: &Vector3<f64>,
    settings: &QuadratureSettings,
) -> Result<QuadratureResult<f64>> {
    check_wavenumbers(k_a, k_b)?;
    let Some((ua, ub, scale)) = unit_dipoles(mu_a, mu_b) else {
        DipoleGeometry::new(mu_a, mu_b, separation)?;
        return Ok(QuadratureResult::zero());
    };
    let geo = DipoleGeometry::new(&ua, &ub, separation)?;
    let r = geo.distance();
    let (ka2, kb2, kab) = (k_a * k_a, k_b * k_b, k_a * k_b);
    let f = |q: f64| {
        let q2 = q * q;
        let (c, _) = imag_axis_q2_contraction(q, &geo);
        [(q2 - kab) * c / ((q2 + ka2) * (q2 + kb2)) / PI]
    };
    let res = integrate_adaptive(f, 0.0, cutoff(1.0, r, settings), &breakpoints(k_a, k_b, r), settings)?;
    Ok(QuadratureResult {
        value: res.value[0] * scale,
        error_estimate: res.error_estimate[0] * scale,
        evaluations: res.evaluations,
    })
}

/// `∫₀^∞ dq/π q⁴ (μ_A·G(iq)·μ_B) ∇(μ_B·G(iq)·μ_A) / ((q² + k_A²)(q² + k_B²))`
pub fn integral_off_resonant(
    k_a: f64,
    k_b: f64,
    mu_a: &Vector3<f64>,
    mu_b: &Vector3<f64>,
    separation: &Vector3<f64>,
    settings: &QuadratureSettings,
) -> Result<QuadratureResult<Vector3<f64>>> {
    check_wavenumbers(k_a, k_b)?;
    let Some((ua, ub, scale)) = unit_dipoles(mu_a, mu_b) else {
        DipoleGeometry::new(mu_a, mu_b, separation)?;
        return Ok(QuadratureResult {
            value: Vector3::zeros(),
            error_estimate: Vector3::zeros(),
            evaluations: 0,
        });
    };
    let geo = DipoleGeometry::new(&ua, &ub, separation)?;
    let r = geo.distance();
    let (ka2, kb2) = (k_a * k_a, k_b * k_b);
    let f = |q: f64| {
        let q2 = q * q;
        let (c, g) = imag_axis_q2_contraction(q, &geo);
        let w = c / ((q2 + ka2) * (q2 + kb2)) / PI;
        [w * g[0], w * g[1], w * g[2]]
    };
    let res = integrate_adaptive(f, 0.0, cutoff(2.0, r, settings), &breakpoints(k_a, k_b, r), settings)?;
    let s2 = scale * scale;
    Ok(QuadratureResult {
        value: Vector3::from(res.value) * s2,
        error_estimate: Vector3::from(res.error_estimate) * s2,
        evaluations: res.evaluations,
    })
}

/// `∫₀^∞ dq/π q⁴ (μ_A·G(iq)·μ_B)² / ((q² + k_A²)(q² + k_B²))`, the
/// off-resonant energy integral.
pub fn integral_off_resonant_energy(
    k_a: f64,
    k_b: f64,
    mu_a: &Vector3<f64>,
    mu_b: &Vector3<f64>,
    separation: &Vector3<f64>,
    settings: &QuadratureSettings,
) -> Result<QuadratureResult<f64>> {
    check_wavenumbers(k_a, k_b)?;
    let Some((ua, ub, scale)) = unit_dipoles(mu_a, mu_b) else {
        DipoleGeometry::new(mu_a, mu_b, separation)?;
        return Ok(QuadratureResult::zero());
    };
    let geo = DipoleGeometry::new(&ua, &ub, separation)?;
    let r = geo.distance();
    let (ka2, kb2) = (k_a * k_a, k_b * k_b);
    let f = |q: f64| {
        let q2 = q * q;
        let (c, _) = imag_axis_q2_contraction(q, &geo);
        [c * c / ((q2 + ka2) * (q2 + kb2)) / PI]
    };
    let res = integrate_adaptive(f, 0.0, cutoff(2.0, r, settings), &breakpoints(k_a, k_b, r), settings)?;
    let s2 = scale * scale;
    Ok(QuadratureResult {
        value: res.value[0] * s2,
        error_estimate: res.error_estimate[0] * s2,
        evaluations: res.evaluations,
    })
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

fn orthonormal_frame(axis: &Vector3<f64>) -> Result<(Vector3<f64>, Vector3<f64>, Vector3<f64>)> {
    let n = axis.norm();
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::invalid("polar_axis", "must be a non-zero finite vector"));
    }
    let e3 = axis / n;
    let helper = if e3.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let e1 = (helper - e3 * e3.dot(&helper)).normalize();
    let e2 = e3.cross(&e1);
    Ok((e1, e2, e3))
}

fn sphere_rule<F: Fn(&Vector3<f64>) -> f64>(
    f: &F,
    frame: &(Vector3<f64>, Vector3<f64>, Vector3<f64>),
    n_half: usize,
    n_phi: usize,
) -> Result<Vector3<f64>> {
    let (x, w) = gauss_legendre(n_half);
    let dphi = 2.0 * PI / n_phi as f64;
    let (cs, sn): (Vec<f64>, Vec<f64>) = (0..n_phi)
        .map(|j| {
            let phi = j as f64 * dphi;
            (phi.cos(), phi.sin())
        })
        .unzip();
    let mut acc = Vector3::zeros();
    for (lo, hi) in [(-1.0, 0.0), (0.0, 1.0)] {
        let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        for (xi, wi) in x.iter().zip(&w) {
            let c = mid + half * xi;
            let s = (1.0 - c * c).max(0.0).sqrt();
            let mut ring = Vector3::zeros();
            for j in 0..n_phi {
                let dir = frame.0 * (s * cs[j]) + frame.1 * (s * sn[j]) + frame.2 * c;
                let v = f(&dir);
                if !v.is_finite() {
                    return Err(Error::NonFiniteSample { direction: dir.into() });
                }
                ring += dir * v;
            }
            acc += ring * (wi * half * dphi);
        }
    }
    Ok(acc)
}

/// First angular moment `∫ dΘ k̂ f(k̂)` over the unit sphere.
///
/// Gauss-Legendre in `cos θ` on the two panels `[-1, 0]` and `[0, 1]` times a
/// uniform rule in azimuth, with `θ` measured from `polar_axis`. The error
/// estimate is the difference from the same rule at half the node counts.
pub fn integrate_solid_angle<F: Fn(&Vector3<f64>) -> f64>(
    f: F,
    polar_axis: &Vector3<f64>,
    settings: &QuadratureSettings,
) -> Result<QuadratureResult<Vector3<f64>>> {
    settings.validate()?;
    let frame = orthonormal_frame(polar_axis)?;
    let (nt, np) = settings.angular_nodes;
    let fine = sphere_rule(&f, &frame, nt / 2, np)?;
    let coarse = sphere_rule(&f, &frame, nt / 4, np / 2)?;
    Ok(QuadratureResult {
        value: fine,
        error_estimate: (fine - coarse).abs(),
        evaluations: nt * np + nt * np / 4,
    })
}
