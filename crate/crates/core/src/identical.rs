//! Identical-atoms limit `ω_B → ω_A = ω₀`, `Γ_B → Γ_A = Γ₀` in the
//! weak-interaction regime.
//!
//! The `1/Δ` poles of the dissimilar expressions turn into a term linear in
//! `T` and a frequency derivative `∂_ω`, evaluated here in closed form. With
//! `e = e^{-Γ₀T}` and `r, i` the real and imaginary contractions at `k₀`
//! (primes denote `∂_ω`):
//!
//! ```text
//! F_A = -2ω⁴eT (r∇i + i∇r) - 2e ∂_ω[ω⁴(r∇r - i∇i)] + ω³e (r∇r - i∇i)
//!       - 2ω²e ∇r S₀ + 4ω²(1 - 2e) O₀
//! F_B = ∓2ω⁴eT (r∇i - i∇r) + 2eω² [∂_ω(ω²r)∇r + ∂_ω(ω²i)∇i] - ω³e (r∇r + i∇i)
//!       + 2ω²e ∇r S₀ - 4ω²(1 - 2e) O₀
//! ```

use std::ops::{Add, Mul};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::dissimilar::{check_time, transverse, unit_direction, HEAVISIDE_BAND};
use crate::error::Result;
use crate::green::{contraction_bundle, ContractionBundle};
use crate::options::{EvalOptions, NetIdenticalForm};
use crate::params::{AtomPairConfig, AtomSpec, EvalPoint};
use crate::quadrature::{integral_off_resonant, integral_semi_resonant, integrate_solid_angle, QuadratureResult};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdenticalConfig {
    pub omega0: f64,
    pub gamma0: f64,
    pub dipole_a: Vector3<f64>,
    pub dipole_b: Vector3<f64>,
    pub separation: Vector3<f64>,
}

impl IdenticalConfig {
    pub fn new(omega0: f64, gamma0: f64, dipole: Vector3<f64>, separation: Vector3<f64>) -> Result<Self> {
        let c = IdenticalConfig {
            omega0,
            gamma0,
            dipole_a: dipole,
            dipole_b: dipole,
            separation,
        };
        c.as_pair()?;
        Ok(c)
    }

    /// The equivalent pair with both atoms at `ω₀`, `Γ₀`.
    pub fn as_pair(&self) -> Result<AtomPairConfig> {
        AtomPairConfig::new(
            AtomSpec::new(self.omega0, self.gamma0, self.dipole_a)?,
            AtomSpec::new(self.omega0, self.gamma0, self.dipole_b)?,
            self.separation,
        )
    }

    /// Takes `ω₀`, `Γ₀` from atom A and the dipoles of both atoms.
    pub fn from_pair(cfg: &AtomPairConfig) -> Self {
        IdenticalConfig {
            omega0: cfg.atom_a.omega,
            gamma0: cfg.atom_a.gamma,
            dipole_a: cfg.atom_a.dipole,
            dipole_b: cfg.atom_b.dipole,
            separation: cfg.separation,
        }
    }

    pub fn distance(&self) -> f64 {
        self.separation.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct IdenticalForceBreakdown {
    pub t_linear: Vector3<f64>,
    pub frequency_derivative: Vector3<f64>,
    pub cubic: Vector3<f64>,
    pub semi_resonant: Vector3<f64>,
    pub off_resonant: Vector3<f64>,
    pub total: Vector3<f64>,
}

pub const IDENTICAL_BLOCK_NAMES: [&str; 5] = [
    "t_linear",
    "frequency_derivative",
    "cubic",
    "semi_resonant",
    "off_resonant",
];

impl IdenticalForceBreakdown {
    pub fn from_blocks(b: [Vector3<f64>; 5]) -> Self {
        IdenticalForceBreakdown {
            t_linear: b[0],
            frequency_derivative: b[1],
            cubic: b[2],
            semi_resonant: b[3],
            off_resonant: b[4],
            total: b.iter().sum(),
        }
    }

    pub fn blocks(&self) -> [Vector3<f64>; 5] {
        [
            self.t_linear,
            self.frequency_derivative,
            self.cubic,
            self.semi_resonant,
            self.off_resonant,
        ]
    }
}

impl Add for IdenticalForceBreakdown {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        let (a, b) = (self.blocks(), o.blocks());
        IdenticalForceBreakdown::from_blocks(std::array::from_fn(|i| a[i] + b[i]))
    }
}

impl Mul<f64> for IdenticalForceBreakdown {
    type Output = Self;

    fn mul(self, s: f64) -> Self {
        IdenticalForceBreakdown::from_blocks(self.blocks().map(|v| v * s))
    }
}

struct Setup {
    cfg: IdenticalConfig,
    w: f64,
    t: f64,
    e: f64,
    c: ContractionBundle,
}

impl Setup {
    fn new(cfg: &IdenticalConfig, t: EvalPoint) -> Result<Self> {
        let pair = cfg.as_pair()?;
        let t = check_time(&pair, t)?;
        Ok(Setup {
            cfg: *cfg,
            w: cfg.omega0,
            t,
            e: (-cfg.gamma0 * t).exp(),
            c: contraction_bundle(&cfg.dipole_a, &cfg.dipole_b, cfg.omega0, &cfg.separation)?,
        })
    }

    fn semi(&self, opts: &EvalOptions) -> Result<f64> {
        let c = &self.cfg;
        Ok(integral_semi_resonant(c.omega0, c.omega0, &c.dipole_a, &c.dipole_b, &c.separation, &opts.quadrature)?.value)
    }

    fn off(&self, opts: &EvalOptions) -> Result<Vector3<f64>> {
        let c = &self.cfg;
        Ok(integral_off_resonant(c.omega0, c.omega0, &c.dipole_a, &c.dipole_b, &c.separation, &opts.quadrature)?.value)
    }
}

pub fn force_a_identical(cfg: &IdenticalConfig, t: EvalPoint, opts: &EvalOptions) -> Result<IdenticalForceBreakdown> {
    let s = Setup::new(cfg, t)?;
    let (c, w, e) = (&s.c, s.w, s.e);
    let w4 = w.powi(4);
    let rr_ii = c.grad_re * c.re - c.grad_im * c.im;
    let d_rr_ii = c.grad_re * c.domega_re + c.domega_grad_re * c.re - c.grad_im * c.domega_im - c.domega_grad_im * c.im;
    let semi = s.semi(opts)?;
    let off = s.off(opts)?;
    Ok(IdenticalForceBreakdown::from_blocks([
        (c.grad_im * c.re + c.grad_re * c.im) * (-2.0 * w4 * e * s.t),
        (rr_ii * (4.0 * w.powi(3)) + d_rr_ii * w4) * (-2.0 * e),
        rr_ii * (w.powi(3) * e),
        c.grad_re * (-2.0 * w * w * e * semi),
        off * (4.0 * w * w * (1.0 - 2.0 * e)),
    ]))
}

pub fn force_b_identical(cfg: &IdenticalConfig, t: EvalPoint, opts: &EvalOptions) -> Result<IdenticalForceBreakdown> {
    let s = Setup::new(cfg, t)?;
    let (c, w, e) = (&s.c, s.w, s.e);
    let w4 = w.powi(4);
    let d_w2r = 2.0 * w * c.re + w * w * c.domega_re;
    let d_w2i = 2.0 * w * c.im + w * w * c.domega_im;
    let semi = s.semi(opts)?;
    let off = s.off(opts)?;
    Ok(IdenticalForceBreakdown::from_blocks([
        (c.grad_im * c.re - c.grad_re * c.im) * (opts.fb0_sign.sign() * 2.0 * w4 * e * s.t),
        (c.grad_re * d_w2r + c.grad_im * d_w2i) * (2.0 * e * w * w),
        (c.grad_re * c.re + c.grad_im * c.im) * (-w.powi(3) * e),
        c.grad_re * (2.0 * w * w * e * semi),
        off * (-4.0 * w * w * (1.0 - 2.0 * e)),
    ]))
}

/// Net force from its own closed form,
///
/// ```text
/// -4e { ω⁴T r∇i - ω⁴ ∂_ω(i∇i) - (5/2)ω³ i∇i + ω³ r∇r }
/// ```
///
/// plus, for [`NetIdenticalForm::LimitConsistent`], the term
/// `-2eω⁴ (r ∂_ω∇r + i ∂_ω∇i)` inside `frequency_derivative`. Only resonant
/// blocks appear; `semi_resonant` and `off_resonant` are zero.
pub fn net_force_identical(cfg: &IdenticalConfig, t: EvalPoint, opts: &EvalOptions) -> Result<IdenticalForceBreakdown> {
    let s = Setup::new(cfg, t)?;
    let (c, w, e) = (&s.c, s.w, s.e);
    let w4 = w.powi(4);
    let w3 = w.powi(3);
    let mut freq = (c.grad_im * c.domega_im + c.domega_grad_im * c.im) * (4.0 * e * w4);
    if opts.net_form == NetIdenticalForm::LimitConsistent {
        freq -= (c.domega_grad_re * c.re + c.domega_grad_im * c.im) * (2.0 * e * w4);
    }
    Ok(IdenticalForceBreakdown::from_blocks([
        c.grad_im * (-4.0 * e * w4 * s.t * c.re),
        freq,
        c.grad_im * (10.0 * e * w3 * c.im) - c.grad_re * (4.0 * e * w3 * c.re),
        Vector3::zeros(),
        Vector3::zeros(),
    ]))
}

/// Directional emission rate in the identical limit, direction-independent
/// parts precomputed.
pub struct IdenticalEmission {
    setup: Setup,
    prefactor: f64,
    axis: Vector3<f64>,
}

impl IdenticalEmission {
    pub fn new(cfg: &IdenticalConfig, t: EvalPoint, opts: &EvalOptions) -> Result<Self> {
        let setup = Setup::new(cfg, t)?;
        Ok(IdenticalEmission {
            prefactor: -opts.emission.prefactor() * setup.e,
            axis: cfg.separation / cfg.distance(),
            setup,
        })
    }

    fn braces(&self, cos_theta: f64, heaviside: f64) -> f64 {
        let s = &self.setup;
        let (c, k) = (&s.c, s.w);
        let r = s.cfg.distance();
        let x = k * r * cos_theta;
        let (cx, sx) = (x.cos(), x.sin());
        let k4 = k.powi(4);
        let k5 = k4 * k;
        let ungated = s.t * k5 * sx * c.re - k5 * sx * c.domega_im - 2.0 * k4 * sx * c.im;
        let gated = 3.0 * k4 * (cx * c.re - sx * c.im) - r * k5 * cos_theta * (sx * c.re + cx * c.im);
        ungated + heaviside * gated
    }

    pub fn rate(&self, direction: &Vector3<f64>) -> Result<f64> {
        let k = unit_direction(direction)?;
        let c = k.dot(&self.axis);
        let h = if c.abs() < HEAVISIDE_BAND {
            0.5
        } else if c > 0.0 {
            1.0
        } else {
            0.0
        };
        let cfg = &self.setup.cfg;
        Ok(self.prefactor * transverse(&cfg.dipole_a, &cfg.dipole_b, &k) * self.braces(c, h))
    }
}

pub fn emission_rate_identical(
    cfg: &IdenticalConfig,
    t: EvalPoint,
    direction: &Vector3<f64>,
    opts: &EvalOptions,
) -> Result<f64> {
    IdenticalEmission::new(cfg, t, opts)?.rate(direction)
}

/// Photon momentum rate `k₀ ∫ dΘ k̂ dΓ/dΘ`.
pub fn momentum_rate_identical(
    cfg: &IdenticalConfig,
    t: EvalPoint,
    opts: &EvalOptions,
) -> Result<QuadratureResult<Vector3<f64>>> {
    let em = IdenticalEmission::new(cfg, t, opts)?;
    let mom = integrate_solid_angle(|k| em.rate(k).unwrap_or(f64::NAN), &em.axis, &opts.quadrature)?;
    let k0 = cfg.omega0;
    Ok(QuadratureResult {
        value: mom.value * k0,
        error_estimate: mom.error_estimate * k0,
        evaluations: mom.evaluations,
    })
}
