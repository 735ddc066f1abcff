//! Forces, energies, directional emission and photon momentum rate for
//! dissimilar atoms (`ω_A ≠ ω_B`) after sudden excitation of atom A.
//!
//! Each expression is split into six blocks: three resonant terms scaling as
//! `1/Δ` (stationary, `cos ΔT`, `sin ΔT`), a resonant sum-frequency term
//! `1/(ω_A+ω_B)`, a semi-resonant term with one imaginary-frequency integral
//! and an off-resonant term with a quadratic one.
//!
//! Shorthand used in the docs: `e_A = e^{-Γ_A T}`, `e_AB = e^{-(Γ_A+Γ_B)T/2}`,
//! `r_X, i_X = μ_A·Re G(k_X R)·μ_B, μ_A·Im G(k_X R)·μ_B`, `S` the
//! semi-resonant integral and `O` the off-resonant vector integral.

use std::ops::{Add, Mul};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::green::{contraction_bundle, ContractionBundle};
use crate::options::EvalOptions;
use crate::params::{AtomPairConfig, EvalPoint};
use crate::quadrature::{
    integral_off_resonant, integral_off_resonant_energy, integral_semi_resonant, integrate_solid_angle,
    QuadratureResult,
};

/// Largest `|Δ T|` for which `cos ΔT`, `sin ΔT` keep useful precision.
pub const MAX_PHASE: f64 = 1e12;

/// Directions closer than this to the plane `cos θ = 0` take the mean of
/// both hemispheres.
pub const HEAVISIDE_BAND: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ForceBreakdown {
    pub resonant_over_delta: Vector3<f64>,
    pub resonant_cos: Vector3<f64>,
    pub resonant_sin: Vector3<f64>,
    pub resonant_sum_freq: Vector3<f64>,
    pub semi_resonant: Vector3<f64>,
    pub off_resonant: Vector3<f64>,
    pub total: Vector3<f64>,
}

pub const BLOCK_NAMES: [&str; 6] = [
    "resonant_over_delta",
    "resonant_cos",
    "resonant_sin",
    "resonant_sum_freq",
    "semi_resonant",
    "off_resonant",
];

impl ForceBreakdown {
    pub fn from_blocks(b: [Vector3<f64>; 6]) -> Self {
        ForceBreakdown {
            resonant_over_delta: b[0],
            resonant_cos: b[1],
            resonant_sin: b[2],
            resonant_sum_freq: b[3],
            semi_resonant: b[4],
            off_resonant: b[5],
            total: b.iter().sum(),
        }
    }

    pub fn blocks(&self) -> [Vector3<f64>; 6] {
        [
            self.resonant_over_delta,
            self.resonant_cos,
            self.resonant_sin,
            self.resonant_sum_freq,
            self.semi_resonant,
            self.off_resonant,
        ]
    }
}

impl Add for ForceBreakdown {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        let (a, b) = (self.blocks(), o.blocks());
        ForceBreakdown::from_blocks(std::array::from_fn(|i| a[i] + b[i]))
    }
}

impl Mul<f64> for ForceBreakdown {
    type Output = Self;

    fn mul(self, s: f64) -> Self {
        ForceBreakdown::from_blocks(self.blocks().map(|v| v * s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub resonant_over_delta: f64,
    pub resonant_cos: f64,
    pub resonant_sin: f64,
    pub resonant_sum_freq: f64,
    pub semi_resonant: f64,
    pub off_resonant: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    pub fn from_blocks(b: [f64; 6]) -> Self {
        EnergyBreakdown {
            resonant_over_delta: b[0],
            resonant_cos: b[1],
            resonant_sin: b[2],
            resonant_sum_freq: b[3],
            semi_resonant: b[4],
            off_resonant: b[5],
            total: b.iter().sum(),
        }
    }

    pub fn blocks(&self) -> [f64; 6] {
        [
            self.resonant_over_delta,
            self.resonant_cos,
            self.resonant_sin,
            self.resonant_sum_freq,
            self.semi_resonant,
            self.off_resonant,
        ]
    }
}

impl Add for EnergyBreakdown {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        let (a, b) = (self.blocks(), o.blocks());
        EnergyBreakdown::from_blocks(std::array::from_fn(|i| a[i] + b[i]))
    }
}

impl Mul<f64> for EnergyBreakdown {
    type Output = Self;

    fn mul(self, s: f64) -> Self {
        EnergyBreakdown::from_blocks(self.blocks().map(|v| v * s))
    }
}

/// Everything that is evaluated once per `(cfg, T)`.
struct Setup {
    cfg: AtomPairConfig,
    delta: f64,
    wa: f64,
    wb: f64,
    e_a: f64,
    e_ab: f64,
    cos: f64,
    sin: f64,
    at_a: ContractionBundle,
    at_b: ContractionBundle,
}

pub(crate) fn check_time(cfg: &AtomPairConfig, t: EvalPoint) -> Result<f64> {
    ensure_finite("T", t.t)?;
    if t.t <= cfg.distance() {
        return Err(Error::Acausal {
            t: t.t,
            r: cfg.distance(),
        });
    }
    Ok(t.t)
}

impl Setup {
    fn new(cfg: &AtomPairConfig, t: EvalPoint) -> Result<Self> {
        cfg.validate()?;
        let t = check_time(cfg, t)?;
        let delta = cfg.detuning();
        if delta == 0.0 {
            return Err(Error::DegenerateFrequencies);
        }
        if (delta * t).abs() > MAX_PHASE {
            return Err(Error::PhasePrecisionLoss((delta * t).abs()));
        }
        let (mu_a, mu_b) = (cfg.atom_a.dipole, cfg.atom_b.dipole);
        let (ga, gb) = (cfg.atom_a.gamma, cfg.atom_b.gamma);
        Ok(Setup {
            cfg: *cfg,
            delta,
            wa: cfg.atom_a.omega,
            wb: cfg.atom_b.omega,
            e_a: (-ga * t).exp(),
            e_ab: (-(ga + gb) * t / 2.0).exp(),
            cos: (delta * t).cos(),
            sin: (delta * t).sin(),
            at_a: contraction_bundle(&mu_a, &mu_b, cfg.k_a(), &cfg.separation)?,
            at_b: contraction_bundle(&mu_a, &mu_b, cfg.k_b(), &cfg.separation)?,
        })
    }

    fn semi(&self, opts: &EvalOptions) -> Result<QuadratureResult<f64>> {
        let c = &self.cfg;
        integral_semi_resonant(c.k_a(), c.k_b(), &c.atom_a.dipole, &c.atom_b.dipole, &c.separation, &opts.quadrature)
    }

    fn off(&self, opts: &EvalOptions) -> Result<QuadratureResult<Vector3<f64>>> {
        let c = &self.cfg;
        integral_off_resonant(c.k_a(), c.k_b(), &c.atom_a.dipole, &c.atom_b.dipole, &c.separation, &opts.quadrature)
    }

    fn off_energy(&self, opts: &EvalOptions) -> Result<QuadratureResult<f64>> {
        let c = &self.cfg;
        integral_off_resonant_energy(c.k_a(), c.k_b(), &c.atom_a.dipole, &c.atom_b.dipole, &c.separation, &opts.quadrature)
    }
}

/// Force on the initially excited atom A.
///
/// ```text
/// -2ω_A⁴e_A/Δ (r_A∇r_A - i_A∇i_A)
/// +2ω_B⁴e_AB/Δ (r_B∇r_B - i_B∇i_B) cos ΔT
/// -2ω_B⁴e_AB/Δ (r_B∇i_B + i_B∇r_B) sin ΔT
/// +2ω_A⁴e_A/(ω_A+ω_B) (r_A∇r_A - i_A∇i_A)
/// -2ω_B²e_AB (∇r_B cos ΔT - ∇i_B sin ΔT) S
/// +4ω_Aω_B (1 - 2e_A) O
/// ```
pub fn force_a_dissimilar(cfg: &AtomPairConfig, t: EvalPoint, opts: &EvalOptions) -> Result<ForceBreakdown> {
    let s = Setup::new(cfg, t)?;
    let (a, b) = (&s.at_a, &s.at_b);
    let (wa, wb, d) = (s.wa, s.wb, s.delta);
    let semi = s.semi(opts)?.value;
    let off = s.off(opts)?.value;
    let aa = a.grad_re * a.re - a.grad_im * a.im;
    Ok(ForceBreakdown::from_blocks([
        aa * (-2.0 * wa.powi(4) * s.e_a / d),
        (b.grad_re * b.re - b.grad_im * b.im) * (2.0 * wb.powi(4) * s.e_ab / d * s.cos),
        (b.grad_im * b.re + b.grad_re * b.im) * (-2.0 * wb.powi(4) * s.e_ab / d * s.sin),
        aa * (2.0 * wa.powi(4) * s.e_a / (wa + wb)),
        (b.grad_re * s.cos - b.grad_im * s.sin) * (-2.0 * wb * wb * s.e_ab * semi),
        off * (4.0 * wa * wb * (1.0 - 2.0 * s.e_a)),
    ]))
}

/// Force on atom B. The resonant oscillating blocks mix `G(k_B R)` with
/// `∇G(k_A R)`:
///
/// ```text
/// +2ω_A⁴e_A/Δ (r_A∇r_A + i_A∇i_A)
/// -2ω_A²ω_B²e_AB/Δ (r_B∇r_A + i_B∇i_A) cos ΔT
/// -2ω_A²ω_B²e_AB/Δ (r_B∇i_A - i_B∇r_A) sin ΔT
/// -2ω_A⁴e_A/(ω_A+ω_B) (r_A∇r_A + i_A∇i_A)
/// +2ω_A²e_AB (∇r_A cos ΔT + ∇i_A sin ΔT) S
/// -4ω_Aω_B (1 - 2e_A) O
/// ```
pub fn force_b_dissimilar(cfg: &AtomPairConfig, t: EvalPoint, opts: &EvalOptions) -> Result<ForceBreakdown> {
    let s = Setup::new(cfg, t)?;
    let (a, b) = (&s.at_a, &s.at_b);
    let (wa, wb, d) = (s.wa, s.wb, s.delta);
    let semi = s.semi(opts)?.value;
    let off = s.off(opts)?.value;
    let aa = a.grad_re * a.re + a.grad_im * a.im;
    let mixed = 2.0 * wa * wa * wb * wb * s.e_ab / d;
    Ok(ForceBreakdown::from_blocks([
        aa * (2.0 * wa.powi(4) * s.e_a / d),
        (a.grad_re * b.re + a.grad_im * b.im) * (-mixed * s.cos),
        (a.grad_im * b.re - a.grad_re * b.im) * (-mixed * s.sin),
        aa * (-2.0 * wa.powi(4) * s.e_a / (wa + wb)),
        (a.grad_re * s.cos + a.grad_im * s.sin) * (2.0 * wa * wa * s.e_ab * semi),
        off * (-4.0 * wa * wb * (1.0 - 2.0 * s.e_a)),
    ]))
}

/// Net force `F_A + F_B` from its own closed form, valid for `|Δ| ≪ ω_A`.
///
/// The stationary term `8e_A k_A⁴ ω_B/(ω_A²-ω_B²) i_A∇i_A` is stored in
/// `resonant_over_delta`; it is the net force after an adiabatic excitation.
/// `resonant_sum_freq` and `off_resonant` are zero, those blocks having
/// cancelled between the two atoms.
pub fn net_force_dissimilar(cfg: &AtomPairConfig, t: EvalPoint, opts: &EvalOptions) -> Result<ForceBreakdown> {
    let s = Setup::new(cfg, t)?;
    let (a, b) = (&s.at_a, &s.at_b);
    let (wa, wb, d) = (s.wa, s.wb, s.delta);
    let (ka2, kb2) = (wa * wa, wb * wb);
    let semi = s.semi(opts)?.value;
    let osc = 2.0 * s.e_ab * kb2 / d;
    let grad_re_mix = b.grad_re * kb2 - a.grad_re * ka2;
    let grad_im_sum = b.grad_im * kb2 + a.grad_im * ka2;
    Ok(ForceBreakdown::from_blocks([
        a.grad_im * (8.0 * s.e_a * ka2 * ka2 * wb / (d * (wa + wb)) * a.im),
        (grad_re_mix * b.re - grad_im_sum * b.im) * (osc * s.cos),
        (grad_im_sum * b.re + grad_re_mix * b.im) * (-osc * s.sin),
        Vector3::zeros(),
        (grad_re_mix * s.cos - grad_im_sum * s.sin) * (-2.0 * s.e_ab * semi),
        Vector3::zeros(),
    ]))
}

/// Interaction energy of atom A.
pub fn energy_a_dissimilar(cfg: &AtomPairConfig, t: EvalPoint, opts: &EvalOptions) -> Result<EnergyBreakdown> {
    let s = Setup::new(cfg, t)?;
    let (a, b) = (&s.at_a, &s.at_b);
    let (wa, wb, d) = (s.wa, s.wb, s.delta);
    let semi = s.semi(opts)?.value;
    let off = s.off_energy(opts)?.value;
    let aa = a.re * a.re - a.im * a.im;
    Ok(EnergyBreakdown::from_blocks([
        2.0 * wa.powi(4) * s.e_a / d * aa,
        -2.0 * wb.powi(4) * s.e_ab / d * (b.re * b.re - b.im * b.im) * s.cos,
        4.0 * wb.powi(4) * s.e_ab / d * b.re * b.im * s.sin,
        -2.0 * wa.powi(4) * s.e_a / (wa + wb) * aa,
        2.0 * wb * wb * s.e_ab * (b.re * s.cos - b.im * s.sin) * semi,
        -4.0 * wa * wb * (2.0 * s.e_a - 1.0) * off,
    ]))
}

/// Interaction energy of atom B.
pub fn energy_b_dissimilar(cfg: &AtomPairConfig, t: EvalPoint, opts: &EvalOptions) -> Result<EnergyBreakdown> {
    let s = Setup::new(cfg, t)?;
    let (a, b) = (&s.at_a, &s.at_b);
    let (wa, wb, d) = (s.wa, s.wb, s.delta);
    let semi = s.semi(opts)?.value;
    let off = s.off_energy(opts)?.value;
    let aa = a.re * a.re + a.im * a.im;
    let mixed = 2.0 * wa * wa * wb * wb * s.e_ab / d;
    Ok(EnergyBreakdown::from_blocks([
        2.0 * wa.powi(4) * s.e_a / d * aa,
        -mixed * (a.re * b.re + a.im * b.im) * s.cos,
        -mixed * (a.re * b.im - a.im * b.re) * s.sin,
        -2.0 * wa.powi(4) * s.e_a / (wa + wb) * aa,
        2.0 * wa * wa * s.e_ab * (a.re * s.cos + a.im * s.sin) * semi,
        -4.0 * wa * wb * (2.0 * s.e_a - 1.0) * off,
    ]))
}

/// Directional emission rate with everything that does not depend on the
/// direction precomputed.
pub struct DissimilarEmission {
    setup: Setup,
    semi: f64,
    prefactor: f64,
    axis: Vector3<f64>,
}

impl DissimilarEmission {
    pub fn new(cfg: &AtomPairConfig, t: EvalPoint, opts: &EvalOptions) -> Result<Self> {
        let setup = Setup::new(cfg, t)?;
        let semi = setup.semi(opts)?.value;
        Ok(DissimilarEmission {
            semi,
            prefactor: opts.emission.prefactor(),
            axis: cfg.axis(),
            setup,
        })
    }

    fn branch(&self, c: f64, forward: bool) -> f64 {
        let s = &self.setup;
        let (ka, kb, d) = (s.wa, s.wb, s.delta);
        let r = s.cfg.distance();
        let (b, a) = (&s.at_b, &s.at_a);
        let (k_phase, res_pref) = if forward {
            (kb, kb.powi(5))
        } else {
            (ka, kb * kb * ka.powi(3))
        };
        let x = k_phase * r * c;
        let (cx, sx) = (x.cos(), x.sin());
        let resonant = s.e_ab * res_pref / d
            * (s.cos * (cx * b.re - sx * b.im) - s.sin * (cx * b.im + sx * b.re));
        let stationary = s.e_a * ka.powi(5) / d * (ka * r * c).sin() * a.im;
        let semi_pref = if forward { kb.powi(3) } else { ka.powi(3) };
        let semi = -s.e_ab * semi_pref * (s.cos * cx - s.sin * sx) * self.semi;
        resonant + stationary + semi
    }

    /// `dΓ/dΘ` in direction `k̂` (normalized internally).
    pub fn rate(&self, direction: &Vector3<f64>) -> Result<f64> {
        let k = unit_direction(direction)?;
        let c = k.dot(&self.axis);
        let braces = if c.abs() < HEAVISIDE_BAND {
            0.5 * (self.branch(c, true) + self.branch(c, false))
        } else {
            self.branch(c, c > 0.0)
        };
        let cfg = &self.setup.cfg;
        Ok(self.prefactor * transverse(&cfg.atom_a.dipole, &cfg.atom_b.dipole, &k) * braces)
    }
}

pub(crate) fn unit_direction(direction: &Vector3<f64>) -> Result<Vector3<f64>> {
    let n = direction.norm();
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::invalid("direction", "must be a non-zero finite vector"));
    }
    Ok(direction / n)
}

/// `μ_A·(I - k̂k̂)·μ_B`
pub(crate) fn transverse(mu_a: &Vector3<f64>, mu_b: &Vector3<f64>, k: &Vector3<f64>) -> f64 {
    mu_a.dot(mu_b) - mu_a.dot(k) * mu_b.dot(k)
}

pub fn emission_rate_dissimilar(
    cfg: &AtomPairConfig,
    t: EvalPoint,
    direction: &Vector3<f64>,
    opts: &EvalOptions,
) -> Result<f64> {
    DissimilarEmission::new(cfg, t, opts)?.rate(direction)
}

/// Photon momentum rate `k_A ∫ dΘ k̂ dΓ/dΘ`.
pub fn momentum_rate_dissimilar(
    cfg: &AtomPairConfig,
    t: EvalPoint,
    opts: &EvalOptions,
) -> Result<QuadratureResult<Vector3<f64>>> {
    let em = DissimilarEmission::new(cfg, t, opts)?;
    let axis = cfg.axis();
    let mom = integrate_solid_angle(|k| em.rate(k).unwrap_or(f64::NAN), &axis, &opts.quadrature)?;
    let ka = cfg.k_a();
    Ok(QuadratureResult {
        value: mom.value * ka,
        error_estimate: mom.error_estimate * ka,
        evaluations: mom.evaluations,
    })
}
