//! Consistency suite pairing independent evaluation paths: closed forms
//! against block sums, analytic against finite-difference gradients, forces
//! against emission moments, identical-atom formulas against the small-detuning
//! limit of the dissimilar ones.
//!
//! Every check yields exactly one [`CheckReport`] whatever the grid size, and
//! reports are ordered by name.

use std::f64::consts::{LN_2, PI};
use std::fmt::Write as _;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dissimilar::{
    emission_rate_dissimilar, energy_a_dissimilar, energy_b_dissimilar, force_a_dissimilar, force_b_dissimilar,
    momentum_rate_dissimilar, net_force_dissimilar, ForceBreakdown,
};
use crate::error::Result;
use crate::green::{contraction_bundle, green_imag_freq, green_real_freq};
use crate::identical::{
    emission_rate_identical, force_a_identical, force_b_identical, momentum_rate_identical, net_force_identical,
    IdenticalConfig, IdenticalForceBreakdown,
};
use crate::options::{EmissionNormalization, EvalOptions, Fb0Sign, NetIdenticalForm};
use crate::params::{dipole_magnitude_for_gamma, AtomPairConfig, AtomSpec, EvalPoint};
use crate::quadrature::{integral_off_resonant, QuadratureSettings};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    /// Informational checks never affect the overall verdict.
    pub mandatory: bool,
    pub measured: f64,
    pub threshold: f64,
    pub context: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridSize {
    #[default]
    Default,
    /// One parameter point per check.
    Minimal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifySettings {
    pub opts: EvalOptions,
    pub grid: GridSize,
    /// Demote checks that an as-printed option is known to break to
    /// informational.
    pub allow_informational: bool,
    pub seed: u64,
}

impl Default for VerifySettings {
    fn default() -> Self {
        VerifySettings {
            opts: EvalOptions::default(),
            grid: GridSize::Default,
            allow_informational: false,
            seed: 0x5eed,
        }
    }
}

impl VerifySettings {
    fn minimal(&self) -> bool {
        self.grid == GridSize::Minimal
    }

    fn mandatory_unless_printed(&self) -> bool {
        !(self.allow_informational && self.opts.uses_printed_variant())
    }

    fn pick<T: Copy>(&self, full: &[T]) -> Vec<T> {
        if self.minimal() {
            vec![full[full.len() / 2]]
        } else {
            full.to_vec()
        }
    }
}

pub const CONSERVATION_IDENTICAL_TOL: f64 = 1e-6;
pub const CONSERVATION_DISSIMILAR_TOL: f64 = 1e-5;
pub const ADDITIVITY_TOL: f64 = 1e-12;
pub const SLOPE_TOL: f64 = 0.1;
pub const GRADIENT_TOL: f64 = 1e-6;
pub const GREEN_SUBSTITUTION_TOL: f64 = 1e-12;
pub const NEAR_FIELD_TOL: f64 = 1e-5;
pub const SYMMETRY_TOL: f64 = 1e-14;
pub const SIGN_FLIP_TOL: f64 = 1e-10;
pub const ASYMMETRY_FACTOR: f64 = 1e3;
pub const OFF_BLOCK_TOL: f64 = 1e-6;

/// `k₀R` and `Γ₀T` values of the conservation grid.
pub const CONSERVATION_KR: [f64; 3] = [1.5, 2.5, 4.0];
pub const CONSERVATION_GAMMA_T: [f64; 2] = [0.5, 1.0];
/// `Γ/ω` used for conservation; the one-photon blocks balance the force up
/// to terms of this relative order.
pub const CONSERVATION_GAMMA_RATIO: f64 = 1e-8;
pub const CONSERVATION_DELTA_RATIO: f64 = 1e-3;
pub const LIMIT_EPSILONS: [f64; 3] = [1e-2, 1e-3, 1e-4];
pub const GRADIENT_POINTS: usize = 20;

type CheckFn = fn(&VerifySettings) -> Result<CheckReport>;

const CHECKS: [CheckFn; 22] = [
    additivity_dissimilar,
    additivity_identical,
    additivity_identical_printed_fb0,
    additivity_identical_printed_net_form,
    conservation_dissimilar,
    conservation_dissimilar_scaling,
    conservation_identical,
    conservation_printed_normalization,
    crossed_dipoles_zero,
    energy_force_asymmetry,
    energy_force_off_block,
    energy_off_blocks_coincide,
    gradient_fd,
    green_imaginary_substitution,
    green_near_field,
    green_symmetry_parity,
    limit_slope_emission_moment,
    limit_slope_force_a,
    limit_slope_force_b,
    limit_slope_net_force,
    offresonant_reciprocity,
    offresonant_sign_flip,
];

/// Runs every check; checks execute concurrently, the output order is by name.
pub fn run_all(settings: &VerifySettings) -> Result<Vec<CheckReport>> {
    settings.opts.quadrature.validate()?;
    let mut reports = CHECKS.par_iter().map(|check| check(settings)).collect::<Result<Vec<_>>>()?;
    reports.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(reports)
}

pub fn all_mandatory_passed(reports: &[CheckReport]) -> bool {
    reports.iter().all(|r| r.passed || !r.mandatory)
}

pub fn summary_table(reports: &[CheckReport]) -> String {
    let width = reports.iter().map(|r| r.name.len()).max().unwrap_or(4).max(5);
    let mut out = format!("{:<width$}  {:<6}  {:<13}  {:>12}  {:>12}\n", "check", "status", "kind", "measured", "threshold");
    for r in reports {
        let status = if r.passed { "PASS" } else { "FAIL" };
        let kind = if r.mandatory { "mandatory" } else { "informational" };
        let _ = writeln!(out, "{:<width$}  {:<6}  {:<13}  {:>12.4e}  {:>12.4e}", r.name, status, kind, r.measured, r.threshold);
    }
    out
}

fn report(name: &str, passed: bool, mandatory: bool, measured: f64, threshold: f64, context: String) -> CheckReport {
    CheckReport {
        name: name.to_string(),
        passed,
        mandatory,
        measured,
        threshold,
        context,
    }
}

/// `measured ≤ threshold`, NaN counting as failure.
fn at_most(name: &str, mandatory: bool, measured: f64, threshold: f64, context: String) -> CheckReport {
    report(name, measured <= threshold, mandatory, measured, threshold, context)
}

fn sep_dir() -> Vector3<f64> {
    Vector3::new(0.3, -0.2, 1.0).normalize()
}

fn dipole_1() -> Vector3<f64> {
    Vector3::new(0.3, 0.8, -0.4).normalize()
}

fn dipole_2() -> Vector3<f64> {
    Vector3::new(-0.5, 0.2, 0.9).normalize()
}

fn pair(wa: f64, ga: f64, wb: f64, gb: f64, mu_a: Vector3<f64>, mu_b: Vector3<f64>, sep: Vector3<f64>) -> Result<AtomPairConfig> {
    AtomPairConfig::new(AtomSpec::new(wa, ga, mu_a)?, AtomSpec::new(wb, gb, mu_b)?, sep)
}

fn identical(w: f64, g: f64, mu_a: Vector3<f64>, mu_b: Vector3<f64>, sep: Vector3<f64>) -> Result<IdenticalConfig> {
    Ok(IdenticalConfig::from_pair(&pair(w, g, w, g, mu_a, mu_b, sep)?))
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

// ---------------------------------------------------------------------------
// additivity

/// Generic moderately detuned point shared by the block-sum checks.
const ADD_T: EvalPoint = EvalPoint { t: 10.0 };

fn additivity_dissimilar(s: &VerifySettings) -> Result<CheckReport> {
    let mut worst = 0.0f64;
    let deltas = s.pick(&[1e-3, 1e-4]);
    let krs = s.pick(&[1.5, 2.5, 4.0]);
    for &d in &deltas {
        for &kr in &krs {
            let cfg = pair(1.0, 0.05, 1.0 - d, 0.04, dipole_1(), dipole_2(), sep_dir() * kr)?;
            let a = force_a_dissimilar(&cfg, ADD_T, &s.opts)?;
            let b = force_b_dissimilar(&cfg, ADD_T, &s.opts)?;
            let net = net_force_dissimilar(&cfg, ADD_T, &s.opts)?;
            let pairs = [
                (
                    a.resonant_over_delta + a.resonant_sum_freq + b.resonant_over_delta + b.resonant_sum_freq,
                    net.resonant_over_delta,
                    a.resonant_over_delta.norm() + b.resonant_over_delta.norm(),
                ),
                (a.resonant_cos + b.resonant_cos, net.resonant_cos, a.resonant_cos.norm() + b.resonant_cos.norm()),
                (a.resonant_sin + b.resonant_sin, net.resonant_sin, a.resonant_sin.norm() + b.resonant_sin.norm()),
                (a.semi_resonant + b.semi_resonant, net.semi_resonant, a.semi_resonant.norm() + b.semi_resonant.norm()),
                (a.off_resonant + b.off_resonant, net.off_resonant, a.off_resonant.norm() + b.off_resonant.norm()),
                (a.total + b.total, net.total, a.total.norm() + b.total.norm()),
            ];
            for (sum, closed, scale) in pairs {
                worst = worst.max(ratio((sum - closed).norm(), scale));
            }
        }
    }
    Ok(at_most(
        "additivity_dissimilar",
        true,
        worst,
        ADDITIVITY_TOL,
        format!("per-block |F_A+F_B - F_net| / (|F_A|+|F_B|); Δ/ω ∈ {deltas:?}, k_AR ∈ {krs:?}, Γ_AT=0.5"),
    ))
}

fn identical_additivity_residual(cfg: &IdenticalConfig, t: EvalPoint, opts: &EvalOptions) -> Result<(f64, Vector3<f64>)> {
    let a = force_a_identical(cfg, t, opts)?;
    let b = force_b_identical(cfg, t, opts)?;
    let net = net_force_identical(cfg, t, opts)?;
    let diff = a.total + b.total - net.total;
    let lin = ratio(
        (a.t_linear + b.t_linear - net.t_linear).norm(),
        a.t_linear.norm() + b.t_linear.norm(),
    );
    Ok((ratio(diff.norm(), a.total.norm() + b.total.norm()).max(lin), diff))
}

fn additivity_identical(s: &VerifySettings) -> Result<CheckReport> {
    let mut worst = 0.0f64;
    let krs = s.pick(&[1.5, 2.5, 4.0]);
    for &kr in &krs {
        let cfg = identical(1.0, 0.05, dipole_1(), dipole_2(), sep_dir() * kr)?;
        worst = worst.max(identical_additivity_residual(&cfg, ADD_T, &s.opts)?.0);
    }
    Ok(at_most(
        "additivity_identical",
        s.mandatory_unless_printed(),
        worst,
        ADDITIVITY_TOL,
        format!(
            "|F_A+F_B - F_net| / (|F_A|+|F_B|), totals and T-linear block; k₀R ∈ {krs:?}, Γ₀T=0.5; fb0_sign={:?}, net_form={:?}",
            s.opts.fb0_sign, s.opts.net_form
        ),
    ))
}

/// The as-printed FB0 sign must break additivity by exactly
/// `4e ω⁴T (r∇i - i∇r)`.
fn additivity_identical_printed_fb0(s: &VerifySettings) -> Result<CheckReport> {
    let opts = EvalOptions {
        fb0_sign: Fb0Sign::AsPrinted,
        net_form: NetIdenticalForm::LimitConsistent,
        ..s.opts
    };
    let cfg = identical(1.0, 0.05, dipole_1(), dipole_2(), sep_dir() * 2.5)?;
    let (residual, diff) = identical_additivity_residual(&cfg, ADD_T, &opts)?;
    let c = contraction_bundle(&cfg.dipole_a, &cfg.dipole_b, cfg.omega0, &cfg.separation)?;
    let e = (-cfg.gamma0 * ADD_T.t).exp();
    let predicted = (c.grad_im * c.re - c.grad_re * c.im) * (4.0 * e * cfg.omega0.powi(4) * ADD_T.t);
    let mismatch = (diff - predicted).norm() / predicted.norm();
    Ok(report(
        "additivity_identical_printed_fb0",
        residual > ADDITIVITY_TOL && mismatch <= 1e-9,
        false,
        residual,
        ADDITIVITY_TOL,
        format!("as-printed FB0 sign: additivity residual should exceed the threshold; residual pattern 4eω⁴T(Re∇Im - Im∇Re) mismatch {mismatch:.3e} (≤ 1e-9 expected); k₀R=2.5, Γ₀T=0.5"),
    ))
}

/// The literal identical net force misses `-2eω⁴(r ∂_ω∇r + i ∂_ω∇i)`.
fn additivity_identical_printed_net_form(s: &VerifySettings) -> Result<CheckReport> {
    let opts = EvalOptions {
        fb0_sign: Fb0Sign::LimitConsistent,
        net_form: NetIdenticalForm::AsPrinted,
        ..s.opts
    };
    let cfg = identical(1.0, 0.05, dipole_1(), dipole_2(), sep_dir() * 2.5)?;
    let (residual, diff) = identical_additivity_residual(&cfg, ADD_T, &opts)?;
    let c = contraction_bundle(&cfg.dipole_a, &cfg.dipole_b, cfg.omega0, &cfg.separation)?;
    let e = (-cfg.gamma0 * ADD_T.t).exp();
    let predicted = (c.domega_grad_re * c.re + c.domega_grad_im * c.im) * (-2.0 * e * cfg.omega0.powi(4));
    let mismatch = (diff - predicted).norm() / predicted.norm();
    Ok(report(
        "additivity_identical_printed_net_form",
        residual > ADDITIVITY_TOL && mismatch <= 1e-9,
        false,
        residual,
        ADDITIVITY_TOL,
        format!("as-printed net closed form: additivity residual should exceed the threshold; residual pattern -2eω⁴(Re ∂ω∇Re + Im ∂ω∇Im) mismatch {mismatch:.3e} (≤ 1e-9 expected); k₀R=2.5, Γ₀T=0.5"),
    ))
}

// ---------------------------------------------------------------------------
// momentum conservation

fn conservation_identical_at(kr: f64, gamma_t: f64, opts: &EvalOptions) -> Result<(f64, Vector3<f64>, Vector3<f64>)> {
    let g = CONSERVATION_GAMMA_RATIO;
    let mag = dipole_magnitude_for_gamma(1.0, g);
    let cfg = identical(1.0, g, dipole_1() * mag, dipole_2() * mag, sep_dir() * kr)?;
    let t = EvalPoint::new(gamma_t / g)?;
    let f = net_force_identical(&cfg, t, opts)?.total;
    let p = momentum_rate_identical(&cfg, t, opts)?.value;
    Ok(((p + f).norm() / f.norm(), f, p))
}

fn conservation_dissimilar_at(kr: f64, gamma_t: f64, delta_ratio: f64, opts: &EvalOptions) -> Result<f64> {
    let g = CONSERVATION_GAMMA_RATIO;
    let wb = 1.0 - delta_ratio;
    let mag_a = dipole_magnitude_for_gamma(1.0, g);
    let mag_b = dipole_magnitude_for_gamma(wb, g * wb);
    let cfg = pair(1.0, g, wb, g * wb, dipole_1() * mag_a, dipole_2() * mag_b, sep_dir() * kr)?;
    let t = EvalPoint::new(gamma_t / g)?;
    let f = net_force_dissimilar(&cfg, t, opts)?.total;
    let p = momentum_rate_dissimilar(&cfg, t, opts)?.value;
    Ok((p + f).norm() / f.norm())
}

fn conservation_context(s: &VerifySettings, extra: &str) -> String {
    format!(
        "|Ṗ + F_net| / |F_net|; k₀R ∈ {:?}, Γ₀T ∈ {:?}, Γ/ω = {:e}{extra}",
        s.pick(&CONSERVATION_KR),
        s.pick(&CONSERVATION_GAMMA_T),
        CONSERVATION_GAMMA_RATIO
    )
}

fn conservation_identical(s: &VerifySettings) -> Result<CheckReport> {
    let mut worst = 0.0f64;
    for kr in s.pick(&CONSERVATION_KR) {
        for gt in s.pick(&CONSERVATION_GAMMA_T) {
            worst = worst.max(conservation_identical_at(kr, gt, &s.opts)?.0);
        }
    }
    Ok(at_most(
        "conservation_identical",
        s.mandatory_unless_printed(),
        worst,
        CONSERVATION_IDENTICAL_TOL,
        conservation_context(s, ""),
    ))
}

fn conservation_dissimilar(s: &VerifySettings) -> Result<CheckReport> {
    let mut worst = 0.0f64;
    for kr in s.pick(&CONSERVATION_KR) {
        for gt in s.pick(&CONSERVATION_GAMMA_T) {
            worst = worst.max(conservation_dissimilar_at(kr, gt, CONSERVATION_DELTA_RATIO, &s.opts)?);
        }
    }
    Ok(at_most(
        "conservation_dissimilar",
        true,
        worst,
        CONSERVATION_DISSIMILAR_TOL,
        conservation_context(
            s,
            &format!(
                ", Δ/ω = {CONSERVATION_DELTA_RATIO:e}; the sum-frequency force terms have no emission counterpart, leaving a residual of order Δ/ω"
            ),
        ),
    ))
}

/// The residual is bounded by a modest multiple of `Δ/ω`; its exact size
/// depends on the phase `ΔT`, so no clean power law is expected.
fn conservation_dissimilar_scaling(s: &VerifySettings) -> Result<CheckReport> {
    let deltas = [1e-2, 1e-3, 1e-4];
    let res = deltas
        .iter()
        .map(|&d| conservation_dissimilar_at(2.5, 1.0, d, &s.opts))
        .collect::<Result<Vec<_>>>()?;
    let worst = deltas.iter().zip(&res).map(|(d, r)| r / d).fold(0.0f64, f64::max);
    Ok(report(
        "conservation_dissimilar_scaling",
        worst <= 10.0,
        false,
        worst,
        10.0,
        format!("max residual / (Δ/ω) over Δ/ω ∈ {deltas:?}, residuals {res:?}; k₀R=2.5, Γ₀T=1"),
    ))
}

/// With the literal emission prefactor the photon momentum is `+2 F_net`
/// rather than `-F_net`.
fn conservation_printed_normalization(s: &VerifySettings) -> Result<CheckReport> {
    let opts = EvalOptions {
        emission: EmissionNormalization::AsPrinted,
        ..s.opts
    };
    let (_, f, p) = conservation_identical_at(2.5, 1.0, &opts)?;
    let r = p.dot(&f) / f.norm_squared();
    Ok(report(
        "conservation_printed_normalization",
        (r - 2.0).abs() <= 1e-3,
        false,
        r,
        2.0,
        "Ṗ·F_net/|F_net|² with the literal 1/(2π²) prefactor (momentum balance needs -1); identical atoms, k₀R=2.5, Γ₀T=1"
            .to_string(),
    ))
}

// ---------------------------------------------------------------------------
// exact zeros

fn crossed_dipoles_zero(s: &VerifySettings) -> Result<CheckReport> {
    let sep = Vector3::new(0.0, 0.0, 2.0);
    let t = EvalPoint::new(50.0)?;
    let opts = &s.opts;
    let dis = pair(1.0, 0.01, 0.9, 0.01, Vector3::x(), Vector3::y(), sep)?;
    let idc = identical(1.0, 0.01, Vector3::x(), Vector3::y(), sep)?;
    let mut worst = 0.0f64;
    let mut see = |v: f64| worst = worst.max(v.abs());
    for f in [force_a_dissimilar(&dis, t, opts)?, force_b_dissimilar(&dis, t, opts)?, net_force_dissimilar(&dis, t, opts)?] {
        f.blocks().iter().for_each(|b| see(b.amax()));
    }
    for e in [energy_a_dissimilar(&dis, t, opts)?, energy_b_dissimilar(&dis, t, opts)?] {
        e.blocks().iter().for_each(|&b| see(b));
    }
    for f in [force_a_identical(&idc, t, opts)?, force_b_identical(&idc, t, opts)?, net_force_identical(&idc, t, opts)?] {
        f.blocks().iter().for_each(|b| see(b.amax()));
    }
    let dirs = [
        Vector3::new(0.0, 0.0, 1.0),
        Vector3::new(1.0, 0.0, 0.0),
        Vector3::new(0.3, -0.4, 0.5),
        Vector3::new(-0.2, 0.7, -0.6),
    ];
    for d in &dirs {
        see(emission_rate_dissimilar(&dis, t, d, opts)?);
        see(emission_rate_identical(&idc, t, d, opts)?);
    }
    see(momentum_rate_dissimilar(&dis, t, opts)?.value.amax());
    see(momentum_rate_identical(&idc, t, opts)?.value.amax());
    Ok(report(
        "crossed_dipoles_zero",
        worst == 0.0,
        true,
        worst,
        0.0,
        "max |component| of every force/energy block, emission rates in 4 directions and momentum rates; μ_A = x̂, μ_B = ŷ, R = 2ẑ".to_string(),
    ))
}

// ---------------------------------------------------------------------------
// energy versus force

/// Five-point central difference.
fn fd5(f: impl Fn(f64) -> Result<f64>, x: f64, h: f64) -> Result<f64> {
    Ok((f(x - 2.0 * h)? - 8.0 * f(x - h)? + 8.0 * f(x + h)? - f(x + 2.0 * h)?) / (12.0 * h))
}

fn fd_grad(f: impl Fn(&Vector3<f64>) -> Result<f64>, at: &Vector3<f64>, h: f64) -> Result<Vector3<f64>> {
    let mut g = Vector3::zeros();
    for j in 0..3 {
        g[j] = fd5(
            |x| {
                let mut p = *at;
                p[j] = x;
                f(&p)
            },
            at[j],
            h,
        )?;
    }
    Ok(g)
}

fn asymmetry_point() -> Result<AtomPairConfig> {
    pair(1.0, 0.01, 0.9, 0.012, dipole_1(), dipole_2(), sep_dir() * 2.2)
}

const ASYM_T: EvalPoint = EvalPoint { t: 30.0 };

fn resonant_part(b: &[f64; 6]) -> f64 {
    b[0] + b[1] + b[2] + b[3]
}

fn resonant_force(f: &ForceBreakdown) -> Vector3<f64> {
    f.resonant_over_delta + f.resonant_cos + f.resonant_sin + f.resonant_sum_freq
}

/// Under the sign pairing that makes the off-resonant blocks agree
/// (`F_A ↔ +∇W_A/2`, `F_B ↔ -∇W_B/2`), the resonant blocks do not.
fn energy_force_asymmetry(s: &VerifySettings) -> Result<CheckReport> {
    let cfg = asymmetry_point()?;
    let opts = &s.opts;
    let r = cfg.distance();
    let h = 1e-3 * r;
    let at_sep = |sep: &Vector3<f64>| AtomPairConfig { separation: *sep, ..cfg };
    let mut worst = f64::INFINITY;
    let mut parts = Vec::new();
    for (label, sign) in [("A", 1.0), ("B", -1.0)] {
        let energy = |sep: &Vector3<f64>| -> Result<[f64; 6]> {
            let c = at_sep(sep);
            Ok(if sign > 0.0 { energy_a_dissimilar(&c, ASYM_T, opts)? } else { energy_b_dissimilar(&c, ASYM_T, opts)? }.blocks())
        };
        let force = if sign > 0.0 { force_a_dissimilar(&cfg, ASYM_T, opts)? } else { force_b_dissimilar(&cfg, ASYM_T, opts)? };
        let grad = fd_grad(|p| Ok(resonant_part(&energy(p)?)), &cfg.separation, h)?;
        let grad_coarse = fd_grad(|p| Ok(resonant_part(&energy(p)?)), &cfg.separation, 2.0 * h)?;
        let w = energy(&cfg.separation)?;
        let noise = 2.0 * f64::EPSILON * w[..4].iter().map(|x| x.abs()).sum::<f64>() / h + (grad - grad_coarse).norm();
        let gap = (resonant_force(&force) - grad * (sign / 2.0)).norm();
        worst = worst.min(gap / noise);
        parts.push(format!("{label}: |F - (±∇W/2)| = {gap:.3e}, noise {noise:.3e}"));
    }
    Ok(report(
        "energy_force_asymmetry",
        worst > ASYMMETRY_FACTOR,
        true,
        worst,
        ASYMMETRY_FACTOR,
        format!(
            "resonant blocks, ratio of the gap to the finite-difference noise floor must exceed the threshold; {}; ω_B/ω_A=0.9, k_AR=2.2, T=30",
            parts.join("; ")
        ),
    ))
}

fn energy_force_off_block(s: &VerifySettings) -> Result<CheckReport> {
    let cfg = asymmetry_point()?;
    let opts = EvalOptions {
        quadrature: QuadratureSettings {
            rel_tol: 1e-13,
            abs_tol: 1e-18,
            ..s.opts.quadrature
        },
        ..s.opts
    };
    let h = 2e-3 * cfg.distance();
    let at_sep = |sep: &Vector3<f64>| AtomPairConfig { separation: *sep, ..cfg };
    let ga = fd_grad(|p| Ok(energy_a_dissimilar(&at_sep(p), ASYM_T, &opts)?.off_resonant), &cfg.separation, h)?;
    let gb = fd_grad(|p| Ok(energy_b_dissimilar(&at_sep(p), ASYM_T, &opts)?.off_resonant), &cfg.separation, h)?;
    let fa = force_a_dissimilar(&cfg, ASYM_T, &opts)?.off_resonant;
    let fb = force_b_dissimilar(&cfg, ASYM_T, &opts)?.off_resonant;
    let ra = (fa - ga / 2.0).norm() / fa.norm();
    let rb = (fb + gb / 2.0).norm() / fb.norm();
    Ok(at_most(
        "energy_force_off_block",
        true,
        ra.max(rb),
        OFF_BLOCK_TOL,
        format!("off-resonant block: |F_A - ∇W_A/2|/|F_A| = {ra:.3e}, |F_B + ∇W_B/2|/|F_B| = {rb:.3e}; five-point FD, h = 2e-3 R; ω_B/ω_A=0.9, k_AR=2.2, T=30"),
    ))
}

fn energy_off_blocks_coincide(s: &VerifySettings) -> Result<CheckReport> {
    let cfg = asymmetry_point()?;
    let wa = energy_a_dissimilar(&cfg, ASYM_T, &s.opts)?.off_resonant;
    let wb = energy_b_dissimilar(&cfg, ASYM_T, &s.opts)?.off_resonant;
    Ok(report(
        "energy_off_blocks_coincide",
        wa == wb,
        true,
        (wa - wb).abs(),
        0.0,
        format!("|W_A.off - W_B.off| (W_A.off = {wa:.6e}); ω_B/ω_A=0.9, k_AR=2.2, T=30"),
    ))
}

// ---------------------------------------------------------------------------
// gradients

fn random_unit(rng: &mut ChaCha8Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

fn rel_vec(analytic: Vector3<f64>, fd: Vector3<f64>) -> f64 {
    ratio((analytic - fd).norm(), analytic.norm())
}

fn rel_scalar(analytic: f64, fd: f64) -> f64 {
    ratio((analytic - fd).abs(), analytic.abs())
}

fn contract_real(m: &Matrix3<f64>, a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    a.dot(&(m * b))
}

fn gradient_fd(s: &VerifySettings) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let n = if s.minimal() { 1 } else { GRADIENT_POINTS };
    let mut worst = 0.0f64;
    let mut worst_at = String::new();
    for _ in 0..n {
        let kr: f64 = rng.random_range(0.3..10.0);
        let r: f64 = rng.random_range(0.5..3.0);
        let k = kr / r;
        let sep = random_unit(&mut rng) * r;
        let (a, b) = (random_unit(&mut rng), random_unit(&mut rng));
        let h = 1e-3 * r;
        let hk = 1e-3 * k;

        let c = contraction_bundle(&a, &b, k, &sep)?;
        let re = |p: &Vector3<f64>| Ok(contraction_bundle(&a, &b, k, p)?.re);
        let im = |p: &Vector3<f64>| Ok(contraction_bundle(&a, &b, k, p)?.im);
        let at_k = |kk: f64| contraction_bundle(&a, &b, kk, &sep);
        let mut errs = vec![
            rel_vec(c.grad_re, fd_grad(re, &sep, h)?),
            rel_vec(c.grad_im, fd_grad(im, &sep, h)?),
            rel_scalar(c.domega_re, fd5(|x| Ok(at_k(x)?.re), k, hk)?),
            rel_scalar(c.domega_im, fd5(|x| Ok(at_k(x)?.im), k, hk)?),
        ];
        let mut dgr = Vector3::zeros();
        let mut dgi = Vector3::zeros();
        for j in 0..3 {
            dgr[j] = fd5(|x| Ok(at_k(x)?.grad_re[j]), k, hk)?;
            dgi[j] = fd5(|x| Ok(at_k(x)?.grad_im[j]), k, hk)?;
        }
        errs.push(rel_vec(c.domega_grad_re, dgr));
        errs.push(rel_vec(c.domega_grad_im, dgi));

        let g = green_imag_freq(k, &sep)?;
        let val = |p: &Vector3<f64>| Ok(contract_real(&green_imag_freq(k, p)?.value, &a, &b));
        let grad: Vector3<f64> = Vector3::from_fn(|j, _| contract_real(&g.grad[j], &a, &b));
        errs.push(rel_vec(grad, fd_grad(val, &sep, h)?));
        let dq = fd5(|q| Ok(contract_real(&green_imag_freq(q, &sep)?.value, &a, &b)), k, hk)?;
        errs.push(rel_scalar(contract_real(&g.omega_deriv, &a, &b), dq));
        let mut dqg = Vector3::zeros();
        for j in 0..3 {
            dqg[j] = fd5(|q| Ok(contract_real(&green_imag_freq(q, &sep)?.grad[j], &a, &b)), k, hk)?;
        }
        errs.push(rel_vec(Vector3::from_fn(|j, _| contract_real(&g.omega_grad[j], &a, &b)), dqg));

        let e = errs.iter().fold(0.0f64, |m, &x| m.max(x));
        if e >= worst {
            worst = e;
            worst_at = format!("kR={kr:.4}, R={r:.4}");
        }
    }
    Ok(at_most(
        "gradient_fd",
        true,
        worst,
        GRADIENT_TOL,
        format!(
            "norm-wise relative error of ∇, ∂ω, ∂ω∇ of μ_A·G·μ_B (real axis) and ∇, ∂q, ∂q∇ (imaginary axis) against five-point FD; {n} seeded points (seed {}), worst at {worst_at}",
            s.seed
        ),
    ))
}

// ---------------------------------------------------------------------------
// Green tensor

fn printed_green(k: Complex64, sep: &Vector3<f64>) -> Matrix3<Complex64> {
    let r = sep.norm();
    let n = sep / r;
    let nn = n * n.transpose();
    let alpha = Matrix3::identity() - nn;
    let beta = Matrix3::identity() - nn * 3.0;
    let x = k * r;
    let i = Complex64::i();
    let pref = k * (i * x).exp() / (-4.0 * PI);
    let ca = pref / x;
    let cb = pref * (i / (x * x) - 1.0 / (x * x * x));
    alpha.map(|v| ca * v) + beta.map(|v| cb * v)
}

fn max_abs<T: Copy>(m: &Matrix3<T>, f: impl Fn(T) -> f64) -> f64 {
    m.iter().fold(0.0f64, |acc, &v| acc.max(f(v)))
}

fn green_imaginary_substitution(s: &VerifySettings) -> Result<CheckReport> {
    let dirs = s.pick(&[Vector3::z(), sep_dir(), Vector3::new(-0.7, 0.4, 0.1).normalize()]);
    let qrs = s.pick(&[0.1, 0.5, 1.0, 3.0, 10.0]);
    let mut worst = 0.0f64;
    for n in &dirs {
        for &qr in &qrs {
            let r = 1.3;
            let sep = n * r;
            let q = qr / r;
            let direct = green_imag_freq(q, &sep)?.value;
            let subst = printed_green(Complex64::new(0.0, q), &sep);
            let scale = max_abs(&direct, f64::abs);
            let diff = max_abs(&(subst - direct.map(Complex64::from)), |z: Complex64| z.norm());
            worst = worst.max(diff / scale);
        }
    }
    Ok(at_most(
        "green_imaginary_substitution",
        true,
        worst,
        GREEN_SUBSTITUTION_TOL,
        format!("max-entry relative difference between G(iq) and the complex expression at k = iq; qR ∈ {qrs:?}, {} directions, R=1.3", dirs.len()),
    ))
}

fn green_near_field(_s: &VerifySettings) -> Result<CheckReport> {
    let k = 1.0;
    let sep = sep_dir() * 1e-3;
    let g = green_real_freq(k, &sep)?.value;
    let limit = -k / (6.0 * PI);
    let im = g.map(|z| z.im);
    let err = max_abs(&(im - Matrix3::identity() * limit), f64::abs) / limit.abs();
    Ok(at_most(
        "green_near_field",
        true,
        err,
        NEAR_FIELD_TOL,
        "max |Im G - (-k/6π) I| / (k/6π) at kR = 1e-3; the overall sign follows the tensor's -1/(4π) prefactor".to_string(),
    ))
}

fn green_symmetry_parity(s: &VerifySettings) -> Result<CheckReport> {
    let krs = s.pick(&[0.05, 0.7, 2.0, 9.0]);
    let dirs = s.pick(&[sep_dir(), Vector3::new(0.6, 0.7, -0.2).normalize()]);
    let mut worst = 0.0f64;
    for &kr in &krs {
        for n in &dirs {
            let r = 0.8;
            let sep = n * r;
            let k = kr / r;
            let g = green_real_freq(k, &sep)?;
            let gm = green_real_freq(k, &(-sep))?;
            let scale = max_abs(&g.value, |z: Complex64| z.norm());
            let gscale = g.grad.iter().fold(0.0f64, |m, x| m.max(max_abs(x, |z: Complex64| z.norm())));
            let cn = |z: Complex64| z.norm();
            worst = worst.max(max_abs(&(g.value - g.value.transpose()), cn) / scale);
            worst = worst.max(max_abs(&(g.value - gm.value), cn) / scale);
            for j in 0..3 {
                worst = worst.max(max_abs(&(g.grad[j] + gm.grad[j]), cn) / gscale);
                worst = worst.max(max_abs(&(g.grad[j] - g.grad[j].transpose()), cn) / gscale);
            }
            let gi = green_imag_freq(k, &sep)?;
            let gim = green_imag_freq(k, &(-sep))?;
            let iscale = max_abs(&gi.value, f64::abs);
            worst = worst.max(max_abs(&(gi.value - gi.value.transpose()), f64::abs) / iscale);
            worst = worst.max(max_abs(&(gi.value - gim.value), f64::abs) / iscale);
        }
    }
    Ok(at_most(
        "green_symmetry_parity",
        true,
        worst,
        SYMMETRY_TOL,
        format!("G = Gᵀ, G(-R) = G(R), ∇G(-R) = -∇G(R), real and imaginary axis; kR ∈ {krs:?}, {} directions", dirs.len()),
    ))
}

// ---------------------------------------------------------------------------
// identical limit

const LIMIT_OMEGA: f64 = 1.0;
const LIMIT_GAMMA: f64 = 0.05;
const LIMIT_T: EvalPoint = EvalPoint { t: 10.0 };
const LIMIT_KR: f64 = 2.0;

fn limit_configs(eps: f64) -> Result<(IdenticalConfig, AtomPairConfig)> {
    let sep = sep_dir() * (LIMIT_KR / LIMIT_OMEGA);
    let id = identical(LIMIT_OMEGA, LIMIT_GAMMA, dipole_1(), dipole_2(), sep)?;
    let dis = pair(LIMIT_OMEGA, LIMIT_GAMMA, LIMIT_OMEGA * (1.0 - eps), LIMIT_GAMMA, dipole_1(), dipole_2(), sep)?;
    Ok((id, dis))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Groups blocks of an identical/dissimilar force pair that correspond.
fn force_groups(id: &IdenticalForceBreakdown, dis: &ForceBreakdown) -> [(&'static str, Vector3<f64>); 4] {
    [
        ("resonant", id.t_linear + id.frequency_derivative + id.cubic - resonant_force(dis)),
        ("semi_resonant", id.semi_resonant - dis.semi_resonant),
        ("off_resonant", id.off_resonant - dis.off_resonant),
        ("total", id.total - dis.total),
    ]
}

fn slope_report(name: &str, labels: &[&str], diffs: &[Vec<f64>]) -> CheckReport {
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for (i, label) in labels.iter().enumerate() {
        let y: Vec<f64> = diffs.iter().map(|d| d[i]).collect();
        if y.iter().all(|&v| v == 0.0) {
            parts.push(format!("{label}: identically equal"));
            continue;
        }
        let slope = loglog_slope(&LIMIT_EPSILONS, &y);
        let dev = if slope.is_finite() { (slope - 1.0).abs() } else { f64::INFINITY };
        worst = worst.max(dev);
        parts.push(format!("{label}: slope {slope:.4}"));
    }
    at_most(
        name,
        true,
        worst,
        SLOPE_TOL,
        format!(
            "max |slope - 1| of log|identical - dissimilar(Δ = εω₀)| vs log ε, ε ∈ {LIMIT_EPSILONS:?}; ω₀=1, Γ₀=0.05, T=10, k₀R=2; {}",
            parts.join(", ")
        ),
    )
}

fn limit_force(s: &VerifySettings, name: &str, atom_b: bool) -> Result<CheckReport> {
    let mut diffs = Vec::new();
    let mut labels = Vec::new();
    for &eps in &LIMIT_EPSILONS {
        let (id, dis) = limit_configs(eps)?;
        let (fi, fd) = if atom_b {
            (force_b_identical(&id, LIMIT_T, &s.opts)?, force_b_dissimilar(&dis, LIMIT_T, &s.opts)?)
        } else {
            (force_a_identical(&id, LIMIT_T, &s.opts)?, force_a_dissimilar(&dis, LIMIT_T, &s.opts)?)
        };
        let groups = force_groups(&fi, &fd);
        labels = groups.iter().map(|g| g.0).collect();
        diffs.push(groups.iter().map(|g| g.1.norm()).collect());
    }
    Ok(slope_report(name, &labels, &diffs))
}

fn limit_slope_force_a(s: &VerifySettings) -> Result<CheckReport> {
    limit_force(s, "limit_slope_force_a", false)
}

fn limit_slope_force_b(s: &VerifySettings) -> Result<CheckReport> {
    limit_force(s, "limit_slope_force_b", true)
}

fn limit_slope_net_force(s: &VerifySettings) -> Result<CheckReport> {
    let mut diffs = Vec::new();
    for &eps in &LIMIT_EPSILONS {
        let (id, dis) = limit_configs(eps)?;
        let fi = net_force_identical(&id, LIMIT_T, &s.opts)?;
        let fd = net_force_dissimilar(&dis, LIMIT_T, &s.opts)?;
        diffs.push(vec![(fi.total - fd.total).norm()]);
    }
    Ok(slope_report("limit_slope_net_force", &["total"], &diffs))
}

fn limit_slope_emission_moment(s: &VerifySettings) -> Result<CheckReport> {
    let mut diffs = Vec::new();
    for &eps in &LIMIT_EPSILONS {
        let (id, dis) = limit_configs(eps)?;
        let pi = momentum_rate_identical(&id, LIMIT_T, &s.opts)?.value;
        let pd = momentum_rate_dissimilar(&dis, LIMIT_T, &s.opts)?.value;
        diffs.push(vec![(pi - pd).norm()]);
    }
    Ok(slope_report("limit_slope_emission_moment", &["momentum_rate"], &diffs))
}

// ---------------------------------------------------------------------------
// off-resonant block

fn offresonant_reciprocity(s: &VerifySettings) -> Result<CheckReport> {
    let q = &s.opts.quadrature;
    let sep = sep_dir() * 1.7;
    let (a, b) = (dipole_1(), dipole_2());
    let mut worst = 0.0f64;
    for (ka, kb) in s.pick(&[(1.0, 0.9), (1.0, 0.5), (2.0, 1.9)]) {
        let base = integral_off_resonant(ka, kb, &a, &b, &sep, q)?.value;
        let swapped_freq = integral_off_resonant(kb, ka, &a, &b, &sep, q)?.value;
        let swapped_dip = integral_off_resonant(ka, kb, &b, &a, &sep, q)?.value;
        let flipped = integral_off_resonant(ka, kb, &a, &b, &(-sep), q)?.value;
        let scale = base.norm();
        worst = worst
            .max((base - swapped_freq).norm() / scale)
            .max((base - swapped_dip).norm() / scale)
            .max((base + flipped).norm() / scale);
    }
    Ok(at_most(
        "offresonant_reciprocity",
        true,
        worst,
        ADDITIVITY_TOL,
        "off-resonant integral invariant under k_A ↔ k_B and μ_A ↔ μ_B, odd under R → -R; k_AR=1.7 scale".to_string(),
    ))
}

/// Bisects the sign change of the off-resonant force block in `Γ₀T`.
fn offresonant_sign_flip(s: &VerifySettings) -> Result<CheckReport> {
    let gamma = 1e-3;
    let cfg = identical(1.0, gamma, dipole_1(), dipole_2(), sep_dir() * 2.0)?;
    let dis = pair(1.0, gamma, 0.8, 2e-3, dipole_1(), dipole_2(), sep_dir() * 2.0)?;
    let opts = s.opts;
    let probes: [Box<dyn Fn(f64) -> Result<Vector3<f64>>>; 3] = [
        Box::new(|x| Ok(force_a_identical(&cfg, EvalPoint::new(x / gamma)?, &opts)?.off_resonant)),
        Box::new(|x| Ok(force_b_identical(&cfg, EvalPoint::new(x / gamma)?, &opts)?.off_resonant)),
        Box::new(|x| Ok(force_a_dissimilar(&dis, EvalPoint::new(x / gamma)?, &opts)?.off_resonant)),
    ];
    let mut worst = 0.0f64;
    let mut roots = Vec::new();
    for probe in &probes {
        let axis = probe(3.0)?;
        let f = |x: f64| -> Result<f64> { Ok(probe(x)?.dot(&axis)) };
        let (mut lo, mut hi) = (0.1, 3.0);
        let flo = f(lo)?;
        if flo.signum() == f(hi)?.signum() {
            worst = f64::INFINITY;
            continue;
        }
        while hi - lo > 1e-13 {
            let mid = 0.5 * (lo + hi);
            if f(mid)?.signum() == flo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let root = 0.5 * (lo + hi);
        roots.push(root);
        worst = worst.max((root - LN_2).abs());
    }
    Ok(at_most(
        "offresonant_sign_flip",
        true,
        worst,
        SIGN_FLIP_TOL,
        format!("|Γ_AT* - ln 2| for the bisected sign change of the off-resonant block of F_A, F_B (identical) and F_A (dissimilar); roots {roots:?}"),
    ))
}
