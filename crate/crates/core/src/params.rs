//! Physical inputs, derived accessors and validity diagnostics.
//!
//! Natural units `ħ = c = ε₀ = 1` are used throughout, so wavenumbers equal
//! angular frequencies and the causality condition reads `T > R`.

use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::green;

/// Linewidths above this fraction of the transition frequency are flagged.
pub const BROAD_LINE_RATIO: f64 = 0.1;
/// Detunings above this fraction of `ω_A` leave the near-resonant regime.
pub const NEAR_RESONANT_RATIO: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomSpec {
    pub omega: f64,
    pub gamma: f64,
    pub dipole: Vector3<f64>,
}

impl AtomSpec {
    pub fn new(omega: f64, gamma: f64, dipole: Vector3<f64>) -> Result<Self> {
        let spec = AtomSpec { omega, gamma, dipole };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("omega", self.omega)?;
        ensure_finite("gamma", self.gamma)?;
        for &c in self.dipole.iter() {
            ensure_finite("dipole", c)?;
        }
        if self.omega <= 0.0 {
            return Err(Error::invalid("omega", format!("must be positive, got {}", self.omega)));
        }
        if self.gamma < 0.0 {
            return Err(Error::invalid("gamma", format!("must be non-negative, got {}", self.gamma)));
        }
        Ok(())
    }

    /// Advisory messages; never errors.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.gamma > BROAD_LINE_RATIO * self.omega {
            out.push(format!(
                "linewidth {} exceeds {} of the transition frequency {}",
                self.gamma, BROAD_LINE_RATIO, self.omega
            ));
        }
        let ww = gamma_from_dipole(self.omega, &self.dipole);
        if self.gamma > 0.0 && ww > 0.0 && (self.gamma / ww > 10.0 || ww / self.gamma > 10.0) {
            out.push(format!(
                "linewidth {} differs by more than 10x from the Weisskopf-Wigner value {}",
                self.gamma, ww
            ));
        }
        out
    }
}

/// Atom A is the one initially excited; `separation` points from A to B.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomPairConfig {
    pub atom_a: AtomSpec,
    pub atom_b: AtomSpec,
    pub separation: Vector3<f64>,
}

impl AtomPairConfig {
    pub fn new(atom_a: AtomSpec, atom_b: AtomSpec, separation: Vector3<f64>) -> Result<Self> {
        let cfg = AtomPairConfig {
            atom_a,
            atom_b,
            separation,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.atom_a.validate()?;
        self.atom_b.validate()?;
        for &c in self.separation.iter() {
            ensure_finite("separation", c)?;
        }
        if self.separation.norm() == 0.0 {
            return Err(Error::CoincidentAtoms);
        }
        Ok(())
    }

    /// `Δ_AB = ω_A - ω_B`
    pub fn detuning(&self) -> f64 {
        self.atom_a.omega - self.atom_b.omega
    }

    pub fn k_a(&self) -> f64 {
        self.atom_a.omega
    }

    pub fn k_b(&self) -> f64 {
        self.atom_b.omega
    }

    pub fn distance(&self) -> f64 {
        self.separation.norm()
    }

    pub fn axis(&self) -> Vector3<f64> {
        self.separation / self.distance()
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut out = self.atom_a.warnings();
        out.extend(self.atom_b.warnings());
        let d = self.detuning().abs();
        if d > NEAR_RESONANT_RATIO * self.atom_a.omega {
            out.push(format!(
                "detuning {d} is not small compared with omega_a = {}",
                self.atom_a.omega
            ));
        }
        out
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: PairConfigFile = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        file.try_into()
    }
}

/// On-disk form of [`AtomPairConfig`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairConfigFile {
    pub omega_a: f64,
    pub omega_b: f64,
    pub gamma_a: f64,
    pub gamma_b: f64,
    pub dipole_a: [f64; 3],
    pub dipole_b: [f64; 3],
    pub separation: [f64; 3],
}

impl TryFrom<PairConfigFile> for AtomPairConfig {
    type Error = Error;

    fn try_from(f: PairConfigFile) -> Result<Self> {
        AtomPairConfig::new(
            AtomSpec::new(f.omega_a, f.gamma_a, f.dipole_a.into())?,
            AtomSpec::new(f.omega_b, f.gamma_b, f.dipole_b.into())?,
            f.separation.into(),
        )
    }
}

impl From<&AtomPairConfig> for PairConfigFile {
    fn from(c: &AtomPairConfig) -> Self {
        PairConfigFile {
            omega_a: c.atom_a.omega,
            omega_b: c.atom_b.omega,
            gamma_a: c.atom_a.gamma,
            gamma_b: c.atom_b.gamma,
            dipole_a: c.atom_a.dipole.into(),
            dipole_b: c.atom_b.dipole.into(),
            separation: c.separation.into(),
        }
    }
}

/// Observation time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalPoint {
    pub t: f64,
}

impl EvalPoint {
    pub fn new(t: f64) -> Result<Self> {
        ensure_finite("T", t)?;
        if t <= 0.0 {
            return Err(Error::invalid("T", format!("must be positive, got {t}")));
        }
        Ok(EvalPoint { t })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Dissimilar,
    IdenticalLimit,
}

/// An inequality `lhs ≤ rhs`; `margin = lhs / rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub satisfied: bool,
    pub margin: f64,
}

impl Bound {
    fn new(lhs: f64, rhs: f64) -> Self {
        Bound {
            satisfied: lhs <= rhs,
            margin: lhs / rhs,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub causal: bool,
    pub weak_interaction: Bound,
    pub perturbative: Bound,
    pub regime: Regime,
}

impl ValidityReport {
    pub fn all_ok(&self) -> bool {
        self.causal && self.weak_interaction.satisfied && self.perturbative.satisfied
    }
}

/// Evaluates the causality, weak-interaction and perturbative conditions with
/// `k₀ = ω_A`, `Γ₀ = Γ_A`:
///
/// * weak interaction: `k₀² |μ_A·Re G(k₀R)·μ_B| ≤ 1/T`
/// * perturbative: `24π Tr Re G(k₀R) ≤ k₀/(Γ₀T)`, with the trace taken in
///   the convention where `Im G → +(k/6π) I` at short range, i.e. the
///   negative of the trace of [`green::green_real_freq`]
pub fn check_validity(cfg: &AtomPairConfig, t: EvalPoint, regime: Regime) -> Result<ValidityReport> {
    cfg.validate()?;
    ensure_finite("T", t.t)?;
    let k0 = cfg.k_a();
    let g = green::green_real_freq(k0, &cfg.separation)?;
    let contraction = cfg.atom_a.dipole.dot(&(g.value.map(|z| z.re) * cfg.atom_b.dipole));
    let trace: f64 = -(0..3).map(|i| g.value[(i, i)].re).sum::<f64>();
    Ok(ValidityReport {
        causal: t.t > cfg.distance(),
        weak_interaction: Bound::new(k0 * k0 * contraction.abs(), 1.0 / t.t),
        perturbative: Bound::new(24.0 * PI * trace, k0 / (cfg.atom_a.gamma * t.t)),
        regime,
    })
}

/// Weisskopf-Wigner linewidth `ω³|μ|²/(3π)`.
pub fn gamma_from_dipole(omega: f64, dipole: &Vector3<f64>) -> f64 {
    omega.powi(3) * dipole.norm_squared() / (3.0 * PI)
}

/// Dipole magnitude whose Weisskopf-Wigner linewidth is `gamma`.
pub fn dipole_magnitude_for_gamma(omega: f64, gamma: f64) -> f64 {
    (3.0 * PI * gamma / omega.powi(3)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(kr: f64, gamma: f64) -> AtomPairConfig {
        let mu = Vector3::new(1.0, 1.0, 1.0) * 1e-3;
        AtomPairConfig::new(
            AtomSpec::new(1.0, gamma, mu).unwrap(),
            AtomSpec::new(0.999, gamma, mu).unwrap(),
            Vector3::new(0.0, 0.0, kr),
        )
        .unwrap()
    }

    #[test]
    fn gamma_from_dipole_examples() {
        assert_eq!(gamma_from_dipole(2.0, &Vector3::zeros()), 0.0);
        let mu = Vector3::new(3.0 * PI, 0.0, 0.0).map(f64::sqrt);
        assert!((gamma_from_dipole(1.0, &mu) - 1.0).abs() < 1e-15);
        let m = Vector3::new(0.2, -0.4, 0.1);
        let s = 3.7;
        let ratio = gamma_from_dipole(1.3, &(m * s)) / gamma_from_dipole(1.3, &m);
        assert!((ratio - s * s).abs() < 1e-12);
        let g = 2e-4;
        let mag = dipole_magnitude_for_gamma(1.5, g);
        assert!((gamma_from_dipole(1.5, &(Vector3::x() * mag)) - g).abs() < 1e-18);
    }

    #[test]
    fn accessors() {
        let c = pair(2.0, 1e-6);
        assert!((c.detuning() - 1e-3).abs() < 1e-15);
        assert_eq!(c.k_a(), 1.0);
        assert_eq!(c.k_b(), 0.999);
        assert_eq!(c.distance(), 2.0);
    }

    #[test]
    fn causality_flag() {
        let c = pair(2.0, 1e-6);
        let r = check_validity(&c, EvalPoint { t: 2.0 }, Regime::Dissimilar).unwrap();
        assert!(!r.causal);
        let r = check_validity(&c, EvalPoint { t: 2.5 }, Regime::Dissimilar).unwrap();
        assert!(r.causal);
    }

    #[test]
    fn crossed_dipoles_always_weak() {
        let c = AtomPairConfig::new(
            AtomSpec::new(1.0, 1e-3, Vector3::x()).unwrap(),
            AtomSpec::new(1.0, 1e-3, Vector3::y()).unwrap(),
            Vector3::new(0.0, 0.0, 1.0),
        )
        .unwrap();
        for t in [2.0, 1e3, 1e9] {
            let r = check_validity(&c, EvalPoint { t }, Regime::IdenticalLimit).unwrap();
            assert!(r.weak_interaction.satisfied);
            assert_eq!(r.weak_interaction.margin, 0.0);
        }
    }

    #[test]
    fn perturbative_boundary_near_unit_decay() {
        // Γ₀T = 1: first k₀R where the bound holds.
        let gamma = 1e-6;
        let t = 1.0 / gamma;
        let first = (0..4000)
            .map(|i| 0.5 + i as f64 * 1e-3)
            .find(|&kr| {
                check_validity(&pair(kr, gamma), EvalPoint { t }, Regime::IdenticalLimit)
                    .unwrap()
                    .perturbative
                    .satisfied
            })
            .unwrap();
        assert!((1.3..1.5).contains(&first), "{first}");
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(AtomSpec::new(0.0, 0.0, Vector3::x()).is_err());
        assert!(AtomSpec::new(1.0, -1.0, Vector3::x()).is_err());
        assert!(AtomSpec::new(f64::NAN, 0.0, Vector3::x()).is_err());
        let a = AtomSpec::new(1.0, 0.0, Vector3::x()).unwrap();
        assert_eq!(AtomPairConfig::new(a, a, Vector3::zeros()), Err(Error::CoincidentAtoms));
        assert!(EvalPoint::new(f64::INFINITY).is_err());
    }

    #[test]
    fn broad_line_warns() {
        let a = AtomSpec::new(1.0, 0.2, Vector3::zeros()).unwrap();
        assert_eq!(a.warnings().len(), 1);
    }

    #[test]
    fn json_round_trip() {
        let c = pair(1.5, 1e-4);
        let s = serde_json::to_string(&PairConfigFile::from(&c)).unwrap();
        assert_eq!(AtomPairConfig::from_json_str(&s).unwrap(), c);
        assert!(matches!(
            AtomPairConfig::from_json_str("{\"omega_a\": 1}"),
            Err(Error::Config(_))
        ));
    }
}
