//! Run parameters from flags and an optional JSON config file; flags win.

use std::path::Path;

use clap::{Args, ValueEnum};
use excited_vdw::figure::DipoleModel;
use excited_vdw::options::{EmissionNormalization, EvalOptions, Fb0Sign, NetIdenticalForm};
use excited_vdw::params::{dipole_magnitude_for_gamma, AtomPairConfig, AtomSpec, EvalPoint};
use nalgebra::Vector3;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Dissimilar,
    Identical,
}

/// How dipoles are chosen when not given as explicit vectors. Magnitudes
/// follow from the linewidths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DipoleChoice {
    /// `(1, 1, 1)/√3` on both atoms
    #[default]
    Equal,
    /// Average every quantity over six icosahedral orientations of the common axis
    Average,
    /// Both along the separation
    Axial,
    /// `x̂` on A, `ŷ` on B
    Crossed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Internally consistent default
    Consistent,
    /// Literal expression
    Printed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Mirror of every flag, for `--config`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub mode: Option<Mode>,
    pub omega_a: Option<f64>,
    pub omega_b: Option<f64>,
    pub delta_ratio: Option<f64>,
    pub gamma_a: Option<f64>,
    pub gamma_b: Option<f64>,
    pub gamma_ratio: Option<f64>,
    pub dipole_a: Option<[f64; 3]>,
    pub dipole_b: Option<[f64; 3]>,
    pub dipoles: Option<DipoleChoice>,
    pub separation: Option<[f64; 3]>,
    pub kr: Option<f64>,
    #[serde(rename = "T")]
    pub t: Option<f64>,
    pub gamma_t: Option<f64>,
    pub kr_range: Option<String>,
    pub points: Option<usize>,
    pub out: Option<String>,
    pub format: Option<Format>,
    pub tol: Option<f64>,
    pub threads: Option<usize>,
    pub fb0_sign: Option<Variant>,
    pub net_form: Option<Variant>,
    pub emission_norm: Option<Variant>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(ConfigFile::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Invalid(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("config {}: {e}", path.display())))
    }
}

pub fn parse_vec3(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated numbers, got `{s}`"));
    }
    let mut v = [0.0; 3];
    for (slot, p) in v.iter_mut().zip(parts) {
        *slot = p.parse().map_err(|e| format!("`{p}`: {e}"))?;
    }
    Ok(v)
}

/// Physical parameters of a single evaluation point.
#[derive(Debug, Clone, Default, Args)]
pub struct PhysArgs {
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Transition frequency of the excited atom A [default: 1]
    #[arg(long)]
    pub omega_a: Option<f64>,
    /// Transition frequency of atom B; overrides --delta-ratio
    #[arg(long)]
    pub omega_b: Option<f64>,
    /// Δ/ω_A with ω_B = ω_A(1 - Δ/ω_A) [default: 1e-3]
    #[arg(long)]
    pub delta_ratio: Option<f64>,
    #[arg(long)]
    pub gamma_a: Option<f64>,
    #[arg(long)]
    pub gamma_b: Option<f64>,
    /// Γ/ω for both atoms unless given explicitly [default: 1e-8]
    #[arg(long)]
    pub gamma_ratio: Option<f64>,
    /// Explicit dipole of A, "x,y,z"
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
    pub dipole_a: Option<[f64; 3]>,
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
    pub dipole_b: Option<[f64; 3]>,
    #[arg(long, value_enum)]
    pub dipoles: Option<DipoleChoice>,
    /// Explicit separation vector, "x,y,z"; overrides --kr
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
    pub separation: Option<[f64; 3]>,
    /// k_A R with R along ẑ [default: 2]
    #[arg(long)]
    pub kr: Option<f64>,
    /// Observation time; overrides --gamma-t
    #[arg(long = "T", alias = "t")]
    pub t: Option<f64>,
    /// Γ_A T [default: 1]
    #[arg(long)]
    pub gamma_t: Option<f64>,
}

impl PhysArgs {
    /// Fills unset flags from the config file.
    pub fn merged(&self, f: &ConfigFile) -> PhysArgs {
        PhysArgs {
            mode: self.mode.or(f.mode),
            omega_a: self.omega_a.or(f.omega_a),
            omega_b: self.omega_b.or(f.omega_b),
            delta_ratio: self.delta_ratio.or(f.delta_ratio),
            gamma_a: self.gamma_a.or(f.gamma_a),
            gamma_b: self.gamma_b.or(f.gamma_b),
            gamma_ratio: self.gamma_ratio.or(f.gamma_ratio),
            dipole_a: self.dipole_a.or(f.dipole_a),
            dipole_b: self.dipole_b.or(f.dipole_b),
            dipoles: self.dipoles.or(f.dipoles),
            separation: self.separation.or(f.separation),
            kr: self.kr.or(f.kr),
            t: self.t.or(f.t),
            gamma_t: self.gamma_t.or(f.gamma_t),
        }
    }

    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let mode = self.mode.unwrap_or_default();
        let wa = self.omega_a.unwrap_or(1.0);
        let wb = match (mode, self.omega_b) {
            (Mode::Identical, _) => wa,
            (Mode::Dissimilar, Some(w)) => w,
            (Mode::Dissimilar, None) => wa * (1.0 - self.delta_ratio.unwrap_or(1e-3)),
        };
        let ratio = self.gamma_ratio.unwrap_or(1e-8);
        let ga = self.gamma_a.unwrap_or(ratio * wa);
        let gb = match mode {
            Mode::Identical => ga,
            Mode::Dissimilar => self.gamma_b.unwrap_or(ratio * wb),
        };
        let choice = self.dipoles.unwrap_or_default();
        let explicit = self.dipole_a.is_some() || self.dipole_b.is_some();
        if explicit && self.dipoles.is_some() {
            return Err(CliError::Invalid("give either explicit dipole vectors or --dipoles, not both".into()));
        }
        let sep: Vector3<f64> = match self.separation {
            Some(s) => s.into(),
            None => Vector3::z() * (self.kr.unwrap_or(2.0) / wa),
        };
        let (mag_a, mag_b) = (dipole_magnitude_for_gamma(wa, ga), dipole_magnitude_for_gamma(wb, gb));
        let axis = if sep.norm() > 0.0 { sep.normalize() } else { Vector3::z() };
        let (mu_a, mu_b): (Vector3<f64>, Vector3<f64>) = if explicit {
            let a: Vector3<f64> = self.dipole_a.ok_or_else(|| CliError::Invalid("--dipole-b needs --dipole-a".into()))?.into();
            let b = match (mode, self.dipole_b) {
                (_, Some(b)) => b.into(),
                (Mode::Identical, None) => a,
                (Mode::Dissimilar, None) => return Err(CliError::Invalid("--dipole-a needs --dipole-b".into())),
            };
            (a, b)
        } else {
            let u = match choice {
                DipoleChoice::Equal | DipoleChoice::Average => Vector3::new(1.0, 1.0, 1.0).normalize(),
                DipoleChoice::Axial => axis,
                DipoleChoice::Crossed => Vector3::x(),
            };
            let v = if choice == DipoleChoice::Crossed { Vector3::y() } else { u };
            (u * mag_a, v * mag_b)
        };
        let pair = AtomPairConfig::new(AtomSpec::new(wa, ga, mu_a)?, AtomSpec::new(wb, gb, mu_b)?, sep)?;
        let t = match self.t {
            Some(t) => t,
            None => {
                let gt = self.gamma_t.unwrap_or(1.0);
                if ga == 0.0 {
                    return Err(CliError::Invalid("--gamma-t needs a non-zero Γ_A; give --T instead".into()));
                }
                gt / ga
            }
        };
        Ok(Resolved {
            mode,
            pair,
            t: EvalPoint::new(t)?,
            average: !explicit && choice == DipoleChoice::Average,
            mags: (mag_a, mag_b),
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Resolved {
    pub mode: Mode,
    pub pair: AtomPairConfig,
    pub t: EvalPoint,
    pub average: bool,
    /// Dipole magnitudes used when averaging over orientations.
    pub mags: (f64, f64),
}

impl Resolved {
    /// The pair with both dipoles along `u`, keeping their magnitudes.
    pub fn along(&self, u: &Vector3<f64>) -> AtomPairConfig {
        let mut p = self.pair;
        let u = u.normalize();
        p.atom_a.dipole = u * self.mags.0;
        p.atom_b.dipole = u * self.mags.1;
        p
    }

    pub fn k0r(&self) -> f64 {
        self.pair.k_a() * self.pair.distance()
    }
}

/// Evaluation options from global flags and the config file.
#[derive(Debug, Clone, Copy, Default, Args)]
pub struct OptionArgs {
    /// Relative quadrature tolerance [default: 1e-10]
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Sign of the T-linear term of the identical force on atom B
    #[arg(long, global = true, value_enum)]
    pub fb0_sign: Option<Variant>,
    /// Closed form of the identical net force
    #[arg(long, global = true, value_enum)]
    pub net_form: Option<Variant>,
    /// Emission-rate normalization
    #[arg(long, global = true, value_enum)]
    pub emission_norm: Option<Variant>,
}

impl OptionArgs {
    pub fn eval_options(&self, f: &ConfigFile) -> Result<EvalOptions, CliError> {
        let mut o = EvalOptions::default();
        if let Some(tol) = self.tol.or(f.tol) {
            o.quadrature.rel_tol = tol;
        }
        o.quadrature.validate()?;
        let printed = |v: Option<Variant>| v == Some(Variant::Printed);
        if printed(self.fb0_sign.or(f.fb0_sign)) {
            o.fb0_sign = Fb0Sign::AsPrinted;
        }
        if printed(self.net_form.or(f.net_form)) {
            o.net_form = NetIdenticalForm::AsPrinted;
        }
        if printed(self.emission_norm.or(f.emission_norm)) {
            o.emission = EmissionNormalization::AsPrinted;
        }
        Ok(o)
    }
}

pub fn dipole_model(choice: Option<DipoleChoice>) -> Result<DipoleModel, CliError> {
    match choice.unwrap_or(DipoleChoice::Average) {
        DipoleChoice::Average => Ok(DipoleModel::OrientationAverage),
        DipoleChoice::Equal => Ok(DipoleModel::EqualComponents),
        other => Err(CliError::Invalid(format!("figure supports --dipoles average|equal, got {other:?}"))),
    }
}

/// `start:stop`
pub fn parse_range2(s: &str) -> Result<(f64, f64), CliError> {
    let p: Vec<&str> = s.split(':').collect();
    let num = |x: &str| x.trim().parse::<f64>().map_err(|e| CliError::Invalid(format!("range `{s}`: {e}")));
    match p.as_slice() {
        [a, b] => Ok((num(a)?, num(b)?)),
        _ => Err(CliError::Invalid(format!("range `{s}`: expected start:stop"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_file() {
        let file: ConfigFile = serde_json::from_str(r#"{"kr": 3.0, "gamma_t": 0.5, "mode": "identical"}"#).unwrap();
        let flags = PhysArgs {
            kr: Some(1.5),
            ..Default::default()
        };
        let m = flags.merged(&file);
        assert_eq!(m.kr, Some(1.5));
        assert_eq!(m.gamma_t, Some(0.5));
        assert_eq!(m.mode, Some(Mode::Identical));
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        assert!(serde_json::from_str::<ConfigFile>(r#"{"kR": 3.0}"#).is_err());
    }

    #[test]
    fn defaults_resolve_to_weak_line() {
        let r = PhysArgs::default().resolve().unwrap();
        assert!((r.k0r() - 2.0).abs() < 1e-15);
        assert!((r.pair.atom_a.gamma - 1e-8).abs() < 1e-22);
        assert!((r.t.t * r.pair.atom_a.gamma - 1.0).abs() < 1e-12);
        assert!((r.pair.detuning() - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn vec3_parsing() {
        assert_eq!(parse_vec3("1, -2,3.5").unwrap(), [1.0, -2.0, 3.5]);
        assert!(parse_vec3("1,2").is_err());
    }
}
