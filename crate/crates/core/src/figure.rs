//! Normalized net-force curves versus separation for identical and slightly
//! detuned atoms, with feature extraction (zeros, extrema).

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dissimilar::net_force_dissimilar;
use crate::error::{Error, Result};
use crate::identical::{net_force_identical, IdenticalConfig};
use crate::options::EvalOptions;
use crate::orientation::average_over_orientations;
use crate::params::{check_validity, dipole_magnitude_for_gamma, AtomPairConfig, AtomSpec, EvalPoint, Regime};

/// How "isotropic dipoles" are realized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DipoleModel {
    /// Both atoms share a dipole direction averaged uniformly over the sphere.
    #[default]
    OrientationAverage,
    /// Fixed dipoles `|μ|(1, 1, 1)/√3` on both atoms.
    EqualComponents,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FigureSpec {
    /// `Γ₀T`
    pub gamma_t: f64,
    /// `Γ₀/ω₀`; the dipole magnitude follows from the Weisskopf-Wigner rate.
    pub gamma_ratio: f64,
    /// `Δ/ω₀` for the detuned curve, with `ω_B = ω₀(1 - Δ/ω₀)`.
    pub delta_ratio: f64,
    pub kr_min: f64,
    pub kr_max: f64,
    pub points: usize,
    pub dipoles: DipoleModel,
}

impl Default for FigureSpec {
    fn default() -> Self {
        FigureSpec {
            gamma_t: 1.0,
            gamma_ratio: 1e-8,
            delta_ratio: 1e-3,
            kr_min: 0.5,
            kr_max: 8.0,
            points: 512,
            dipoles: DipoleModel::OrientationAverage,
        }
    }
}

impl FigureSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("must be positive and finite, got {v}")))
            }
        };
        positive("gamma_t", self.gamma_t)?;
        positive("gamma_ratio", self.gamma_ratio)?;
        positive("delta_ratio", self.delta_ratio)?;
        positive("kr_min", self.kr_min)?;
        if !(self.kr_max > self.kr_min && self.kr_max.is_finite()) {
            return Err(Error::invalid("kr_max", "must exceed kr_min"));
        }
        if self.points < 2 {
            return Err(Error::invalid("points", "need at least two grid points"));
        }
        if self.delta_ratio >= 1.0 {
            return Err(Error::invalid("delta_ratio", "must be below 1"));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|i| self.kr_min + (self.kr_max - self.kr_min) * i as f64 / (n - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FigureRow {
    pub k0r: f64,
    /// Along-axis identical net force over `|μ_A|²|μ_B|² ω₀⁷ T / 100`.
    pub net_identical_normalized: f64,
    /// Along-axis stationary (adiabatic) detuned net force over
    /// `|μ_A|²|μ_B|² ω_A⁷ / (100 Δ)`.
    pub net_dissimilar_normalized: f64,
    pub validity_flag: bool,
}

/// Evaluates both curves on the grid, `ω₀ = 1`, separation along `ẑ`.
pub fn figure_net_force_curve(spec: &FigureSpec, opts: &EvalOptions) -> Result<Vec<FigureRow>> {
    spec.validate()?;
    spec.grid().into_par_iter().map(|kr| figure_point(spec, kr, opts)).collect()
}

fn figure_point(spec: &FigureSpec, kr: f64, opts: &EvalOptions) -> Result<FigureRow> {
    let w0 = 1.0;
    let gamma0 = spec.gamma_ratio * w0;
    let wb = w0 * (1.0 - spec.delta_ratio);
    let t = EvalPoint::new(spec.gamma_t / gamma0)?;
    let mag = dipole_magnitude_for_gamma(w0, gamma0);
    let sep = Vector3::new(0.0, 0.0, kr / w0);
    let axis = Vector3::z();

    let identical = |mu: Vector3<f64>| -> Result<f64> {
        let c = IdenticalConfig::new(w0, gamma0, mu, sep)?;
        Ok(net_force_identical(&c, t, opts)?.total.dot(&axis))
    };
    let dissimilar = |mu: Vector3<f64>| -> Result<f64> {
        let c = AtomPairConfig::new(
            AtomSpec::new(w0, gamma0, mu)?,
            AtomSpec::new(wb, spec.gamma_ratio * wb, mu)?,
            sep,
        )?;
        Ok(net_force_dissimilar(&c, t, opts)?.resonant_over_delta.dot(&axis))
    };
    let equal = Vector3::new(1.0, 1.0, 1.0) * (mag / 3f64.sqrt());
    let (f_id, f_dis) = match spec.dipoles {
        DipoleModel::OrientationAverage => (
            average_over_orientations(mag, identical)?,
            average_over_orientations(mag, dissimilar)?,
        ),
        DipoleModel::EqualComponents => (identical(equal)?, dissimilar(equal)?),
    };
    let mu4 = mag.powi(4);
    let n1 = mu4 * w0.powi(7) * t.t / 100.0;
    let n2 = mu4 * w0.powi(7) / (100.0 * (w0 - wb));

    let probe = AtomPairConfig::new(AtomSpec::new(w0, gamma0, equal)?, AtomSpec::new(w0, gamma0, equal)?, sep)?;
    let validity = check_validity(&probe, t, Regime::IdenticalLimit)?;
    Ok(FigureRow {
        k0r: kr,
        net_identical_normalized: f_id / n1,
        net_dissimilar_normalized: f_dis / n2,
        validity_flag: validity.all_ok(),
    })
}

/// Locations of zeros and extrema on a sampled curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveFeatures {
    /// First sign change at or after the window start, linearly interpolated.
    pub first_zero: Option<f64>,
    /// Abscissa of the largest `|y|` at or after the window start, refined by
    /// a parabola through the neighbouring samples.
    pub extremum: Option<f64>,
}

pub fn curve_features(x: &[f64], y: &[f64], window_start: f64) -> CurveFeatures {
    let idx: Vec<usize> = (0..x.len()).filter(|&i| x[i] >= window_start).collect();
    let first_zero = idx.windows(2).find_map(|w| {
        let (i, j) = (w[0], w[1]);
        if y[i] == 0.0 {
            Some(x[i])
        } else if y[i] * y[j] < 0.0 {
            Some(x[i] - y[i] * (x[j] - x[i]) / (y[j] - y[i]))
        } else {
            None
        }
    });
    let extremum = idx
        .iter()
        .copied()
        .max_by(|&a, &b| y[a].abs().total_cmp(&y[b].abs()))
        .map(|i| refine_peak(x, y, i));
    CurveFeatures { first_zero, extremum }
}

fn refine_peak(x: &[f64], y: &[f64], i: usize) -> f64 {
    if i == 0 || i + 1 >= x.len() {
        return x[i];
    }
    let (y0, y1, y2) = (y[i - 1].abs(), y[i].abs(), y[i + 1].abs());
    let denom = y0 - 2.0 * y1 + y2;
    if denom == 0.0 {
        return x[i];
    }
    let h = x[i + 1] - x[i];
    x[i] + 0.5 * h * (y0 - y2) / denom
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn features_of_a_sine() {
        let x: Vec<f64> = (0..400).map(|i| i as f64 * 0.01).collect();
        let y: Vec<f64> = x.iter().map(|v| (v * 2.0).sin() * (-v * 0.1).exp()).collect();
        let f = curve_features(&x, &y, 0.5);
        assert!((f.first_zero.unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-3);
        let peak = f.extremum.unwrap();
        let exact = (20f64).atan() / 2.0;
        assert!((peak - exact).abs() < 1e-3, "{peak}");
    }

    #[test]
    fn spec_validation() {
        assert!(FigureSpec::default().validate().is_ok());
        assert!(FigureSpec { points: 1, ..Default::default() }.validate().is_err());
        assert!(FigureSpec { kr_max: 0.1, ..Default::default() }.validate().is_err());
    }
}
