//! Evaluation options shared by the physics modules.

use serde::{Deserialize, Serialize};

use crate::quadrature::QuadratureSettings;

/// Overall normalization of the directional emission rate.
///
/// `AsPrinted` uses the literal prefactor `1/(2π²)`. Its first angular moment
/// equals `+2` times the net force instead of `-1` times it. `MomentumConsistent`
/// rescales by `-1/2`, giving `-1/(4π²)`, so that the momentum carried by the
/// photons balances the net force.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmissionNormalization {
    #[default]
    MomentumConsistent,
    AsPrinted,
}

impl EmissionNormalization {
    /// Prefactor multiplying `μ_A·(I - k̂k̂)·μ_B` in the dissimilar rate.
    pub fn prefactor(self) -> f64 {
        let pi2 = std::f64::consts::PI.powi(2);
        match self {
            EmissionNormalization::MomentumConsistent => -1.0 / (4.0 * pi2),
            EmissionNormalization::AsPrinted => 1.0 / (2.0 * pi2),
        }
    }
}

/// Sign of the term linear in `T` in the identical-atoms force on atom B.
///
/// `LimitConsistent` (negative) is what the `Δ → 0` limit of the dissimilar
/// force and additivity to the net force both require; `AsPrinted` keeps the
/// positive sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fb0Sign {
    #[default]
    LimitConsistent,
    AsPrinted,
}

impl Fb0Sign {
    pub fn sign(self) -> f64 {
        match self {
            Fb0Sign::LimitConsistent => -1.0,
            Fb0Sign::AsPrinted => 1.0,
        }
    }
}

/// Closed form used for the identical-atoms net force.
///
/// The literal expression omits `-2e^{-Γ₀T} ω₀⁴ (Re ∂_ω∇Re + Im ∂_ω∇Im)`
/// relative to the sum of the two single-atom forces and to the `Δ → 0` limit
/// of the dissimilar net force. `LimitConsistent` restores that term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NetIdenticalForm {
    #[default]
    LimitConsistent,
    AsPrinted,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EvalOptions {
    pub quadrature: QuadratureSettings,
    pub emission: EmissionNormalization,
    pub fb0_sign: Fb0Sign,
    pub net_form: NetIdenticalForm,
}

impl EvalOptions {
    /// Any option set to an as-printed variant.
    pub fn uses_printed_variant(&self) -> bool {
        self.emission == EmissionNormalization::AsPrinted
            || self.fb0_sign == Fb0Sign::AsPrinted
            || self.net_form == NetIdenticalForm::AsPrinted
    }
}
