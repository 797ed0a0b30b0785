//! Spontaneous emission of a lossy atom inside the emergent cavity.
//!
//! Losses into other channels are modelled by continuing the level spacing to
//! `W - i Gamma~`. The decay rate of the atom is then `|Im theta|` of the mode
//! found with that complex spacing. The strong-coupling closed form
//!
//! ```text
//! Gamma_t ~ ((W - j pi)/kappa)^2 + Gamma~/kappa - Gamma~/kappa^2
//! ```
//!
//! is reported next to it for comparison.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::DimensionlessParams;
use crate::qnm::{refine_root, seed_mode, NewtonOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmissionReport {
    pub j: i64,
    pub gamma_t_formula: f64,
    pub gamma_t_numeric: f64,
    /// `gamma_t_numeric / Gamma~`; `None` when the atom has no external loss.
    pub suppression_ratio: Option<f64>,
}

/// Closed-form modified decay rate of the atom coupled to mode `j`.
///
/// ```
/// use qnmlab::{emission::modified_emission_formula, DimensionlessParams};
///
/// let p = DimensionlessParams::new(200.0, 5.0).unwrap().with_loss(1.0).unwrap();
/// let rate = modified_emission_formula(&p, 1).unwrap();
/// assert!((rate - 5.061e-3).abs() < 1e-6);
/// ```
pub fn modified_emission_formula(p: &DimensionlessParams, j: i64) -> Result<f64> {
    let kappa = p.kappa();
    if !(kappa > 1.0) {
        return Err(Error::ApproximationRange { kappa });
    }
    let detuning = p.spacing() - j as f64 * std::f64::consts::PI;
    let loss = p.loss();
    Ok(detuning * detuning / (kappa * kappa) + loss / kappa - loss / (kappa * kappa))
}

/// Decay rate from the mode found with complex spacing `W - i Gamma~`.
pub fn modified_emission_numeric(p: &DimensionlessParams, j: i64, opts: NewtonOptions) -> Result<EmissionReport> {
    let formula = modified_emission_formula(p, j)?;
    let mode = refine_root(seed_mode(j, p)?, p, opts)?;
    if !mode.converged {
        return Err(Error::Unconverged { residual: mode.residual });
    }
    let numeric = mode.decay_rate();
    let suppression_ratio = (p.loss() > 0.0).then(|| numeric / p.loss());
    Ok(EmissionReport { j, gamma_t_formula: formula, gamma_t_numeric: numeric, suppression_ratio })
}
