//! Parameter types and unit conversions.
//!
//! Everything downstream of this module works in natural units where the
//! group velocity and the atom-mirror distance are both one: energies become
//! the dimensionless `theta = E a / v_g`, and the atom is described by
//!
//! ```text
//! kappa = 2 J^2 a / v_g^2      (coupling)
//! W     = Omega a / v_g        (level spacing)
//! Gamma~ = Gamma a / v_g       (loss into non-waveguide channels)
//! ```
//!
//! `hbar = 1` throughout, so energies and angular frequencies coincide.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Result};

fn check_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite, got {value}")))
    }
}

fn check_positive(name: &'static str, value: f64) -> Result<()> {
    check_finite(name, value)?;
    if value > 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be > 0, got {value}")))
    }
}

fn check_non_negative(name: &'static str, value: f64) -> Result<()> {
    check_finite(name, value)?;
    if value >= 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be >= 0, got {value}")))
    }
}

/// Lab-frame description of the half-waveguide and the atom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalParams {
    group_velocity: f64,
    distance: f64,
    coupling: f64,
    level_spacing: f64,
    external_rate: f64,
}

impl PhysicalParams {
    /// `coupling` may be negative (a Raman-induced coupling often is); only
    /// its square is observable, so it is stored as `|coupling|`.
    pub fn new(group_velocity: f64, distance: f64, coupling: f64, level_spacing: f64) -> Result<Self> {
        check_positive("group_velocity", group_velocity)?;
        check_positive("distance", distance)?;
        check_finite("coupling", coupling)?;
        check_non_negative("level_spacing", level_spacing)?;
        Ok(Self {
            group_velocity,
            distance,
            coupling: coupling.abs(),
            level_spacing,
            external_rate: 0.0,
        })
    }

    /// Adds a phenomenological emission rate into all other channels.
    pub fn with_external_rate(mut self, rate: f64) -> Result<Self> {
        check_non_negative("external_rate", rate)?;
        self.external_rate = rate;
        Ok(self)
    }

    pub fn group_velocity(&self) -> f64 {
        self.group_velocity
    }

    pub fn distance(&self) -> f64 {
        self.distance
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn level_spacing(&self) -> f64 {
        self.level_spacing
    }

    pub fn external_rate(&self) -> f64 {
        self.external_rate
    }

    pub fn to_dimensionless(&self) -> DimensionlessParams {
        to_dimensionless(self)
    }
}

/// The system in natural units: `(kappa, W, Gamma~)`.
///
/// ```
/// use qnmlab::DimensionlessParams;
///
/// let p = DimensionlessParams::new(200.0, 5.0).unwrap();
/// assert_eq!(p.kappa(), 200.0);
/// assert_eq!(p.spacing(), 5.0);
/// assert_eq!(p.loss(), 0.0);
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DimensionlessParams {
    kappa: f64,
    spacing: f64,
    loss: f64,
}

impl DimensionlessParams {
    pub fn new(kappa: f64, spacing: f64) -> Result<Self> {
        check_non_negative("kappa", kappa)?;
        check_non_negative("w", spacing)?;
        Ok(Self { kappa, spacing, loss: 0.0 })
    }

    pub fn with_loss(mut self, loss: f64) -> Result<Self> {
        check_non_negative("gamma_ext", loss)?;
        self.loss = loss;
        Ok(self)
    }

    pub fn with_spacing(mut self, spacing: f64) -> Result<Self> {
        check_non_negative("w", spacing)?;
        self.spacing = spacing;
        Ok(self)
    }

    pub fn with_kappa(mut self, kappa: f64) -> Result<Self> {
        check_non_negative("kappa", kappa)?;
        self.kappa = kappa;
        Ok(self)
    }

    /// Dimensionless coupling `kappa = 2 J^2 a / v_g^2`.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Dimensionless level spacing `W = Omega a / v_g`.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Dimensionless external loss `Gamma a / v_g`.
    pub fn loss(&self) -> f64 {
        self.loss
    }

    /// Level spacing continued into the lower half plane, `W - i Gamma~`.
    pub fn complex_spacing(&self) -> Complex64 {
        Complex64::new(self.spacing, -self.loss)
    }
}

/// A dimensionless complex energy `theta = omega~ - i gamma~`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexFrequency {
    re: f64,
    im: f64,
}

impl ComplexFrequency {
    pub fn new(theta: Complex64) -> Result<Self> {
        check_finite("theta.re", theta.re)?;
        check_finite("theta.im", theta.im)?;
        Ok(Self { re: theta.re, im: theta.im })
    }

    pub fn theta(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    /// Resonance position, `Re theta`.
    pub fn omega_tilde(&self) -> f64 {
        self.re
    }

    /// Amplitude decay rate, `-Im theta` (non-negative for a passive mode).
    pub fn gamma_tilde(&self) -> f64 {
        -self.im
    }
}

pub fn to_dimensionless(p: &PhysicalParams) -> DimensionlessParams {
    let v = p.group_velocity;
    let a = p.distance;
    DimensionlessParams {
        kappa: 2.0 * p.coupling * p.coupling * a / (v * v),
        spacing: p.level_spacing * a / v,
        loss: p.external_rate * a / v,
    }
}

/// Inverse of [`to_dimensionless`] for a chosen group velocity and distance.
pub fn to_physical(d: &DimensionlessParams, group_velocity: f64, distance: f64) -> Result<PhysicalParams> {
    check_positive("group_velocity", group_velocity)?;
    check_positive("distance", distance)?;
    let v = group_velocity;
    let a = distance;
    let coupling = (d.kappa * v * v / (2.0 * a)).sqrt();
    PhysicalParams::new(v, a, coupling, d.spacing * v / a)?.with_external_rate(d.loss * v / a)
}
