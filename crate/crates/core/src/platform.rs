//! Laboratory parameters of the two proposed implementations.
//!
//! * A dc-SQUID charge qubit capacitively coupled to a transmission line.
//! * A Lambda-type atom in a photonic-crystal waveguide whose cavity leg is
//!   bridged by a Raman drive, giving an effective coupling `-g G / (2 Delta)`.
//!
//! Every formula returns an angular frequency. Energies are divided by
//! `hbar` and charges are explicit, so the formulas hold both in SI
//! ([`UnitSystem::SI`]) and with `hbar = e = 1` ([`UnitSystem::NATURAL`]).
//! Range flags compare the ordinary frequency `value / 2 pi`, in hertz when
//! the inputs are SI.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::model::{to_dimensionless, DimensionlessParams, PhysicalParams};

/// Typical qubit level spacings, hertz.
pub const LEVEL_SPACING_RANGE: (f64, f64) = (5e9, 15e9);
/// Achievable qubit-line couplings, hertz.
pub const COUPLING_RANGE: (f64, f64) = (5e6, 200e6);
/// Couplings below this (hertz) are too weak for long-lived trapped modes.
pub const STRONG_COUPLING_ADVISORY: f64 = 1e9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnitSystem {
    pub hbar: f64,
    pub elementary_charge: f64,
}

impl UnitSystem {
    pub const SI: Self = Self { hbar: 1.054_571_817e-34, elementary_charge: 1.602_176_634e-19 };
    pub const NATURAL: Self = Self { hbar: 1.0, elementary_charge: 1.0 };

    /// Superconducting flux quantum `h / 2e`.
    pub fn flux_quantum(&self) -> f64 {
        PI * self.hbar / self.elementary_charge
    }
}

/// Value checked against a reference interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RangeFlag {
    pub name: String,
    /// Ordinary frequency `angular / 2 pi`.
    pub value: f64,
    pub within_typical_range: bool,
    pub range: (f64, f64),
}

impl RangeFlag {
    pub fn check(name: impl Into<String>, value: f64, range: (f64, f64)) -> Self {
        Self {
            name: name.into(),
            value,
            within_typical_range: range.0 <= value && value <= range.1,
            range,
        }
    }
}

/// How the gate is biased.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum GateBias {
    /// Gate voltage; converted with `n_g = C_g V_g / 2e`.
    Voltage(f64),
    /// Dimensionless gate charge.
    Charge(f64),
}

/// dc-SQUID charge qubit and the line it couples to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SquidSpec {
    /// Josephson energy as an angular frequency.
    pub josephson: f64,
    pub gate_capacitance: f64,
    pub junction_capacitance: f64,
    /// Total island capacitance, supplied rather than derived.
    pub total_capacitance: f64,
    pub gate: GateBias,
    pub flux: f64,
    pub flux_quantum: f64,
    /// Effective resonator length.
    pub line_length: f64,
    /// Capacitance per unit length of the line.
    pub line_capacitance: f64,
    /// Angular frequency of the field mode.
    pub mode_frequency: f64,
    /// Qubit mixing angle entering the coupling as `sin(angle)`.
    /// One natural reading is `sin(angle) = B_x / Omega`, see
    /// [`SquidLevels::mixing_angle`].
    pub mixing_angle: f64,
    pub units: UnitSystem,
}

impl SquidSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("gate_capacitance", self.gate_capacitance),
            ("junction_capacitance", self.junction_capacitance),
            ("total_capacitance", self.total_capacitance),
            ("flux_quantum", self.flux_quantum),
            ("line_length", self.line_length),
            ("line_capacitance", self.line_capacitance),
            ("mode_frequency", self.mode_frequency),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(invalid(name, format!("must be finite and > 0, got {value}")));
            }
        }
        let gate = match self.gate {
            GateBias::Voltage(v) | GateBias::Charge(v) => v,
        };
        for (name, value) in [
            ("josephson", self.josephson),
            ("gate", gate),
            ("flux", self.flux),
            ("mixing_angle", self.mixing_angle),
        ] {
            if !value.is_finite() {
                return Err(invalid(name, format!("must be finite, got {value}")));
            }
        }
        if !(self.units.hbar > 0.0 && self.units.elementary_charge > 0.0) {
            return Err(invalid("units", "hbar and e must be > 0"));
        }
        Ok(())
    }

    pub fn gate_charge(&self) -> f64 {
        match self.gate {
            GateBias::Charge(n) => n,
            GateBias::Voltage(v) => self.gate_capacitance * v / (2.0 * self.units.elementary_charge),
        }
    }
}

/// `cos(pi x)` with exact zeros at half-integers and exact even symmetry.
fn cos_pi(x: f64) -> f64 {
    let r = x - 2.0 * (0.5 * x).round();
    (PI * (0.5 - r.abs())).sin()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SquidLevels {
    /// Qubit splitting `sqrt(B_z^2 + B_x^2)`.
    pub level_spacing: f64,
    /// Charge term `4 E_c (2 n_g - 1)`.
    pub charge_term: f64,
    /// Josephson term `2 E_J cos(pi Phi_x / Phi_0)`.
    pub josephson_term: f64,
    /// Charging energy `e^2 / 2(C_g + 2 C_J)`, as an angular frequency.
    pub charging_energy: f64,
    pub gate_charge: f64,
    pub flag: RangeFlag,
}

impl SquidLevels {
    /// `atan2(B_x, B_z)`: the angle with `sin = B_x / Omega`.
    pub fn mixing_angle(&self) -> f64 {
        self.josephson_term.atan2(self.charge_term)
    }
}

pub fn squid_level_spacing(s: &SquidSpec) -> Result<SquidLevels> {
    s.validate()?;
    let e = s.units.elementary_charge;
    let charging_energy = e * e / (2.0 * (s.gate_capacitance + 2.0 * s.junction_capacitance)) / s.units.hbar;
    let gate_charge = s.gate_charge();
    let charge_term = 4.0 * charging_energy * (2.0 * gate_charge - 1.0);
    let josephson_term = 2.0 * s.josephson * cos_pi(s.flux / s.flux_quantum);
    let level_spacing = charge_term.hypot(josephson_term);
    Ok(SquidLevels {
        level_spacing,
        charge_term,
        josephson_term,
        charging_energy,
        gate_charge,
        flag: RangeFlag::check("level_spacing", level_spacing / (2.0 * PI), LEVEL_SPACING_RANGE),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SquidCoupling {
    /// `e sin(angle) (C_g / C_Sigma) sqrt(omega / (hbar L c))`.
    pub coupling: f64,
    pub flag: RangeFlag,
    /// Set when the coupling falls short of the strong-coupling level.
    pub advisory: Option<String>,
}

pub fn squid_coupling(s: &SquidSpec) -> Result<SquidCoupling> {
    s.validate()?;
    let coupling = s.units.elementary_charge
        * s.mixing_angle.sin()
        * (s.gate_capacitance / s.total_capacitance)
        * (s.mode_frequency / (s.units.hbar * s.line_length * s.line_capacitance)).sqrt();
    let hz = coupling / (2.0 * PI);
    Ok(SquidCoupling {
        coupling,
        flag: RangeFlag::check("coupling", hz, COUPLING_RANGE),
        advisory: coupling_advisory(hz),
    })
}

fn coupling_advisory(hz: f64) -> Option<String> {
    (hz.abs() < STRONG_COUPLING_ADVISORY).then(|| {
        format!(
            "coupling {:.3e} Hz is below {:.0e} Hz; long-lived quasi-bound states need couplings of several GHz",
            hz.abs(),
            STRONG_COUPLING_ADVISORY
        )
    })
}

/// Lambda atom with one leg in the waveguide and the other driven.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RamanSpec {
    /// Cavity coupling of the atomic transition.
    pub cavity_coupling: f64,
    /// Drive coupling.
    pub drive_coupling: f64,
    /// Detuning from the excited state; must be non-zero.
    pub detuning: f64,
}

/// Effective coupling `-g G / (2 Delta)` after eliminating the excited state.
///
/// ```
/// use qnmlab::platform::{raman_coupling, RamanSpec};
///
/// let r = RamanSpec { cavity_coupling: 100e6, drive_coupling: 100e6, detuning: 10e9 };
/// assert_eq!(raman_coupling(&r).unwrap(), -0.5e6);
/// ```
pub fn raman_coupling(r: &RamanSpec) -> Result<f64> {
    for (name, value) in [("cavity_coupling", r.cavity_coupling), ("drive_coupling", r.drive_coupling)] {
        if !value.is_finite() {
            return Err(invalid(name, format!("must be finite, got {value}")));
        }
    }
    if !(r.detuning.is_finite() && r.detuning != 0.0) {
        return Err(invalid("detuning", format!("must be finite and non-zero, got {}", r.detuning)));
    }
    Ok(-r.cavity_coupling * r.drive_coupling / (2.0 * r.detuning))
}

/// Advisory for a Raman-induced coupling given as an angular frequency.
pub fn raman_advisory(coupling: f64) -> Option<String> {
    coupling_advisory(coupling / (2.0 * PI))
}

/// Natural-unit parameters for a platform's level spacing and coupling.
///
/// All rates are angular frequencies; the sign of the coupling is dropped.
pub fn to_model(level_spacing: f64, coupling: f64, group_velocity: f64, distance: f64) -> Result<DimensionlessParams> {
    Ok(to_dimensionless(&PhysicalParams::new(group_velocity, distance, coupling, level_spacing)?))
}
