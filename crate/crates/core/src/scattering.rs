//! Real-energy response of the emergent cavity and QNM wavefunctions.
//!
//! For a real energy `theta` the field is `sin(theta x)` between the mirror
//! and the atom, and `C sin(theta x + delta)` beyond it. The atom acts as a
//! delta potential of energy-dependent weight `theta * kappa / (W - theta)`,
//! and the two matching conditions at `x = 1` reduce to
//!
//! ```text
//! cot(theta + delta) = cot(theta) - kappa / (W - theta)
//! ```
//!
//! The phase shift is defined modulo pi; single evaluations return it in
//! `(-pi/2, pi/2]` and scans unwrap it into a continuous curve.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::model::DimensionlessParams;
use crate::qnm::QnmMode;

const SINGULAR_EPS: f64 = 1e-12;
const DEGENERATE_EPS: f64 = 1e-12;
const DEGENERATE_OFFSET: f64 = 1e-9;
/// Step of the central difference used for the Wigner delay.
pub const DELAY_STEP: f64 = 1e-6;

/// The atom seen as a point scatterer at `x = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PotentialDescriptor {
    pub position: f64,
    /// `kappa / (W - theta)`; infinite when singular.
    pub strength: f64,
    /// `theta` sits on the atomic resonance: the atom is a perfect mirror.
    pub singular: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScatterPoint {
    pub theta: f64,
    /// Phase shift of the outside wave, radians.
    pub delta: f64,
    /// `d delta / d theta` (units of `a / v_g`).
    pub delay: f64,
    /// Intra-cavity to outside intensity ratio `sin^2(theta + delta) / sin^2(theta)`.
    pub enhancement: f64,
    /// `theta` was within `1e-12` of a multiple of pi; the enhancement is a limit.
    pub degenerate: bool,
}

/// One sample of a QNM wavefunction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaveSample {
    pub x: f64,
    pub value: Complex64,
    pub magnitude: f64,
}

fn check_energy(theta: f64) -> Result<()> {
    if theta.is_finite() && theta > 0.0 {
        Ok(())
    } else {
        Err(invalid("theta", format!("must be a finite energy > 0, got {theta}")))
    }
}

fn check_lossless(p: &DimensionlessParams) -> Result<()> {
    if p.loss() == 0.0 {
        Ok(())
    } else {
        Err(invalid("gamma_ext", "scattering observables are defined for the lossless system"))
    }
}

fn strength(theta: f64, p: &DimensionlessParams) -> f64 {
    if p.kappa() == 0.0 {
        0.0
    } else {
        p.kappa() / (p.spacing() - theta)
    }
}

pub fn potential_weight(theta: f64, p: &DimensionlessParams) -> Result<PotentialDescriptor> {
    check_energy(theta)?;
    let singular = p.kappa() != 0.0 && (p.spacing() - theta).abs() < SINGULAR_EPS;
    Ok(PotentialDescriptor {
        position: 1.0,
        strength: if singular { f64::INFINITY } else { strength(theta, p) },
        singular,
    })
}

/// Outer phase `theta + delta` on the branch through `theta` itself.
fn outer_phase(theta: f64, p: &DimensionlessParams) -> f64 {
    let g = if p.kappa() != 0.0 && (p.spacing() - theta).abs() < SINGULAR_EPS {
        // Perfect mirror: the limit puts a node at the atom.
        f64::INFINITY.copysign(p.spacing() - theta)
    } else {
        strength(theta, p)
    };
    let (s, c) = theta.sin_cos();
    let x = if g == 0.0 { c } else { c - g * s };
    // arccot(cot(theta) - g), scaled by |sin(theta)| to stay finite.
    (theta / PI).floor() * PI + s.abs().atan2(s.signum() * x)
}

fn reduce_mod_pi(x: f64) -> f64 {
    let r = x - PI * (x / PI).round();
    if r <= -PI / 2.0 {
        r + PI
    } else {
        r
    }
}

fn enhancement_at(theta: f64, p: &DimensionlessParams) -> f64 {
    let g = strength(theta, p);
    let (s, c) = theta.sin_cos();
    let x = c - g * s;
    1.0 / (s * s + x * x)
}

/// Closed-form phase shift, Wigner delay and intra-cavity enhancement.
pub fn phase_shift(theta: f64, p: &DimensionlessParams) -> Result<ScatterPoint> {
    check_energy(theta)?;
    check_lossless(p)?;
    if theta <= DELAY_STEP {
        return Err(invalid("theta", format!("must exceed the delay step {DELAY_STEP}")));
    }
    let delta = reduce_mod_pi(outer_phase(theta, p) - theta);
    let forward = outer_phase(theta + DELAY_STEP, p) - (theta + DELAY_STEP);
    let backward = outer_phase(theta - DELAY_STEP, p) - (theta - DELAY_STEP);
    let delay = reduce_mod_pi(forward - backward) / (2.0 * DELAY_STEP);

    let nearest = (theta / PI).round() * PI;
    let degenerate = (theta - nearest).abs() < DEGENERATE_EPS;
    let singular = p.kappa() != 0.0 && (p.spacing() - theta).abs() < SINGULAR_EPS;
    let enhancement = if degenerate {
        0.5 * (enhancement_at(theta - DEGENERATE_OFFSET, p) + enhancement_at(theta + DEGENERATE_OFFSET, p))
    } else if singular {
        0.0
    } else {
        enhancement_at(theta, p)
    };
    Ok(ScatterPoint { theta, delta, delay, enhancement, degenerate })
}

/// [`phase_shift`] over a grid, with `delta` unwrapped along the grid order.
pub fn enhancement_scan(p: &DimensionlessParams, grid: &[f64]) -> Result<Vec<ScatterPoint>> {
    let mut points = grid
        .par_iter()
        .map(|&theta| phase_shift(theta, p))
        .collect::<Result<Vec<_>>>()?;
    for i in 1..points.len() {
        let prev = points[i - 1].delta;
        let cur = &mut points[i].delta;
        *cur += PI * ((prev - *cur) / PI).round();
    }
    Ok(points)
}

/// The scan point of largest enhancement.
pub fn enhancement_peak(points: &[ScatterPoint]) -> Option<ScatterPoint> {
    points
        .iter()
        .copied()
        .max_by(|a, b| a.enhancement.total_cmp(&b.enhancement))
}

/// The scan point of largest Wigner delay.
pub fn delay_peak(points: &[ScatterPoint]) -> Option<ScatterPoint> {
    points.iter().copied().max_by(|a, b| a.delay.total_cmp(&b.delay))
}

/// Full width at half maximum of the enhancement peak, with linear
/// interpolation of both half-maximum crossings. `None` if the scan does not
/// bracket the peak on both sides.
pub fn full_width_half_max(points: &[ScatterPoint]) -> Option<f64> {
    let (imax, peak) = points
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.enhancement.total_cmp(&b.1.enhancement))?;
    let half = 0.5 * peak.enhancement;
    let crossing = |a: &ScatterPoint, b: &ScatterPoint| {
        a.theta + (half - a.enhancement) * (b.theta - a.theta) / (b.enhancement - a.enhancement)
    };
    let left = (1..=imax)
        .rev()
        .find(|&i| points[i - 1].enhancement < half)
        .map(|i| crossing(&points[i - 1], &points[i]))?;
    let right = (imax..points.len() - 1)
        .find(|&i| points[i + 1].enhancement < half)
        .map(|i| crossing(&points[i], &points[i + 1]))?;
    Some(right - left)
}

/// Outgoing-wave profile of a mode, normalized to `sin(theta x)` inside.
///
/// Outside the cavity the field is `sin(theta) exp(i theta (x - 1))`, which
/// grows like `exp(|Im theta| (x - 1))` for a decaying mode.
pub fn qnm_wavefunction(mode: &QnmMode, x_grid: &[f64]) -> Result<Vec<WaveSample>> {
    if !mode.converged {
        return Err(Error::Unconverged { residual: mode.residual });
    }
    let theta = mode.value();
    let edge = theta.sin();
    x_grid
        .iter()
        .map(|&x| {
            if !(x.is_finite() && x >= 0.0) {
                return Err(invalid("x", format!("positions must be finite and >= 0, got {x}")));
            }
            let value = if x <= 1.0 {
                (theta * x).sin()
            } else {
                edge * (Complex64::i() * theta * (x - 1.0)).exp()
            };
            Ok(WaveSample { x, value, magnitude: value.norm() })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qnm::{refine_root, seed_mode, NewtonOptions};

    fn params(kappa: f64, w: f64) -> DimensionlessParams {
        DimensionlessParams::new(kappa, w).unwrap()
    }

    fn j1_mode() -> QnmMode {
        let p = params(200.0, 5.0);
        refine_root(seed_mode(1, &p).unwrap(), &p, NewtonOptions::default()).unwrap()
    }

    #[test]
    fn potential_examples() {
        assert_eq!(potential_weight(2.0, &params(0.0, 5.0)).unwrap().strength, 0.0);
        let s = potential_weight(5.0, &params(200.0, 5.0)).unwrap();
        assert!(s.singular && s.strength.is_infinite());
        let s = potential_weight(4.0, &params(200.0, 5.0)).unwrap();
        assert_eq!(s.strength, 200.0);
        assert!(!s.singular);
        assert!(potential_weight(0.0, &params(1.0, 1.0)).is_err());
        assert!(potential_weight(-1.0, &params(1.0, 1.0)).is_err());
    }

    #[test]
    fn free_waveguide_has_no_shift() {
        let p = params(0.0, 5.0);
        for theta in [0.3, 1.0, 2.5, 4.0, 5.0, 7.7] {
            let s = phase_shift(theta, &p).unwrap();
            assert!(s.delta.abs() < 1e-12, "{s:?}");
            assert!((s.enhancement - 1.0).abs() < 1e-12);
            assert!(s.delay.abs() < 1e-6);
        }
    }

    #[test]
    fn node_at_resonance() {
        let p = params(200.0, 5.0);
        let s = phase_shift(5.0, &p).unwrap();
        assert!((5.0 + s.delta).sin().abs() < 1e-12);
        assert_eq!(s.enhancement, 0.0);

        // |sin(theta + delta)| decreases monotonically towards W from both sides.
        let node = |t: f64| {
            let s = phase_shift(t, &p).unwrap();
            (t + s.delta).sin().abs()
        };
        let offsets: Vec<f64> = (1..=100).map(|k| 0.01 * k as f64 / 100.0).collect();
        for w in offsets.windows(2) {
            assert!(node(5.0 + w[0]) < node(5.0 + w[1]));
            assert!(node(5.0 - w[0]) < node(5.0 - w[1]));
        }
    }

    #[test]
    fn degenerate_energy_is_flagged() {
        let p = params(200.0, 5.0);
        let s = phase_shift(PI, &p).unwrap();
        assert!(s.degenerate);
        assert!(s.enhancement.is_finite() && s.enhancement >= 0.0);
        assert!(!phase_shift(3.0, &p).unwrap().degenerate);
    }

    #[test]
    fn lossy_parameters_rejected() {
        let p = params(200.0, 5.0).with_loss(0.1).unwrap();
        assert!(phase_shift(1.0, &p).is_err());
    }

    #[test]
    fn phase_jumps_by_pi_through_resonance() {
        let p = params(200.0, 5.0);
        let mode = j1_mode();
        let center = mode.value().re;
        let gamma = mode.decay_rate();
        let grid: Vec<f64> = (0..=2000).map(|k| center + gamma * (-50.0 + 0.05 * k as f64)).collect();
        let scan = enhancement_scan(&p, &grid).unwrap();
        let total = scan.last().unwrap().delta - scan[0].delta;
        assert!((total - PI).abs() < 0.05 * PI, "total={total}");
        // Half of the jump happens within one linewidth of the centre.
        let at = |t: f64| scan.iter().min_by(|a, b| (a.theta - t).abs().total_cmp(&(b.theta - t).abs())).unwrap().delta;
        let core = at(center + gamma) - at(center - gamma);
        assert!((core - PI / 2.0).abs() < 0.1 * PI / 2.0, "core={core}");
    }

    #[test]
    fn resonance_lineshape_matches_mode() {
        let p = params(200.0, 5.0);
        let mode = j1_mode();
        let center = mode.value().re;
        let gamma = mode.decay_rate();
        let grid: Vec<f64> = (0..=4000).map(|k| center + gamma * (-20.0 + 0.01 * k as f64)).collect();
        let scan = enhancement_scan(&p, &grid).unwrap();

        let peak = enhancement_peak(&scan).unwrap();
        assert!((peak.theta - center).abs() < 1e-3);
        assert!((peak.theta - 3.1508).abs() < 1e-4);

        let fwhm = full_width_half_max(&scan).unwrap();
        assert!((fwhm / (2.0 * gamma) - 1.0).abs() < 0.10, "fwhm={fwhm}");

        let delay = delay_peak(&scan).unwrap().delay;
        assert!((delay * gamma - 1.0).abs() < 0.05, "delay={delay}");
    }

    #[test]
    fn decoupled_scan_is_flat() {
        let p = params(0.0, 5.0);
        let grid: Vec<f64> = (1..200).map(|k| 0.05 * k as f64 + 0.013).collect();
        for s in enhancement_scan(&p, &grid).unwrap() {
            assert!((s.enhancement - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn wavefunction_boundary_and_continuity() {
        let mode = j1_mode();
        let w = qnm_wavefunction(&mode, &[0.0, 1.0]).unwrap();
        assert_eq!(w[0].magnitude, 0.0);
        let inside = (mode.value() * 1.0).sin();
        let outside = mode.value().sin() * (Complex64::i() * mode.value() * 0.0).exp();
        assert_eq!(inside, outside);
        assert_eq!(w[1].value, inside);
        for s in &w {
            assert_eq!(s.magnitude, s.value.norm());
        }
    }

    #[test]
    fn wavefunction_grows_outside() {
        let mode = j1_mode();
        let w = qnm_wavefunction(&mode, &[1.0, 1e4]).unwrap();
        let ratio = w[1].magnitude / w[0].magnitude;
        let expected = (mode.decay_rate() * (1e4 - 1.0)).exp();
        assert!((ratio / expected - 1.0).abs() < 1e-9);
        assert!((ratio.ln() - 0.85).abs() < 0.02);
    }

    #[test]
    fn wavefunction_derivative_jump() {
        let p = params(200.0, 5.0);
        let mode = j1_mode();
        let theta = mode.value();
        let strength = theta * p.kappa() / (p.spacing() - theta);
        let slope = |x: f64, h: f64| {
            let s = qnm_wavefunction(&mode, &[x - h, x + h]).unwrap();
            (s[1].value - s[0].value) / (2.0 * h)
        };
        let mut previous = f64::INFINITY;
        for h in [1e-3, 1e-4, 1e-5] {
            let jump = slope(1.0 + 2.0 * h, h) - slope(1.0 - 2.0 * h, h);
            let err = (jump + strength * theta.sin()).norm();
            assert!(err < previous);
            previous = err;
        }
        assert!(previous < 1e-2 * strength.norm());
    }

    #[test]
    fn wavefunction_rejects_bad_input() {
        let mut mode = j1_mode();
        assert!(qnm_wavefunction(&mode, &[-0.1]).is_err());
        mode.converged = false;
        assert!(qnm_wavefunction(&mode, &[0.5]).is_err());
    }
}
