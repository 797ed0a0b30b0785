//! Cross-module self-checks.
//!
//! Each check recomputes a known property of the model through the public
//! API and reports a pass/fail line. [`Level::Quick`] skips the long
//! time-domain runs.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{evolve_atom, pole_check, DdeConfig, DEFAULT_DT};
use crate::emission::modified_emission_numeric;
use crate::model::DimensionlessParams;
use crate::platform::{
    raman_coupling, squid_coupling, squid_level_spacing, GateBias, RamanSpec, SquidSpec, UnitSystem,
};
use crate::qnm::{
    characteristic, count_roots_in_box, find_modes, refine_root, seed_mode, slowest_mode, sweep_decay, ContourBox,
    NewtonOptions, DEFAULT_SAMPLES_PER_EDGE,
};
use crate::scattering::{delay_peak, enhancement_peak, enhancement_scan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Level {
    Quick,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Outcome = std::result::Result<String, String>;

fn params(kappa: f64, spacing: f64) -> DimensionlessParams {
    DimensionlessParams::new(kappa, spacing).expect("valid literal parameters")
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fail(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn mode_at(kappa: f64, spacing: f64, j: i64) -> std::result::Result<Complex64, String> {
    let p = params(kappa, spacing);
    let m = refine_root(seed_mode(j, &p).map_err(fail)?, &p, NewtonOptions::default()).map_err(fail)?;
    if m.converged {
        Ok(m.value())
    } else {
        Err(format!("mode j={j} at kappa={kappa}, W={spacing} did not converge"))
    }
}

fn anchor_root() -> Outcome {
    let theta = mode_at(200.0, 5.0, 1)?;
    ensure(
        (theta.re - 3.15084).abs() <= 1e-4 && (8.0e-5..=9.2e-5).contains(&theta.im.abs()),
        format!("theta = {:.8} {:+.6e}i", theta.re, theta.im),
    )
}

fn seed_fidelity() -> Outcome {
    let mut worst: f64 = 0.0;
    for kappa in [50.0, 100.0, 200.0, 400.0] {
        for spacing in [2.0, 4.0, 5.0, 7.0, 10.0] {
            let j = (spacing / PI).round() as i64;
            let p = params(kappa, spacing);
            let seed = seed_mode(j, &p).map_err(fail)?;
            let refined = mode_at(kappa, spacing, j)?;
            let bound = 10.0 / (kappa * kappa) + 5.0 / (kappa * kappa * kappa);
            let ratio = (refined - seed).norm() / bound;
            worst = worst.max(ratio);
        }
    }
    ensure(worst <= 1.0, format!("worst |refined - seed| / bound = {worst:.3}"))
}

fn bound_states() -> Outcome {
    let mut worst_im: f64 = 0.0;
    let mut worst_f: f64 = 0.0;
    for j in 1..=3 {
        let spacing = j as f64 * PI;
        for kappa in [10.0, 200.0] {
            let p = params(kappa, spacing);
            let theta = mode_at(kappa, spacing, j)?;
            if (theta.re - spacing).abs() > 1e-12 {
                return Err(format!("j={j}: Re theta = {} differs from j pi", theta.re));
            }
            worst_im = worst_im.max(theta.im.abs());
            worst_f = worst_f.max(characteristic(Complex64::new(spacing, 0.0), &p).norm());
        }
    }
    ensure(
        worst_im <= 1e-12 && worst_f <= 1e-14,
        format!("max |Im theta| = {worst_im:.2e}, max |f(j pi)| = {worst_f:.2e}"),
    )
}

fn sweep_minima() -> Outcome {
    let steps = 600;
    let grid: Vec<f64> = (0..steps).map(|k| 0.5 + 11.5 * k as f64 / (steps - 1) as f64).collect();
    let step = grid[1] - grid[0];
    let rows = sweep_decay(&params(200.0, 1.0), &grid, NewtonOptions::default()).map_err(fail)?;
    let decay: Vec<f64> = rows.iter().map(|r| r.decay.unwrap_or(f64::NAN)).collect();
    let minima: Vec<f64> = (1..decay.len() - 1)
        .filter(|&i| decay[i] <= decay[i - 1] && decay[i] <= decay[i + 1])
        .map(|i| grid[i])
        .collect();
    for n in 1..=3 {
        let target = n as f64 * PI;
        let Some(&nearest) = minima.iter().min_by(|a, b| (*a - target).abs().total_cmp(&(*b - target).abs())) else {
            return Err("no local minima found".into());
        };
        if (nearest - target).abs() > step {
            return Err(format!("minimum near {n} pi found at {nearest}"));
        }
        let floor = decay
            .iter()
            .zip(&grid)
            .filter(|(_, w)| (**w - target).abs() <= step)
            .map(|(d, _)| *d)
            .fold(f64::INFINITY, f64::min);
        for side in [-0.3, 0.3] {
            let rate = slowest_mode(&params(200.0, target + side), NewtonOptions::default())
                .map_err(fail)?
                .decay_rate();
            if rate < 100.0 * floor {
                return Err(format!("contrast at {n} pi {side:+}: {rate:.3e} vs minimum {floor:.3e}"));
            }
        }
    }
    Ok(format!("{} local minima, each n pi within one step {step:.4}", minima.len()))
}

/// Deterministic low-discrepancy points in `[0, 1)^2`.
fn sample_points(n: usize) -> impl Iterator<Item = (f64, f64)> {
    const A1: f64 = 0.754_877_666_246_692_7;
    const A2: f64 = 0.569_840_290_998_053_3;
    (1..=n).map(|k| ((0.5 + A1 * k as f64).fract(), (0.5 + A2 * k as f64).fract()))
}

fn pole_identity() -> Outcome {
    let p = params(200.0, 5.0).with_loss(0.003).map_err(fail)?;
    let mut worst: f64 = 0.0;
    for (u, v) in sample_points(1000) {
        let theta = Complex64::new(20.0 * u, -0.5 + 0.6 * v);
        let f = characteristic(theta, &p).norm();
        worst = worst.max((pole_check(&p, theta) - f).abs() / (1.0 + f));
    }
    let lossless = params(200.0, 5.0);
    let modes = find_modes(&lossless, 0, 6, NewtonOptions::default()).map_err(fail)?;
    let worst_mode = modes
        .iter()
        .filter(|m| m.converged)
        .map(|m| pole_check(&lossless, m.value()))
        .fold(0.0, f64::max);
    ensure(
        worst <= 1e-12 && worst_mode <= 1e-10,
        format!("identity {worst:.2e}, mode residual {worst_mode:.2e}"),
    )
}

fn certification() -> Outcome {
    let p = params(200.0, 5.0);
    let bx = ContourBox::new(0.5, 4.5 * PI, -0.05, 0.001).map_err(fail)?;
    let count = count_roots_in_box(&p, &bx, DEFAULT_SAMPLES_PER_EDGE).map_err(fail)?;
    let found = find_modes(&p, 0, 6, NewtonOptions::default())
        .map_err(fail)?
        .iter()
        .filter(|m| m.converged && bx.contains(m.value()))
        .count();
    ensure(count == found, format!("winding count {count}, refined roots {found}"))
}

fn lifetime_scaling() -> Outcome {
    let ratios = [1, 2]
        .iter()
        .map(|&j| Ok(mode_at(100.0, 5.0, j)?.im / mode_at(200.0, 5.0, j)?.im))
        .collect::<std::result::Result<Vec<f64>, String>>()?;
    ensure(
        ratios.iter().all(|r| (r / 4.0 - 1.0).abs() <= 0.02),
        format!("lifetime ratios kappa 200/100: {ratios:.4?}"),
    )
}

fn scattering_peak() -> Outcome {
    let p = params(200.0, 5.0);
    let theta = mode_at(200.0, 5.0, 1)?;
    let grid: Vec<f64> = (0..4001).map(|k| theta.re - 2e-3 + 1e-6 * k as f64).collect();
    let scan = enhancement_scan(&p, &grid).map_err(fail)?;
    let peak = enhancement_peak(&scan).ok_or("empty scan")?;
    let delay = delay_peak(&scan).ok_or("empty scan")?;
    let delay_ratio = delay.delay * theta.im.abs();
    ensure(
        (peak.theta - theta.re).abs() <= 1e-3 && (delay_ratio - 1.0).abs() <= 0.05,
        format!("peak at {:.6}, max delay x |Im theta| = {delay_ratio:.4}", peak.theta),
    )
}

fn emission_suppression() -> Outcome {
    let bare = mode_at(200.0, 5.0, 1)?.im.abs();
    let mut gaps = Vec::new();
    let mut detail = String::new();
    for loss in [1e-2, 1e-3, 1e-4] {
        let p = params(200.0, 5.0).with_loss(loss).map_err(fail)?;
        let r = modified_emission_numeric(&p, 1, NewtonOptions::default()).map_err(fail)?;
        if loss == 1e-2 {
            let ratio = r.gamma_t_formula / r.gamma_t_numeric;
            if r.gamma_t_numeric >= loss || !(0.5..=2.0).contains(&ratio) {
                return Err(format!("numeric {:.4e}, formula {:.4e}", r.gamma_t_numeric, r.gamma_t_formula));
            }
            detail = format!("Gamma_t = {:.4e} (formula {:.4e})", r.gamma_t_numeric, r.gamma_t_formula);
        }
        gaps.push((r.gamma_t_numeric - bare).abs());
    }
    ensure(gaps.windows(2).all(|w| w[1] < w[0]), format!("{detail}; gaps {gaps:?}"))
}

fn platform_identities() -> Outcome {
    let squid = SquidSpec {
        josephson: 2.0 * PI * 5e9,
        gate_capacitance: 1e-15,
        junction_capacitance: 2e-15,
        total_capacitance: 1e-14,
        gate: GateBias::Charge(0.5),
        flux: 0.0,
        flux_quantum: UnitSystem::SI.flux_quantum(),
        line_length: 0.02,
        line_capacitance: 1.6e-10,
        mode_frequency: 2.0 * PI * 6e9,
        mixing_angle: PI / 2.0,
        units: UnitSystem::SI,
    };
    let levels = squid_level_spacing(&squid).map_err(fail)?;
    let degenerate = levels.charge_term == 0.0 && levels.level_spacing == 2.0 * squid.josephson;
    let flux = 0.37 * squid.flux_quantum;
    let plus = squid_level_spacing(&SquidSpec { flux, ..squid }).map_err(fail)?.level_spacing;
    let minus = squid_level_spacing(&SquidSpec { flux: -flux, ..squid }).map_err(fail)?.level_spacing;
    let half = squid_level_spacing(&SquidSpec { flux: 0.5 * squid.flux_quantum, gate: GateBias::Charge(0.2), ..squid })
        .map_err(fail)?;
    let coupling = squid_coupling(&squid).map_err(fail)?;

    let r = RamanSpec { cavity_coupling: 1.3e8, drive_coupling: 0.7e8, detuning: 1e10 };
    let swapped = RamanSpec { cavity_coupling: r.drive_coupling, drive_coupling: r.cavity_coupling, ..r };
    let doubled = RamanSpec { detuning: 2.0 * r.detuning, ..r };
    let j = raman_coupling(&r).map_err(fail)?;
    let exchange = raman_coupling(&swapped).map_err(fail)?.abs() == j.abs();
    let halving = raman_coupling(&doubled).map_err(fail)?.abs() == j.abs() / 2.0;

    ensure(
        degenerate
            && plus == minus
            && half.josephson_term == 0.0
            && exchange
            && halving
            && levels.flag.within_typical_range
            && coupling.flag.within_typical_range,
        format!(
            "spacing {:.3e} Hz, coupling {:.3e} Hz, identities hold: {}",
            levels.flag.value,
            coupling.flag.value,
            degenerate && plus == minus && exchange && halving
        ),
    )
}

fn dde_agreement(level: Level) -> Outcome {
    let cases: &[(f64, f64, f64, f64)] = match level {
        Level::Quick => &[(50.0, 2.0, 6200.0, 0.01)],
        Level::Full => &[(50.0, 2.0, 6200.0, DEFAULT_DT), (200.0, 5.0, 75_000.0, DEFAULT_DT), (200.0, 7.5, 85_000.0, DEFAULT_DT)],
    };
    let results: Vec<Outcome> = cases
        .par_iter()
        .map(|&(kappa, spacing, t_max, dt)| {
            let p = params(kappa, spacing);
            let mode = slowest_mode(&p, NewtonOptions::default()).map_err(fail)?;
            let run = evolve_atom(&DdeConfig::new(p, t_max).with_dt(dt)).map_err(fail)?;
            let early = run
                .times
                .iter()
                .zip(&run.w)
                .filter(|(t, _)| **t <= 2.0)
                .map(|(t, w)| (w.norm() / (-0.5 * kappa * t).exp() - 1.0).abs())
                .fold(0.0, f64::max);
            let fit = run.fit.map_err(fail)?;
            let omega_err = (fit.omega / mode.value().re - 1.0).abs();
            let gamma_err = (fit.gamma / mode.decay_rate() - 1.0).abs();
            ensure(
                omega_err <= 1e-2 && gamma_err <= 1e-2 && early <= 1e-8,
                format!("({kappa}, {spacing}): omega {omega_err:.1e}, gamma {gamma_err:.1e}, pre-delay {early:.1e}"),
            )
        })
        .collect();
    let details: Vec<String> = results.iter().map(|r| r.clone().unwrap_or_else(|e| e)).collect();
    ensure(results.iter().all(|r| r.is_ok()), details.join("; "))
}

/// Runs the suite; checks are independent and evaluated in parallel.
pub fn run(level: Level) -> Vec<Check> {
    let checks: Vec<(&'static str, Box<dyn Fn() -> Outcome + Send + Sync>)> = vec![
        ("anchor_root", Box::new(anchor_root)),
        ("seed_fidelity", Box::new(seed_fidelity)),
        ("bound_states", Box::new(bound_states)),
        ("sweep_minima", Box::new(sweep_minima)),
        ("pole_identity", Box::new(pole_identity)),
        ("time_frequency_agreement", Box::new(move || dde_agreement(level))),
        ("lifetime_scaling", Box::new(lifetime_scaling)),
        ("scattering_peak", Box::new(scattering_peak)),
        ("emission_suppression", Box::new(emission_suppression)),
        ("contour_certification", Box::new(certification)),
        ("platform_identities", Box::new(platform_identities)),
    ];
    checks
        .par_iter()
        .map(|(name, check)| match check() {
            Ok(detail) => Check { name, passed: true, detail },
            Err(detail) => Check { name, passed: false, detail },
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suite_passes() {
        let checks = run(Level::Quick);
        assert_eq!(checks.len(), 11);
        for c in &checks {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }

    #[test]
    fn sample_points_fill_the_square() {
        let pts: Vec<_> = sample_points(1000).collect();
        assert!(pts.iter().all(|&(u, v)| (0.0..1.0).contains(&u) && (0.0..1.0).contains(&v)));
        let quadrant = pts.iter().filter(|&&(u, v)| u < 0.5 && v < 0.5).count();
        assert!((200..300).contains(&quadrant));
    }
}
