use std::f64::consts::PI;
use std::path::Path;

use qnmlab::dynamics::{evolve_atom, DdeConfig};
use qnmlab::platform::{
    raman_advisory, raman_coupling, squid_coupling, squid_level_spacing, to_model, GateBias, RamanSpec, SquidSpec,
    UnitSystem,
};
use qnmlab::qnm::{find_modes, slowest_mode, sweep_decay, Lifetime, NewtonOptions};
use qnmlab::scattering::{delay_peak, enhancement_peak, enhancement_scan, full_width_half_max, qnm_wavefunction};
use qnmlab::verify::{self, Level};
use qnmlab::{DimensionlessParams, PhysicalParams};
use serde_json::json;

use crate::output::{num, opt_num, Run, Table};
use crate::{
    BridgeArgs, EvolveArgs, Failure, MapCommand, ParamArgs, RamanArgs, ScatterArgs, SpectrumArgs, SquidArgs, Status,
    SweepArgs, VerifyArgs, WavefunctionArgs,
};

/// Resolves the parameter flags; physical inputs also yield conversion factors.
fn resolve(args: &ParamArgs) -> Result<(DimensionlessParams, Option<serde_json::Value>), Failure> {
    match (args.kappa, args.w, args.coupling) {
        (Some(kappa), Some(w), None) => Ok((DimensionlessParams::new(kappa, w)?.with_loss(args.gamma_ext)?, None)),
        (None, None, Some(coupling)) => {
            let (omega, v, a) = match (args.omega, args.v_g, args.distance) {
                (Some(o), Some(v), Some(a)) => (o, v, a),
                _ => return Err(Failure::Usage("--coupling needs --omega, --v-g and --distance".into())),
            };
            let physical = PhysicalParams::new(v, a, coupling, omega)?;
            let d = physical.to_dimensionless().with_loss(args.gamma_ext)?;
            let factors = json!({
                "time_unit": a / v,
                "energy_unit": v / a,
                "kappa": d.kappa(),
                "w": d.spacing(),
            });
            Ok((d, Some(factors)))
        }
        _ => Err(Failure::Usage("give either --kappa and --w, or --coupling with --omega, --v-g, --distance".into())),
    }
}

fn newton(tol: f64, max_iter: usize) -> NewtonOptions {
    NewtonOptions { tol, max_iter }
}

fn grid(min: f64, max: f64, samples: usize, what: &str) -> Result<Vec<f64>, Failure> {
    if !(min.is_finite() && max.is_finite() && min <= max) {
        return Err(Failure::Usage(format!("{what} range must be finite with min <= max")));
    }
    match samples {
        0 => Err(Failure::Usage(format!("{what} needs at least one sample"))),
        1 => Ok(vec![min]),
        n => Ok((0..n).map(|k| min + (max - min) * k as f64 / (n - 1) as f64).collect()),
    }
}

pub fn spectrum(dir: &Path, args: SpectrumArgs) -> Result<Status, Failure> {
    let (p, conversion) = resolve(&args.params)?;
    if args.j_min > args.j_max {
        return Err(Failure::Usage("--j-min must not exceed --j-max".into()));
    }
    let modes = find_modes(&p, args.j_min, args.j_max, newton(args.tol, args.max_iter))?;
    let mut run = Run::new(dir, "spectrum", &args);
    let mut table = Table::new("j,re_theta,im_theta,residual,lifetime,converged");
    for m in &modes {
        let lifetime = match m.lifetime() {
            Ok(Lifetime::Finite(t)) => num(t),
            Ok(Lifetime::Unbounded) => "inf".to_string(),
            Err(_) => String::new(),
        };
        let theta = m.value();
        table.push(&[
            m.index.to_string(),
            num(theta.re),
            num(theta.im),
            num(m.residual),
            lifetime,
            m.converged.to_string(),
        ]);
        if !m.converged {
            run.warn(format!("mode j={} did not converge (residual {:e})", m.index, m.residual));
        }
        if m.low_energy {
            run.warn(format!("mode j={} lies below the first cavity resonance", m.index));
        }
        if m.certified == Some(false) {
            run.warn(format!("mode j={} failed contour certification", m.index));
        }
    }
    let found = modes.len() as i64;
    let requested = args.j_max - args.j_min + 1;
    if found < requested {
        run.warn(format!("{} of {requested} requested modes were merged as duplicates", requested - found));
    }
    run.table("modes.csv", table);
    run.manifest.results = json!({
        "modes": modes.len(),
        "certified": modes.iter().filter(|m| m.certified == Some(true)).count(),
        "conversion": conversion,
    });
    let partial = modes.iter().any(|m| !m.converged);
    run.write()?;
    Ok(if partial { Status::Partial } else { Status::Complete })
}

pub fn sweep(dir: &Path, args: SweepArgs) -> Result<Status, Failure> {
    let template = DimensionlessParams::new(args.kappa, args.w_min.max(0.0))?.with_loss(args.gamma_ext)?;
    let points = grid(args.w_min, args.w_max, args.steps, "w")?;
    let rows = sweep_decay(&template, &points, NewtonOptions::with_tol(args.tol))?;
    let mut run = Run::new(dir, "sweep", &args);
    let mut table = Table::new("w,im_theta_min,j_used");
    let mut gaps = 0;
    for r in &rows {
        table.push(&[num(r.spacing), opt_num(r.decay), r.index.map(|j| j.to_string()).unwrap_or_default()]);
        if let Some(note) = &r.note {
            gaps += 1;
            run.warn(format!("w = {}: {note}", r.spacing));
        }
    }
    run.table("sweep.csv", table);
    run.manifest.results = json!({ "points": rows.len(), "gaps": gaps, "column_im_theta_min": "|Im theta| of the slowest mode" });
    run.write()?;
    Ok(if gaps > 0 { Status::Partial } else { Status::Complete })
}

pub fn scatter(dir: &Path, args: ScatterArgs) -> Result<Status, Failure> {
    let (p, conversion) = resolve(&args.params)?;
    let thetas = grid(args.theta_min, args.theta_max, args.samples, "theta")?;
    let points = enhancement_scan(&p, &thetas)?;
    let mut run = Run::new(dir, "scatter", &args);
    let mut table = Table::new("theta,delta,delay,enhancement");
    for s in &points {
        table.push(&[num(s.theta), num(s.delta), num(s.delay), num(s.enhancement)]);
    }
    if points.iter().any(|s| s.degenerate) {
        run.warn("grid touches a multiple of pi; enhancement there is a two-sided limit");
    }
    run.table("scatter.csv", table);
    run.manifest.results = json!({
        "enhancement_peak": enhancement_peak(&points).map(|s| s.theta),
        "delay_peak": delay_peak(&points).map(|s| json!({ "theta": s.theta, "delay": s.delay })),
        "fwhm": full_width_half_max(&points),
        "conversion": conversion,
    });
    run.write()?;
    Ok(Status::Complete)
}

pub fn wavefunction(dir: &Path, args: WavefunctionArgs) -> Result<Status, Failure> {
    let (p, conversion) = resolve(&args.params)?;
    let xs = grid(0.0, args.x_max, args.samples, "x")?;
    let modes = find_modes(&p, args.j, args.j, NewtonOptions::default())?;
    let mode = modes.first().ok_or_else(|| Failure::Usage(format!("no mode j={}", args.j)))?;
    let samples = qnm_wavefunction(mode, &xs)?;
    let mut run = Run::new(dir, "wavefunction", &args);
    let mut table = Table::new("x,re_phi,im_phi,abs_phi");
    for s in &samples {
        table.push(&[num(s.x), num(s.value.re), num(s.value.im), num(s.magnitude)]);
    }
    if !mode.converged {
        run.warn(format!("mode j={} did not converge", mode.index));
    }
    run.table("wavefunction.csv", table);
    run.manifest.results = json!({
        "theta": { "re": mode.value().re, "im": mode.value().im },
        "converged": mode.converged,
        "conversion": conversion,
    });
    run.write()?;
    Ok(if mode.converged { Status::Complete } else { Status::Partial })
}

pub fn evolve(dir: &Path, args: EvolveArgs) -> Result<Status, Failure> {
    let (p, conversion) = resolve(&args.params)?;
    let mut cfg = DdeConfig::new(p, args.t_max)
        .with_dt(args.dt)
        .with_sample_interval(args.sample_interval);
    if let (Some(start), Some(end)) = (args.fit_start, args.fit_end) {
        cfg = cfg.with_fit_window(start, end);
    }
    let result = evolve_atom(&cfg)?;
    let mut run = Run::new(dir, "evolve", &args);

    let expected = if p.kappa() > 1.0 { slowest_mode(&p, NewtonOptions::default()).ok() } else { None };
    if let Some(m) = &expected {
        let product = args.t_max * m.decay_rate();
        if product < 3.0 {
            run.warn(format!(
                "t_max * gamma_expected = {product:.3} < 3; the tail fit may not reach the slowest mode"
            ));
        }
    }

    let mut table = Table::new("s,re_w,im_w,abs_w");
    for (t, w) in result.times.iter().zip(&result.w) {
        table.push(&[num(*t), num(w.re), num(w.im), num(w.norm())]);
    }
    run.table("evolve.csv", table);
    let fit = match &result.fit {
        Ok(f) => json!({ "omega_fit": f.omega, "gamma_fit": f.gamma, "fit_residual": f.residual }),
        Err(e) => {
            run.warn(format!("fit failed: {e}"));
            serde_json::Value::Null
        }
    };
    run.manifest.results = json!({
        "fit_window": [result.window.0, result.window.1],
        "fit": fit,
        "expected": expected.map(|m| json!({ "j": m.index, "omega": m.value().re, "gamma": m.decay_rate() })),
        "conversion": conversion,
    });
    let partial = result.fit.is_err();
    run.write()?;
    Ok(if partial { Status::Partial } else { Status::Complete })
}

fn bridge_model(
    bridge: &BridgeArgs,
    level_spacing: f64,
    coupling: f64,
) -> Result<Option<serde_json::Value>, Failure> {
    let (Some(v), Some(a)) = (bridge.v_g, bridge.distance) else {
        return Ok(None);
    };
    let d = to_model(level_spacing, coupling, v, a)?;
    Ok(Some(json!({ "kappa": d.kappa(), "w": d.spacing() })))
}

fn squid_report(args: &SquidArgs) -> Result<(serde_json::Value, Vec<String>), Failure> {
    let scale = if args.bridge.hz { 2.0 * PI } else { 1.0 };
    let units = if args.natural_units { UnitSystem::NATURAL } else { UnitSystem::SI };
    let gate = match (args.gate_voltage, args.gate_charge) {
        (Some(v), None) => GateBias::Voltage(v),
        (None, Some(n)) => GateBias::Charge(n),
        _ => return Err(Failure::Usage("give exactly one of --gate-voltage, --gate-charge".into())),
    };
    let mut spec = SquidSpec {
        josephson: args.josephson * scale,
        gate_capacitance: args.gate_capacitance,
        junction_capacitance: args.junction_capacitance,
        total_capacitance: args.total_capacitance,
        gate,
        flux: args.flux,
        flux_quantum: 1.0,
        line_length: args.line_length,
        line_capacitance: args.line_capacitance,
        mode_frequency: args.mode_frequency * scale,
        mixing_angle: args.mixing_angle.unwrap_or(0.0),
        units,
    };
    let levels = squid_level_spacing(&spec)?;
    let mut warnings = Vec::new();
    if args.mixing_angle.is_none() {
        spec.mixing_angle = levels.mixing_angle();
        warnings.push(format!("mixing angle taken as atan2(B_x, B_z) = {}", spec.mixing_angle));
    }
    let coupling = squid_coupling(&spec)?;
    for flag in [&levels.flag, &coupling.flag] {
        if !flag.within_typical_range {
            warnings.push(format!("{} = {:e} Hz outside [{:e}, {:e}] Hz", flag.name, flag.value, flag.range.0, flag.range.1));
        }
    }
    warnings.extend(coupling.advisory.clone());
    let report = json!({
        "platform": "squid",
        "units": if args.natural_units { "natural" } else { "si" },
        "level_spacing": levels,
        "mixing_angle": spec.mixing_angle,
        "coupling": coupling,
        "model": bridge_model(&args.bridge, levels.level_spacing, coupling.coupling)?,
    });
    Ok((report, warnings))
}

fn raman_report(args: &RamanArgs) -> Result<(serde_json::Value, Vec<String>), Failure> {
    let scale = if args.bridge.hz { 2.0 * PI } else { 1.0 };
    let spec = RamanSpec {
        cavity_coupling: args.cavity_coupling * scale,
        drive_coupling: args.drive_coupling * scale,
        detuning: args.detuning * scale,
    };
    let coupling = raman_coupling(&spec)?;
    let warnings: Vec<String> = raman_advisory(coupling).into_iter().collect();
    let model = match args.level_spacing {
        Some(omega) => bridge_model(&args.bridge, omega * scale, coupling)?,
        None => None,
    };
    let report = json!({
        "platform": "raman",
        "spec": spec,
        "coupling": coupling,
        "coupling_hz": coupling / (2.0 * PI),
        "model": model,
    });
    Ok((report, warnings))
}

pub fn map(dir: &Path, command: MapCommand) -> Result<Status, Failure> {
    let (report, warnings) = match &command {
        MapCommand::Squid(args) => squid_report(args)?,
        MapCommand::Raman(args) => raman_report(args)?,
    };
    let mut run = Run::new(dir, "map", &command);
    for w in warnings {
        run.warn(w);
    }
    run.json("map.json", &report)?;
    run.manifest.results = report;
    run.write()?;
    Ok(Status::Complete)
}

pub fn verify(dir: &Path, args: VerifyArgs) -> Result<Status, Failure> {
    let level = if args.full { Level::Full } else { Level::Quick };
    let checks = verify::run(level);
    let mut run = Run::new(dir, "verify", &args);
    let mut table = Table::new("check,passed,detail");
    for c in &checks {
        println!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        table.push(&[c.name.to_string(), c.passed.to_string(), format!("\"{}\"", c.detail.replace('"', "'"))]);
    }
    run.table("verify.csv", table);
    run.manifest.results = json!({ "level": level, "checks": checks });
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    run.write()?;
    if failed.is_empty() {
        Ok(Status::Complete)
    } else {
        Err(Failure::Verify(failed.join(", ")))
    }
}
