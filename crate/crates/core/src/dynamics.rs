//! Time-domain oracle: the excited atom in front of the mirror.
//!
//! Unfolding the half-line at the mirror turns the two counter-propagating
//! fields into a single chiral field that passes the atom twice, at `x = +1`
//! and at its image `x = -1` with a sign flip. Eliminating that field leaves
//! a delay-differential equation for the atomic amplitude (natural units,
//! round-trip delay 2):
//!
//! ```text
//! dw/ds = -(i W + kappa/2) w(s) + (kappa/2) w(s - 2),     w(s < 0) = 0
//! ```
//!
//! Its Laplace characteristic `i(W - theta) + (kappa/2)(1 - exp(2 i theta))`
//! equals `-i f(theta)`, so its poles are exactly the quasi-normal modes.
//! An external loss enters as `W -> W - i Gamma~`.
//!
//! # Integrator
//!
//! Method of steps with an exponential integrator: the linear part is
//! propagated exactly, and the delayed term, which is already known over the
//! whole step, is replaced by the cubic Hermite interpolant of the stored
//! history and integrated exactly against the exponential. The step must
//! divide the round trip so the delayed window always falls on one history
//! interval. Before the first return (`s < 2`) the scheme is exact.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::model::DimensionlessParams;

/// Round-trip time atom -> mirror -> atom, in units of `a / v_g`.
pub const ROUND_TRIP: f64 = 2.0;
pub const MAX_DT: f64 = ROUND_TRIP / 200.0;
pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_SAMPLE_INTERVAL: f64 = 0.05;
/// Earliest admissible start of a fit window.
pub const MIN_FIT_START: f64 = 10.0 * ROUND_TRIP;
pub const MIN_FIT_SAMPLES: usize = 100;

const OVERFLOW_LIMIT: f64 = 1.0 + 1e-6;
const UNDERFLOW_LIMIT: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DdeConfig {
    pub params: DimensionlessParams,
    pub t_max: f64,
    pub dt: f64,
    /// Initial atomic amplitude; the field starts empty.
    pub w0: Complex64,
    /// Spacing of recorded samples; a multiple of `dt`.
    pub sample_interval: f64,
    /// Defaults to the second half of the run, `[max(20, t_max/2), t_max]`.
    /// Earlier windows see the pulse train of the fast modes and bias the fit.
    pub fit_window: Option<(f64, f64)>,
}

impl DdeConfig {
    pub fn new(params: DimensionlessParams, t_max: f64) -> Self {
        Self {
            params,
            t_max,
            dt: DEFAULT_DT,
            w0: Complex64::new(1.0, 0.0),
            sample_interval: DEFAULT_SAMPLE_INTERVAL,
            fit_window: None,
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_sample_interval(mut self, interval: f64) -> Self {
        self.sample_interval = interval;
        self
    }

    pub fn with_fit_window(mut self, start: f64, end: f64) -> Self {
        self.fit_window = Some((start, end));
        self
    }

    pub fn with_initial_amplitude(mut self, w0: Complex64) -> Self {
        self.w0 = w0;
        self
    }

    pub fn fit_window_or_default(&self) -> (f64, f64) {
        self.fit_window
            .unwrap_or(((0.5 * self.t_max).max(MIN_FIT_START), self.t_max))
    }

    fn plan(&self) -> Result<StepPlan> {
        if !(self.t_max.is_finite() && self.t_max >= MIN_FIT_START) {
            return Err(invalid("t_max", format!("must be at least {MIN_FIT_START}, got {}", self.t_max)));
        }
        if !(self.dt > 0.0 && self.dt <= MAX_DT * (1.0 + 1e-12)) {
            return Err(invalid("dt", format!("must lie in (0, {MAX_DT}], got {}", self.dt)));
        }
        let delay_steps = (ROUND_TRIP / self.dt).round();
        if (delay_steps * self.dt - ROUND_TRIP).abs() > 1e-9 * ROUND_TRIP {
            return Err(invalid("dt", format!("must divide the round trip {ROUND_TRIP}, got {}", self.dt)));
        }
        let stride = (self.sample_interval / self.dt).round();
        if !(stride >= 1.0) || (stride * self.dt - self.sample_interval).abs() > 1e-9 * self.sample_interval {
            return Err(invalid(
                "sample_interval",
                format!("must be a positive multiple of dt = {}, got {}", self.dt, self.sample_interval),
            ));
        }
        if !(self.w0.re.is_finite() && self.w0.im.is_finite()) || self.w0.norm() > 1.0 {
            return Err(invalid("w0", "initial amplitude must satisfy |w0| <= 1"));
        }
        Ok(StepPlan {
            delay_steps: delay_steps as usize,
            stride: stride as usize,
            total_steps: (self.t_max / self.dt - 1e-9).ceil() as usize,
        })
    }
}

struct StepPlan {
    delay_steps: usize,
    stride: usize,
    total_steps: usize,
}

/// Complex frequency extracted from the tail of `w(s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    /// Mean of `-d arg(w)/ds`.
    pub omega: f64,
    /// `-d ln|w| / ds` from a least-squares line.
    pub gamma: f64,
    /// RMS deviation of `ln|w|` from that line.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DdeResult {
    pub times: Vec<f64>,
    pub w: Vec<Complex64>,
    pub window: (f64, f64),
    pub fit: Result<DecayFit>,
}

/// `phi_0 .. phi_4` of the exponential integrator, `phi_{k+1}(z) = (phi_k(z) - 1/k!)/z`.
fn phi_functions(z: Complex64) -> [Complex64; 5] {
    let mut out = [Complex64::new(0.0, 0.0); 5];
    out[0] = z.exp();
    if z.norm() < 4.0 {
        // phi_k(z) = sum_n z^n / (n + k)!
        for (k, slot) in out.iter_mut().enumerate().skip(1) {
            let mut term = Complex64::new(1.0 / factorial(k), 0.0);
            let mut sum = term;
            for n in 1..60 {
                term = term * z / (n + k) as f64;
                sum += term;
            }
            *slot = sum;
        }
    } else {
        for k in 1..5 {
            out[k] = (out[k - 1] - 1.0 / factorial(k - 1)) / z;
        }
    }
    out
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

#[derive(Clone, Copy)]
struct HistoryPoint {
    w: Complex64,
    /// One-sided derivatives; they differ only at `s = 2`.
    left: Complex64,
    right: Complex64,
}

/// Integrates the atomic amplitude and fits the tail.
pub fn evolve_atom(cfg: &DdeConfig) -> Result<DdeResult> {
    let plan = cfg.plan()?;
    let p = &cfg.params;
    let h = cfg.dt;
    let n_delay = plan.delay_steps;
    let linear = -(Complex64::i() * p.complex_spacing() + 0.5 * p.kappa());
    let feedback = 0.5 * p.kappa();

    let phi = phi_functions(linear * h);
    let propagator = phi[0];
    // Weights of u^k in int_0^1 exp(z (1 - u)) u^k du = k! phi_{k+1}(z).
    let weights = [phi[1], phi[2], 2.0 * phi[3], 6.0 * phi[4]];

    let ring = n_delay + 2;
    let mut history = vec![
        HistoryPoint { w: Complex64::new(0.0, 0.0), left: Complex64::new(0.0, 0.0), right: Complex64::new(0.0, 0.0) };
        ring
    ];
    let point = |history: &[HistoryPoint], k: usize, w: Complex64| {
        let (delayed_left, delayed_right) = if k < n_delay {
            (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
        } else if k == n_delay {
            (Complex64::new(0.0, 0.0), history[0].w)
        } else {
            let d = history[(k - n_delay) % ring].w;
            (d, d)
        };
        HistoryPoint {
            w,
            left: linear * w + feedback * delayed_left,
            right: linear * w + feedback * delayed_right,
        }
    };
    history[0] = point(&history, 0, cfg.w0);

    let mut times = Vec::with_capacity(plan.total_steps / plan.stride + 1);
    let mut samples = Vec::with_capacity(plan.total_steps / plan.stride + 1);
    times.push(0.0);
    samples.push(cfg.w0);

    let mut current = cfg.w0;
    for n in 0..plan.total_steps {
        let mut next = propagator * current;
        if n >= n_delay {
            let a = history[(n - n_delay) % ring];
            let b = history[(n - n_delay + 1) % ring];
            let (y0, y1) = (a.w, b.w);
            let (m0, m1) = (h * a.right, h * b.left);
            let c2 = -3.0 * y0 - 2.0 * m0 + 3.0 * y1 - m1;
            let c3 = 2.0 * y0 + m0 - 2.0 * y1 + m1;
            next += feedback * h * (y0 * weights[0] + m0 * weights[1] + c2 * weights[2] + c3 * weights[3]);
        }
        let k = n + 1;
        let abs = next.norm();
        if !(abs <= OVERFLOW_LIMIT) {
            return Err(Error::Overflow { time: k as f64 * h, abs });
        }
        history[k % ring] = point(&history, k, next);
        current = next;
        if k % plan.stride == 0 {
            times.push(k as f64 * h);
            samples.push(next);
        }
    }

    let window = cfg.fit_window_or_default();
    let fit = fit_decay(&times, &samples, window);
    Ok(DdeResult { times, w: samples, window, fit })
}

fn wrap_phase(x: f64) -> f64 {
    use std::f64::consts::PI;
    let r = x.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// Least-squares decay rate and mean rotation frequency of `w` over `window`.
pub fn fit_decay(times: &[f64], w: &[Complex64], window: (f64, f64)) -> Result<DecayFit> {
    let (start, end) = window;
    if times.len() != w.len() {
        return Err(Error::FitWindow("times and amplitudes differ in length".into()));
    }
    if !(start >= MIN_FIT_START) {
        return Err(Error::FitWindow(format!("start {start} is earlier than {MIN_FIT_START}")));
    }
    let (Some(&first), Some(&last)) = (times.first(), times.last()) else {
        return Err(Error::FitWindow("empty series".into()));
    };
    if !(start < end) || start < first || end > last + 1e-9 {
        return Err(Error::FitWindow(format!("[{start}, {end}] not inside [{first}, {last}]")));
    }
    let idx: Vec<usize> = (0..times.len()).filter(|&i| times[i] >= start && times[i] <= end).collect();
    if idx.len() < MIN_FIT_SAMPLES {
        return Err(Error::FitWindow(format!("{} samples in window, need {MIN_FIT_SAMPLES}", idx.len())));
    }
    if let Some(&i) = idx.iter().find(|&&i| !(w[i].norm() >= UNDERFLOW_LIMIT)) {
        return Err(Error::Underflow { time: times[i] });
    }

    let n = idx.len() as f64;
    let mean_t = idx.iter().map(|&i| times[i]).sum::<f64>() / n;
    let mean_y = idx.iter().map(|&i| w[i].norm().ln()).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &i in &idx {
        let dt = times[i] - mean_t;
        sxy += dt * (w[i].norm().ln() - mean_y);
        sxx += dt * dt;
    }
    let slope = sxy / sxx;
    let residual = (idx
        .iter()
        .map(|&i| {
            let r = w[i].norm().ln() - (mean_y + slope * (times[i] - mean_t));
            r * r
        })
        .sum::<f64>()
        / n)
        .sqrt();

    let rates: Vec<f64> = idx
        .windows(2)
        .map(|pair| {
            let (a, b) = (pair[0], pair[1]);
            -wrap_phase((w[b] * w[a].conj()).arg()) / (times[b] - times[a])
        })
        .collect();
    let omega = rates.iter().sum::<f64>() / rates.len() as f64;

    let mut gamma = -slope;
    if gamma < 0.0 {
        if gamma > -1e-9 {
            gamma = 0.0;
        } else {
            return Err(Error::FitWindow(format!("amplitude grows (rate {})", -gamma)));
        }
    }
    Ok(DecayFit { omega, gamma, residual })
}

/// `|i (W - theta) + (kappa/2)(1 - exp(2 i theta))|`, the Laplace
/// characteristic of the delay equation. Evaluated without any argument
/// reduction so it stays independent of [`crate::qnm::characteristic`].
pub fn pole_check(p: &DimensionlessParams, theta: Complex64) -> f64 {
    let i = Complex64::i();
    (i * (p.complex_spacing() - theta) + 0.5 * p.kappa() * (1.0 - (2.0 * i * theta).exp())).norm()
}
