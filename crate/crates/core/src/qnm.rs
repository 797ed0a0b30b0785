//! Quasi-normal mode spectrum of the emergent cavity.
//!
//! The complex energies are the zeros of the entire function
//!
//! ```text
//! f(theta) = kappa sin(theta) exp(i theta) - (W - theta)
//! ```
//!
//! which is the outgoing-wave matching condition `tan(theta) = 1 / (kappa/(W - theta) + i)`
//! multiplied through by `(W - theta) cos(theta)`. Unlike the tangent form it
//! has no poles, so Newton iteration and contour winding work on it directly.
//!
//! Modes are seeded from the strong-coupling expansion ([`seed_mode`]),
//! polished by Newton ([`refine_root`]) and certified with an argument-principle
//! count on a small rectangle around each root ([`count_roots_in_box`]).
//!
//! When the parameters carry an external loss, the level spacing is replaced
//! by `W - i Gamma~` everywhere in this module.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::model::{ComplexFrequency, DimensionlessParams};

/// Default Newton tolerance on `|f(theta)|`.
pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 50;
pub const DEFAULT_SAMPLES_PER_EDGE: usize = 2000;
/// Roots closer than this are treated as the same mode.
pub const DEDUP_RADIUS: f64 = 1e-6;

const MAX_PERTURBATIONS: usize = 3;
const CONTOUR_MIN_ABS: f64 = 1e-9;
const CONTOUR_RETRIES: usize = 5;
const MAX_ARG_STEP: f64 = PI / 4.0;
const MAX_BISECTION_DEPTH: u32 = 40;

/// `(sin(theta) exp(i theta), exp(2 i theta))`.
///
/// Both are pi-periodic, so the real part is reduced by the nearest multiple
/// of pi first. This makes `f` vanish exactly at `theta = W = j*pi` in
/// floating point.
fn periodic_parts(theta: Complex64) -> (Complex64, Complex64) {
    let n = (theta.re / PI).round();
    let reduced = Complex64::new((-n).mul_add(PI, theta.re), theta.im);
    let phase = (Complex64::i() * reduced).exp();
    (reduced.sin() * phase, phase * phase)
}

/// The characteristic function `f(theta)`.
///
/// ```
/// use qnmlab::{qnm::characteristic, DimensionlessParams};
/// use num_complex::Complex64;
/// use std::f64::consts::PI;
///
/// let p = DimensionlessParams::new(200.0, PI).unwrap();
/// assert_eq!(characteristic(Complex64::new(PI, 0.0), &p).norm(), 0.0);
/// ```
pub fn characteristic(theta: Complex64, p: &DimensionlessParams) -> Complex64 {
    let (s, _) = periodic_parts(theta);
    p.kappa() * s - (p.complex_spacing() - theta)
}

/// `f'(theta) = kappa exp(2 i theta) + 1`.
pub fn characteristic_derivative(theta: Complex64, p: &DimensionlessParams) -> Complex64 {
    let (_, e2) = periodic_parts(theta);
    p.kappa() * e2 + 1.0
}

/// Strong-coupling estimate of the `j`-th complex energy:
/// `j pi + (W - j pi)(kappa - 1)/kappa^2 - i (W - j pi)^2/kappa^2`.
pub fn seed_mode(j: i64, p: &DimensionlessParams) -> Result<Complex64> {
    let kappa = p.kappa();
    if !(kappa > 1.0) {
        return Err(Error::ApproximationRange { kappa });
    }
    let base = j as f64 * PI;
    let detuning = p.complex_spacing() - base;
    let k2 = kappa * kappa;
    Ok(base + detuning * (kappa - 1.0) / k2 - Complex64::i() * detuning * detuning / k2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, max_iter: DEFAULT_MAX_ITER }
    }
}

impl NewtonOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(invalid("tol", format!("must be a positive finite number, got {}", self.tol)));
        }
        Ok(())
    }
}

/// Inverse decay rate of a mode, in units of `a / v_g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Lifetime {
    Finite(f64),
    Unbounded,
}

impl Lifetime {
    pub fn value(&self) -> f64 {
        match *self {
            Lifetime::Finite(t) => t,
            Lifetime::Unbounded => f64::INFINITY,
        }
    }
}

/// One quasi-normal mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QnmMode {
    /// `round(Re theta / pi)`.
    pub index: i64,
    pub theta: ComplexFrequency,
    /// `|f(theta)|` at the returned point.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Set for `index <= 0`: the mode sits at or below the low-energy end of
    /// the continuum where the effective-index picture (which carries a `1/E`)
    /// is not trustworthy.
    pub low_energy: bool,
    /// Outcome of the argument-principle check, when one was run.
    pub certified: Option<bool>,
}

impl QnmMode {
    fn at(theta: Complex64, p: &DimensionlessParams, iterations: usize, tol: f64) -> Self {
        let residual = characteristic(theta, p).norm();
        let index = (theta.re / PI).round() as i64;
        Self {
            index,
            theta: ComplexFrequency::new(theta).expect("finite theta"),
            residual,
            iterations,
            converged: residual <= tol,
            low_energy: index <= 0,
            certified: None,
        }
    }

    pub fn value(&self) -> Complex64 {
        self.theta.theta()
    }

    /// `|Im theta|`.
    pub fn decay_rate(&self) -> f64 {
        self.theta.theta().im.abs()
    }

    pub fn lifetime(&self) -> Result<Lifetime> {
        lifetime(self)
    }
}

/// Newton refinement of a seed.
///
/// Non-convergence is not an error: the returned mode has `converged = false`.
/// A vanishing derivative nudges the iterate by `1e-6 (1 + i)` up to three
/// times before giving up with [`Error::ZeroDerivative`].
pub fn refine_root(seed: Complex64, p: &DimensionlessParams, opts: NewtonOptions) -> Result<QnmMode> {
    opts.validate()?;
    if !(seed.re.is_finite() && seed.im.is_finite()) {
        return Err(invalid("seed", "must be finite"));
    }
    let derivative_floor = 4.0 * f64::EPSILON * (1.0 + p.kappa());
    let mut theta = seed;
    let mut value = characteristic(theta, p);
    let mut iterations = 0;
    let mut perturbations = 0;

    while value.norm() > opts.tol && iterations < opts.max_iter {
        let slope = characteristic_derivative(theta, p);
        if slope.norm() <= derivative_floor {
            if perturbations == MAX_PERTURBATIONS {
                return Err(Error::ZeroDerivative { re: theta.re, im: theta.im });
            }
            perturbations += 1;
            theta += Complex64::new(1e-6, 1e-6);
            value = characteristic(theta, p);
            continue;
        }
        let next = theta - value / slope;
        iterations += 1;
        if !(next.re.is_finite() && next.im.is_finite()) {
            break;
        }
        theta = next;
        value = characteristic(theta, p);
    }
    Ok(QnmMode::at(theta, p, iterations, opts.tol))
}

/// Lifetime `1/|Im theta|`; unbounded for `|Im theta| < 1e-14`.
pub fn lifetime(mode: &QnmMode) -> Result<Lifetime> {
    if !mode.converged {
        return Err(Error::Unconverged { residual: mode.residual });
    }
    let rate = mode.decay_rate();
    Ok(if rate < 1e-14 { Lifetime::Unbounded } else { Lifetime::Finite(1.0 / rate) })
}

/// Axis-aligned rectangle in the complex `theta` plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContourBox {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl ContourBox {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        if ![re_min, re_max, im_min, im_max].iter().all(|v| v.is_finite()) {
            return Err(invalid("box", "bounds must be finite"));
        }
        if !(re_min < re_max) || !(im_min < im_max) {
            return Err(invalid("box", "requires re_min < re_max and im_min < im_max"));
        }
        Ok(Self { re_min, re_max, im_min, im_max })
    }

    /// Square of half-width `half` centred on `center`.
    pub fn around(center: Complex64, half: f64) -> Result<Self> {
        Self::new(center.re - half, center.re + half, center.im - half, center.im + half)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re > self.re_min && z.re < self.re_max && z.im > self.im_min && z.im < self.im_max
    }

    fn inflated(&self, factor: f64) -> Self {
        let dr = 0.5 * (self.re_max - self.re_min) * (factor - 1.0);
        let di = 0.5 * (self.im_max - self.im_min) * (factor - 1.0);
        Self {
            re_min: self.re_min - dr,
            re_max: self.re_max + dr,
            im_min: self.im_min - di,
            im_max: self.im_max + di,
        }
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_min, self.im_min),
            Complex64::new(self.re_max, self.im_min),
            Complex64::new(self.re_max, self.im_max),
            Complex64::new(self.re_min, self.im_max),
        ]
    }
}

enum WindingFailure {
    Hit(f64),
    Fatal(Error),
}

struct Winder<'a> {
    p: &'a DimensionlessParams,
    samples_per_edge: usize,
    min_abs: f64,
}

impl Winder<'_> {
    fn eval(&mut self, z: Complex64) -> Complex64 {
        let v = characteristic(z, self.p);
        self.min_abs = self.min_abs.min(v.norm());
        v
    }

    fn segment(&mut self, a: Complex64, fa: Complex64, b: Complex64, fb: Complex64, depth: u32) -> Result<f64, WindingFailure> {
        if self.min_abs < CONTOUR_MIN_ABS {
            return Err(WindingFailure::Hit(self.min_abs));
        }
        let step = (fb * fa.conj()).arg();
        if step.abs() <= MAX_ARG_STEP {
            return Ok(step);
        }
        if depth == 0 {
            return Err(WindingFailure::Fatal(Error::Undersampled {
                samples_per_edge: self.samples_per_edge,
                deviation: 0.5,
            }));
        }
        let mid = 0.5 * (a + b);
        let fm = self.eval(mid);
        Ok(self.segment(a, fa, mid, fm, depth - 1)? + self.segment(mid, fm, b, fb, depth - 1)?)
    }

    fn winding(&mut self, bx: &ContourBox) -> Result<f64, WindingFailure> {
        let corners = bx.corners();
        let n = self.samples_per_edge;
        let mut total = 0.0;
        let mut prev = corners[0];
        let mut f_prev = self.eval(prev);
        for (k, &start) in corners.iter().enumerate() {
            let end = corners[(k + 1) % 4];
            for i in 1..=n {
                let z = if i == n { end } else { start + (end - start) * (i as f64 / n as f64) };
                let fz = self.eval(z);
                total += self.segment(prev, f_prev, z, fz, MAX_BISECTION_DEPTH)?;
                prev = z;
                f_prev = fz;
            }
        }
        if self.min_abs < CONTOUR_MIN_ABS {
            return Err(WindingFailure::Hit(self.min_abs));
        }
        Ok(total / (2.0 * PI))
    }
}

/// Number of zeros of `f` inside `bx`, by accumulating the argument of `f`
/// counterclockwise along the boundary.
///
/// Each edge starts with `samples_per_edge` uniform samples; any step whose
/// phase change exceeds pi/4 is bisected. If the contour passes within `1e-9`
/// (in `|f|`) of a zero the box is inflated by 1% and retried, at most five
/// times.
pub fn count_roots_in_box(p: &DimensionlessParams, bx: &ContourBox, samples_per_edge: usize) -> Result<usize> {
    if samples_per_edge == 0 {
        return Err(invalid("samples_per_edge", "must be at least 1"));
    }
    let mut current = *bx;
    for attempt in 0..=CONTOUR_RETRIES {
        let mut winder = Winder { p, samples_per_edge, min_abs: f64::INFINITY };
        match winder.winding(&current) {
            Ok(turns) => {
                let count = turns.round();
                let deviation = (turns - count).abs();
                if deviation > 0.1 || count < 0.0 {
                    return Err(Error::Undersampled { samples_per_edge, deviation });
                }
                return Ok(count as usize);
            }
            Err(WindingFailure::Fatal(e)) => return Err(e),
            Err(WindingFailure::Hit(min_abs)) => {
                if attempt == CONTOUR_RETRIES {
                    return Err(Error::ContourThroughRoot { min_abs, retries: CONTOUR_RETRIES });
                }
                current = current.inflated(1.01);
            }
        }
    }
    unreachable!("loop returns on the final attempt")
}

fn certification_box(theta: Complex64, neighbour_distance: f64) -> Result<ContourBox> {
    let half = (10.0 * theta.im.abs()).clamp(1e-3, 0.25).min(0.45 * neighbour_distance);
    ContourBox::around(theta, half)
}

/// Seeds every `j` in `j_min..=j_max`, refines, drops duplicates, sorts by
/// `Re theta` and certifies each converged root with a winding count of one.
pub fn find_modes(p: &DimensionlessParams, j_min: i64, j_max: i64, opts: NewtonOptions) -> Result<Vec<QnmMode>> {
    if j_min > j_max {
        return Err(invalid("j_min", format!("{j_min} exceeds j_max {j_max}")));
    }
    opts.validate()?;
    // Fail fast on the approximation range before spawning work.
    seed_mode(j_min, p)?;

    let mut modes: Vec<QnmMode> = (j_min..=j_max)
        .into_par_iter()
        .map(|j| -> Result<QnmMode> {
            let seed = seed_mode(j, p)?;
            match refine_root(seed, p, opts) {
                Ok(mode) => Ok(mode),
                Err(Error::ZeroDerivative { .. }) => {
                    let mut mode = QnmMode::at(seed, p, 0, opts.tol);
                    mode.converged = false;
                    Ok(mode)
                }
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;

    // Converged modes first so they survive deduplication.
    modes.sort_by(|a, b| b.converged.cmp(&a.converged));
    let mut unique: Vec<QnmMode> = Vec::with_capacity(modes.len());
    for mode in modes {
        if !unique.iter().any(|u| (u.value() - mode.value()).norm() < DEDUP_RADIUS) {
            unique.push(mode);
        }
    }
    unique.sort_by(|a, b| {
        a.value()
            .re
            .total_cmp(&b.value().re)
            .then(a.value().im.total_cmp(&b.value().im))
    });

    let thetas: Vec<Complex64> = unique.iter().map(QnmMode::value).collect();
    unique.par_iter_mut().enumerate().for_each(|(i, mode)| {
        if !mode.converged {
            return;
        }
        let nearest = thetas
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != i)
            .map(|(_, t)| (t - mode.value()).norm())
            .fold(f64::INFINITY, f64::min);
        let ok = certification_box(mode.value(), nearest)
            .and_then(|bx| count_roots_in_box(p, &bx, DEFAULT_SAMPLES_PER_EDGE))
            .map(|n| n == 1)
            .unwrap_or(false);
        mode.certified = Some(ok);
    });
    Ok(unique)
}

/// The longest-lived mode for the current spacing: the better of
/// `j = floor(W/pi)` and `j = ceil(W/pi)`.
pub fn slowest_mode(p: &DimensionlessParams, opts: NewtonOptions) -> Result<QnmMode> {
    let ratio = p.spacing() / PI;
    let mut candidates = vec![ratio.floor() as i64];
    if ratio.ceil() != ratio.floor() {
        candidates.push(ratio.ceil() as i64);
    }
    let mut best: Option<QnmMode> = None;
    let mut last_unconverged = None;
    for j in candidates {
        let mode = refine_root(seed_mode(j, p)?, p, opts)?;
        if !mode.converged {
            last_unconverged = Some(mode);
            continue;
        }
        if best.map_or(true, |b| mode.decay_rate() < b.decay_rate()) {
            best = Some(mode);
        }
    }
    best.or(last_unconverged).ok_or_else(|| invalid("w", "no candidate modes"))
}

/// One row of a decay-rate sweep over the level spacing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub spacing: f64,
    /// `|Im theta|` of the slowest mode; `None` when the solver failed here.
    pub decay: Option<f64>,
    pub index: Option<i64>,
    pub note: Option<String>,
}

/// Slowest-mode decay rate `|Im theta|` across a grid of level spacings.
///
/// Points within `1e-9` of a multiple of pi are bound states in the continuum
/// and are recorded as exactly zero. Solver failures become gaps.
pub fn sweep_decay(template: &DimensionlessParams, grid: &[f64], opts: NewtonOptions) -> Result<Vec<SweepRow>> {
    opts.validate()?;
    if !(template.kappa() > 1.0) {
        return Err(Error::ApproximationRange { kappa: template.kappa() });
    }
    if let Some(bad) = grid.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return Err(invalid("w", format!("grid values must be finite and >= 0, got {bad}")));
    }
    let rows = grid
        .par_iter()
        .map(|&w| {
            let j = (w / PI).round();
            if (w - j * PI).abs() < 1e-9 {
                return SweepRow { spacing: w, decay: Some(0.0), index: Some(j as i64), note: None };
            }
            let solved = template.with_spacing(w).and_then(|p| slowest_mode(&p, opts));
            match solved {
                Ok(mode) if mode.converged => SweepRow {
                    spacing: w,
                    decay: Some(mode.decay_rate()),
                    index: Some(mode.index),
                    note: None,
                },
                Ok(mode) => SweepRow {
                    spacing: w,
                    decay: None,
                    index: None,
                    note: Some(format!("not converged (residual {:e})", mode.residual)),
                },
                Err(e) => SweepRow { spacing: w, decay: None, index: None, note: Some(e.to_string()) },
            }
        })
        .collect();
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(kappa: f64, w: f64) -> DimensionlessParams {
        DimensionlessParams::new(kappa, w).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// `f` without argument reduction, straight from the definition.
    fn naive_f(theta: Complex64, p: &DimensionlessParams) -> Complex64 {
        p.kappa() * theta.sin() * (Complex64::i() * theta).exp() - (p.spacing() - theta)
    }

    #[test]
    fn characteristic_vanishes_at_bound_state() {
        for kappa in [0.0, 1.0, 200.0, 1e4] {
            let p = params(kappa, PI);
            assert_eq!(characteristic(c(PI, 0.0), &p), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn characteristic_decoupled_pole() {
        let p = params(0.0, 5.0);
        assert_eq!(characteristic(c(5.0, 0.0), &p).norm(), 0.0);
    }

    #[test]
    fn characteristic_at_rounded_published_root() {
        // |f| at 3.15084 - 8.6e-5 i, evaluated independently at 40 digits: 5.5290e-4.
        let r = characteristic(c(3.15084, -8.6e-5), &params(200.0, 5.0)).norm();
        assert!(r < 0.05);
        assert!((r - 5.528982887374395e-4).abs() < 1e-12);
    }

    #[test]
    fn reduction_matches_naive_form() {
        let p = params(37.0, 4.2);
        for k in 0..200 {
            let theta = c(-20.0 + 0.23 * k as f64, -0.3 + 0.004 * k as f64);
            let d = (characteristic(theta, &p) - naive_f(theta, &p)).norm();
            assert!(d < 1e-12, "theta={theta} diff={d}");
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let p = params(50.0, 2.0);
        let h = 1e-6;
        for theta in [c(0.3, -0.1), c(3.0, 0.0), c(7.7, -0.02), c(12.0, 0.05)] {
            let fd = (naive_f(theta + h, &p) - naive_f(theta - h, &p)) / (2.0 * h);
            let an = characteristic_derivative(theta, &p);
            assert!((fd - an).norm() < 1e-6 * (1.0 + an.norm()), "{fd} vs {an}");
        }
    }

    #[test]
    fn seed_examples() {
        let p = params(200.0, 5.0);
        let s = seed_mode(1, &p).unwrap();
        assert!((s.re - 3.15084).abs() < 5e-6);
        assert!((s.im + 8.634194662978566e-5).abs() < 1e-15);

        let p = params(200.0, 2.0 * PI);
        assert_eq!(seed_mode(2, &p).unwrap(), c(2.0 * PI, 0.0));

        assert_eq!(seed_mode(1, &params(1.0, 5.0)), Err(Error::ApproximationRange { kappa: 1.0 }));
        assert!(seed_mode(1, &params(0.0, 5.0)).is_err());
    }

    #[test]
    fn refine_j1_anchor() {
        let p = params(200.0, 5.0);
        let mode = refine_root(seed_mode(1, &p).unwrap(), &p, NewtonOptions::default()).unwrap();
        assert!(mode.converged);
        assert_eq!(mode.index, 1);
        assert!((mode.value().re - 3.15084).abs() < 1e-4);
        assert!(mode.residual <= 1e-12);
        // 40-digit reference root.
        assert!((mode.value() - c(3.150837420724337, -8.504536241580798e-5)).norm() < 1e-12);
    }

    #[test]
    fn refine_exact_bound_state() {
        let p = params(200.0, 2.0 * PI);
        let mode = refine_root(c(2.0 * PI, 0.0), &p, NewtonOptions::default()).unwrap();
        assert_eq!(mode.value(), c(2.0 * PI, 0.0));
        assert_eq!(mode.iterations, 0);
        assert_eq!(mode.lifetime().unwrap(), Lifetime::Unbounded);
    }

    #[test]
    fn refine_j2_is_unique_in_box() {
        let p = params(200.0, 5.0);
        let mode = refine_root(seed_mode(2, &p).unwrap(), &p, NewtonOptions::default()).unwrap();
        let bx = ContourBox::new(1.5 * PI, 2.5 * PI, -0.1, 0.0).unwrap();
        assert!(bx.contains(mode.value()));
        assert_eq!(count_roots_in_box(&p, &bx, DEFAULT_SAMPLES_PER_EDGE).unwrap(), 1);
    }

    #[test]
    fn refine_flags_non_convergence() {
        let p = params(200.0, 5.0);
        let opts = NewtonOptions { tol: 1e-12, max_iter: 1 };
        let mode = refine_root(c(3.0, -0.3), &p, opts).unwrap();
        assert!(!mode.converged);
        assert!(mode.residual > 1e-12);
        assert!(matches!(lifetime(&mode), Err(Error::Unconverged { .. })));
        assert!(refine_root(c(3.0, 0.0), &p, NewtonOptions::with_tol(0.0)).is_err());
    }

    #[test]
    fn refine_escapes_critical_point() {
        // f'(theta) = 0 where exp(2 i theta) = -1/kappa.
        let kappa: f64 = 4.0;
        let p = params(kappa, 1.0);
        let critical = c(PI / 2.0, kappa.ln() / 2.0);
        assert!(characteristic_derivative(critical, &p).norm() < 1e-14);
        match refine_root(critical, &p, NewtonOptions::default()) {
            Ok(mode) => {
                if mode.converged {
                    assert!(characteristic(mode.value(), &p).norm() <= 1e-12);
                }
            }
            Err(e) => assert!(matches!(e, Error::ZeroDerivative { .. })),
        }
    }

    #[test]
    fn find_modes_first_four() {
        let p = params(200.0, 5.0);
        let modes = find_modes(&p, 1, 4, NewtonOptions::default()).unwrap();
        assert_eq!(modes.len(), 4);
        for (k, m) in modes.iter().enumerate() {
            assert!(m.converged);
            assert_eq!(m.certified, Some(true));
            assert_eq!(m.index, k as i64 + 1);
            assert!((m.value().re - (k + 1) as f64 * PI).abs() < 0.05);
            assert!(m.value().im <= 1e-12);
        }
    }

    #[test]
    fn find_modes_rejects_weak_coupling() {
        let p = params(0.0, 5.0);
        assert!(matches!(
            find_modes(&p, 1, 4, NewtonOptions::default()),
            Err(Error::ApproximationRange { .. })
        ));
        assert!(find_modes(&params(200.0, 5.0), 3, 1, NewtonOptions::default()).is_err());
    }

    #[test]
    fn find_modes_contains_real_root() {
        let p = params(200.0, PI);
        let modes = find_modes(&p, 1, 1, NewtonOptions::default()).unwrap();
        assert_eq!(modes[0].value(), c(PI, 0.0));
    }

    #[test]
    fn find_modes_flags_low_energy() {
        let p = params(200.0, 5.0);
        let modes = find_modes(&p, -1, 1, NewtonOptions::default()).unwrap();
        assert!(modes.iter().filter(|m| m.index <= 0).all(|m| m.low_energy));
        assert!(modes.iter().filter(|m| m.index > 0).all(|m| !m.low_energy));
    }

    #[test]
    fn winding_examples() {
        let p = params(200.0, 5.0);
        let bx = ContourBox::new(0.9 * PI, 1.1 * PI, -0.01, 0.005).unwrap();
        assert_eq!(count_roots_in_box(&p, &bx, DEFAULT_SAMPLES_PER_EDGE).unwrap(), 1);

        let p = params(0.0, 5.0);
        let bx = ContourBox::new(0.4, 0.6, -0.05, 0.05).unwrap();
        assert_eq!(count_roots_in_box(&p, &bx, DEFAULT_SAMPLES_PER_EDGE).unwrap(), 0);
        let bx = ContourBox::new(4.9, 5.1, -0.05, 0.05).unwrap();
        assert_eq!(count_roots_in_box(&p, &bx, DEFAULT_SAMPLES_PER_EDGE).unwrap(), 1);
    }

    #[test]
    fn winding_survives_coarse_sampling() {
        let p = params(200.0, 5.0);
        let bx = ContourBox::new(0.5, 4.5 * PI, -0.05, 0.001).unwrap();
        assert_eq!(count_roots_in_box(&p, &bx, 3).unwrap(), 4);
    }

    #[test]
    fn contour_through_root_is_inflated() {
        // Root of f = theta - 5 sits on the left edge; inflation moves the edge off it.
        let p = params(0.0, 5.0);
        let bx = ContourBox::new(5.0, 6.0, -0.5, 0.5).unwrap();
        assert_eq!(count_roots_in_box(&p, &bx, 100).unwrap(), 1);
    }

    #[test]
    fn contour_box_validation() {
        assert!(ContourBox::new(1.0, 1.0, 0.0, 1.0).is_err());
        assert!(ContourBox::new(0.0, 1.0, 2.0, 1.0).is_err());
        assert!(count_roots_in_box(&params(0.0, 1.0), &ContourBox::new(0.0, 1.0, 0.0, 1.0).unwrap(), 0).is_err());
    }

    #[test]
    fn completeness_over_wide_box() {
        let p = params(200.0, 5.0);
        let bx = ContourBox::new(0.5, 4.5 * PI, -0.05, 0.001).unwrap();
        let modes = find_modes(&p, -2, 8, NewtonOptions::default()).unwrap();
        let inside = modes.iter().filter(|m| m.converged && bx.contains(m.value())).count();
        assert_eq!(count_roots_in_box(&p, &bx, DEFAULT_SAMPLES_PER_EDGE).unwrap(), inside);
    }

    #[test]
    fn seed_quality_grid() {
        for a in 0..20 {
            let kappa = 50.0 + 950.0 * a as f64 / 19.0;
            for b in 0..20 {
                let j = 1 + (b % 3) as i64;
                let w = j as f64 * PI + (-0.5 + b as f64 / 19.0) * PI * 0.999;
                let p = params(kappa, w);
                let seed = seed_mode(j, &p).unwrap();
                let mode = refine_root(seed, &p, NewtonOptions { tol: 1e-12, max_iter: 25 }).unwrap();
                assert!(mode.converged, "kappa={kappa} w={w}");
                let bound = 10.0 / (kappa * kappa) + 5.0 / kappa.powi(3);
                assert!((mode.value() - seed).norm() <= bound, "kappa={kappa} w={w}");
            }
        }
    }

    #[test]
    fn passivity_of_converged_modes() {
        for (kappa, w) in [(2.0, 1.0), (10.0, 3.3), (200.0, 5.0), (400.0, 10.0)] {
            let p = params(kappa, w);
            for m in find_modes(&p, 0, 6, NewtonOptions::default()).unwrap() {
                if m.converged {
                    assert!(m.value().im <= 1e-12, "{m:?}");
                }
            }
        }
    }

    #[test]
    fn tangent_form_equivalence() {
        // Deterministic pseudo-random points; the tangent form is only
        // compared away from its poles and from theta = W.
        let mut state: u64 = 0x9e37_79b9_7f4a_7c15;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut checked = 0;
        while checked < 100 {
            let kappa = 1.0 + 300.0 * next();
            let w = 12.0 * next();
            let theta = c(4.0 * PI * next(), -0.2 * next());
            if theta.cos().norm() < 0.1 || (w - theta).norm() < 0.1 {
                continue;
            }
            let p = params(kappa, w);
            let g = kappa / (w - theta) + Complex64::i();
            let tan_residual = (theta.tan() * g - 1.0).norm();
            let f = characteristic(theta, &p).norm();
            assert_eq!(f <= 1e-9, tan_residual <= 1e-6 * g.norm());
            checked += 1;
        }
        // Near actual roots both forms must vanish together.
        let p = params(200.0, 5.0);
        for m in find_modes(&p, 1, 4, NewtonOptions::default()).unwrap() {
            let theta = m.value();
            let g = 200.0 / (5.0 - theta) + Complex64::i();
            assert!(characteristic(theta, &p).norm() <= 1e-9);
            assert!((theta.tan() * g - 1.0).norm() <= 1e-6 * g.norm());
        }
    }

    #[test]
    fn lifetime_examples() {
        let p = params(200.0, 5.0);
        let mut mode = refine_root(seed_mode(1, &p).unwrap(), &p, NewtonOptions::default()).unwrap();
        mode.theta = ComplexFrequency::new(c(3.15084, -8.633e-5)).unwrap();
        let Lifetime::Finite(tau) = lifetime(&mode).unwrap() else { panic!() };
        assert!((tau - 1.1583e4).abs() < 1.0);
        // Seed-level value (kappa/(W - pi))^2.
        let seed_tau = (200.0 / (5.0 - PI)).powi(2);
        assert!((tau - seed_tau).abs() / seed_tau < 1e-3);

        // Seed-level lifetime scales as kappa^2 (J^4).
        let s1 = seed_mode(1, &params(100.0, 5.0)).unwrap();
        let s2 = seed_mode(1, &params(200.0, 5.0)).unwrap();
        assert!((s1.im / s2.im - 4.0).abs() < 1e-12);
    }

    #[test]
    fn slowest_mode_prefers_nearest_multiple() {
        let m = slowest_mode(&params(200.0, 5.0), NewtonOptions::default()).unwrap();
        assert_eq!(m.index, 2);
        let m = slowest_mode(&params(200.0, 4.0), NewtonOptions::default()).unwrap();
        assert_eq!(m.index, 1);
    }

    #[test]
    fn sweep_examples() {
        let p = params(200.0, 1.0);
        let rows = sweep_decay(&p, &[PI, 5.0], NewtonOptions::default()).unwrap();
        assert_eq!(rows[0].decay, Some(0.0));
        // W = 5 is closer to 2 pi than to pi: the j = 2 mode (4.055e-5) is the slow one.
        let d = rows[1].decay.unwrap();
        assert_eq!(rows[1].index, Some(2));
        assert!((d - 4.054952461765332e-5).abs() < 1e-12);

        assert!(sweep_decay(&p, &[-1.0], NewtonOptions::default()).is_err());
        assert!(sweep_decay(&params(0.5, 1.0), &[1.0], NewtonOptions::default()).is_err());
    }

    #[test]
    fn sweep_minima_sit_at_multiples_of_pi() {
        let p = params(200.0, 1.0);
        let n = 600;
        let grid: Vec<f64> = (0..n).map(|i| 0.5 + 11.5 * i as f64 / (n - 1) as f64).collect();
        let step = grid[1] - grid[0];
        let rows = sweep_decay(&p, &grid, NewtonOptions::default()).unwrap();
        let d: Vec<f64> = rows.iter().map(|r| r.decay.unwrap()).collect();
        let minima: Vec<f64> = (1..n - 1)
            .filter(|&i| d[i] < d[i - 1] && d[i] <= d[i + 1])
            .map(|i| grid[i])
            .collect();
        assert_eq!(minima.len(), 3, "{minima:?}");
        for (k, w) in minima.iter().enumerate() {
            assert!((w - (k + 1) as f64 * PI).abs() <= step);
        }
        // Monotone growth just above pi.
        let above: Vec<f64> = rows
            .iter()
            .filter(|r| r.spacing > PI && r.spacing < PI + 0.5)
            .map(|r| r.decay.unwrap())
            .collect();
        assert!(above.windows(2).all(|w| w[1] > w[0]));
    }
}
