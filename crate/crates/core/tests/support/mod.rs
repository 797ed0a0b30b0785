//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Lorentzian half-width standing in for the point scatterer.
pub const LORENTZ_WIDTH: f64 = 1e-9;
/// The Lorentzian is cut at this many widths and renormalized.
pub const LORENTZ_CUTOFF: f64 = 1000.0;
const FREE_STEP: f64 = 1e-3;
const CORE_STEPS: usize = 20_000;

type State = [f64; 2];

fn rk4(state: State, t: f64, h: f64, rhs: &impl Fn(f64, State) -> State) -> State {
    let add = |s: State, k: State, c: f64| [s[0] + c * k[0], s[1] + c * k[1]];
    let k1 = rhs(t, state);
    let k2 = rhs(t + 0.5 * h, add(state, k1, 0.5 * h));
    let k3 = rhs(t + 0.5 * h, add(state, k2, 0.5 * h));
    let k4 = rhs(t + h, add(state, k3, h));
    [
        state[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        state[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

fn integrate(mut state: State, from: f64, to: f64, steps: usize, rhs: &impl Fn(f64, State) -> State) -> State {
    let h = (to - from) / steps as f64;
    for k in 0..steps {
        state = rk4(state, from + k as f64 * h, h, rhs);
    }
    state
}

/// Phase shift from direct integration of
/// `phi'' + theta^2 phi = -theta g L_w(x - 1) phi`, `phi(0) = 0`,
/// with `g = kappa / (W - theta)` and `L_w` a unit-mass Lorentzian.
///
/// Inside the core `|x - 1| < cutoff * width` the substitution
/// `x = 1 + width tan(u)` makes the Lorentzian uniform in `u`.
pub fn lorentzian_phase_shift(theta: f64, kappa: f64, spacing: f64, width: f64) -> f64 {
    let g = kappa / (spacing - theta);
    let half = LORENTZ_CUTOFF * width;
    let free = |_: f64, s: State| [s[1], -theta * theta * s[0]];

    let left = 1.0 - half;
    let n_free = (left / FREE_STEP).ceil() as usize;
    let state = integrate([0.0, theta], 0.0, left, n_free, &free);

    let edge = LORENTZ_CUTOFF.atan();
    // d/du of (phi, phi') with dx/du = width sec^2(u); the delta term
    // contributes -theta g phi / (2 edge) after renormalization.
    let core = |u: f64, s: State| {
        let jac = width / (u.cos() * u.cos());
        [s[1] * jac, -theta * theta * s[0] * jac - theta * g * s[0] / (2.0 * edge)]
    };
    let state = integrate(state, -edge, edge, CORE_STEPS, &core);

    let right = 1.0 + half;
    let outer = (theta * state[0]).atan2(state[1]);
    reduce_mod_pi(outer - theta * right)
}

/// Representative of `x` modulo pi in `(-pi/2, pi/2]`.
pub fn reduce_mod_pi(x: f64) -> f64 {
    let r = x - PI * (x / PI).round();
    if r <= -PI / 2.0 {
        r + PI
    } else {
        r
    }
}
