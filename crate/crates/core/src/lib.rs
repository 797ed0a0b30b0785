//! Quasi-normal modes of a two-level atom in front of a mirror.
//!
//! A single photon in a one-dimensional waveguide terminated by a perfect
//! mirror at `x = 0` meets a two-level atom at distance `a`. The atom acts as
//! an energy-dependent, semi-transparent mirror, so the segment between the
//! two behaves as a leaky cavity whose modes are the complex roots of
//!
//! ```text
//! f(theta) = kappa sin(theta) exp(i theta) - (W - theta) = 0
//! ```
//!
//! in natural units (`v_g = a = hbar = 1`).
//!
//! * [`model`]: parameters and unit conversion.
//! * [`qnm`]: seeds, Newton refinement, contour certification and sweeps.
//! * [`scattering`]: phase shift, enhancement, Wigner delay, mode profiles.
//! * [`dynamics`]: time-domain delay-equation oracle and tail fits.
//! * [`emission`]: decay of a lossy atom inside the emergent cavity.
//! * [`platform`]: circuit-QED and Raman parameter maps.
//! * [`verify`]: the cross-module self-check suite.
//!
//! ```
//! use qnmlab::{qnm, DimensionlessParams};
//!
//! let p = DimensionlessParams::new(200.0, 5.0).unwrap();
//! let mode = qnm::refine_root(qnm::seed_mode(1, &p).unwrap(), &p, Default::default()).unwrap();
//! assert!((mode.value().re - 3.15084).abs() < 1e-4);
//! assert!((mode.decay_rate() - 8.5e-5).abs() < 1e-6);
//! ```

pub mod dynamics;
pub mod emission;
mod error;
pub mod model;
pub mod platform;
pub mod qnm;
pub mod scattering;
pub mod verify;

pub use error::{Error, Result};
pub use model::{ComplexFrequency, DimensionlessParams, PhysicalParams};
