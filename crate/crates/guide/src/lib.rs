//! The `qnmlab` book, compiled so that every Rust snippet runs as a doc-test.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/model.md")]
pub mod model {}
#[doc = include_str!("../../../book/src/spectrum.md")]
pub mod spectrum {}
#[doc = include_str!("../../../book/src/bound_states.md")]
pub mod bound_states {}
#[doc = include_str!("../../../book/src/scattering.md")]
pub mod scattering {}
#[doc = include_str!("../../../book/src/dynamics.md")]
pub mod dynamics {}
#[doc = include_str!("../../../book/src/emission.md")]
pub mod emission {}
#[doc = include_str!("../../../book/src/platforms.md")]
pub mod platforms {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
