//! Secure transmission with decomposed and distributed directional modulation.
//!
//! Two uniform linear arrays sit on the x axis. One radiates the in-phase component of each PSK
//! symbol and the other radiates the quadrature component. Their minimum-power beams add up to a
//! clean constellation only in a small zone around the intended user. Elsewhere the two
//! components arrive with the wrong relative phase or timing. Each array also emits artificial noise (AN),
//! shaped by a small semidefinite program so that it vanishes at every legitimate user and
//! jams every other direction.
//!
//! The usual entry point is [`system::run_design`] on a [`scenario::Scenario`]. Its result feeds
//! the grid sweep, curve and constellation drivers in [`sweep`]. The lower layers can be used
//! on their own:
//!
//! * [`geometry`]: array layout, line-of-sight channels, beamwidth
//! * [`beamform`]: closed-form and penalty-iteration beamformers, multiuser zero forcing
//! * [`an`] and [`sdp`]: AN covariance design, audit and sampling on top of a dense SDP solver
//! * [`signal`]: synchronisation, branch responses at arbitrary points, demodulation
//! * [`metrics`]: SINR, SER, secrecy rate, carrier orthogonality and the effective zone
//!
//! The `examples/` directory has one runnable program per capability. The `d3m` binary wraps the
//! drivers for use from the shell.

// `!(x > 0.0)` style checks are deliberate: they reject NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// reference values in the unit tests are quoted to the digits they were computed with
#![cfg_attr(test, allow(clippy::excessive_precision))]

pub mod an;
pub mod beamform;
pub mod error;
pub mod geometry;
pub(crate) mod linalg;
pub mod metrics;
pub mod scenario;
pub mod sdp;
pub mod signal;
pub mod sweep;
pub mod system;

pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector, C64};
