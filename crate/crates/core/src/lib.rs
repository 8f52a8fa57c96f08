//! Numerical simulator for orbital-angular-momentum light in laser-written
//! "doughnut" waveguides: beam preparation with SLM holograms, scalar eigenmodes,
//! split-step propagation along the chip, projection measurements and
//! photon-number statistics of the single-photon source.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod beam;
pub mod config;
pub mod error;
pub mod fft;
pub mod field;
pub mod grid;
pub mod holography;
pub mod io;
pub mod propagation;
pub mod quantum;
pub mod scenario;
pub mod waveguide;

pub use beam::{bloch_state, focused_waist, lg_mode, ring_radius, BeamKind, BeamSpec, ObjectiveSpec};
pub use error::{Error, Result};
pub use field::{superpose, ComplexField};
pub use grid::Grid;
pub use num_complex::Complex64;
