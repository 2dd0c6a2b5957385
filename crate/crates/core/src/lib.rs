//! Mixed random–quasiperiodic cocycles: Lyapunov exponents, Markov-driven
//! large deviations and the numerical experiments around them.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bundle;
pub mod cocycle;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod markov;
pub mod measure;
pub mod mixed;
pub mod record;
pub mod rng;
pub mod schrodinger;
pub mod stats;
pub mod torus;
pub mod transport;

pub use error::{Error, Result};
