//! Relaxation-derived Lax-Friedrichs solver for one-dimensional blood flow
//! on vascular networks.

// `!(x > 0.0)` rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary;
pub mod config;
pub mod coupling;
pub mod error;
pub mod model;
pub mod network;
pub mod output;
pub mod physics;
pub mod roots;
pub mod scheme;
pub mod signal;
pub mod study;
pub mod viscoelastic;

pub use error::{Error, Result};
pub use model::{Cons, EdgeState, Grid, LambdaPolicy, ModelForm, RunSettings, SchemeOrder, VesselInputs, VesselParams};
