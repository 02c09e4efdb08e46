//! Far-field scattering amplitudes for the 2-D Helmholtz equation by
//! compactifying to null infinity and solving with Chebyshev–Fourier
//! collocation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod geometry;
pub mod media;
pub mod nic;
pub mod ode;
pub mod pipeline;
pub mod reference;
pub mod specfun;
pub mod spectral;

pub use error::{Error, Result};
