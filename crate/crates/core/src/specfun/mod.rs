//! Special functions behind the closed-form references: integer and complex
//! order Hankel functions, modified Bessel I, complex log-gamma and Coulomb
//! wave functions.

mod bessel;
mod complex_order;
mod coulomb;
pub(crate) mod dd;
mod gamma;

pub use bessel::{bessel_i, bessel_i_scaled, hankel, hankel1_scaled, hankel1_scaled_sequence, hankel_derivative, MAX_INTEGER_ORDER};
pub use complex_order::{bessel_j_complex_order, hankel_complex_order, MAX_COMPLEX_ORDER};
pub use coulomb::{coulomb_fg, coulomb_h, CoulombParams, CoulombSign, CoulombWave};
pub use gamma::{coulomb_phase, log_gamma_complex};

/// Kind of Hankel function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    First,
    Second,
}
