//! Finite truncations of `Z^n` and `T^n`, the discrete Fourier transform, exact
//! grid quadrature and the forward/backward difference calculus.

mod dft;
mod difference;
mod domain;
mod sequence;

pub use dft::{forward_dft, inverse_dft, torus_quadrature};
pub(crate) use dft::{coefficients_in_box, synthesize_from_box};
pub use difference::{
    backward_difference, forward_difference, forward_difference_closed_form, Differenced, Margin,
};
pub use domain::{
    bracket, dyadic_shell, norm_sq, one_plus_norm, LatticeWindow, MultiIndex, TorusGrid,
};
pub use sequence::{LatticeSequence, TorusFunction};
