//! Numerical evaluation of the Green's function of the 3D space-time-fractional
//! Schrödinger equation, built on a general Fox H-function evaluator.
//!
//! The library provides three mutually cross-checking forms of the Green's
//! function G(r,t;r',t') for Lévy index α ∈ (1,2] and Caputo order β ∈ (0,1]:
//!
//! * an H-function form `green::green_hform` (two H¹·¹₃,₃ functions evaluated by
//!   power series or asymptotic expansion, whichever is accurate),
//! * a direct computable series `green::green_series`,
//! * a large-distance asymptotic `green::green_asymptotic`.
//!
//! Everything is validated against brute-force quadrature in [`oracle`]
//! (rotated-ray integration of the defining oscillatory integral, Mellin
//! transforms, Bromwich inversion). The [`scattering`] module applies the
//! Green's function to Born-approximation scattering: fractional plane waves,
//! first-order scattered waves and the iterated Born series on sampled grids.

pub mod green;
pub mod hfun;
pub mod oracle;
pub mod quadrature;
pub mod scattering;
pub mod special;

pub use num_complex::Complex64;
