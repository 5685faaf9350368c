//! Numerical building blocks: geometry constants, quadrature, interpolation,
//! the radial Fourier kernel and an ODE integrator.

pub mod geometry;
pub mod interp;
pub mod kernel;
pub mod ode;
pub mod quadrature;
