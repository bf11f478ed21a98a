//! Fast Fourier–Galerkin solver for the space-homogeneous Boltzmann–Nordheim
//! equation with classical, Fermi–Dirac and Bose–Einstein statistics.

pub mod collision;
pub mod diagnostics;
pub mod dynamics;
pub mod equilibrium;
pub mod frame;
pub mod error;
pub mod grid;
pub mod quadrature;
pub mod kernel;
pub mod oracle;
pub mod special;
pub mod stats;

pub use rustfft::num_complex::Complex64;
