//! Desk-scale simulation of quantum algorithms for fluid transport problems.
//!
//! The crate pairs exact dense-statevector machinery with the classical
//! numerics needed to check it:
//!
//! - [`statevector`]: registers, unitaries, post-selection, partial traces,
//!   Hamiltonian evolution.
//! - [`encodings`]: amplitude, basis (binary / fixed-point / unary / one-hot),
//!   basis-to-amplitude conversion, and block encodings of non-unitary
//!   matrices.
//! - [`qae`]: Grover operators and quantum amplitude estimation, including
//!   mean estimation over sample sets with median amplification.
//! - [`integrator`]: a time-marching ODE/PDE solver that replaces each
//!   quadrature with an amplitude-estimated mean.
//! - [`copies`]: nonlinear dynamics through interacting state copies (pointer
//!   measurements, mean-field evolution, and history linear systems).
//! - [`anneal`]: least-squares functionals over basis expansions compiled to
//!   Ising problems, plus Runge-Kutta residual objectives with windowed
//!   binary weights.
//! - [`qlbm`]: a one-dimensional two-velocity lattice Boltzmann step built
//!   from collision, streaming, and macroscopic readout primitives.
//! - [`oracles`]: independent classical references (Runge-Kutta, dense
//!   solves, closed forms) used to validate everything above.
//!
//! All randomness is seeded explicitly and every operation either returns a
//! value or a typed [`error::Error`]; nothing panics on bad input.

pub mod anneal;
pub mod copies;
pub mod encodings;
pub mod error;
pub mod integrator;
pub mod oracles;
pub mod qae;
pub mod qlbm;
pub mod statevector;

pub use error::{Error, Result};
