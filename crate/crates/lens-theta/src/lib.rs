//! Two-loop Chern-Simons weights on lens spaces.
//!
//! The crate is organised bottom-up:
//!
//! * [`numtheory`] sawtooth, Dedekind sums, `f(θ)` and the harmonic extension.
//! * [`algebra`] quadratic Lie algebras, isotropic splittings, Drinfeld doubles.
//! * [`forms`] a normal-forming calculus of distributional forms on `S¹×D`.
//! * [`graphs`] the diagram catalogue, Feynman rules and evaluation.
//! * [`gluing`] lens-space gluing, pairing, residual reduction, weights.
//! * [`oracle`] slow independent cross-checks.
//! * [`cli`] the command-line front end.

#![allow(clippy::needless_range_loop)]

pub mod algebra;
pub mod cli;
pub mod forms;
pub mod gluing;
pub mod graphs;
pub mod numtheory;
pub mod oracle;

pub use num_rational::BigRational as Q;
