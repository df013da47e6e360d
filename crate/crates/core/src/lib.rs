//! Interference-free 1→2 qubit cloning machines.
//!
//! Channels on the original+copy pair are represented by their 16×16
//! dynamical (Choi) matrices. The crate measures their interference and
//! optimizes cloning fidelities over interference-free channels with a small
//! semidefinite-programming solver.
//!
//! Module map:
//!
//! * [`numkernel`]: Hermitian eigensolver, PSD projection, nullspaces;
//! * [`channel`]: index packing, reshuffling, reference machines, validation;
//! * [`interference`]: the interference measure and zero-interference test;
//! * [`fidelity`]: average and pointwise fidelities, quadrature oracle;
//! * [`classical`]: stochastic-map cloners and their exhaustive bounds;
//! * [`sdpopt`]: the SDP solver and the cloning optimization problems;
//! * [`family`]: the continuous family of optimal interference-free cloners;
//! * [`bhclone`]: the Bužek–Hillery cloner as a reference;
//! * [`cli`]: the command-line front end.

pub mod bhclone;
pub mod channel;
pub mod classical;
pub mod cli;
pub mod family;
pub mod fidelity;
pub mod interference;
pub mod numkernel;
pub mod sdpopt;
pub mod util;
