//! Desk-scale neural-network quantum state tomography, plus a faithful
//! simulation of the optical hardware that can run it.
//!
//! The crate has three layers that build on each other:
//!
//! - **Quantum/optics primitives**: pure states, Pauli algebra and
//!   measurement ([`quantum`], [`pauli`]), Jones-calculus polarization
//!   ([`polarization`]), and Fourier holography for the light-shaping
//!   elements ([`holography`]).
//! - **Learning machinery**: a dense feed-forward network with Adam, MSE,
//!   Leaky-ReLU and EIT-transmission activations, an optional
//!   nonnegative-weight constraint, and finite-difference gradient
//!   validation ([`nn`]).
//! - **Experiments**: measurement-vector-to-state regression with
//!   fidelity sweeps over operator sets ([`qst`]) and the constrained
//!   3-20-1 all-optical model for single-qubit phase tomography
//!   ([`aonn`]).
//!
//! Every sampled quantity is seeded and reproducible; results and datasets
//! serialize to deterministic CSV/JSON ([`io`]).
//!
//! Start with the runnable examples:
//!
//! ```text
//! cargo run --release --example pauli_playground
//! cargo run --release --example qst_single_qubit
//! cargo run --release --example aonn_phase_tomography
//! cargo run --release --example hologram_spots
//! ```

pub mod aonn;
pub mod error;
pub mod holography;
pub mod io;
pub mod nn;
pub mod pauli;
pub mod polarization;
pub mod qst;
pub mod quantum;

pub use error::{Error, Result};
