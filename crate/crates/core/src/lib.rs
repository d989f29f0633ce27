//! Linear quantum feedback networks.
//!
//! A component is the triple `(S, C, Ω)`: a unitary scattering matrix, a
//! coupling matrix from modes to output ports and a hermitian mode
//! Hamiltonian. The crate composes components (concatenation, series
//! product, feedback reduction, beam-splitter loops, star products),
//! evaluates their transfer functions and converts between Stratonovich and
//! Itô parameterisations. Networks can be described in the QNET text format.

// `!(x > tol)` is deliberate throughout: NaN must fail the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod matkit;
pub mod netfile;
pub mod network;
pub mod slh;
pub mod stratcal;
pub mod transfer;

pub use error::{Error, Result};
pub use matkit::ComplexMatrix;
pub use netfile::{NetDocument, ParseError};
pub use network::{feedback_reduce, series_product, BeamSplitter, PartitionedComponent};
pub use slh::{concatenate, make_cavity, validate, CavityParams, LinearComponent};
pub use transfer::eval_transfer;
