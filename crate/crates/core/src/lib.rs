//! Entanglement decay of generalized GHZ states and Haar-random states under
//! independent local decoherence.
//!
//! The crate is organised bottom-up:
//!
//! * [`qstate`] builds pure states, density matrices and the generalized GHZ
//!   and GHZ-diagonal families.
//! * [`channels`] holds single-qubit Kraus channels (depolarizing, dephasing,
//!   thermal) and applies their N-fold tensor product qubit by qubit.
//! * [`entanglement`] computes partial transposes and negativity across
//!   arbitrary bipartitions, backed by the Hermitian eigensolver in [`linalg`].
//! * [`bounds`] evaluates the closed-form entanglement decay multipliers.
//! * [`sampling`] draws seeded Haar-random states and aggregates Monte-Carlo
//!   statistics of normalized negativity.
//! * [`harness`] wires everything into experiments, CSV output and the CLI.

pub mod bounds;
pub mod channels;
pub mod entanglement;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod qstate;
pub mod sampling;

pub use error::{Error, Result};
