//! Teleportation channels composed under a quantum switch.
//!
//! Standard teleportation through an imperfect two-qubit resource acts on the
//! teleported qubit as a generalized depolarizing (Pauli) channel. This crate
//! simulates two or more such channels placed in a superposition of causal
//! orders by a quantum switch, post-selects on a measurement of the control,
//! and evaluates the resulting teleportation fidelity, the noise ranges where it
//! beats the classical 2/3 limit, and an integrated figure of merit used to
//! compare measurement outcomes.
//!
//! Modules, bottom up:
//! - [`linalg`]: dense complex matrices, partial traces, Hermitian eigensolver.
//! - [`pauli`]: Pauli channels, Bell-basis weights, fidelity functionals.
//! - [`switch`]: two- and N-path switches, post-selection, closed forms.
//! - [`analysis`]: closed-form fidelities, advantage regions, figures of merit.
//! - [`verify`]: named self-checks used by the command-line `verify` command.

pub mod analysis;
pub mod error;
pub mod linalg;
pub mod pauli;
pub mod quadrature;
pub mod sampling;
pub mod switch;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, PureStateVector, C64};
pub use pauli::{DepolarizingChannel, PauliOperator, PauliWeights, ResourceState};
pub use switch::{ControlState, JointState, Permutation, PostSelectionResult, Sign};
