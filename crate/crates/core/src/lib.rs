//! Reverse engineering of transpiled variational-circuit classifiers.
//!
//! The crate covers the whole pipeline: a small circuit IR and statevector
//! simulator, a transpiler to the `{rz, sx, x, cnot}` basis, look-up-table
//! structure recovery on transpiled circuits, and parameter recovery by a
//! trained autoencoder or by brute-force grid search.

pub mod circuit;
pub mod error;
pub mod linalg;
pub mod neural;
pub mod qnn;
pub mod recovery;
pub mod simulator;
pub mod structlut;
pub mod transpiler;

pub use circuit::{normalize_angle, Circuit, Gate, GateKind, Param, ParamVector};
pub use error::{Error, Result};
