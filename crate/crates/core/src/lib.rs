//! Quantum circuits and quantum Turing machines side by side.
//!
//! The crate simulates layered circuits over `{H, I, X, U_f}` as sparse state
//! vectors, simulates quantum Turing machines as superpositions of
//! configurations, compiles the former into the latter, and checks that both
//! models agree amplitude for amplitude on the Deutsch and Deutsch–Jozsa
//! families.

pub mod circuit;
pub mod equivalence;
pub mod error;
pub mod linalg;
pub mod oracle;
pub mod qtm;
pub mod translator;

pub use error::{Error, Result};
