//! Twisted logarithmic modules over lattice vertex algebras.
//!
//! Given an integral lattice and an isometry φ, the crate computes the
//! Jordan–Chevalley data of φ, the sign cocycle, the special-function
//! structure constants B and C, the group of U- and τ-elements, and truncated
//! Fock-space realizations of the twisted vertex operators, together with
//! numerical checks of every identity relating them.

pub mod cx;
pub mod decomp;
pub mod error;
pub mod fock;
pub mod group;
pub mod input;
pub mod intlin;
pub mod lattice;
pub mod presets;
pub mod report;
pub mod specfun;
pub mod structure;
pub mod vertexop;

pub use error::{Error, Result};
