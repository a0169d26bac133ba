//! Exact Ext tables between torus-equivariant stratum sheaves on toric stacks
//! and split toric stack bundles, with checkers for exceptionality,
//! semi-orthogonality, spanning-class detection and the K-theoretic shadow of
//! crepant wall-crossing equivalences.
//!
//! Everything is exact: dimensions come from ranks of integer matrices and
//! lattice-point counts, never from floating point.

pub mod bundle;
pub mod cache;
pub mod catalog;
pub mod cech;
mod cochain;
pub mod error;
pub mod exact;
pub mod ext;
pub mod fan;
pub mod grading;
pub mod ktheory;
pub mod objects;
pub mod polyhedron;
pub mod report;
pub mod schema;
pub mod selector;
pub mod sod;
pub mod space;

pub use error::{Error, Result};
