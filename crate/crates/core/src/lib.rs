//! Finite étale groupoids, their L^p convolution algebras, regular
//! representation norms, polynomial growth and rapid decay checks.

pub mod bratteli;
pub mod coarse;
pub mod convolution;
pub mod error;
pub mod graph;
pub mod groupoid;
pub mod growth;
pub mod numeric;
pub mod par;
pub mod rep;

pub use error::{Error, Result};
pub use groupoid::{FiniteGroupoid, LengthFunction, ValidationReport};
