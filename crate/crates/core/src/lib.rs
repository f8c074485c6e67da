//! Exact computations with high-rank polynomials over finite fields: field
//! arithmetic, ranks, enumerated varieties, weakly polynomial functions and
//! fibers of polynomial pullback maps.

pub mod config;
pub mod cyclo;
pub mod error;
pub mod fibers;
pub mod field;
pub mod linalg;
pub mod polyring;
pub mod rank;
pub mod space;
pub mod suite;
pub mod variety;
pub mod weakpoly;

pub use error::{Error, Result};
pub use field::{Elem, Field, FieldSpec, SubgroupDelta};
