//! Finite approximations of the topological Ramsey spaces `R_alpha`,
//! `alpha < w^2`: block construction, canonical equivalence relations,
//! exhaustive canonization searches and the embedding order on the
//! structures that index them.

pub mod canonical;
pub mod error;
pub mod indexed;
pub mod order;
pub mod ordinals;
pub mod space;
pub mod structures;
pub mod verify;

pub use error::{Error, Result};
pub use ordinals::Ordinal;
