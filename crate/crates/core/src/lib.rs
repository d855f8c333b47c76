pub mod area;
pub mod engine;
pub mod error;
mod flux;
pub mod oracle;
pub mod lattice;
pub mod lemmas;
pub mod ops;
pub mod string;
pub mod texp;

pub use area::{AreaCache, AreaValue};
pub use error::{Error, Result};
pub use ops::{Coefficient, EdgePos, OpKind, OperationResult, Triple};
pub use lattice::{Edge, Lattice, Plaq, PlaquetteSet};
pub use string::{LatticeString, Loop, OriCount, PosCount, Quarters};
