pub mod circuits;
pub mod commit;
pub mod curve;
pub mod error;
pub mod field;
pub mod ledger;
pub mod merkle;
pub mod ovn;
pub mod proofsys;
pub mod rng;

pub use curve::{CompactPoint, Point};
pub use error::{Error, Result};
pub use field::{FieldElement, Scalar};
