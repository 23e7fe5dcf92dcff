//! Exact p-adic computations with Schottky groups over Q_p: good
//! fundamental domains, period matrices, canonical embeddings, tropical
//! skeleta and Whittaker groups.

pub mod berkovich;
pub mod curve;
pub mod domain;
mod fast;
pub mod padic;
pub mod proj;
pub mod skeleton;
pub mod whittaker;


pub use padic::{Padic, PadicError, PrecisionPolicy};

pub use proj::{Mat2, ProjPoint, Word};
pub use berkovich::{Ball, BallKind, BerkPoint, MetricTree};
