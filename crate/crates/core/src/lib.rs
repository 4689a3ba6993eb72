//! File migration on finite metric spaces: online policies, offline optima,
//! phase-wise proof checking, factor-revealing LPs and an adversarial
//! lower-bound game.

pub mod algorithms;
pub mod analysis;
pub mod cli;
pub mod error;
pub mod instance;
pub mod lowerbound;
pub mod lp;
pub mod metric;
pub mod opt;

pub use error::{Error, Result};
pub use instance::Instance;
pub use metric::{MetricSpace, PathElement, PointId, RequestMultiset};
