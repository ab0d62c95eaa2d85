//! Isomorphism testing for graphs of bounded Euler genus.

pub mod budget;
pub mod canon;
pub mod decomposition;
pub mod embed;
pub mod error;
pub mod facewidth;
pub mod fixtures;
pub mod graph;
pub mod iso;
pub mod map;
pub mod oracle;

pub use budget::Budget;
pub use error::{Error, Result};
pub use graph::Graph;
pub use map::CombinatorialMap;
