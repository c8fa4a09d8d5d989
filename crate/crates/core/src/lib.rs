//! Vertex-failure reliable spanners on the line and in Euclidean space.

pub mod error;
pub mod euclidean;
pub mod lso;
pub mod expander;
pub mod graph;
pub mod harness;
pub mod io;
pub mod points;
pub mod quadtree;
pub mod ratio;
pub mod rng;
pub mod scalar;
pub mod shadow;
pub mod spanner1d;
pub mod wspd;

pub use error::{Error, Result};
pub use graph::{Direction, VertexSet, WeightedGraph};
pub use harness::{certify, Construction, ReliabilityReport};
pub use points::PointSet;
pub use ratio::Threshold;
pub use scalar::Scalar;

pub type Graph = WeightedGraph<f64>;
pub type Graph32 = WeightedGraph<f32>;
pub type Points = PointSet<f64>;
pub type Points32 = PointSet<f32>;
