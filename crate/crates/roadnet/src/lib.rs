//! Tile-encoded road network generation and evaluation.
//!
//! Road networks are grids of 4-bit connectivity tiles. Five generators
//! (wave function collapse, particle swarm, grey wolf, an evolutionary
//! algorithm, and its MAP-Elites extension) compete on one graph-based
//! fitness; `render` composes grids into map images with aligned
//! segmentation masks, and `bench` reproduces the cross-method
//! comparison tables.

pub mod bench;
pub mod evo;
pub mod fitness;
pub mod grid;
pub mod metrics;
pub mod render;
pub mod repair;
pub mod stats;
pub mod swarm;
pub mod tiles;
pub mod wfc;

mod num;

pub use grid::{Grid, GridError, NetworkGraph};
pub use metrics::{BehaviorDescriptor, MetricReport};
pub use num::Scalar;
pub use tiles::{Direction, TileClass, TileCode};

/// Default scalar for the CLI and benchmark harness.
pub type Real = f64;

/// Fitness weights at the default scalar.
pub type Weights = fitness::FitnessWeights<Real>;

/// Fitness value at the default scalar.
pub type Fitness = fitness::FitnessValue<Real>;
