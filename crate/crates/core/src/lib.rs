//! Topological maps of convex free space built from sparse SLAM landmarks.
//!
//! The pipeline turns landmark observations into a truncated signed distance
//! field, thresholds it into a ternary occupancy grid, grows compact convex
//! clusters of free voxels from the explorer trajectory, merges clusters whose
//! combined hull is nearly obstacle free, and plans on the graph of portals
//! between clusters.

pub mod bench;
pub mod cluster;
pub mod config;
pub mod error;
pub mod grid;
pub mod hull;
pub mod merge;
pub mod occupancy;
pub mod pipeline;
pub mod slam;
pub mod synth;
pub mod topo;
pub mod tsdf;
pub mod voxel;

pub use error::{Error, Result};

pub type Point3 = nalgebra::Point3<f64>;
pub type Vector3 = nalgebra::Vector3<f64>;
