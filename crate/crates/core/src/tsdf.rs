//! Sparse truncated signed distance field built from landmark rays.
//!
//! Each observation is ray traced from the observer through the landmark and
//! on for one truncation distance behind it. Every traversed voxel receives
//! the projective distance `|landmark - observer| - t`, where `t` is the
//! position of the voxel center projected onto the ray, clamped to
//! `[-truncation, +truncation]`: positive in front of the surface, zero at the
//! landmark, negative behind it.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::occupancy::{OccupancyGrid, VoxelState};
use crate::slam::{LandmarkObservation, SlamMap};
use crate::voxel::{walk_ray, VoxelIndex, VoxelMap};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TsdfConfig {
    pub truncation_distance: f64,
    pub max_ray_length: f64,
    /// Voxels with distance below this fraction of the truncation distance
    /// are occupied.
    pub occupancy_threshold_fraction: f64,
    pub min_component_size: usize,
}

impl Default for TsdfConfig {
    fn default() -> Self {
        Self { truncation_distance: 0.5, max_ray_length: 5.0, occupancy_threshold_fraction: 0.9, min_component_size: 5 }
    }
}

impl TsdfConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.truncation_distance > 0.0) {
            return Err(Error::Config("truncation_distance must be > 0".into()));
        }
        if !(self.occupancy_threshold_fraction > 0.0 && self.occupancy_threshold_fraction < 1.0) {
            return Err(Error::Config("occupancy_threshold_fraction must be in (0, 1)".into()));
        }
        if !(self.max_ray_length > self.truncation_distance) {
            return Err(Error::Config("max_ray_length must exceed truncation_distance".into()));
        }
        Ok(())
    }

    pub fn occupancy_threshold(&self) -> f64 {
        self.occupancy_threshold_fraction * self.truncation_distance
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TsdfVoxel {
    pub distance: f64,
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct TsdfGrid {
    voxel_size: f64,
    voxels: VoxelMap<TsdfVoxel>,
    skipped_rays: usize,
}

impl TsdfGrid {
    pub fn new(voxel_size: f64) -> Result<Self> {
        if !(voxel_size > 0.0 && voxel_size.is_finite()) {
            return Err(Error::Config(format!("voxel_size must be > 0, got {voxel_size}")));
        }
        Ok(Self { voxel_size, voxels: VoxelMap::default(), skipped_rays: 0 })
    }

    pub fn voxel_size(&self) -> f64 {
        self.voxel_size
    }

    pub fn get(&self, v: &VoxelIndex) -> Option<&TsdfVoxel> {
        self.voxels.get(v)
    }

    pub fn len(&self) -> usize {
        self.voxels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.voxels.is_empty()
    }

    /// Observations dropped for exceeding the maximum ray length.
    pub fn skipped_rays(&self) -> usize {
        self.skipped_rays
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VoxelIndex, &TsdfVoxel)> {
        self.voxels.iter()
    }

    /// Fuses one observation. Returns `false` when the ray is longer than
    /// the configured maximum and was skipped.
    pub fn integrate(&mut self, obs: &LandmarkObservation, cfg: &TsdfConfig) -> bool {
        let ray = obs.landmark - obs.observer;
        let length = ray.norm();
        if length > cfg.max_ray_length || length == 0.0 {
            self.skipped_rays += 1;
            return false;
        }
        let dir = ray / length;
        let tau = cfg.truncation_distance;
        let end = obs.landmark + dir * tau;
        let size = self.voxel_size;
        let voxels = &mut self.voxels;
        walk_ray(&obs.observer, &end, size, |v| {
            let along = (v.center(size) - obs.observer).dot(&dir);
            let sdf = (length - along).clamp(-tau, tau);
            let entry = voxels.entry(v).or_insert(TsdfVoxel { distance: 0.0, weight: 0.0 });
            entry.distance = (entry.distance * entry.weight + sdf) / (entry.weight + 1.0);
            entry.weight += 1.0;
            true
        })
        .expect("ray has positive length");
        true
    }

    /// Thresholds the signed distance: below `fraction * truncation` is
    /// occupied, anything else stored is free.
    pub fn binarize(&self, cfg: &TsdfConfig) -> OccupancyGrid {
        let threshold = cfg.occupancy_threshold();
        let mut occ = OccupancyGrid::new(self.voxel_size);
        for (v, t) in &self.voxels {
            let state = if t.distance < threshold { VoxelState::Occupied } else { VoxelState::Free };
            occ.set(*v, state);
        }
        occ
    }

    /// Debug dump, one `i j k distance weight` line per voxel in index order.
    pub fn to_dump(&self) -> String {
        let mut keys: Vec<_> = self.voxels.keys().copied().collect();
        keys.sort_unstable();
        let mut out = format!("# TSDF v1 voxel_size={:.6}\n", self.voxel_size);
        for v in keys {
            let t = self.voxels[&v];
            let _ = writeln!(out, "{} {} {} {:.6} {}", v.i, v.j, v.k, t.distance, t.weight);
        }
        out
    }
}

/// Integrates every observation of `map` into a fresh grid.
pub fn integrate_slam_map(map: &SlamMap, cfg: &TsdfConfig, voxel_size: f64) -> Result<TsdfGrid> {
    cfg.validate()?;
    let mut grid = TsdfGrid::new(voxel_size)?;
    for obs in &map.observations {
        grid.integrate(obs, cfg);
    }
    Ok(grid)
}
