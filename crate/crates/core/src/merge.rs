//! Merging adjacent clusters whose combined hull is nearly obstacle free.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cluster::{voxel_hull, OccupancyLookup, VoxelCluster};
use crate::error::{Error, Result};
use crate::hull::{ConvexHull, HULL_EPS};
use crate::occupancy::{DenseOccupancy, OccupancyGrid, VoxelState};
use crate::voxel::{VoxelIndex, VoxelMap};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergeConfig {
    pub obstacle_ratio_threshold: f64,
    pub rng_seed: u64,
}

impl Default for MergeConfig {
    fn default() -> Self {
        Self { obstacle_ratio_threshold: 0.05, rng_seed: 0 }
    }
}

impl MergeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.obstacle_ratio_threshold >= 0.0 && self.obstacle_ratio_threshold < 1.0) {
            return Err(Error::Config("obstacle_ratio_threshold must be in [0, 1)".into()));
        }
        Ok(())
    }

    /// Merge acceptance: below the threshold, or no obstacle at all.
    pub fn accepts(&self, ratio: f64) -> bool {
        ratio < self.obstacle_ratio_threshold || ratio == 0.0
    }
}

/// Fraction of voxel centers inside `hull` that are occupied or unknown.
pub fn obstacle_ratio<O: OccupancyLookup>(occ: &O, hull: &ConvexHull) -> Result<f64> {
    let (blocked, total) = count_hull_voxels(occ, hull);
    if total == 0 {
        return Err(Error::EmptyHull);
    }
    Ok(blocked as f64 / total as f64)
}

/// (occupied-or-unknown, all) voxel centers inside the hull.
pub fn count_hull_voxels<O: OccupancyLookup>(occ: &O, hull: &ConvexHull) -> (usize, usize) {
    let size = occ.voxel_size();
    let (lo, hi) = hull.aabb();
    let first = |x: f64| ((x - HULL_EPS) / size - 0.5).ceil() as i32;
    let last = |x: f64| ((x + HULL_EPS) / size - 0.5).floor() as i32;
    let (mut blocked, mut total) = (0usize, 0usize);
    for k in first(lo.z)..=last(hi.z) {
        for j in first(lo.y)..=last(hi.y) {
            for i in first(lo.x)..=last(hi.x) {
                let v = VoxelIndex::new(i, j, k);
                if hull.contains(&v.center(size), HULL_EPS) {
                    total += 1;
                    if occ.state(&v) != VoxelState::Free {
                        blocked += 1;
                    }
                }
            }
        }
    }
    (blocked, total)
}

/// Unordered index pairs of clusters with at least one pair of face-adjacent
/// voxels, sorted.
pub fn adjacent_pairs(clusters: &[VoxelCluster]) -> Vec<(usize, usize)> {
    let mut owner: VoxelMap<usize> = VoxelMap::default();
    for (ci, c) in clusters.iter().enumerate() {
        for v in &c.voxels {
            owner.insert(*v, ci);
        }
    }
    let mut pairs = BTreeSet::new();
    for (ci, c) in clusters.iter().enumerate() {
        for v in &c.voxels {
            for n in [v.offset(1, 0, 0), v.offset(0, 1, 0), v.offset(0, 0, 1)] {
                if let Some(&other) = owner.get(&n) {
                    if other != ci {
                        pairs.insert((ci.min(other), ci.max(other)));
                    }
                }
            }
        }
    }
    pairs.into_iter().collect()
}

#[derive(Debug, Clone)]
pub struct MergeOutcome {
    pub clusters: Vec<VoxelCluster>,
    /// Merges performed in each pass, ending with the pass that merged
    /// nothing.
    pub merges_per_pass: Vec<usize>,
}

impl MergeOutcome {
    pub fn passes(&self) -> usize {
        self.merges_per_pass.len()
    }
}

/// One randomized pass over the adjacent pairs. A cluster takes part in at
/// most one merge per pass. Surviving clusters are renumbered densely in
/// input order, a merged cluster taking the slot of its lower-index member.
pub fn merge_pass<O: OccupancyLookup, R: Rng>(
    occ: &O,
    clusters: &[VoxelCluster],
    cfg: &MergeConfig,
    rng: &mut R,
) -> Result<(Vec<VoxelCluster>, usize)> {
    let size = occ.voxel_size();
    let mut pairs = adjacent_pairs(clusters);
    pairs.shuffle(rng);
    let mut partner: Vec<Option<usize>> = vec![None; clusters.len()];
    let mut merged_hulls: Vec<Option<ConvexHull>> = vec![None; clusters.len()];
    let mut merges = 0;
    for (a, b) in pairs {
        if partner[a].is_some() || partner[b].is_some() {
            continue;
        }
        let union = clusters[a].voxels.iter().chain(clusters[b].voxels.iter()).copied();
        let hull = voxel_hull(union, size)?;
        let ratio = obstacle_ratio(occ, &hull)?;
        if cfg.accepts(ratio) {
            partner[a] = Some(b);
            partner[b] = Some(a);
            merged_hulls[a.min(b)] = Some(hull);
            merges += 1;
        }
    }
    let mut out = Vec::with_capacity(clusters.len() - merges);
    for (ci, c) in clusters.iter().enumerate() {
        match partner[ci] {
            None => {
                let mut c = c.clone();
                c.id = out.len();
                out.push(c);
            }
            Some(other) if other > ci => {
                let voxels: BTreeSet<VoxelIndex> = c.voxels.union(&clusters[other].voxels).copied().collect();
                let hull = merged_hulls[ci].take().expect("hull of accepted merge");
                let n = voxels.len() as f64;
                let centroid =
                    crate::Point3::from(voxels.iter().map(|v| v.center(size).coords).sum::<crate::Vector3>() / n);
                out.push(VoxelCluster { id: out.len(), voxels, centroid, hull });
            }
            Some(_) => {}
        }
    }
    Ok((out, merges))
}

/// Repeats [`merge_pass`] until a pass merges nothing.
pub fn merge_all(occ: &OccupancyGrid, clusters: Vec<VoxelCluster>, cfg: &MergeConfig) -> Result<MergeOutcome> {
    cfg.validate()?;
    let dense = DenseOccupancy::new(occ);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    merge_all_with(&dense, clusters, cfg, &mut rng)
}

pub fn merge_all_with<O: OccupancyLookup, R: Rng>(
    occ: &O,
    mut clusters: Vec<VoxelCluster>,
    cfg: &MergeConfig,
    rng: &mut R,
) -> Result<MergeOutcome> {
    let mut merges_per_pass = Vec::new();
    loop {
        let (next, merges) = merge_pass(occ, &clusters, cfg, rng)?;
        merges_per_pass.push(merges);
        clusters = next;
        if merges == 0 {
            break;
        }
    }
    Ok(MergeOutcome { clusters, merges_per_pass })
}
