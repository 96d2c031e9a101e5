//! Compact convex cluster growing over free voxels.
//!
//! A cluster starts from a free trajectory voxel and grows in rounds. Each
//! round collects the free face neighbours of the cluster, keeps those within
//! `r_min + delta` of the centroid (`r_min` is the smallest principal
//! semi-extent holding `compactness_fraction` of the voxels), and then keeps
//! only candidates whose segments to every cluster voxel cross free space.
//! Growth stops when a round adds nothing.

use std::collections::BTreeSet;

use nalgebra::{Matrix3, SymmetricEigen};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hull::{compute_hull, ConvexHull};
use crate::occupancy::{DenseOccupancy, OccupancyGrid, VoxelState};
use crate::voxel::{walk_center_segment, walk_ray, world_to_voxel, VoxelIndex, VoxelMap, VoxelSet};
use crate::{Point3, Vector3};

/// Read access to voxel states.
pub trait OccupancyLookup: Sync {
    fn state(&self, v: &VoxelIndex) -> VoxelState;
    fn voxel_size(&self) -> f64;

    fn is_free(&self, v: &VoxelIndex) -> bool {
        self.state(v) == VoxelState::Free
    }
}

impl OccupancyLookup for OccupancyGrid {
    fn state(&self, v: &VoxelIndex) -> VoxelState {
        OccupancyGrid::state(self, v)
    }
    fn voxel_size(&self) -> f64 {
        OccupancyGrid::voxel_size(self)
    }
}

impl OccupancyLookup for DenseOccupancy {
    fn state(&self, v: &VoxelIndex) -> VoxelState {
        DenseOccupancy::state(self, v)
    }
    fn voxel_size(&self) -> f64 {
        DenseOccupancy::voxel_size(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowConfig {
    pub compactness_fraction: f64,
    /// Extra radius beyond the smallest principal semi-extent, meters.
    pub delta_margin: f64,
    pub rng_seed: u64,
}

impl GrowConfig {
    /// Defaults for a given voxel size: 98% compactness, margin of two voxels.
    pub fn for_voxel_size(voxel_size: f64) -> Self {
        Self { compactness_fraction: 0.98, delta_margin: 2.0 * voxel_size, rng_seed: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.compactness_fraction > 0.0 && self.compactness_fraction <= 1.0) {
            return Err(Error::Config("compactness_fraction must be in (0, 1]".into()));
        }
        if !(self.delta_margin >= 0.0) {
            return Err(Error::Config("delta_margin must be >= 0".into()));
        }
        Ok(())
    }
}

/// A set of free voxels with its centroid and the convex hull of the voxel
/// centers.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelCluster {
    pub id: usize,
    pub voxels: BTreeSet<VoxelIndex>,
    pub centroid: Point3,
    pub hull: ConvexHull,
}

impl VoxelCluster {
    pub fn new(id: usize, voxels: BTreeSet<VoxelIndex>, voxel_size: f64) -> Result<Self> {
        if voxels.is_empty() {
            return Err(Error::Validation("cluster without voxels".into()));
        }
        let sum: Vector3 = voxels.iter().map(|v| v.center(voxel_size).coords).sum();
        let centroid = Point3::from(sum / voxels.len() as f64);
        let hull = voxel_hull(voxels.iter().copied(), voxel_size)?;
        Ok(Self { id, voxels, centroid, hull })
    }

    pub fn len(&self) -> usize {
        self.voxels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.voxels.is_empty()
    }

    pub fn contains(&self, v: &VoxelIndex) -> bool {
        self.voxels.contains(v)
    }

    /// Voxel count times voxel volume, cubic meters.
    pub fn volume(&self, voxel_size: f64) -> f64 {
        self.voxels.len() as f64 * voxel_size.powi(3)
    }
}

/// Convex hull of voxel centers. Only voxels at both ends of their row along
/// every axis can be hull vertices, so the rest are dropped before hulling.
pub fn voxel_hull<I>(voxels: I, voxel_size: f64) -> Result<ConvexHull>
where
    I: IntoIterator<Item = VoxelIndex>,
{
    let all: Vec<VoxelIndex> = voxels.into_iter().collect();
    let mut ends: [VoxelMap<(i32, i32)>; 3] = Default::default();
    for v in &all {
        let keys = [(v.j, v.k, v.i), (v.i, v.k, v.j), (v.i, v.j, v.k)];
        for (axis, &(a, b, c)) in keys.iter().enumerate() {
            let e = ends[axis].entry(VoxelIndex::new(a, b, 0)).or_insert((c, c));
            e.0 = e.0.min(c);
            e.1 = e.1.max(c);
        }
    }
    let is_end = |axis: usize, a: i32, b: i32, c: i32| {
        let (lo, hi) = ends[axis][&VoxelIndex::new(a, b, 0)];
        c == lo || c == hi
    };
    let points: Vec<Point3> = all
        .iter()
        .filter(|v| is_end(0, v.j, v.k, v.i) && is_end(1, v.i, v.k, v.j) && is_end(2, v.i, v.j, v.k))
        .map(|v| v.center(voxel_size))
        .collect();
    compute_hull(&points)
}

/// Distinct voxels holding trajectory poses or crossed between consecutive
/// poses, in order of first visit.
pub fn trajectory_voxels(trajectory: &[Point3], voxel_size: f64) -> Vec<VoxelIndex> {
    let mut seen = VoxelSet::default();
    let mut out = Vec::new();
    let mut push = |v: VoxelIndex| {
        if seen.insert(v) {
            out.push(v);
        }
    };
    if let Some(first) = trajectory.first() {
        push(world_to_voxel(first, voxel_size));
    }
    for w in trajectory.windows(2) {
        if w[0] == w[1] {
            continue;
        }
        walk_ray(&w[0], &w[1], voxel_size, |v| {
            push(v);
            true
        })
        .expect("distinct poses");
    }
    out
}

/// Picks a uniformly random trajectory voxel that is not yet clustered, or
/// `None` once the whole trajectory is covered.
pub fn seed_cluster<O: OccupancyLookup, R: Rng>(
    occ: &O,
    trajectory_voxels: &[VoxelIndex],
    already_clustered: &VoxelSet,
    rng: &mut R,
) -> Result<Option<VoxelIndex>> {
    let open: Vec<VoxelIndex> = trajectory_voxels.iter().filter(|v| !already_clustered.contains(v)).copied().collect();
    if open.is_empty() {
        return Ok(None);
    }
    let pick = open[rng.random_range(0..open.len())];
    if !occ.is_free(&pick) {
        return Err(Error::Internal(format!(
            "trajectory voxel {pick} is {:?}; carve the trajectory first",
            occ.state(&pick)
        )));
    }
    Ok(Some(pick))
}

/// Free face neighbours of `cluster` that are outside it and not in
/// `excluded`, sorted. Unknown voxels never qualify.
pub fn adjacent_free_candidates<O: OccupancyLookup>(
    occ: &O,
    cluster: &BTreeSet<VoxelIndex>,
    excluded: &VoxelSet,
) -> Vec<VoxelIndex> {
    let mut out: BTreeSet<VoxelIndex> = BTreeSet::new();
    for v in cluster {
        for n in v.face_neighbors() {
            if !cluster.contains(&n) && !excluded.contains(&n) && occ.is_free(&n) {
                out.insert(n);
            }
        }
    }
    out.into_iter().collect()
}

/// Smallest principal semi-extent of the voxel centers: per principal axis the
/// `fraction` quantile of absolute projections, minimum over the axes.
/// `None` below four voxels, where the covariance is rank deficient.
pub fn min_principal_extent(cluster: &BTreeSet<VoxelIndex>, voxel_size: f64, fraction: f64) -> Option<(Point3, f64)> {
    if cluster.len() < 4 {
        return None;
    }
    let n = cluster.len() as f64;
    let centers: Vec<Vector3> = cluster.iter().map(|v| v.center(voxel_size).coords).collect();
    let mean: Vector3 = centers.iter().sum::<Vector3>() / n;
    let mut cov = Matrix3::zeros();
    for c in &centers {
        let d = c - mean;
        cov += d * d.transpose();
    }
    cov /= n;
    let eig = SymmetricEigen::new(cov);
    let mut r_min = f64::INFINITY;
    let mut proj = Vec::with_capacity(centers.len());
    for axis in eig.eigenvectors.column_iter() {
        proj.clear();
        proj.extend(centers.iter().map(|c| (c - mean).dot(&axis).abs()));
        proj.sort_unstable_by(f64::total_cmp);
        let rank = ((fraction * proj.len() as f64).ceil() as usize).clamp(1, proj.len());
        r_min = r_min.min(proj[rank - 1]);
    }
    Some((Point3::from(mean), r_min))
}

/// Keeps candidates within `r_min + delta_margin` of the cluster centroid.
/// Clusters under four voxels accept every candidate.
pub fn compact_filter(
    cluster: &BTreeSet<VoxelIndex>,
    candidates: &[VoxelIndex],
    cfg: &GrowConfig,
    voxel_size: f64,
) -> Vec<VoxelIndex> {
    let Some((centroid, r_min)) = min_principal_extent(cluster, voxel_size, cfg.compactness_fraction) else {
        return candidates.to_vec();
    };
    let limit = r_min + cfg.delta_margin;
    candidates.iter().filter(|c| (c.center(voxel_size) - centroid).norm() <= limit).copied().collect()
}

/// True when the segment between the two voxel centers touches only free
/// voxels.
pub fn segment_is_free<O: OccupancyLookup>(occ: &O, a: VoxelIndex, b: VoxelIndex) -> bool {
    walk_center_segment(a, b, |v| occ.is_free(&v))
}

/// Keeps candidates whose segments to every voxel of `cluster` are free.
/// All candidates are tested against the cluster as given; survivors are then
/// accepted in index order, each one only if its segments to the previously
/// accepted survivors are free too.
pub fn convexity_filter<O: OccupancyLookup>(
    occ: &O,
    cluster: &BTreeSet<VoxelIndex>,
    candidates: &[VoxelIndex],
) -> Vec<VoxelIndex> {
    let members: Vec<VoxelIndex> = cluster.iter().copied().collect();
    let mut survivors: Vec<VoxelIndex> =
        candidates.par_iter().filter(|&&c| members.iter().all(|&m| segment_is_free(occ, c, m))).copied().collect();
    survivors.sort_unstable();
    let mut accepted: Vec<VoxelIndex> = Vec::with_capacity(survivors.len());
    for c in survivors {
        if accepted.iter().all(|&a| segment_is_free(occ, c, a)) {
            accepted.push(c);
        }
    }
    accepted
}

/// Grows one cluster from `seed`, never claiming voxels in `claimed`.
pub fn grow_cluster_excluding<O: OccupancyLookup>(
    occ: &O,
    seed: VoxelIndex,
    cfg: &GrowConfig,
    claimed: &VoxelSet,
    id: usize,
) -> Result<VoxelCluster> {
    let state = occ.state(&seed);
    if state != VoxelState::Free {
        return Err(Error::Validation(format!("seed voxel {seed} is {state:?}, not free")));
    }
    if claimed.contains(&seed) {
        return Err(Error::Validation(format!("seed voxel {seed} already belongs to a cluster")));
    }
    let size = occ.voxel_size();
    let mut cluster = BTreeSet::from([seed]);
    loop {
        let candidates = adjacent_free_candidates(occ, &cluster, claimed);
        if candidates.is_empty() {
            break;
        }
        let compact = compact_filter(&cluster, &candidates, cfg, size);
        let accepted = convexity_filter(occ, &cluster, &compact);
        if accepted.is_empty() {
            break;
        }
        cluster.extend(accepted);
    }
    VoxelCluster::new(id, cluster, size)
}

/// Grows a single cluster from `seed` in otherwise unclaimed space.
pub fn grow_cluster(occ: &OccupancyGrid, seed: VoxelIndex, cfg: &GrowConfig) -> Result<VoxelCluster> {
    cfg.validate()?;
    let dense = DenseOccupancy::new(occ);
    grow_cluster_excluding(&dense, seed, cfg, &VoxelSet::default(), 0)
}

/// Grows clusters from random unclustered trajectory voxels until the whole
/// trajectory is covered. Clusters are voxel disjoint and numbered from 0.
pub fn grow_all(occ: &OccupancyGrid, trajectory: &[Point3], cfg: &GrowConfig) -> Result<Vec<VoxelCluster>> {
    cfg.validate()?;
    let dense = DenseOccupancy::new(occ);
    let traj = trajectory_voxels(trajectory, occ.voxel_size());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut claimed = VoxelSet::default();
    let mut clusters = Vec::new();
    while let Some(seed) = seed_cluster(&dense, &traj, &claimed, &mut rng)? {
        let cluster = grow_cluster_excluding(&dense, seed, cfg, &claimed, clusters.len())?;
        claimed.extend(cluster.voxels.iter().copied());
        clusters.push(cluster);
    }
    Ok(clusters)
}
