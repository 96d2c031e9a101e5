//! Voxel indexing and segment traversal.

use std::collections::{HashMap, HashSet};
use std::fmt;

use rustc_hash::FxBuildHasher;

use crate::error::{Error, Result};
use crate::Point3;

/// Integer grid coordinates of a voxel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct VoxelIndex {
    pub i: i32,
    pub j: i32,
    pub k: i32,
}

/// The six face neighbour offsets.
pub const FACE_OFFSETS: [(i32, i32, i32); 6] = [(-1, 0, 0), (1, 0, 0), (0, -1, 0), (0, 1, 0), (0, 0, -1), (0, 0, 1)];

impl VoxelIndex {
    pub const fn new(i: i32, j: i32, k: i32) -> Self {
        Self { i, j, k }
    }

    pub fn offset(self, di: i32, dj: i32, dk: i32) -> Self {
        Self::new(self.i + di, self.j + dj, self.k + dk)
    }

    pub fn face_neighbors(self) -> impl Iterator<Item = VoxelIndex> {
        FACE_OFFSETS.into_iter().map(move |(a, b, c)| self.offset(a, b, c))
    }

    /// All 26 neighbours sharing a face, edge or corner.
    pub fn neighbors26(self) -> impl Iterator<Item = VoxelIndex> {
        (-1..=1).flat_map(move |a| {
            (-1..=1)
                .flat_map(move |b| (-1..=1).filter(move |&c| (a, b, c) != (0, 0, 0)).map(move |c| self.offset(a, b, c)))
        })
    }

    pub fn get(self, axis: usize) -> i32 {
        match axis {
            0 => self.i,
            1 => self.j,
            _ => self.k,
        }
    }

    fn set(&mut self, axis: usize, v: i32) {
        match axis {
            0 => self.i = v,
            1 => self.j = v,
            _ => self.k = v,
        }
    }

    pub fn center(self, voxel_size: f64) -> Point3 {
        Point3::new(
            (self.i as f64 + 0.5) * voxel_size,
            (self.j as f64 + 0.5) * voxel_size,
            (self.k as f64 + 0.5) * voxel_size,
        )
    }
}

impl fmt::Display for VoxelIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.i, self.j, self.k)
    }
}

/// Hash map keyed by voxel index with a fixed hasher, so iteration order
/// depends only on the insertion history.
pub type VoxelMap<V> = HashMap<VoxelIndex, V, FxBuildHasher>;
pub type VoxelSet = HashSet<VoxelIndex, FxBuildHasher>;

/// Voxel containing `p`; cells are lower-inclusive `[i, i + 1) * voxel_size`.
pub fn world_to_voxel(p: &Point3, voxel_size: f64) -> VoxelIndex {
    VoxelIndex::new(
        (p.x / voxel_size).floor() as i32,
        (p.y / voxel_size).floor() as i32,
        (p.z / voxel_size).floor() as i32,
    )
}

/// Face-connected voxel walk along the segment `origin -> endpoint`
/// (Amanatides & Woo). The walk starts in the voxel holding `origin`, ends in
/// the voxel holding `endpoint`, and consecutive entries differ by one step on
/// one axis. When the segment crosses an edge or corner exactly, the tied axes
/// are stepped in x, y, z order.
pub fn traverse_ray(origin: &Point3, endpoint: &Point3, voxel_size: f64) -> Result<Vec<VoxelIndex>> {
    let mut out = Vec::new();
    walk_ray(origin, endpoint, voxel_size, |v| {
        out.push(v);
        true
    })?;
    Ok(out)
}

/// Visitor form of [`traverse_ray`]; the walk stops early when `visit`
/// returns `false`. Returns whether the walk ran to completion.
pub fn walk_ray<F>(origin: &Point3, endpoint: &Point3, voxel_size: f64, mut visit: F) -> Result<bool>
where
    F: FnMut(VoxelIndex) -> bool,
{
    let dir = endpoint - origin;
    if dir.norm() == 0.0 {
        return Err(Error::ZeroLengthSegment);
    }
    let start = world_to_voxel(origin, voxel_size);
    let end = world_to_voxel(endpoint, voxel_size);
    let mut current = start;
    let mut step = [0i32; 3];
    let mut t_max = [f64::INFINITY; 3];
    let mut t_delta = [f64::INFINITY; 3];
    let mut remaining = [0i32; 3];
    for axis in 0..3 {
        let d = dir[axis];
        let o = origin[axis] / voxel_size;
        let cell = current.get(axis) as f64;
        remaining[axis] = (end.get(axis) - start.get(axis)).abs();
        if d > 0.0 {
            step[axis] = 1;
            t_delta[axis] = voxel_size / d;
            t_max[axis] = (cell + 1.0 - o) * voxel_size / d;
        } else if d < 0.0 {
            step[axis] = -1;
            t_delta[axis] = -voxel_size / d;
            t_max[axis] = (o - cell) * voxel_size / -d;
        }
    }
    if !visit(current) {
        return Ok(false);
    }
    // The walk makes exactly |end - start|_1 unit steps, which pins the final
    // voxel to `end` regardless of round-off in t_max.
    while remaining.iter().any(|&r| r > 0) {
        let axis = (0..3)
            .filter(|&a| remaining[a] > 0)
            .min_by(|&a, &b| t_max[a].total_cmp(&t_max[b]))
            .expect("some axis has remaining steps");
        current.set(axis, current.get(axis) + step[axis]);
        t_max[axis] += t_delta[axis];
        remaining[axis] -= 1;
        if !visit(current) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Visits every voxel whose closed cell touches the segment between the
/// centers of `from` and `to`. Edge and corner crossings are resolved exactly
/// with integer arithmetic and include every voxel meeting the crossing point,
/// so the visited set is a conservative cover of the segment. Stops early when
/// `visit` returns `false`; returns whether the walk completed.
pub fn walk_center_segment<F>(from: VoxelIndex, to: VoxelIndex, mut visit: F) -> bool
where
    F: FnMut(VoxelIndex) -> bool,
{
    let d = [to.i - from.i, to.j - from.j, to.k - from.k];
    let n = [d[0].unsigned_abs() as i64, d[1].unsigned_abs() as i64, d[2].unsigned_abs() as i64];
    let step = [d[0].signum(), d[1].signum(), d[2].signum()];
    // Crossing number c (0-based) on axis a happens at t = (2c + 1) / (2 n_a).
    let mut crossed = [0i64; 3];
    let mut current = from;
    if !visit(current) {
        return false;
    }
    loop {
        // Find the earliest next crossing among axes that still have one.
        let mut best: Option<(i64, i64)> = None;
        for a in 0..3 {
            if crossed[a] < n[a] {
                let cand = (2 * crossed[a] + 1, 2 * n[a]);
                best = match best {
                    Some(b) if b.0 * cand.1 <= cand.0 * b.1 => Some(b),
                    _ => Some(cand),
                };
            }
        }
        let Some((num, den)) = best else { break };
        let mut tied = [false; 3];
        for a in 0..3 {
            tied[a] = crossed[a] < n[a] && (2 * crossed[a] + 1) * den == num * (2 * n[a]);
        }
        let tied_axes: Vec<usize> = (0..3).filter(|&a| tied[a]).collect();
        if tied_axes.len() > 1 {
            // Proper subsets of the tied steps touch the crossing point too.
            let full = (1u32 << tied_axes.len()) - 1;
            for mask in 1..full {
                let mut v = current;
                for (bit, &a) in tied_axes.iter().enumerate() {
                    if mask & (1 << bit) != 0 {
                        v.set(a, v.get(a) + step[a]);
                    }
                }
                if !visit(v) {
                    return false;
                }
            }
        }
        for &a in &tied_axes {
            current.set(a, current.get(a) + step[a]);
            crossed[a] += 1;
        }
        if !visit(current) {
            return false;
        }
    }
    debug_assert_eq!(current, to);
    true
}

/// Collects [`walk_center_segment`] into a vector.
pub fn center_segment_voxels(from: VoxelIndex, to: VoxelIndex) -> Vec<VoxelIndex> {
    let mut out = Vec::new();
    walk_center_segment(from, to, |v| {
        out.push(v);
        true
    });
    out
}
