//! 26-connected A* over free voxels, the dense-map baseline planner.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::occupancy::{DenseOccupancy, OccupancyGrid, VoxelState};
use crate::voxel::VoxelIndex;
use crate::Point3;

#[derive(Debug, Clone, PartialEq)]
pub struct GridPath {
    pub waypoints: Vec<Point3>,
    pub length: f64,
    pub expanded: usize,
}

#[derive(Clone, Copy)]
struct Entry {
    f: f64,
    g: f64,
    node: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.f.total_cmp(&self.f).then_with(|| other.node.cmp(&self.node))
    }
}

/// Reusable planner over a dense snapshot of the grid.
#[derive(Debug, Clone)]
pub struct GridPlanner {
    dense: DenseOccupancy,
    steps: Vec<(VoxelIndex, f64)>,
}

impl GridPlanner {
    pub fn new(occ: &OccupancyGrid) -> Self {
        let s = occ.voxel_size();
        let steps = VoxelIndex::new(0, 0, 0)
            .neighbors26()
            .map(|d| {
                let n = (d.i.abs() + d.j.abs() + d.k.abs()) as f64;
                (d, n.sqrt() * s)
            })
            .collect();
        Self { dense: DenseOccupancy::new(occ), steps }
    }

    pub fn voxel_size(&self) -> f64 {
        self.dense.voxel_size()
    }

    /// Optimal path between the voxels containing `a` and `b`. Waypoints are
    /// voxel centers; length is the sum of step costs.
    pub fn plan(&self, a: &Point3, b: &Point3) -> Result<GridPath> {
        let s = self.voxel_size();
        let va = crate::voxel::world_to_voxel(a, s);
        let vb = crate::voxel::world_to_voxel(b, s);
        for (name, v) in [("start", va), ("goal", vb)] {
            if self.dense.state(&v) != VoxelState::Free {
                return Err(Error::Validation(format!("{name} voxel {v} is not free")));
            }
        }
        let start = self.dense.offset(&va).ok_or_else(|| Error::Internal("start outside grid".into()))?;
        let goal = self.dense.offset(&vb).ok_or_else(|| Error::Internal("goal outside grid".into()))?;
        let goal_center = vb.center(s);
        let h = |v: &VoxelIndex| (v.center(s) - goal_center).norm();

        let mut g = vec![f64::INFINITY; self.dense.len()];
        let mut parent = vec![usize::MAX; self.dense.len()];
        let mut closed = vec![false; self.dense.len()];
        let mut heap = BinaryHeap::new();
        g[start] = 0.0;
        heap.push(Entry { f: h(&va), g: 0.0, node: start });
        let mut expanded = 0;
        while let Some(Entry { g: gu, node: u, .. }) = heap.pop() {
            if closed[u] || gu > g[u] {
                continue;
            }
            closed[u] = true;
            expanded += 1;
            if u == goal {
                let mut waypoints = vec![self.dense.index_of(u).center(s)];
                let mut cur = u;
                while parent[cur] != usize::MAX {
                    cur = parent[cur];
                    waypoints.push(self.dense.index_of(cur).center(s));
                }
                waypoints.reverse();
                return Ok(GridPath { waypoints, length: gu, expanded });
            }
            let vu = self.dense.index_of(u);
            for &(d, cost) in &self.steps {
                let vn = vu.offset(d.i, d.j, d.k);
                let Some(n) = self.dense.offset(&vn) else { continue };
                if closed[n] || !self.dense.is_free(&vn) {
                    continue;
                }
                let gn = gu + cost;
                if gn < g[n] {
                    g[n] = gn;
                    parent[n] = u;
                    heap.push(Entry { f: gn + h(&vn), g: gn, node: n });
                }
            }
        }
        Err(Error::NoPath)
    }
}

/// One-shot convenience wrapper around [`GridPlanner`].
pub fn grid_astar(occ: &OccupancyGrid, a: &Point3, b: &Point3) -> Result<GridPath> {
    GridPlanner::new(occ).plan(a, b)
}
