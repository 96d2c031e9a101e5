//! Ternary occupancy grids: Free, Occupied, or (implicitly) Unknown.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::io::BufRead;

use crate::error::{Error, Result};
use crate::voxel::{walk_ray, world_to_voxel, VoxelIndex, VoxelMap, VoxelSet};
use crate::Point3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VoxelState {
    Free,
    Occupied,
    Unknown,
}

impl VoxelState {
    fn code(self) -> u8 {
        match self {
            VoxelState::Unknown => 0,
            VoxelState::Free => 1,
            VoxelState::Occupied => 2,
        }
    }

    fn from_code(c: u8) -> Self {
        match c {
            1 => VoxelState::Free,
            2 => VoxelState::Occupied,
            _ => VoxelState::Unknown,
        }
    }
}

/// Sparse occupancy grid. Absent voxels are unknown.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    voxel_size: f64,
    states: VoxelMap<VoxelState>,
}

impl OccupancyGrid {
    pub fn new(voxel_size: f64) -> Self {
        Self { voxel_size, states: VoxelMap::default() }
    }

    pub fn voxel_size(&self) -> f64 {
        self.voxel_size
    }

    pub fn state(&self, v: &VoxelIndex) -> VoxelState {
        self.states.get(v).copied().unwrap_or(VoxelState::Unknown)
    }

    pub fn is_free(&self, v: &VoxelIndex) -> bool {
        self.state(v) == VoxelState::Free
    }

    /// Setting `Unknown` removes the voxel.
    pub fn set(&mut self, v: VoxelIndex, state: VoxelState) {
        match state {
            VoxelState::Unknown => {
                self.states.remove(&v);
            }
            s => {
                self.states.insert(v, s);
            }
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VoxelIndex, VoxelState)> + '_ {
        self.states.iter().map(|(v, s)| (*v, *s))
    }

    pub fn count(&self, state: VoxelState) -> usize {
        self.states.values().filter(|s| **s == state).count()
    }

    /// Stored voxels in index order.
    pub fn sorted(&self) -> Vec<(VoxelIndex, VoxelState)> {
        let mut all: Vec<_> = self.iter().collect();
        all.sort_unstable_by_key(|(v, _)| *v);
        all
    }

    pub fn voxel_of(&self, p: &Point3) -> VoxelIndex {
        world_to_voxel(p, self.voxel_size)
    }

    /// Relabels every 26-connected occupied component smaller than
    /// `min_component_size` as free.
    pub fn filter_small_components(&self, min_component_size: usize) -> OccupancyGrid {
        let mut out = self.clone();
        let mut seen = VoxelSet::default();
        let mut occupied: Vec<_> = self.iter().filter(|(_, s)| *s == VoxelState::Occupied).map(|(v, _)| v).collect();
        occupied.sort_unstable();
        let mut queue = VecDeque::new();
        for start in occupied {
            if !seen.insert(start) {
                continue;
            }
            let mut component = vec![start];
            queue.push_back(start);
            while let Some(v) = queue.pop_front() {
                for n in v.neighbors26() {
                    if self.state(&n) == VoxelState::Occupied && seen.insert(n) {
                        component.push(n);
                        queue.push_back(n);
                    }
                }
            }
            if component.len() < min_component_size {
                for v in component {
                    out.set(v, VoxelState::Free);
                }
            }
        }
        out
    }

    /// Marks every voxel holding a trajectory pose, and every voxel crossed
    /// between consecutive poses, as free.
    pub fn carve_trajectory(&self, trajectory: &[Point3]) -> OccupancyGrid {
        let mut out = self.clone();
        let size = self.voxel_size;
        if let Some(first) = trajectory.first() {
            out.set(world_to_voxel(first, size), VoxelState::Free);
        }
        for w in trajectory.windows(2) {
            if w[0] == w[1] {
                continue;
            }
            walk_ray(&w[0], &w[1], size, |v| {
                out.set(v, VoxelState::Free);
                true
            })
            .expect("distinct poses");
        }
        out
    }

    /// Text dump: a header line, then one `i j k F|O` line per stored voxel
    /// in index order.
    pub fn to_dump(&self) -> String {
        let mut out = String::with_capacity(16 * self.len() + 48);
        let _ = writeln!(out, "# OCCUPANCY v1 voxel_size={:.6}", self.voxel_size);
        for (v, s) in self.sorted() {
            let c = if s == VoxelState::Free { 'F' } else { 'O' };
            let _ = writeln!(out, "{} {} {} {}", v.i, v.j, v.k, c);
        }
        out
    }

    pub fn from_dump<R: BufRead>(reader: R) -> Result<OccupancyGrid> {
        let mut grid: Option<OccupancyGrid> = None;
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(header) = line.strip_prefix("# OCCUPANCY v1 voxel_size=") {
                let size: f64 = header
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse { line: line_no, message: "bad voxel_size".into() })?;
                grid = Some(OccupancyGrid::new(size));
                continue;
            }
            if line.starts_with('#') {
                continue;
            }
            let g = grid
                .as_mut()
                .ok_or_else(|| Error::Parse { line: line_no, message: "missing `# OCCUPANCY v1` header".into() })?;
            let fields: Vec<&str> = line.split_whitespace().collect();
            let bad = |m: &str| Error::Parse { line: line_no, message: m.to_string() };
            if fields.len() != 4 {
                return Err(bad("expected `i j k F|O`"));
            }
            let idx = |f: &str| f.parse::<i32>().map_err(|_| bad("non-integer index"));
            let v = VoxelIndex::new(idx(fields[0])?, idx(fields[1])?, idx(fields[2])?);
            let state = match fields[3] {
                "F" => VoxelState::Free,
                "O" => VoxelState::Occupied,
                _ => return Err(bad("state must be F or O")),
            };
            g.set(v, state);
        }
        grid.ok_or_else(|| Error::Parse { line: 0, message: "empty occupancy dump".into() })
    }
}

/// Dense snapshot of an occupancy grid over its bounding box, for hot loops.
/// Everything outside the box reads as unknown.
#[derive(Debug, Clone)]
pub struct DenseOccupancy {
    min: VoxelIndex,
    dims: [i32; 3],
    cells: Vec<u8>,
    voxel_size: f64,
}

impl DenseOccupancy {
    pub fn new(grid: &OccupancyGrid) -> Self {
        let mut min = VoxelIndex::new(i32::MAX, i32::MAX, i32::MAX);
        let mut max = VoxelIndex::new(i32::MIN, i32::MIN, i32::MIN);
        for (v, _) in grid.iter() {
            min = VoxelIndex::new(min.i.min(v.i), min.j.min(v.j), min.k.min(v.k));
            max = VoxelIndex::new(max.i.max(v.i), max.j.max(v.j), max.k.max(v.k));
        }
        if grid.is_empty() {
            min = VoxelIndex::default();
            max = VoxelIndex::new(-1, -1, -1);
        }
        let dims = [max.i - min.i + 1, max.j - min.j + 1, max.k - min.k + 1];
        let mut cells = vec![0u8; (dims[0].max(0) as usize) * (dims[1].max(0) as usize) * (dims[2].max(0) as usize)];
        let mut dense = Self { min, dims, cells: Vec::new(), voxel_size: grid.voxel_size() };
        for (v, s) in grid.iter() {
            let at = dense.offset(&v).expect("inside bounds");
            cells[at] = s.code();
        }
        dense.cells = cells;
        dense
    }

    pub fn voxel_size(&self) -> f64 {
        self.voxel_size
    }

    /// Inclusive index bounds of the stored region, or `None` when empty.
    pub fn bounds(&self) -> Option<(VoxelIndex, VoxelIndex)> {
        if self.cells.is_empty() {
            return None;
        }
        let max = self.min.offset(self.dims[0] - 1, self.dims[1] - 1, self.dims[2] - 1);
        Some((self.min, max))
    }

    #[inline]
    pub fn offset(&self, v: &VoxelIndex) -> Option<usize> {
        let (a, b, c) = (v.i - self.min.i, v.j - self.min.j, v.k - self.min.k);
        if a < 0 || b < 0 || c < 0 || a >= self.dims[0] || b >= self.dims[1] || c >= self.dims[2] {
            return None;
        }
        Some(((c as usize * self.dims[1] as usize) + b as usize) * self.dims[0] as usize + a as usize)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn index_of(&self, offset: usize) -> VoxelIndex {
        let nx = self.dims[0] as usize;
        let ny = self.dims[1] as usize;
        let a = offset % nx;
        let b = (offset / nx) % ny;
        let c = offset / (nx * ny);
        self.min.offset(a as i32, b as i32, c as i32)
    }

    #[inline]
    pub fn state(&self, v: &VoxelIndex) -> VoxelState {
        match self.offset(v) {
            Some(at) => VoxelState::from_code(self.cells[at]),
            None => VoxelState::Unknown,
        }
    }

    #[inline]
    pub fn is_free(&self, v: &VoxelIndex) -> bool {
        self.state(v) == VoxelState::Free
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(i: i32, j: i32, k: i32) -> VoxelIndex {
        VoxelIndex::new(i, j, k)
    }

    #[test]
    fn isolated_voxel_removed() {
        let mut g = OccupancyGrid::new(0.25);
        g.set(v(0, 0, 0), VoxelState::Occupied);
        g.set(v(5, 5, 5), VoxelState::Free);
        let f = g.filter_small_components(10);
        assert_eq!(f.state(&v(0, 0, 0)), VoxelState::Free);
        assert_eq!(f.state(&v(5, 5, 5)), VoxelState::Free);
    }

    #[test]
    fn large_wall_kept() {
        let mut g = OccupancyGrid::new(0.25);
        for i in 0..10 {
            for j in 0..10 {
                for k in 0..10 {
                    g.set(v(i, j, k), VoxelState::Occupied);
                }
            }
        }
        assert_eq!(g.filter_small_components(10), g);
    }

    #[test]
    fn corner_touching_pair_is_one_component() {
        let mut g = OccupancyGrid::new(0.25);
        g.set(v(0, 0, 0), VoxelState::Occupied);
        g.set(v(1, 1, 1), VoxelState::Occupied);
        let f = g.filter_small_components(3);
        assert_eq!(f.count(VoxelState::Occupied), 0);
        // size 2 component survives a threshold of 2
        assert_eq!(g.filter_small_components(2).count(VoxelState::Occupied), 2);
    }

    #[test]
    fn carving() {
        let g = OccupancyGrid::new(0.25);
        let c = g.carve_trajectory(&[Point3::new(0.1, 0.1, 0.1)]);
        assert!(c.is_free(&v(0, 0, 0)));
        assert_eq!(c.len(), 1);

        let line = g.carve_trajectory(&[Point3::new(0.125, 0.125, 0.125), Point3::new(1.125, 0.125, 0.125)]);
        for i in 0..5 {
            assert!(line.is_free(&v(i, 0, 0)));
        }
        assert_eq!(line.len(), 5);
        assert_eq!(line.carve_trajectory(&[Point3::new(0.125, 0.125, 0.125)]), line);
    }

    #[test]
    fn carving_overrides_occupied() {
        let mut g = OccupancyGrid::new(0.25);
        g.set(v(0, 0, 0), VoxelState::Occupied);
        assert!(g.carve_trajectory(&[Point3::new(0.1, 0.1, 0.1)]).is_free(&v(0, 0, 0)));
    }

    #[test]
    fn dump_round_trip() {
        let mut g = OccupancyGrid::new(0.25);
        g.set(v(-1, 2, 3), VoxelState::Occupied);
        g.set(v(0, 0, 0), VoxelState::Free);
        let text = g.to_dump();
        assert_eq!(OccupancyGrid::from_dump(text.as_bytes()).unwrap(), g);
        assert!(OccupancyGrid::from_dump("0 0 0 F\n".as_bytes()).is_err());
    }

    #[test]
    fn dense_view_matches_sparse() {
        let mut g = OccupancyGrid::new(0.5);
        g.set(v(-2, 0, 1), VoxelState::Occupied);
        g.set(v(3, 4, -1), VoxelState::Free);
        let d = DenseOccupancy::new(&g);
        for i in -4..6 {
            for j in -2..6 {
                for k in -3..4 {
                    assert_eq!(d.state(&v(i, j, k)), g.state(&v(i, j, k)));
                }
            }
        }
        let at = d.offset(&v(3, 4, -1)).unwrap();
        assert_eq!(d.index_of(at), v(3, 4, -1));
    }
}
