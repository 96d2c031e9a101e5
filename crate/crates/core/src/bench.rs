//! Planner comparison and captured-space sweeps.

use std::fmt::Write as _;
use std::time::Instant;

use rand::Rng;

use crate::error::{Error, Result};
use crate::grid::GridPlanner;
use crate::occupancy::OccupancyGrid;
use crate::topo::{plan, NavGraph, TopologicalMap};
use crate::voxel::VoxelIndex;
use crate::Point3;

/// Draws allowed per requested query before giving up.
pub const DRAWS_PER_QUERY: usize = 50;

pub const BENCHMARK_HEADER: &str = "query,direct_m,topo_m,grid_m,topo_norm,grid_norm,topo_time_us,grid_time_us";
pub const CAPTURE_HEADER: &str = "voxel_size,free_captured,occupied_captured";

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRecord {
    pub query: usize,
    pub a: Point3,
    pub b: Point3,
    pub direct_m: f64,
    pub topo_m: f64,
    pub grid_m: f64,
    pub topo_norm: f64,
    pub grid_norm: f64,
    pub topo_time_us: f64,
    pub grid_time_us: f64,
}

/// Samples `n_queries` start/goal pairs among the voxels owned by clusters and
/// plans each with both planners. Pairs closer than two voxels, or that either
/// planner cannot solve, are redrawn.
pub fn benchmark_planners<R: Rng>(
    topo: &TopologicalMap,
    nav: &NavGraph,
    occ: &OccupancyGrid,
    n_queries: usize,
    rng: &mut R,
) -> Result<Vec<BenchmarkRecord>> {
    let s = topo.voxel_size;
    let mut pool: Vec<VoxelIndex> =
        topo.vertices.iter().filter_map(|v| v.voxels.as_ref()).flatten().copied().filter(|v| occ.is_free(v)).collect();
    pool.sort();
    if pool.is_empty() {
        return Err(Error::Validation("topological map carries no free cluster voxels to sample".into()));
    }
    let grid = GridPlanner::new(occ);
    let mut records = Vec::with_capacity(n_queries);
    let mut draws = 0;
    while records.len() < n_queries {
        if draws == n_queries * DRAWS_PER_QUERY {
            return Err(Error::Validation(format!(
                "found only {} of {n_queries} solvable queries after {draws} draws",
                records.len()
            )));
        }
        draws += 1;
        let a = pool[rng.random_range(0..pool.len())].center(s);
        let b = pool[rng.random_range(0..pool.len())].center(s);
        let direct_m = (b - a).norm();
        if direct_m <= 2.0 * s {
            continue;
        }
        let t0 = Instant::now();
        let topo_path = plan(topo, nav, &a, &b);
        let topo_time = t0.elapsed();
        let Ok(topo_path) = topo_path else { continue };
        let t0 = Instant::now();
        let grid_path = grid.plan(&a, &b);
        let grid_time = t0.elapsed();
        let Ok(grid_path) = grid_path else { continue };
        records.push(BenchmarkRecord {
            query: records.len(),
            a,
            b,
            direct_m,
            topo_m: topo_path.length,
            grid_m: grid_path.length,
            topo_norm: topo_path.length / direct_m,
            grid_norm: grid_path.length / direct_m,
            topo_time_us: topo_time.as_secs_f64() * 1e6,
            grid_time_us: grid_time.as_secs_f64() * 1e6,
        });
    }
    Ok(records)
}

/// CSV rows; with `timings` off the time columns are zero so the output only
/// depends on the seed.
pub fn benchmark_csv(records: &[BenchmarkRecord], timings: bool) -> String {
    let mut out = format!("{BENCHMARK_HEADER}\n");
    for r in records {
        let (tt, gt) = if timings { (r.topo_time_us, r.grid_time_us) } else { (0.0, 0.0) };
        let _ = writeln!(
            out,
            "{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.3},{:.3}",
            r.query, r.direct_m, r.topo_m, r.grid_m, r.topo_norm, r.grid_norm, tt, gt
        );
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchmarkSummary {
    pub queries: usize,
    pub mean_topo_norm: f64,
    pub mean_grid_norm: f64,
    pub max_topo_norm: f64,
    pub max_grid_norm: f64,
    pub max_norm_ratio: f64,
    pub median_topo_us: f64,
    pub median_grid_us: f64,
}

pub fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    if values.len() % 2 == 1 {
        values[m]
    } else {
        (values[m - 1] + values[m]) / 2.0
    }
}

pub fn summarize(records: &[BenchmarkRecord]) -> BenchmarkSummary {
    let n = records.len() as f64;
    let mean = |f: fn(&BenchmarkRecord) -> f64| records.iter().map(f).sum::<f64>() / n;
    let max = |f: fn(&BenchmarkRecord) -> f64| records.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
    BenchmarkSummary {
        queries: records.len(),
        mean_topo_norm: mean(|r| r.topo_norm),
        mean_grid_norm: mean(|r| r.grid_norm),
        max_topo_norm: max(|r| r.topo_norm),
        max_grid_norm: max(|r| r.grid_norm),
        max_norm_ratio: max(|r| r.topo_norm / r.grid_norm),
        median_topo_us: median(&mut records.iter().map(|r| r.topo_time_us).collect::<Vec<_>>()),
        median_grid_us: median(&mut records.iter().map(|r| r.grid_time_us).collect::<Vec<_>>()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaptureRow {
    pub voxel_size: f64,
    pub free_captured: f64,
    pub occupied_captured: f64,
}

pub fn capture_csv(rows: &[CaptureRow]) -> String {
    let mut out = format!("{CAPTURE_HEADER}\n");
    for r in rows {
        let _ = writeln!(out, "{:.6},{:.6},{:.6}", r.voxel_size, r.free_captured, r.occupied_captured);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::VoxelCluster;
    use crate::occupancy::VoxelState;
    use crate::topo::build_nav_graph;
    use rand::SeedableRng;
    use std::collections::BTreeSet;

    fn two_boxes() -> (TopologicalMap, OccupancyGrid) {
        let s = 0.25;
        let mut occ = OccupancyGrid::new(s);
        let mut a = BTreeSet::new();
        let mut b = BTreeSet::new();
        for i in 0..8 {
            for j in 0..4 {
                for k in 0..4 {
                    let v = VoxelIndex::new(i, j, k);
                    occ.set(v, VoxelState::Free);
                    if i < 4 {
                        a.insert(v)
                    } else {
                        b.insert(v)
                    };
                }
            }
        }
        let clusters = vec![VoxelCluster::new(0, a, s).unwrap(), VoxelCluster::new(1, b, s).unwrap()];
        (TopologicalMap::from_clusters(&clusters, s).unwrap(), occ)
    }

    #[test]
    fn records_are_consistent() {
        let (topo, occ) = two_boxes();
        let nav = build_nav_graph(&topo);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let records = benchmark_planners(&topo, &nav, &occ, 20, &mut rng).unwrap();
        assert_eq!(records.len(), 20);
        let diag = topo.voxel_size * 3f64.sqrt();
        for (n, r) in records.iter().enumerate() {
            assert_eq!(r.query, n);
            assert!(r.direct_m > 2.0 * topo.voxel_size);
            assert!(r.topo_norm >= 1.0 - 1e-9);
            assert!(r.grid_m >= r.direct_m - diag);
            assert!((r.topo_norm - r.topo_m / r.direct_m).abs() < 1e-12);
        }
    }

    #[test]
    fn same_seed_same_queries() {
        let (topo, occ) = two_boxes();
        let nav = build_nav_graph(&topo);
        let run = || {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
            benchmark_csv(&benchmark_planners(&topo, &nav, &occ, 10, &mut rng).unwrap(), false)
        };
        assert_eq!(run(), run());
        assert_eq!(run().lines().count(), 11);
    }

    #[test]
    fn unsolvable_budget_reports_count() {
        // a single voxel pool cannot produce pairs farther apart than two voxels
        let s = 0.25;
        let mut occ = OccupancyGrid::new(s);
        let v: BTreeSet<_> = [VoxelIndex::new(0, 0, 0), VoxelIndex::new(1, 0, 0)].into();
        for x in &v {
            occ.set(*x, VoxelState::Free);
        }
        let topo = TopologicalMap::from_clusters(&[VoxelCluster::new(0, v, s).unwrap()], s).unwrap();
        let nav = build_nav_graph(&topo);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let err = benchmark_planners(&topo, &nav, &occ, 3, &mut rng).unwrap_err();
        assert!(err.to_string().contains("0 of 3"), "{err}");
    }

    #[test]
    fn median_and_summary() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(&mut []).is_nan());
    }

    #[test]
    fn capture_rows() {
        let csv = capture_csv(&[CaptureRow { voxel_size: 0.1, free_captured: 0.5, occupied_captured: 1.0 }]);
        assert_eq!(csv, "voxel_size,free_captured,occupied_captured\n0.100000,0.500000,1.000000\n");
    }
}
