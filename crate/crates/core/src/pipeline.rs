//! End-to-end orchestration used by the command line tool and the examples.

use std::fs;
use std::io::BufReader;
use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bench::{benchmark_planners, BenchmarkRecord, CaptureRow};
use crate::cluster::{grow_all, VoxelCluster};
use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::merge::{adjacent_pairs, merge_all};
use crate::occupancy::{OccupancyGrid, VoxelState};
use crate::slam::{parse_slam_map, SlamMap};
use crate::synth::{build_preset, captured_space_ratio, rasterize, simulate_observations, Preset, SceneSpec};
use crate::topo::{build_nav_graph, TopologicalMap};
use crate::tsdf::integrate_slam_map;
use crate::Point3;

pub const SLAM_MAP_FILE: &str = "slam_map.txt";
pub const GROUND_TRUTH_FILE: &str = "ground_truth.grid";
pub const SCENE_FILE: &str = "scene.txt";

/// A generated scene with everything derived from it.
#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub scene: SceneSpec,
    pub trajectory: Vec<Point3>,
    pub slam_map: SlamMap,
    pub ground_truth: OccupancyGrid,
}

pub fn synthesize(preset: Preset, cfg: &PipelineConfig) -> Result<SynthOutput> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (scene, trajectory) = build_preset(preset, cfg.bounds_scale, &mut rng)?;
    let slam_map = simulate_observations(&scene, &trajectory, &cfg.observation_model())?;
    let ground_truth = rasterize(&scene, cfg.voxel_size);
    Ok(SynthOutput { scene, trajectory, slam_map, ground_truth })
}

pub fn write_synth(dir: &Path, out: &SynthOutput) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(SLAM_MAP_FILE), out.slam_map.to_text())?;
    fs::write(dir.join(GROUND_TRUTH_FILE), out.ground_truth.to_dump())?;
    fs::write(dir.join(SCENE_FILE), out.scene.to_text())?;
    Ok(())
}

pub fn read_slam_map(path: &Path) -> Result<SlamMap> {
    parse_slam_map(BufReader::new(fs::File::open(path)?))
}

pub fn read_scene(path: &Path) -> Result<SceneSpec> {
    SceneSpec::from_text(BufReader::new(fs::File::open(path)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageTiming {
    pub stage: &'static str,
    pub millis: f64,
}

/// Everything `build` produces besides the serialized map.
#[derive(Debug, Clone)]
pub struct BuildReport {
    pub topo: TopologicalMap,
    pub occupancy: OccupancyGrid,
    /// Clusters straight out of growing, before merging.
    pub grown: Vec<VoxelCluster>,
    pub merged: Vec<VoxelCluster>,
    pub merge_passes: usize,
    pub tsdf_voxels: usize,
    pub skipped_rays: usize,
    pub edges_before: usize,
    pub edges_after: usize,
    pub timings: Vec<StageTiming>,
}

impl BuildReport {
    pub fn clusters_before(&self) -> usize {
        self.grown.len()
    }

    pub fn clusters_after(&self) -> usize {
        self.merged.len()
    }

    pub fn summary(&self) -> String {
        let occ = &self.occupancy;
        let mut lines = vec![
            format!("tsdf_voxels {}", self.tsdf_voxels),
            format!("skipped_rays {}", self.skipped_rays),
            format!("occupancy free {} occupied {}", occ.count(VoxelState::Free), occ.count(VoxelState::Occupied)),
            format!("clusters_before {}", self.clusters_before()),
            format!("clusters_after {}", self.clusters_after()),
            format!("merge_passes {}", self.merge_passes),
            format!("edges_before {}", self.edges_before),
            format!("edges_after {}", self.edges_after),
            format!("portals {}", self.topo.portals.len()),
        ];
        lines.extend(self.timings.iter().map(|t| format!("time_ms {} {:.3}", t.stage, t.millis)));
        lines.join("\n")
    }
}

fn timed<T>(timings: &mut Vec<StageTiming>, stage: &'static str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let t0 = Instant::now();
    let out = f().map_err(|e| e.in_stage(stage))?;
    timings.push(StageTiming { stage, millis: t0.elapsed().as_secs_f64() * 1e3 });
    Ok(out)
}

/// Integrate, binarize, filter and (optionally) carve.
pub fn build_occupancy(
    map: &SlamMap,
    cfg: &PipelineConfig,
    timings: &mut Vec<StageTiming>,
) -> Result<(OccupancyGrid, usize, usize)> {
    cfg.validate()?;
    let tsdf_cfg = cfg.tsdf();
    let tsdf = timed(timings, "integrate", || integrate_slam_map(map, &tsdf_cfg, cfg.voxel_size))?;
    let occ = timed(timings, "binarize", || Ok(tsdf.binarize(&tsdf_cfg)))?;
    let occ = timed(timings, "filter", || Ok(occ.filter_small_components(tsdf_cfg.min_component_size)))?;
    let occ =
        if cfg.carve_trajectory { timed(timings, "carve", || Ok(occ.carve_trajectory(&map.trajectory)))? } else { occ };
    Ok((occ, tsdf.len(), tsdf.skipped_rays()))
}

pub fn build_topomap(map: &SlamMap, cfg: &PipelineConfig) -> Result<BuildReport> {
    let mut timings = Vec::new();
    let (occupancy, tsdf_voxels, skipped_rays) = build_occupancy(map, cfg, &mut timings)?;
    if occupancy.count(VoxelState::Free) == 0 {
        return Err(Error::Validation("no free space in the occupancy grid".into()).in_stage("carve"));
    }
    let grown = timed(&mut timings, "grow", || grow_all(&occupancy, &map.trajectory, &cfg.grow()))?;
    let edges_before = adjacent_pairs(&grown).len();
    let outcome = timed(&mut timings, "merge", || merge_all(&occupancy, grown.clone(), &cfg.merge()))?;
    let topo = timed(&mut timings, "portals", || TopologicalMap::from_clusters(&outcome.clusters, cfg.voxel_size))?;
    Ok(BuildReport {
        edges_after: topo.portals.len(),
        merge_passes: outcome.passes(),
        merged: outcome.clusters,
        topo,
        occupancy,
        grown,
        tsdf_voxels,
        skipped_rays,
        edges_before,
        timings,
    })
}

pub fn write_dumps(dir: &Path, report: &BuildReport) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("occupancy.grid"), report.occupancy.to_dump())?;
    for (name, clusters) in [("clusters_grown.txt", &report.grown), ("clusters_merged.txt", &report.merged)] {
        let mut text = String::new();
        for c in clusters {
            for v in &c.voxels {
                text.push_str(&format!("{} {} {} {}\n", c.id, v.i, v.j, v.k));
            }
        }
        fs::write(dir.join(name), text)?;
    }
    Ok(())
}

pub fn run_benchmark(report: &BuildReport, n_queries: usize, cfg: &PipelineConfig) -> Result<Vec<BenchmarkRecord>> {
    let nav = build_nav_graph(&report.topo);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.benchmark_seed());
    benchmark_planners(&report.topo, &nav, &report.occupancy, n_queries, &mut rng).map_err(|e| e.in_stage("benchmark"))
}

/// Sparse occupancy at each voxel size compared with the scene rasterized at
/// the same size.
pub fn capture_sweep(
    map: &SlamMap,
    scene: &SceneSpec,
    voxel_sizes: &[f64],
    cfg: &PipelineConfig,
) -> Result<Vec<CaptureRow>> {
    if voxel_sizes.is_empty() {
        return Err(Error::Config("at least one voxel size is required".into()));
    }
    voxel_sizes
        .iter()
        .map(|&voxel_size| {
            let cfg = PipelineConfig { voxel_size, ..cfg.clone() };
            let (occ, _, _) = build_occupancy(map, &cfg, &mut Vec::new())?;
            let ratio = captured_space_ratio(&occ, &rasterize(scene, voxel_size))?;
            Ok(CaptureRow {
                voxel_size,
                free_captured: ratio.free_captured,
                occupied_captured: ratio.occupied_captured,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> PipelineConfig {
        PipelineConfig { rays_per_pose: 300, voxel_size: 0.5, ..Default::default() }
    }

    #[test]
    fn corridor_end_to_end() {
        let cfg = small_cfg();
        let s = synthesize(Preset::Corridor, &cfg).unwrap();
        let report = build_topomap(&s.slam_map, &cfg).unwrap();
        assert!(report.clusters_after() <= report.clusters_before());
        assert!(report.clusters_after() >= 1);
        let stages: Vec<_> = report.timings.iter().map(|t| t.stage).collect();
        assert_eq!(stages, ["integrate", "binarize", "filter", "carve", "grow", "merge", "portals"]);
    }

    #[test]
    fn empty_map_without_carving_has_no_free_space() {
        let cfg = PipelineConfig { carve_trajectory: false, ..small_cfg() };
        let map = SlamMap { observations: vec![], trajectory: vec![Point3::new(0.0, 0.0, 0.0)] };
        let err = build_topomap(&map, &cfg).unwrap_err();
        assert!(err.to_string().contains("no free space"), "{err}");
    }

    #[test]
    fn capture_sweep_needs_sizes() {
        let cfg = small_cfg();
        let s = synthesize(Preset::Corridor, &cfg).unwrap();
        assert!(matches!(capture_sweep(&s.slam_map, &s.scene, &[], &cfg), Err(Error::Config(_))));
        assert_eq!(capture_sweep(&s.slam_map, &s.scene, &[0.5, 0.6], &cfg).unwrap().len(), 2);
    }
}
