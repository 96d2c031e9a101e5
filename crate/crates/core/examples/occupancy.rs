//! Integrates a SLAM map into a TSDF, binarizes it, filters small occupied
//! components, carves the trajectory and compares the result against the
//! rasterized scene.

use topomap::config::PipelineConfig;
use topomap::occupancy::VoxelState;
use topomap::pipeline::synthesize;
use topomap::synth::{captured_space_ratio, rasterize, Preset};
use topomap::tsdf::integrate_slam_map;

fn counts(occ: &topomap::occupancy::OccupancyGrid) -> String {
    format!("free {} occupied {}", occ.count(VoxelState::Free), occ.count(VoxelState::Occupied))
}

fn main() -> topomap::Result<()> {
    let cfg = PipelineConfig::default();
    let synth = synthesize(Preset::Office, &cfg)?;
    let tsdf_cfg = cfg.tsdf();

    let tsdf = integrate_slam_map(&synth.slam_map, &tsdf_cfg, cfg.voxel_size)?;
    println!("tsdf voxels {} (skipped rays {})", tsdf.len(), tsdf.skipped_rays());
    let occ = tsdf.binarize(&tsdf_cfg);
    println!("binarized   {}", counts(&occ));
    let occ = occ.filter_small_components(tsdf_cfg.min_component_size);
    println!("filtered    {}", counts(&occ));
    let occ = occ.carve_trajectory(&synth.slam_map.trajectory);
    println!("carved      {}", counts(&occ));

    let truth = rasterize(&synth.scene, cfg.voxel_size);
    println!("truth       {}", counts(&truth));
    let r = captured_space_ratio(&occ, &truth)?;
    println!("captured free {:.3} occupied {:.3}", r.free_captured, r.occupied_captured);
    Ok(())
}
