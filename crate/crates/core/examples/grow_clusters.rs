//! Grows convex clusters from the trajectory of the two-room scene and
//! prints each cluster's size and bounding box.

use topomap::cluster::grow_all;
use topomap::config::PipelineConfig;
use topomap::pipeline::{build_occupancy, synthesize};
use topomap::synth::Preset;

fn main() -> topomap::Result<()> {
    let cfg = PipelineConfig::default();
    let synth = synthesize(Preset::TwoRoom, &cfg)?;
    let (occ, _, _) = build_occupancy(&synth.slam_map, &cfg, &mut Vec::new())?;
    let clusters = grow_all(&occ, &synth.slam_map.trajectory, &cfg.grow())?;
    println!("{} clusters", clusters.len());
    for c in &clusters {
        let (lo, hi) = c.hull.aabb();
        println!(
            "  {:>3}: {:>5} voxels, {:>6.2} m3, x {:.2}..{:.2} y {:.2}..{:.2}",
            c.id,
            c.len(),
            c.volume(cfg.voxel_size),
            lo.x,
            hi.x,
            lo.y,
            hi.y
        );
    }
    Ok(())
}
