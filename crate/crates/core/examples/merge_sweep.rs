//! Merges the grown clusters of the open-space scene at several obstacle
//! ratio thresholds.

use topomap::cluster::grow_all;
use topomap::config::PipelineConfig;
use topomap::merge::{adjacent_pairs, merge_all, MergeConfig};
use topomap::pipeline::{build_occupancy, synthesize};
use topomap::synth::Preset;

fn main() -> topomap::Result<()> {
    let cfg = PipelineConfig::default();
    let synth = synthesize(Preset::OpenSpace, &cfg)?;
    let (occ, _, _) = build_occupancy(&synth.slam_map, &cfg, &mut Vec::new())?;
    let grown = grow_all(&occ, &synth.slam_map.trajectory, &cfg.grow())?;
    println!("grown: {} clusters, {} adjacencies", grown.len(), adjacent_pairs(&grown).len());
    for threshold in [0.0, 0.01, 0.02, 0.05, 0.1, 0.2] {
        let merge_cfg = MergeConfig { obstacle_ratio_threshold: threshold, ..cfg.merge() };
        let out = merge_all(&occ, grown.clone(), &merge_cfg)?;
        println!(
            "threshold {threshold:.2}: {} clusters, {} adjacencies, merges per pass {:?}",
            out.clusters.len(),
            adjacent_pairs(&out.clusters).len(),
            out.merges_per_pass
        );
    }
    Ok(())
}
