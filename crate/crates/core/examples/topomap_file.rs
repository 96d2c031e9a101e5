//! Serializes a topological map, reads it back and checks that point
//! location agrees between the two.

use topomap::config::PipelineConfig;
use topomap::pipeline::{build_topomap, synthesize};
use topomap::synth::Preset;
use topomap::topo::TopologicalMap;

fn main() -> topomap::Result<()> {
    let cfg = PipelineConfig::default();
    let synth = synthesize(Preset::Warehouse, &cfg)?;
    let report = build_topomap(&synth.slam_map, &cfg)?;
    let text = report.topo.to_text();
    let back = TopologicalMap::from_text(text.as_bytes())?;
    println!(
        "{} vertices, {} portals: {} bytes vs {} bytes of occupancy dump",
        back.vertices.len(),
        back.portals.len(),
        text.len(),
        report.occupancy.to_dump().len()
    );

    let mut agree = 0;
    let mut total = 0;
    for v in report.topo.vertices.iter().filter_map(|v| v.voxels.as_ref()) {
        for voxel in v.iter().step_by(7) {
            let p = voxel.center(cfg.voxel_size);
            total += 1;
            if back.locate(&p).ok().is_some_and(|id| back.vertex_covers(id, &p)) {
                agree += 1;
            }
        }
    }
    println!("located {agree} of {total} sampled cluster voxels in the file-backed map");
    Ok(())
}
