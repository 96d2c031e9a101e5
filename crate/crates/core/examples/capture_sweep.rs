//! Captured free and occupied space of the office scene across voxel sizes.

use topomap::bench::capture_csv;
use topomap::config::PipelineConfig;
use topomap::pipeline::{capture_sweep, synthesize};
use topomap::synth::Preset;

fn main() -> topomap::Result<()> {
    let cfg = PipelineConfig::default();
    let synth = synthesize(Preset::Office, &cfg)?;
    let rows = capture_sweep(&synth.slam_map, &synth.scene, &[0.1, 0.15, 0.2, 0.25, 0.3, 0.4], &cfg)?;
    print!("{}", capture_csv(&rows));
    Ok(())
}
