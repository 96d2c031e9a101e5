//! Writes a synthetic SLAM map to text, parses it back and prints its summary.
//!
//! cargo run --release --example slam_map_io [-- preset]

use topomap::config::PipelineConfig;
use topomap::pipeline::synthesize;
use topomap::slam::parse_slam_map;
use topomap::synth::Preset;

fn main() -> topomap::Result<()> {
    let preset: Preset = std::env::args().nth(1).as_deref().unwrap_or("two_room").parse()?;
    let cfg = PipelineConfig::default();
    let synth = synthesize(preset, &cfg)?;
    let text = synth.slam_map.to_text();
    let map = parse_slam_map(text.as_bytes())?;
    assert_eq!(map.observations.len(), synth.slam_map.observations.len());
    assert_eq!(map.trajectory.len(), synth.slam_map.trajectory.len());

    let stats = map.stats();
    let bb = &stats.bounding_box;
    println!("{preset}: {} bytes of map text", text.len());
    println!("observations {}", stats.observation_count);
    println!("poses {}, trajectory {:.2} m", map.trajectory.len(), stats.trajectory_length_m);
    println!(
        "bounding box ({:.2}, {:.2}, {:.2}) .. ({:.2}, {:.2}, {:.2})",
        bb.min.x, bb.min.y, bb.min.z, bb.max.x, bb.max.y, bb.max.z
    );
    Ok(())
}
