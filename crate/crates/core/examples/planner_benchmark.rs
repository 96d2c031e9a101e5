//! Random query benchmark of the topological planner against grid A*.
//!
//! cargo run --release --example planner_benchmark [-- preset queries]

use topomap::bench::{benchmark_csv, summarize};
use topomap::config::PipelineConfig;
use topomap::pipeline::{build_topomap, run_benchmark, synthesize};
use topomap::synth::Preset;

fn main() -> topomap::Result<()> {
    let mut args = std::env::args().skip(1);
    let preset: Preset = args.next().as_deref().unwrap_or("warehouse").parse()?;
    let queries = args.next().and_then(|q| q.parse().ok()).unwrap_or(50);

    let cfg = PipelineConfig::default();
    let synth = synthesize(preset, &cfg)?;
    let report = build_topomap(&synth.slam_map, &cfg)?;
    let records = run_benchmark(&report, queries, &cfg)?;
    for line in benchmark_csv(&records, true).lines().take(6) {
        println!("{line}");
    }
    let s = summarize(&records);
    println!("...");
    println!("mean normalized length: topo {:.3} grid {:.3}", s.mean_topo_norm, s.mean_grid_norm);
    println!("worst topo/grid ratio {:.3}", s.max_norm_ratio);
    println!("median time: topo {:.1} us, grid {:.1} us", s.median_topo_us, s.median_grid_us);
    Ok(())
}
