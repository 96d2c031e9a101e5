//! Builds every preset end to end and prints cluster counts, storage sizes
//! and planner statistics.
//!
//! cargo run --release --example preset_report [-- queries=100 key=value ...]

use topomap::bench::summarize;
use topomap::config::PipelineConfig;
use topomap::merge::obstacle_ratio;
use topomap::pipeline::{build_topomap, run_benchmark, synthesize};
use topomap::synth::Preset;

fn main() -> topomap::Result<()> {
    let mut queries = 100;
    let mut cfg = PipelineConfig::default();
    for arg in std::env::args().skip(1) {
        let Some((key, value)) = arg.split_once('=') else {
            return Err(topomap::Error::Config(format!("expected key=value, got `{arg}`")));
        };
        match key {
            "queries" => queries = value.parse().map_err(|_| topomap::Error::Config("bad query count".into()))?,
            _ => cfg.set(key, value)?,
        }
    }
    cfg.validate()?;
    for preset in Preset::ALL {
        let synth = synthesize(preset, &cfg)?;
        let report = build_topomap(&synth.slam_map, &cfg)?;
        let worst = report
            .merged
            .iter()
            .map(|c| obstacle_ratio(&report.occupancy, &c.hull))
            .collect::<topomap::Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        let topo_bytes = report.topo.to_text().len();
        let occ_bytes = report.occupancy.to_dump().len();
        println!(
            "{preset}: observations {} clusters {} -> {} in {} passes, edges {} -> {}, worst ratio {worst:.4}, bytes {topo_bytes} vs {occ_bytes}",
            synth.slam_map.observations.len(),
            report.clusters_before(),
            report.clusters_after(),
            report.merge_passes,
            report.edges_before,
            report.edges_after,
        );
        for t in &report.timings {
            print!(" {} {:.0}ms", t.stage, t.millis);
        }
        println!();
        let s = summarize(&run_benchmark(&report, queries, &cfg)?);
        println!(
            "  norm topo {:.3} grid {:.3} max ratio {:.3}, median us topo {:.1} grid {:.1}",
            s.mean_topo_norm, s.mean_grid_norm, s.max_norm_ratio, s.median_topo_us, s.median_grid_us
        );
    }
    Ok(())
}
