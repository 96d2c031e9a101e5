use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use topomap::bench::{benchmark_csv, capture_csv, summarize};
use topomap::config::PipelineConfig;
use topomap::pipeline::{
    build_topomap, capture_sweep, read_scene, read_slam_map, run_benchmark, synthesize, write_dumps, write_synth,
    SCENE_FILE, SLAM_MAP_FILE,
};
use topomap::synth::Preset;
use topomap::topo::{build_nav_graph, plan, TopologicalMap};
use topomap::{Error, Point3};

/// Topological maps of convex free space from sparse SLAM maps.
#[derive(Debug, Parser)]
#[command(name = "topomap", version)]
struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    voxel_size: Option<f64>,
    /// Print the resolved configuration and exit.
    #[arg(long, global = true)]
    print_config: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic scene, its SLAM map and ground truth.
    Synth {
        #[arg(long)]
        preset: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a topological map from a SLAM map file.
    Build {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Write occupancy and cluster dumps into this directory.
        #[arg(long)]
        dump_dir: Option<PathBuf>,
        /// Skip carving the trajectory into free space.
        #[arg(long)]
        no_carve: bool,
    },
    /// Plan between two points: ax ay az bx by bz.
    Plan {
        #[arg(long)]
        topomap: PathBuf,
        #[arg(num_args = 6, allow_negative_numbers = true, required = true)]
        coords: Vec<f64>,
    },
    /// Compare topological and grid planning on random queries.
    Benchmark {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long, default_value_t = 100)]
        queries: usize,
        #[arg(long)]
        out: PathBuf,
        /// Zero the timing columns so the CSV depends only on the seed.
        #[arg(long)]
        no_timings: bool,
    },
    /// Captured free/occupied space against ground truth per voxel size.
    EvalCapture {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        voxel_sizes: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn exit_code(err: &Error) -> u8 {
    match err.root() {
        Error::Config(_) => 2,
        Error::NotLocated { .. } => 3,
        Error::NoPath => 4,
        Error::Io(_) | Error::Parse { .. } | Error::Format(_) => 5,
        _ => 1,
    }
}

fn resolve_config(cli: &Cli) -> topomap::Result<PipelineConfig> {
    let mut cfg = PipelineConfig::default();
    if let Some(path) = &cli.config {
        let text =
            fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        cfg.apply_text(&text)?;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(v) = cli.voxel_size {
        cfg.voxel_size = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write(path: &Path, text: &str) -> topomap::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(fs::write(path, text)?)
}

fn run(cli: Cli) -> topomap::Result<()> {
    let mut cfg = resolve_config(&cli)?;
    if cli.print_config {
        print!("{}", cfg.to_text());
        return Ok(());
    }
    let Some(command) = cli.command else {
        return Err(Error::Config("no command given; see --help".into()));
    };
    match command {
        Command::Synth { preset, out } => {
            let preset: Preset = preset.parse()?;
            let s = synthesize(preset, &cfg)?;
            write_synth(&out, &s)?;
            let stats = s.slam_map.stats();
            println!("preset {preset}");
            println!("observations {}", stats.observation_count);
            println!("poses {}", s.trajectory.len());
            println!("trajectory_length_m {:.6}", stats.trajectory_length_m);
            println!("obstacles {}", s.scene.obstacles.len());
            println!("ground_truth_voxels {}", s.ground_truth.len());
        }
        Command::Build { map, out, dump_dir, no_carve } => {
            if no_carve {
                cfg.carve_trajectory = false;
            }
            let map = read_slam_map(&map)?;
            let report = build_topomap(&map, &cfg)?;
            write(&out, &report.topo.to_text())?;
            if let Some(dir) = dump_dir {
                write_dumps(&dir, &report)?;
            }
            println!("{}", report.summary());
        }
        Command::Plan { topomap, coords } => {
            let text = fs::read_to_string(&topomap)?;
            let topo = TopologicalMap::from_text(text.as_bytes())?;
            let nav = build_nav_graph(&topo);
            let a = Point3::new(coords[0], coords[1], coords[2]);
            let b = Point3::new(coords[3], coords[4], coords[5]);
            let result = plan(&topo, &nav, &a, &b)?;
            for w in &result.waypoints {
                println!("{:.6} {:.6} {:.6}", w.x, w.y, w.z);
            }
            println!("length {:.6}", result.length);
        }
        Command::Benchmark { scene, queries, out, no_timings } => {
            let map = read_slam_map(&scene.join(SLAM_MAP_FILE))?;
            let report = build_topomap(&map, &cfg)?;
            let records = run_benchmark(&report, queries, &cfg)?;
            write(&out, &benchmark_csv(&records, !no_timings))?;
            let s = summarize(&records);
            println!("queries {}", s.queries);
            println!("mean_topo_norm {:.6}", s.mean_topo_norm);
            println!("mean_grid_norm {:.6}", s.mean_grid_norm);
            println!("max_topo_norm {:.6}", s.max_topo_norm);
            println!("max_grid_norm {:.6}", s.max_grid_norm);
            if !no_timings {
                println!("median_topo_us {:.3}", s.median_topo_us);
                println!("median_grid_us {:.3}", s.median_grid_us);
            }
        }
        Command::EvalCapture { scene, voxel_sizes, out } => {
            let map = read_slam_map(&scene.join(SLAM_MAP_FILE))?;
            let spec = read_scene(&scene.join(SCENE_FILE))?;
            let rows = capture_sweep(&map, &spec, &voxel_sizes, &cfg)?;
            let csv = capture_csv(&rows);
            write(&out, &csv)?;
            print!("{csv}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
