use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;
use topomap::cluster::VoxelCluster;
use topomap::config::PipelineConfig;
use topomap::topo::TopologicalMap;
use topomap::voxel::VoxelIndex;

fn topomap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_topomap")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn synth(dir: &Path, preset: &str, seed: &str) -> Output {
    topomap(&["synth", "--preset", preset, "--out", p(dir), "--seed", seed, "--voxel-size", "0.5"])
}

/// Two 3x3x3 boxes of voxels that do not touch.
fn split_topomap(dir: &Path) -> std::path::PathBuf {
    let s = 0.5;
    let cube = |x0: i32| -> BTreeSet<VoxelIndex> {
        (0..3).flat_map(|i| (0..3).flat_map(move |j| (0..3).map(move |k| VoxelIndex::new(x0 + i, j, k)))).collect()
    };
    let clusters = [VoxelCluster::new(0, cube(0), s).unwrap(), VoxelCluster::new(1, cube(10), s).unwrap()];
    let topo = TopologicalMap::from_clusters(&clusters, s).unwrap();
    let path = dir.join("split.topomap");
    fs::write(&path, topo.to_text()).unwrap();
    path
}

#[test]
fn print_config_is_a_loadable_config() {
    let out = topomap(&["--print-config", "--seed", "9", "--voxel-size", "0.2"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let cfg = PipelineConfig::from_text(&stdout(&out)).unwrap();
    assert_eq!(cfg.seed, 9);
    assert_eq!(cfg.voxel_size, 0.2);
    assert_eq!(cfg.delta_margin, Some(0.4));
}

#[test]
fn config_file_is_applied_and_flags_win() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("run.cfg");
    fs::write(&path, "# run\nseed = 4\nobstacle_ratio_threshold = 0.02\n").unwrap();
    let out = topomap(&["--config", p(&path), "--seed", "5", "--print-config"]);
    assert_eq!(code(&out), 0);
    let cfg = PipelineConfig::from_text(&stdout(&out)).unwrap();
    assert_eq!(cfg.seed, 5);
    assert_eq!(cfg.obstacle_ratio_threshold, 0.02);
}

#[test]
fn usage_and_config_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, "voxel = 1\n").unwrap();
    for args in [
        vec![],
        vec!["frobnicate"],
        vec!["--config", p(&bad), "--print-config"],
        vec!["--config", "/nonexistent/run.cfg", "--print-config"],
        vec!["--voxel-size", "-1", "--print-config"],
        vec!["plan", "--topomap", "x", "1", "2"],
        vec!["eval-capture", "--scene", "x", "--out", "y"],
        vec!["eval-capture", "--scene", "x", "--voxel-sizes", "", "--out", "y"],
    ] {
        let out = topomap(&args);
        assert_eq!(code(&out), 2, "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn unknown_preset_lists_the_known_ones() {
    let dir = TempDir::new().unwrap();
    let out = synth(dir.path(), "castle", "0");
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    for name in ["office", "warehouse", "open_space", "pillars", "two_room", "corridor"] {
        assert!(err.contains(name), "{err}");
    }
}

#[test]
fn synth_is_deterministic_per_seed() {
    let dir = TempDir::new().unwrap();
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    for (d, seed) in [(&a, "3"), (&b, "3"), (&c, "4")] {
        let out = synth(d, "two_room", seed);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    for f in ["slam_map.txt", "ground_truth.grid", "scene.txt"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    assert_ne!(fs::read(a.join("slam_map.txt")).unwrap(), fs::read(c.join("slam_map.txt")).unwrap());
}

#[test]
fn build_plan_round_trip() {
    let dir = TempDir::new().unwrap();
    let scene = dir.path().join("scene");
    assert_eq!(code(&synth(&scene, "corridor", "1")), 0);
    let map = scene.join("slam_map.txt");
    let topo = dir.path().join("out/corridor.topomap");
    let dumps = dir.path().join("dumps");
    let out = topomap(&["build", "--map", p(&map), "--out", p(&topo), "--dump-dir", p(&dumps), "--voxel-size", "0.5"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let summary = stdout(&out);
    assert!(summary.contains("clusters_after"), "{summary}");
    for f in ["occupancy.grid", "clusters_grown.txt", "clusters_merged.txt"] {
        assert!(dumps.join(f).is_file(), "{f}");
    }

    let out = topomap(&["plan", "--topomap", p(&topo), "2", "1", "1.5", "10", "1", "1.5"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    let length: f64 = text.lines().last().unwrap().strip_prefix("length ").unwrap().parse().unwrap();
    assert!(length >= 8.0 - 1e-6, "{text}");
    assert!(text.starts_with("2.000000 1.000000 1.500000\n"), "{text}");

    let out = topomap(&["plan", "--topomap", p(&topo), "3", "1", "1.5", "3", "1", "1.5"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "3.000000 1.000000 1.500000\n3.000000 1.000000 1.500000\nlength 0.000000\n");

    let out = topomap(&["plan", "--topomap", p(&topo), "2", "1", "1.5", "-40", "1", "1.5"]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
}

#[test]
fn disconnected_clusters_exit_4() {
    let dir = TempDir::new().unwrap();
    let topo = split_topomap(dir.path());
    let out = topomap(&["plan", "--topomap", p(&topo), "0.75", "0.75", "0.75", "5.75", "0.75", "0.75"]);
    assert_eq!(code(&out), 4, "{}", stderr(&out));
    let out = topomap(&["plan", "--topomap", p(&topo), "0.25", "0.25", "0.25", "1.25", "1.25", "1.25"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

#[test]
fn io_and_format_errors_exit_5() {
    let dir = TempDir::new().unwrap();
    let garbage = dir.path().join("garbage.txt");
    fs::write(&garbage, "T 1.0 2.0\n").unwrap();
    let out = topomap(&["build", "--map", p(&garbage), "--out", p(&dir.path().join("t"))]);
    assert_eq!(code(&out), 5, "{}", stderr(&out));
    assert!(stderr(&out).contains("line 1"), "{}", stderr(&out));

    let out = topomap(&["build", "--map", p(&dir.path().join("missing.txt")), "--out", p(&dir.path().join("t"))]);
    assert_eq!(code(&out), 5);

    let out = topomap(&["plan", "--topomap", p(&garbage), "0", "0", "0", "1", "1", "1"]);
    assert_eq!(code(&out), 5);

    // a regular file where a directory is needed
    let out = synth(&garbage.join("sub"), "corridor", "0");
    assert_eq!(code(&out), 5, "{}", stderr(&out));
}

#[test]
fn benchmark_and_capture_write_csv() {
    let dir = TempDir::new().unwrap();
    let scene = dir.path().join("scene");
    assert_eq!(code(&synth(&scene, "two_room", "2")), 0);
    let csv = dir.path().join("bench.csv");
    let out = topomap(&[
        "benchmark",
        "--scene",
        p(&scene),
        "--queries",
        "5",
        "--out",
        p(&csv),
        "--no-timings",
        "--voxel-size",
        "0.5",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 6);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",0.000,0.000")), "{text}");

    let csv = dir.path().join("capture.csv");
    let out = topomap(&["eval-capture", "--scene", p(&scene), "--voxel-sizes", "0.3,0.5", "--out", p(&csv)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text, stdout(&out));
    assert_eq!(text.lines().next().unwrap(), "voxel_size,free_captured,occupied_captured");
    assert_eq!(text.lines().count(), 3);
}
