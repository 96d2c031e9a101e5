//! Plans across the office scene on the topological map and on the voxel
//! grid and prints both routes. Without arguments the route runs between the
//! southernmost and northernmost poses of the trajectory.
//!
//! cargo run --release --example plan_route [-- ax ay az bx by bz]

use topomap::config::PipelineConfig;
use topomap::grid::grid_astar;
use topomap::pipeline::{build_topomap, synthesize};
use topomap::synth::Preset;
use topomap::topo::{build_nav_graph, plan};
use topomap::Point3;

fn main() -> topomap::Result<()> {
    let args: Vec<f64> = std::env::args()
        .skip(1)
        .map(|a| a.parse().map_err(|_| topomap::Error::Config(format!("not a number: {a}"))))
        .collect::<topomap::Result<_>>()?;
    let cfg = PipelineConfig::default();
    let synth = synthesize(Preset::Office, &cfg)?;
    let (a, b) = match args[..] {
        [ax, ay, az, bx, by, bz] => (Point3::new(ax, ay, az), Point3::new(bx, by, bz)),
        [] => {
            let by_y = |p: &&Point3, q: &&Point3| p.y.total_cmp(&q.y);
            let t = &synth.trajectory;
            (*t.iter().min_by(by_y).unwrap(), *t.iter().max_by(by_y).unwrap())
        }
        _ => return Err(topomap::Error::Config("expected six coordinates".into())),
    };
    let report = build_topomap(&synth.slam_map, &cfg)?;
    let nav = build_nav_graph(&report.topo);

    let route = plan(&report.topo, &nav, &a, &b)?;
    println!("topological route {:.2} m through clusters {:?}", route.length, route.vertex_sequence);
    for w in &route.waypoints {
        println!("  ({:.2}, {:.2}, {:.2})", w.x, w.y, w.z);
    }
    match grid_astar(&report.occupancy, &a, &b) {
        Ok(g) => println!("grid route {:.2} m, {} waypoints, {} expansions", g.length, g.waypoints.len(), g.expanded),
        Err(e) => println!("grid route: {e}"),
    }
    println!("straight line {:.2} m", (b - a).norm());
    Ok(())
}
