//! Synthetic scenes: box-world presets, ground-truth rasterization, simulated
//! landmark observations and the captured-space evaluation.

use std::fmt;
use std::fmt::Write as _;
use std::io::BufRead;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, UnitSphere};

use crate::error::{Error, Result};
use crate::occupancy::{OccupancyGrid, VoxelState};
use crate::slam::{Aabb, LandmarkObservation, SlamMap};
use crate::voxel::VoxelIndex;
use crate::{Point3, Vector3};

/// Named scene layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    Office,
    Warehouse,
    OpenSpace,
    Pillars,
    TwoRoom,
    Corridor,
}

impl Preset {
    pub const ALL: [Preset; 6] =
        [Preset::Office, Preset::Warehouse, Preset::OpenSpace, Preset::Pillars, Preset::TwoRoom, Preset::Corridor];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Office => "office",
            Preset::Warehouse => "warehouse",
            Preset::OpenSpace => "open_space",
            Preset::Pillars => "pillars",
            Preset::TwoRoom => "two_room",
            Preset::Corridor => "corridor",
        }
    }

    pub fn names() -> String {
        Self::ALL.map(Preset::name).join(", ")
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown preset `{s}`; expected one of: {}", Self::names())))
    }
}

/// Axis-aligned box world: everything inside `bounds` is free unless covered
/// by an obstacle.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub preset: Preset,
    pub bounds: Aabb,
    pub obstacles: Vec<Aabb>,
}

const WALL: f64 = 0.5;
const HEIGHT: f64 = 3.0;
const EYE: f64 = 1.5;
const DOOR_HEIGHT: f64 = 2.25;

fn aabb(x0: f64, y0: f64, z0: f64, x1: f64, y1: f64, z1: f64) -> Aabb {
    Aabb { min: Point3::new(x0, y0, z0), max: Point3::new(x1, y1, z1) }
}

struct Builder {
    width: f64,
    depth: f64,
    obstacles: Vec<Aabb>,
    trajectory: Vec<Point3>,
}

impl Builder {
    /// Closed room with interior `[0, width] x [0, depth] x [0, HEIGHT]`.
    fn room(width: f64, depth: f64) -> Self {
        let (w, d, h, t) = (width, depth, HEIGHT, WALL);
        let obstacles = vec![
            aabb(-t, -t, -t, w + t, d + t, 0.0),
            aabb(-t, -t, h, w + t, d + t, h + t),
            aabb(-t, -t, 0.0, 0.0, d + t, h),
            aabb(w, -t, 0.0, w + t, d + t, h),
            aabb(0.0, -t, 0.0, w, 0.0, h),
            aabb(0.0, d, 0.0, w, d + t, h),
        ];
        Self { width, depth, obstacles, trajectory: Vec::new() }
    }

    fn block(&mut self, x0: f64, y0: f64, x1: f64, y1: f64, height: f64) {
        self.obstacles.push(aabb(x0, y0, 0.0, x1, y1, height));
    }

    /// Wall along x at `y0..y0 + WALL` over `[x0, x1]` with door openings
    /// `(center_x, width)`.
    fn wall_x(&mut self, x0: f64, x1: f64, y0: f64, doors: &[(f64, f64)]) {
        let mut cursor = x0;
        let y1 = y0 + WALL;
        for &(c, w) in doors {
            self.block(cursor, y0, c - w / 2.0, y1, HEIGHT);
            self.obstacles.push(aabb(c - w / 2.0, y0, DOOR_HEIGHT, c + w / 2.0, y1, HEIGHT));
            cursor = c + w / 2.0;
        }
        self.block(cursor, y0, x1, y1, HEIGHT);
    }

    /// Wall along y at `x0..x0 + WALL` over `[y0, y1]` with door openings.
    fn wall_y(&mut self, y0: f64, y1: f64, x0: f64, doors: &[(f64, f64)]) {
        let mut cursor = y0;
        let x1 = x0 + WALL;
        for &(c, w) in doors {
            self.block(x0, cursor, x1, c - w / 2.0, HEIGHT);
            self.obstacles.push(aabb(x0, c - w / 2.0, DOOR_HEIGHT, x1, c + w / 2.0, HEIGHT));
            cursor = c + w / 2.0;
        }
        self.block(x0, cursor, x1, y1, HEIGHT);
    }

    /// Appends a polyline through `(x, y)` corners at eye height, sampled
    /// every half meter.
    fn path(&mut self, corners: &[(f64, f64)]) {
        let step = 0.5;
        for w in corners.windows(2) {
            let a = Point3::new(w[0].0, w[0].1, EYE);
            let b = Point3::new(w[1].0, w[1].1, EYE);
            let n = ((b - a).norm() / step).ceil().max(1.0) as usize;
            if self.trajectory.is_empty() {
                self.trajectory.push(a);
            }
            for s in 1..=n {
                self.trajectory.push(a + (b - a) * (s as f64 / n as f64));
            }
        }
    }

    fn finish(self, preset: Preset, scale: f64) -> (SceneSpec, Vec<Point3>) {
        let t = WALL;
        let bounds = aabb(-t, -t, -t, self.width + t, self.depth + t, HEIGHT + t);
        let s = |p: Point3| Point3::from(p.coords * scale);
        let sb = |b: Aabb| Aabb { min: s(b.min), max: s(b.max) };
        let scene = SceneSpec { preset, bounds: sb(bounds), obstacles: self.obstacles.into_iter().map(sb).collect() };
        (scene, self.trajectory.into_iter().map(s).collect())
    }
}

/// Builds a preset scene and its explorer trajectory. `bounds_scale` scales
/// every coordinate; `rng` drives the randomized parts of the layout.
pub fn build_preset<R: Rng>(preset: Preset, bounds_scale: f64, rng: &mut R) -> Result<(SceneSpec, Vec<Point3>)> {
    if !(bounds_scale > 0.0 && bounds_scale.is_finite()) {
        return Err(Error::Config("bounds_scale must be > 0".into()));
    }
    let b = match preset {
        Preset::Corridor => {
            let mut b = Builder::room(12.0, 2.0);
            b.path(&[(0.75, 1.0), (11.25, 1.0)]);
            b
        }
        Preset::TwoRoom => {
            let mut b = Builder::room(12.0, 6.0);
            b.wall_y(0.0, 6.0, 5.75, &[(3.0, 1.0)]);
            b.path(&[(1.5, 1.5), (4.5, 1.5), (4.5, 4.5), (1.5, 4.5), (1.5, 3.0), (4.5, 3.0), (7.5, 3.0)]);
            b.path(&[(7.5, 3.0), (7.5, 1.5), (10.5, 1.5), (10.5, 4.5), (7.5, 4.5)]);
            b
        }
        Preset::Office => {
            // central corridor y in [4, 6] with three rooms on each side
            let mut b = Builder::room(14.0, 10.0);
            b.wall_x(0.0, 14.0, 3.5, &[(2.5, 1.0), (7.0, 1.0), (11.5, 1.0)]);
            b.wall_x(0.0, 14.0, 6.5, &[(2.5, 1.0), (7.0, 1.0), (11.5, 1.0)]);
            for x in [4.5, 9.5] {
                b.wall_y(0.0, 3.5, x, &[]);
                b.wall_y(7.0, 10.0, x, &[]);
            }
            b.path(&[(0.75, 5.25), (2.5, 5.25), (2.5, 1.75), (2.5, 5.25), (7.0, 5.25), (7.0, 8.5)]);
            b.path(&[(7.0, 8.5), (7.0, 5.25), (11.5, 5.25), (11.5, 1.75), (11.5, 5.25), (13.25, 5.25)]);
            b.path(&[(13.25, 5.25), (11.5, 5.25), (11.5, 8.5)]);
            b
        }
        Preset::Warehouse => {
            // shelf rows split by a cross aisle
            let mut b = Builder::room(20.0, 12.0);
            for y in [2.5, 5.5, 8.5] {
                b.block(3.0, y, 9.5, y + 1.0, 2.5);
                b.block(10.5, y, 17.0, y + 1.0, 2.5);
            }
            b.path(&[(1.5, 1.25), (18.5, 1.25), (18.5, 10.75), (1.5, 10.75), (1.5, 1.25)]);
            b.path(&[(1.5, 1.25), (1.5, 4.5), (18.5, 4.5), (18.5, 7.5), (1.5, 7.5)]);
            b.path(&[(1.5, 7.5), (1.5, 1.25), (10.0, 1.25), (10.0, 10.75)]);
            b
        }
        Preset::OpenSpace => {
            let mut b = Builder::room(16.0, 12.0);
            b.path(&[(3.0, 3.0), (13.0, 3.0), (13.0, 9.0), (3.0, 9.0), (3.0, 3.0)]);
            b.path(&[(3.0, 3.0), (8.0, 6.0), (13.0, 9.0), (13.0, 6.0), (3.0, 6.0), (3.0, 9.0), (13.0, 3.0)]);
            // a few tables and columns placed away from the loop
            let slots = [(5.5, 5.0), (10.5, 5.0), (5.5, 7.0), (10.5, 7.0), (8.0, 10.5), (8.0, 1.25)];
            for (n, &(cx, cy)) in slots.iter().enumerate() {
                let jx: f64 = rng.random_range(-0.25..0.25);
                let jy: f64 = rng.random_range(-0.25..0.25);
                let (cx, cy) = (cx + jx, cy + jy);
                if n < 4 {
                    b.block(cx - 0.5, cy - 0.4, cx + 0.5, cy + 0.4, 0.75);
                } else {
                    b.block(cx - 0.25, cy - 0.25, cx + 0.25, cy + 0.25, HEIGHT);
                }
            }
            b
        }
        Preset::Pillars => {
            // a row of pillars down the hall, explorer circles the perimeter only
            let mut b = Builder::room(14.0, 4.0);
            for px in [2.5, 5.5, 8.5, 11.5] {
                b.block(px - 0.25, 1.75, px + 0.25, 2.25, HEIGHT);
            }
            b.path(&[(1.0, 0.75), (13.0, 0.75), (13.0, 3.25), (1.0, 3.25), (1.0, 0.75)]);
            b.path(&[(1.0, 0.75), (1.5, 1.0), (12.5, 1.0), (12.5, 3.0), (1.5, 3.0), (1.5, 1.0)]);
            b
        }
    };
    Ok(b.finish(preset, bounds_scale))
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.bounds.volume() > 0.0) {
            return Err(Error::Validation("scene bounds have no volume".into()));
        }
        for o in &self.obstacles {
            if !self.bounds.contains(&o.min) || !self.bounds.contains(&o.max) {
                return Err(Error::Validation(format!("obstacle {o:?} leaves the scene bounds")));
            }
        }
        Ok(())
    }

    pub fn is_blocked(&self, p: &Point3) -> bool {
        self.obstacles.iter().any(|o| o.contains(p))
    }

    /// Distance along the unit direction `dir` to the first obstacle surface,
    /// by the slab method.
    pub fn cast(&self, origin: &Point3, dir: &Vector3) -> Option<f64> {
        self.obstacles.iter().filter_map(|o| ray_box(origin, dir, o)).min_by(f64::total_cmp)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("SCENE v1 preset={}\n", self.preset);
        let line = |out: &mut String, tag: &str, b: &Aabb| {
            let _ = writeln!(
                out,
                "{tag} {:.6} {:.6} {:.6} {:.6} {:.6} {:.6}",
                b.min.x, b.min.y, b.min.z, b.max.x, b.max.y, b.max.z
            );
        };
        line(&mut out, "bounds", &self.bounds);
        for o in &self.obstacles {
            line(&mut out, "box", o);
        }
        out
    }

    pub fn from_text<R: BufRead>(reader: R) -> Result<Self> {
        let mut preset = None;
        let mut bounds = None;
        let mut obstacles = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let n = idx + 1;
            let bad = |m: &str| Error::Parse { line: n, message: m.to_string() };
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields.first().copied() {
                None => continue,
                Some("SCENE") => {
                    let name = line
                        .trim()
                        .strip_prefix("SCENE v1 preset=")
                        .ok_or_else(|| bad("expected `SCENE v1 preset=<name>`"))?;
                    preset = Some(name.parse::<Preset>()?);
                }
                Some(tag @ ("bounds" | "box")) => {
                    if fields.len() != 7 {
                        return Err(bad("box needs 6 coordinates"));
                    }
                    let c: Vec<f64> = fields[1..]
                        .iter()
                        .map(|f| f.parse::<f64>().map_err(|_| bad("bad number")))
                        .collect::<Result<_>>()?;
                    let b = aabb(c[0], c[1], c[2], c[3], c[4], c[5]);
                    if tag == "bounds" {
                        bounds = Some(b);
                    } else {
                        obstacles.push(b);
                    }
                }
                Some(_) => return Err(bad("unknown record")),
            }
        }
        let scene = SceneSpec {
            preset: preset.ok_or_else(|| Error::Parse { line: 0, message: "missing SCENE header".into() })?,
            bounds: bounds.ok_or_else(|| Error::Parse { line: 0, message: "missing bounds".into() })?,
            obstacles,
        };
        scene.validate()?;
        Ok(scene)
    }
}

fn ray_box(origin: &Point3, dir: &Vector3, b: &Aabb) -> Option<f64> {
    let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
    for a in 0..3 {
        if dir[a] == 0.0 {
            if origin[a] < b.min[a] || origin[a] > b.max[a] {
                return None;
            }
        } else {
            let t0 = (b.min[a] - origin[a]) / dir[a];
            let t1 = (b.max[a] - origin[a]) / dir[a];
            lo = lo.max(t0.min(t1));
            hi = hi.min(t0.max(t1));
        }
    }
    (lo <= hi).then_some(lo)
}

/// Ground-truth occupancy: every voxel whose center lies in the bounds, occupied
/// iff the center lies inside an obstacle.
pub fn rasterize(scene: &SceneSpec, voxel_size: f64) -> OccupancyGrid {
    let mut grid = OccupancyGrid::new(voxel_size);
    let lo = |x: f64| (x / voxel_size - 0.5).ceil() as i32;
    let hi = |x: f64| (x / voxel_size - 0.5).floor() as i32;
    let (b0, b1) = (scene.bounds.min, scene.bounds.max);
    for k in lo(b0.z)..=hi(b1.z) {
        for j in lo(b0.y)..=hi(b1.y) {
            for i in lo(b0.x)..=hi(b1.x) {
                let v = VoxelIndex::new(i, j, k);
                let state =
                    if scene.is_blocked(&v.center(voxel_size)) { VoxelState::Occupied } else { VoxelState::Free };
                grid.set(v, state);
            }
        }
    }
    grid
}

/// Sensor stand-in for the visual front end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservationModel {
    pub max_range: f64,
    pub rays_per_pose: usize,
    pub landmark_noise_sigma: f64,
    pub rng_seed: u64,
}

impl Default for ObservationModel {
    fn default() -> Self {
        Self { max_range: 5.0, rays_per_pose: 60, landmark_noise_sigma: 0.02, rng_seed: 0 }
    }
}

impl ObservationModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.max_range > 0.0) || self.rays_per_pose == 0 || !(self.landmark_noise_sigma >= 0.0) {
            return Err(Error::Config("observation model needs max_range > 0, rays_per_pose > 0, sigma >= 0".into()));
        }
        Ok(())
    }
}

/// Casts `rays_per_pose` uniformly distributed rays from every pose; each ray
/// hitting an obstacle within range yields a landmark at the hit point plus
/// isotropic Gaussian noise.
pub fn simulate_observations(scene: &SceneSpec, trajectory: &[Point3], model: &ObservationModel) -> Result<SlamMap> {
    model.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(model.rng_seed);
    let noise = Normal::new(0.0, model.landmark_noise_sigma).map_err(|e| Error::Config(e.to_string()))?;
    let mut observations = Vec::new();
    for pose in trajectory {
        for _ in 0..model.rays_per_pose {
            let d: [f64; 3] = UnitSphere.sample(&mut rng);
            let dir = Vector3::new(d[0], d[1], d[2]);
            let jitter = Vector3::new(noise.sample(&mut rng), noise.sample(&mut rng), noise.sample(&mut rng));
            let Some(t) = scene.cast(pose, &dir) else { continue };
            if t > model.max_range || t <= 0.0 {
                continue;
            }
            let landmark = pose + dir * t + jitter;
            if landmark != *pose {
                observations.push(LandmarkObservation { observer: *pose, landmark });
            }
        }
    }
    Ok(SlamMap { observations, trajectory: trajectory.to_vec() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaptureRatio {
    pub free_captured: f64,
    pub occupied_captured: f64,
}

/// Share of reference free voxels that are free in `test`, and share of
/// reference occupied voxels that are occupied or unknown in `test`.
pub fn captured_space_ratio(test: &OccupancyGrid, reference: &OccupancyGrid) -> Result<CaptureRatio> {
    if (test.voxel_size() - reference.voxel_size()).abs() > 1e-12 {
        return Err(Error::Validation(format!(
            "voxel size mismatch: {} vs {}",
            test.voxel_size(),
            reference.voxel_size()
        )));
    }
    let (mut free, mut free_hit, mut occ, mut occ_hit) = (0usize, 0usize, 0usize, 0usize);
    for (v, s) in reference.iter() {
        let t = test.state(&v);
        match s {
            VoxelState::Free => {
                free += 1;
                free_hit += (t == VoxelState::Free) as usize;
            }
            VoxelState::Occupied => {
                occ += 1;
                occ_hit += (t != VoxelState::Free) as usize;
            }
            VoxelState::Unknown => {}
        }
    }
    let ratio = |hit: usize, all: usize| if all == 0 { 1.0 } else { hit as f64 / all as f64 };
    Ok(CaptureRatio { free_captured: ratio(free_hit, free), occupied_captured: ratio(occ_hit, occ) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn presets_are_valid_and_deterministic() {
        for p in Preset::ALL {
            let (a, ta) = build_preset(p, 1.0, &mut rng(4)).unwrap();
            let (b, tb) = build_preset(p, 1.0, &mut rng(4)).unwrap();
            assert_eq!(a, b);
            assert_eq!(ta, tb);
            a.validate().unwrap();
            assert!(!ta.is_empty());
            for pose in &ta {
                assert!(!a.is_blocked(pose), "{p}: pose {pose:?} inside an obstacle");
                assert!(a.bounds.contains(pose));
            }
        }
        assert!("garage".parse::<Preset>().is_err());
    }

    #[test]
    fn two_room_trajectory_visits_both_rooms() {
        let (_, t) = build_preset(Preset::TwoRoom, 1.0, &mut rng(0)).unwrap();
        assert!(t.iter().any(|p| p.x < 5.75));
        assert!(t.iter().any(|p| p.x > 6.25));
    }

    #[test]
    fn pillars_trajectory_stays_on_perimeter() {
        let (scene, t) = build_preset(Preset::Pillars, 1.0, &mut rng(0)).unwrap();
        let pillars: Vec<_> =
            scene.obstacles.iter().filter(|o| o.max.x - o.min.x < 1.0 && o.max.y - o.min.y < 1.0).collect();
        assert_eq!(pillars.len(), 4);
        let lo = pillars.iter().fold(Point3::new(f64::INFINITY, f64::INFINITY, 0.0), |m, o| m.inf(&o.min));
        let hi = pillars.iter().fold(Point3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, 0.0), |m, o| m.sup(&o.max));
        for p in &t {
            let between = p.x > lo.x && p.x < hi.x && p.y > lo.y - 0.5 && p.y < hi.y + 0.5;
            assert!(!between, "pose {p:?} passes through the pillar row");
        }
    }

    #[test]
    fn rasterize_counts() {
        let scene =
            |obstacles| SceneSpec { preset: Preset::OpenSpace, bounds: aabb(0.0, 0.0, 0.0, 2.0, 2.0, 2.0), obstacles };
        let empty = rasterize(&scene(vec![]), 0.25);
        assert_eq!(empty.count(VoxelState::Free), 512);
        let full = rasterize(&scene(vec![aabb(0.0, 0.0, 0.0, 2.0, 2.0, 2.0)]), 0.25);
        assert_eq!(full.count(VoxelState::Occupied), 512);
        let cube = rasterize(&scene(vec![aabb(0.0, 0.0, 0.0, 1.0, 1.0, 1.0)]), 0.25);
        assert_eq!(cube.count(VoxelState::Occupied), 64);
    }

    #[test]
    fn no_obstacles_no_observations() {
        let scene =
            SceneSpec { preset: Preset::OpenSpace, bounds: aabb(0.0, 0.0, 0.0, 4.0, 4.0, 4.0), obstacles: vec![] };
        let map = simulate_observations(&scene, &[Point3::new(2.0, 2.0, 2.0)], &ObservationModel::default()).unwrap();
        assert!(map.observations.is_empty());
    }

    #[test]
    fn noiseless_hits_lie_on_the_wall() {
        let wall = aabb(3.0, -10.0, -10.0, 3.5, 10.0, 10.0);
        let scene = SceneSpec {
            preset: Preset::OpenSpace,
            bounds: aabb(-20.0, -20.0, -20.0, 20.0, 20.0, 20.0),
            obstacles: vec![wall],
        };
        let model = ObservationModel { landmark_noise_sigma: 0.0, rays_per_pose: 500, ..Default::default() };
        let map = simulate_observations(&scene, &[Point3::origin()], &model).unwrap();
        assert!(!map.observations.is_empty());
        for o in &map.observations {
            assert!((o.landmark.x - 3.0).abs() < 1e-9, "{:?}", o.landmark);
            assert!(o.length() <= model.max_range);
        }
    }

    #[test]
    fn ray_count_scales_hits() {
        let (scene, traj) = build_preset(Preset::TwoRoom, 1.0, &mut rng(0)).unwrap();
        let traj = &traj[..4];
        let mut ratios = Vec::new();
        for seed in 0..10 {
            let m = ObservationModel { rays_per_pose: 200, rng_seed: seed, ..Default::default() };
            let single = simulate_observations(&scene, traj, &m).unwrap().observations.len() as f64;
            let m2 = ObservationModel { rays_per_pose: 400, rng_seed: seed + 100, ..Default::default() };
            let double = simulate_observations(&scene, traj, &m2).unwrap().observations.len() as f64;
            ratios.push(double / single);
        }
        let mean: f64 = ratios.iter().sum::<f64>() / ratios.len() as f64;
        assert!((mean - 2.0).abs() <= 0.1, "mean ratio {mean}");
    }

    #[test]
    fn capture_ratio_cases() {
        let scene = SceneSpec {
            preset: Preset::OpenSpace,
            bounds: aabb(0.0, 0.0, 0.0, 2.0, 2.0, 1.0),
            obstacles: vec![aabb(0.0, 0.0, 0.0, 2.0, 2.0, 0.5)],
        };
        let reference = rasterize(&scene, 0.25);
        let same = captured_space_ratio(&reference, &reference).unwrap();
        assert_eq!((same.free_captured, same.occupied_captured), (1.0, 1.0));
        let unknown = captured_space_ratio(&OccupancyGrid::new(0.25), &reference).unwrap();
        assert_eq!((unknown.free_captured, unknown.occupied_captured), (0.0, 1.0));
        // half of the free voxels marked free
        let mut half = OccupancyGrid::new(0.25);
        let mut free: Vec<_> = reference.iter().filter(|(_, s)| *s == VoxelState::Free).map(|(v, _)| v).collect();
        free.sort();
        for v in &free[..free.len() / 2] {
            half.set(*v, VoxelState::Free);
        }
        assert_eq!(captured_space_ratio(&half, &reference).unwrap().free_captured, 0.5);
        assert!(captured_space_ratio(&OccupancyGrid::new(0.3), &reference).is_err());
    }

    #[test]
    fn scene_text_round_trip() {
        let (scene, _) = build_preset(Preset::Office, 1.0, &mut rng(1)).unwrap();
        let back = SceneSpec::from_text(scene.to_text().as_bytes()).unwrap();
        assert_eq!(back, scene);
    }
}
