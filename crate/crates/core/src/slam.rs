//! Sparse SLAM map input: landmark observations and the explorer trajectory.
//!
//! The on-disk format is line oriented, one whitespace-separated record per
//! line:
//!
//! ```text
//! # comment
//! T x y z [t]            trajectory pose (timestamp ignored)
//! O ox oy oz lx ly lz    observation: observer position then landmark
//! ```

use std::fmt::Write as _;
use std::io::BufRead;

use crate::error::{Error, Result};
use crate::Point3;

/// One observer-to-landmark ray.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandmarkObservation {
    pub observer: Point3,
    pub landmark: Point3,
}

impl LandmarkObservation {
    pub fn new(observer: Point3, landmark: Point3) -> Result<Self> {
        let obs = Self { observer, landmark };
        obs.validate()?;
        Ok(obs)
    }

    pub fn validate(&self) -> Result<()> {
        if !is_finite(&self.observer) || !is_finite(&self.landmark) {
            return Err(Error::Validation("non-finite observation coordinate".into()));
        }
        if self.length() <= 0.0 {
            return Err(Error::Validation("observer and landmark coincide".into()));
        }
        Ok(())
    }

    pub fn length(&self) -> f64 {
        (self.landmark - self.observer).norm()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SlamMap {
    pub observations: Vec<LandmarkObservation>,
    pub trajectory: Vec<Point3>,
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Point3,
    pub max: Point3,
}

impl Aabb {
    pub fn from_point(p: Point3) -> Self {
        Self { min: p, max: p }
    }

    pub fn grow(&mut self, p: &Point3) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    pub fn contains(&self, p: &Point3) -> bool {
        (0..3).all(|a| p[a] >= self.min[a] && p[a] <= self.max[a])
    }

    pub fn volume(&self) -> f64 {
        let d = self.max - self.min;
        d.x * d.y * d.z
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlamMapStats {
    pub observation_count: usize,
    pub trajectory_length_m: f64,
    pub bounding_box: Aabb,
}

fn is_finite(p: &Point3) -> bool {
    p.iter().all(|c| c.is_finite())
}

impl SlamMap {
    /// Checks the map invariants. Maps without observations are accepted
    /// only when `allow_empty_observations` is set.
    pub fn validate(&self, allow_empty_observations: bool) -> Result<()> {
        if self.trajectory.is_empty() {
            return Err(Error::Validation("trajectory is empty".into()));
        }
        if let Some(p) = self.trajectory.iter().find(|p| !is_finite(p)) {
            return Err(Error::Validation(format!("non-finite trajectory pose {p:?}")));
        }
        if self.observations.is_empty() && !allow_empty_observations {
            return Err(Error::Validation("map has no observations".into()));
        }
        self.observations.iter().try_for_each(LandmarkObservation::validate)
    }

    pub fn stats(&self) -> SlamMapStats {
        let trajectory_length_m = self.trajectory.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
        let mut points = self.trajectory.iter().chain(self.observations.iter().map(|o| &o.landmark));
        let first = points.next().copied().unwrap_or_else(Point3::origin);
        let mut bounding_box = Aabb::from_point(first);
        points.for_each(|p| bounding_box.grow(p));
        SlamMapStats { observation_count: self.observations.len(), trajectory_length_m, bounding_box }
    }

    /// Writes the map in the line-record format with 6 decimals.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(64 * (self.observations.len() + self.trajectory.len()));
        out.push_str("# sparse SLAM map: T x y z | O ox oy oz lx ly lz\n");
        for p in &self.trajectory {
            let _ = writeln!(out, "T {:.6} {:.6} {:.6}", p.x, p.y, p.z);
        }
        for o in &self.observations {
            let (a, b) = (o.observer, o.landmark);
            let _ = writeln!(out, "O {:.6} {:.6} {:.6} {:.6} {:.6} {:.6}", a.x, a.y, a.z, b.x, b.y, b.z);
        }
        out
    }
}

/// Parses a SLAM map and validates it. Observations may be empty; callers
/// that need them should check.
pub fn parse_slam_map<R: BufRead>(reader: R) -> Result<SlamMap> {
    let mut map = SlamMap::default();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let tag = fields.next().unwrap_or_default();
        let values = fields
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::Parse { line: line_no, message: format!("non-numeric field `{f}`") })
            })
            .collect::<Result<Vec<_>>>()?;
        let invalid = |msg: String| Error::Parse { line: line_no, message: msg };
        match tag {
            "T" => {
                if values.len() != 3 && values.len() != 4 {
                    return Err(invalid(format!("trajectory record needs 3 or 4 fields, got {}", values.len())));
                }
                map.trajectory.push(Point3::new(values[0], values[1], values[2]));
            }
            "O" => {
                if values.len() != 6 {
                    return Err(invalid(format!("observation record needs 6 fields, got {}", values.len())));
                }
                let obs = LandmarkObservation {
                    observer: Point3::new(values[0], values[1], values[2]),
                    landmark: Point3::new(values[3], values[4], values[5]),
                };
                obs.validate().map_err(|e| match e {
                    Error::Validation(m) => Error::Validation(format!("line {line_no}: {m}")),
                    e => e,
                })?;
                map.observations.push(obs);
            }
            other => return Err(invalid(format!("unknown record type `{other}`"))),
        }
    }
    map.validate(true)?;
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<SlamMap> {
        parse_slam_map(s.as_bytes())
    }

    #[test]
    fn minimal_map() {
        let map = parse("T 0 0 0\nO 0 0 0 1 0 0\n").unwrap();
        assert_eq!(map.trajectory.len(), 1);
        assert_eq!(map.observations.len(), 1);
    }

    #[test]
    fn comments_and_timestamps() {
        let map = parse("# header\n\nT 0 0 0 12.5\nT 1 0 0 13.0\n").unwrap();
        assert_eq!(map.trajectory, vec![Point3::origin(), Point3::new(1.0, 0.0, 0.0)]);
    }

    #[test]
    fn zero_length_ray_rejected() {
        let err = parse("T 0 0 0\nO 1 1 1 1 1 1\n").unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "{err}");
    }

    #[test]
    fn missing_field_names_line() {
        let err = parse("T 0 0 0\nT 1.0 2.0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn non_numeric_field() {
        let err = parse("T 0 zero 0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn empty_trajectory_rejected() {
        assert!(matches!(parse("O 0 0 0 1 0 0\n"), Err(Error::Validation(_))));
        assert!(matches!(parse(""), Err(Error::Validation(_))));
    }

    #[test]
    fn non_finite_rejected() {
        assert!(matches!(parse("T 0 inf 0\n"), Err(Error::Validation(_))));
        assert!(matches!(parse("T 0 0 0\nO 0 0 0 NaN 0 0\n"), Err(Error::Validation(_))));
    }

    #[test]
    fn stats_length_and_box() {
        let map = SlamMap { observations: vec![], trajectory: vec![Point3::origin(), Point3::new(3.0, 4.0, 0.0)] };
        assert_eq!(map.stats().trajectory_length_m, 5.0);

        let single = SlamMap { observations: vec![], trajectory: vec![Point3::new(1.0, 2.0, 3.0)] };
        let s = single.stats();
        assert_eq!(s.trajectory_length_m, 0.0);
        assert_eq!(s.bounding_box.min, s.bounding_box.max);

        let o = Point3::origin();
        let two = SlamMap {
            observations: vec![
                LandmarkObservation::new(o, Point3::new(1.0, 0.0, 0.0)).unwrap(),
                LandmarkObservation::new(o, Point3::new(-1.0, 0.0, 0.0)).unwrap(),
            ],
            trajectory: vec![o],
        };
        let b = two.stats().bounding_box;
        assert_eq!((b.min.x, b.max.x), (-1.0, 1.0));
        assert_eq!(two.stats().observation_count, 2);
    }
}
