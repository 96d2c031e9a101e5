//! Pipeline configuration: defaults, flat `key = value` files and resolution
//! into the per-stage configs.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::cluster::GrowConfig;
use crate::error::{Error, Result};
use crate::merge::MergeConfig;
use crate::synth::ObservationModel;
use crate::tsdf::TsdfConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub voxel_size: f64,
    pub truncation_distance: f64,
    pub max_ray_length: f64,
    pub occupancy_threshold_fraction: f64,
    pub min_component_size: usize,
    pub compactness_fraction: f64,
    /// `None` means twice the voxel size.
    pub delta_margin: Option<f64>,
    pub obstacle_ratio_threshold: f64,
    pub seed: u64,
    pub carve_trajectory: bool,
    pub rays_per_pose: usize,
    pub landmark_noise_sigma: f64,
    pub bounds_scale: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let tsdf = TsdfConfig::default();
        let model = ObservationModel::default();
        Self {
            voxel_size: 0.25,
            truncation_distance: tsdf.truncation_distance,
            max_ray_length: tsdf.max_ray_length,
            occupancy_threshold_fraction: tsdf.occupancy_threshold_fraction,
            min_component_size: tsdf.min_component_size,
            compactness_fraction: 0.98,
            delta_margin: None,
            obstacle_ratio_threshold: MergeConfig::default().obstacle_ratio_threshold,
            seed: 0,
            carve_trajectory: true,
            rays_per_pose: model.rays_per_pose,
            landmark_noise_sigma: model.landmark_noise_sigma,
            bounds_scale: 1.0,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Config(format!("invalid value `{value}` for `{key}`")))
}

impl PipelineConfig {
    pub const KEYS: [&'static str; 13] = [
        "voxel_size",
        "truncation_distance",
        "max_ray_length",
        "occupancy_threshold_fraction",
        "min_component_size",
        "compactness_fraction",
        "delta_margin",
        "obstacle_ratio_threshold",
        "seed",
        "carve_trajectory",
        "rays_per_pose",
        "landmark_noise_sigma",
        "bounds_scale",
    ];

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "voxel_size" => self.voxel_size = parse(key, value)?,
            "truncation_distance" => self.truncation_distance = parse(key, value)?,
            "max_ray_length" => self.max_ray_length = parse(key, value)?,
            "occupancy_threshold_fraction" => self.occupancy_threshold_fraction = parse(key, value)?,
            "min_component_size" => self.min_component_size = parse(key, value)?,
            "compactness_fraction" => self.compactness_fraction = parse(key, value)?,
            "delta_margin" => self.delta_margin = Some(parse(key, value)?),
            "obstacle_ratio_threshold" => self.obstacle_ratio_threshold = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "carve_trajectory" => self.carve_trajectory = parse(key, value)?,
            "rays_per_pose" => self.rays_per_pose = parse(key, value)?,
            "landmark_noise_sigma" => self.landmark_noise_sigma = parse(key, value)?,
            "bounds_scale" => self.bounds_scale = parse(key, value)?,
            _ => return Err(Error::Config(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    /// Applies a flat `key = value` file on top of `self`. `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) =
                line.split_once('=').ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn delta_margin(&self) -> f64 {
        self.delta_margin.unwrap_or(2.0 * self.voxel_size)
    }

    pub fn tsdf(&self) -> TsdfConfig {
        TsdfConfig {
            truncation_distance: self.truncation_distance,
            max_ray_length: self.max_ray_length,
            occupancy_threshold_fraction: self.occupancy_threshold_fraction,
            min_component_size: self.min_component_size,
        }
    }

    pub fn grow(&self) -> GrowConfig {
        GrowConfig {
            compactness_fraction: self.compactness_fraction,
            delta_margin: self.delta_margin(),
            rng_seed: self.seed,
        }
    }

    pub fn merge(&self) -> MergeConfig {
        MergeConfig { obstacle_ratio_threshold: self.obstacle_ratio_threshold, rng_seed: self.seed.wrapping_add(1) }
    }

    pub fn observation_model(&self) -> ObservationModel {
        ObservationModel {
            max_range: self.max_ray_length,
            rays_per_pose: self.rays_per_pose,
            landmark_noise_sigma: self.landmark_noise_sigma,
            rng_seed: self.seed.wrapping_add(2),
        }
    }

    pub fn benchmark_seed(&self) -> u64 {
        self.seed.wrapping_add(3)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.voxel_size > 0.0 && self.voxel_size.is_finite()) {
            return Err(Error::Config("voxel_size must be > 0".into()));
        }
        if !(self.bounds_scale > 0.0) {
            return Err(Error::Config("bounds_scale must be > 0".into()));
        }
        self.tsdf().validate()?;
        self.grow().validate()?;
        self.merge().validate()?;
        self.observation_model().validate()
    }

    /// Fully resolved configuration in the file format accepted by
    /// [`PipelineConfig::from_text`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("voxel_size", self.voxel_size.to_string());
        kv("truncation_distance", self.truncation_distance.to_string());
        kv("max_ray_length", self.max_ray_length.to_string());
        kv("occupancy_threshold_fraction", self.occupancy_threshold_fraction.to_string());
        kv("min_component_size", self.min_component_size.to_string());
        kv("compactness_fraction", self.compactness_fraction.to_string());
        kv("delta_margin", self.delta_margin().to_string());
        kv("obstacle_ratio_threshold", self.obstacle_ratio_threshold.to_string());
        kv("seed", self.seed.to_string());
        kv("carve_trajectory", self.carve_trajectory.to_string());
        kv("rays_per_pose", self.rays_per_pose.to_string());
        kv("landmark_noise_sigma", self.landmark_noise_sigma.to_string());
        kv("bounds_scale", self.bounds_scale.to_string());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = PipelineConfig::default();
        assert_eq!(c.voxel_size, 0.25);
        assert_eq!(c.truncation_distance, 0.5);
        assert_eq!(c.max_ray_length, 5.0);
        assert_eq!(c.occupancy_threshold_fraction, 0.9);
        assert_eq!(c.min_component_size, 5);
        assert_eq!(c.compactness_fraction, 0.98);
        assert_eq!(c.delta_margin(), 0.5);
        assert_eq!(c.obstacle_ratio_threshold, 0.05);
        c.validate().unwrap();
    }

    #[test]
    fn delta_follows_voxel_size_unless_set() {
        let c = PipelineConfig::from_text("voxel_size = 0.1").unwrap();
        assert!((c.delta_margin() - 0.2).abs() < 1e-12);
        let c = PipelineConfig::from_text("voxel_size = 0.1\ndelta_margin = 0.7").unwrap();
        assert_eq!(c.delta_margin(), 0.7);
    }

    #[test]
    fn rejects_unknown_and_bad_values() {
        assert!(matches!(PipelineConfig::from_text("voxel = 1"), Err(Error::Config(_))));
        assert!(matches!(PipelineConfig::from_text("seed = x"), Err(Error::Config(_))));
        assert!(matches!(PipelineConfig::from_text("voxel_size 1"), Err(Error::Config(_))));
        assert!(PipelineConfig::from_text("obstacle_ratio_threshold = 1.5").is_err());
        assert!(PipelineConfig::from_text("voxel_size = -1").is_err());
    }

    #[test]
    fn text_round_trip() {
        let mut c = PipelineConfig::default();
        c.seed = 42;
        c.carve_trajectory = false;
        let text = c.to_text();
        for key in PipelineConfig::KEYS {
            assert!(text.contains(&format!("{key} = ")), "{key}");
        }
        let back = PipelineConfig::from_text(&text).unwrap();
        assert_eq!(back.to_text(), text);
        assert_eq!(back.delta_margin, Some(0.5));
    }

    #[test]
    fn comments_and_blank_lines() {
        let c = PipelineConfig::from_text("# header\n\nseed = 9 # trailing\n").unwrap();
        assert_eq!(c.seed, 9);
    }
}
