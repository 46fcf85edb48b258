//! Runtime configuration. One JSON file covers every tunable; omitted fields
//! fall back to the defaults below, and every stochastic stage takes a seed.

use serde::{Deserialize, Serialize};
use std::path::Path;

fn default_true_tolerance() -> bool {
    false
}

/// Virtual scanning parameters.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct ScanConfig {
    /// Number of virtual cameras on the view sphere.
    pub cameras: usize,
    /// Square image resolution (pixels per side).
    pub resolution: u32,
    pub vertical_fov_deg: f64,
    /// Near/far clip depths in mm, matching a structured-light sensor.
    pub near: f64,
    pub far: f64,
    /// Sphere radius = factor × circumscribed-sphere radius (floored so the
    /// nearest surface stays outside the near plane).
    pub radius_factor: f64,
    /// Explicit radius override in mm; 0 keeps the automatic rule.
    pub radius_override: f64,
    /// Views with fewer rendered points are dropped with a warning.
    pub min_view_points: usize,
    /// Stored view clouds are subsampled to at most this many points.
    pub db_cloud_points: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            cameras: 80,
            resolution: 150,
            vertical_fov_deg: 43.0,
            near: 400.0,
            far: 4500.0,
            radius_factor: 2.5,
            radius_override: 0.0,
            min_view_points: 50,
            db_cloud_points: 1500,
        }
    }
}

/// Descriptor and smooth-region clustering parameters.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct DescriptorConfig {
    /// Region-growing angular threshold in degrees.
    pub angle_thresh_deg: f64,
    /// Regions smaller than this are discarded.
    pub min_region_pts: usize,
    /// Neighbourhood size of the region-growing graph.
    pub region_k: usize,
    /// Neighbourhood size for normal estimation.
    pub normal_k: usize,
}

impl Default for DescriptorConfig {
    fn default() -> Self {
        Self {
            angle_thresh_deg: 10.0,
            min_region_pts: 100,
            region_k: 10,
            normal_k: 10,
        }
    }
}

/// Online recognition parameters.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct RecognitionConfig {
    /// RANSAC plane inlier distance in mm.
    pub plane_inlier_dist: f64,
    pub plane_iters: usize,
    /// Minimum inlier fraction for a plane to count as found.
    pub min_plane_inlier_frac: f64,
    /// Euclidean clustering link distance in mm.
    pub cluster_dist: f64,
    pub min_cluster_pts: usize,
    pub max_cluster_pts: usize,
    /// N: nearest descriptors fetched per query.
    pub nn_candidates: usize,
    /// χ² acceptance threshold producing N′ (raise it to search for
    /// best-match rather than exact objects).
    pub accept_thresh: f64,
    /// Minimum ICP inlier fraction for a hypothesis to be accepted.
    pub score_thresh: f64,
    /// Initial-pose roll seeds about the viewing axis.
    pub roll_seeds: usize,
    pub icp_max_iters: usize,
    /// ICP correspondence distance in mm.
    pub icp_corr_dist: f64,
    /// ICP convergence threshold on the incremental update.
    pub icp_eps: f64,
    /// Clouds fed to ICP are subsampled to at most this many points.
    pub icp_max_points: usize,
    /// Attach cluster clouds to accepted matches (high-tolerance mode).
    #[serde(default = "default_true_tolerance")]
    pub high_tolerance: bool,
    /// RANSAC seed.
    pub seed: u64,
}

impl Default for RecognitionConfig {
    fn default() -> Self {
        Self {
            plane_inlier_dist: 8.0,
            plane_iters: 1000,
            min_plane_inlier_frac: 0.2,
            cluster_dist: 20.0,
            min_cluster_pts: 300,
            max_cluster_pts: 1_000_000,
            nn_candidates: 10,
            accept_thresh: 0.3,
            score_thresh: 0.7,
            roll_seeds: 8,
            icp_max_iters: 50,
            icp_corr_dist: 25.0,
            icp_eps: 1e-6,
            icp_max_points: 1000,
            high_tolerance: false,
            seed: 0,
        }
    }
}

/// Grasp and path planning parameters.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct PlannerConfig {
    /// Geodesic dome subdivision level (level 2 → 162 sample directions).
    pub dome_subdiv: u32,
    /// Approach/retract offset along grasp normals, mm.
    pub approach_clearance: f64,
    /// Straight-line insertion sweep sample count (≥ 5 enforced).
    pub sweep_steps: usize,
    /// Clearance for intermediate sweep poses, mm.
    pub sweep_clearance: f64,
    /// Contact tolerance band at the goal pose, mm: context triangles within
    /// this band of the goal placement are the intended contacts.
    pub contact_band: f64,
    /// Transit path sample count.
    pub path_samples: usize,
    /// Clearance for the carried object along the transit path, mm.
    pub path_clearance: f64,
    /// Apex raise per retry after a path collision, mm.
    pub apex_raise: f64,
    pub max_apex_retries: usize,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            dome_subdiv: 2,
            approach_clearance: 80.0,
            sweep_steps: 20,
            sweep_clearance: 2.0,
            contact_band: 1.0,
            path_samples: 50,
            path_clearance: 5.0,
            apex_raise: 100.0,
            max_apex_retries: 3,
        }
    }
}

/// Depth-sensor noise model. The axial deviation grows quadratically with
/// range: σ(z) = a + b·(z − z₀)²/1000 (all lengths mm), the usual
/// structured-light profile.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct NoiseModel {
    pub axial_a: f64,
    pub axial_b: f64,
    pub axial_z0: f64,
    /// Lateral jitter σ in the plane orthogonal to each ray, mm.
    pub lateral_sigma: f64,
    /// Per-point dropout probability.
    pub dropout: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            axial_a: 1.5,
            axial_b: 0.0019,
            axial_z0: 400.0,
            lateral_sigma: 1.0,
            dropout: 0.02,
        }
    }
}

impl NoiseModel {
    pub fn zero() -> Self {
        Self {
            axial_a: 0.0,
            axial_b: 0.0,
            axial_z0: 0.0,
            lateral_sigma: 0.0,
            dropout: 0.0,
        }
    }

    /// Axial standard deviation at depth `z` (mm).
    pub fn axial_sigma(&self, z: f64) -> f64 {
        self.axial_a + self.axial_b * (z - self.axial_z0).powi(2) / 1000.0
    }

    /// All magnitudes (and the dropout rate) scaled by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            axial_a: self.axial_a * s,
            axial_b: self.axial_b * s,
            axial_z0: self.axial_z0,
            lateral_sigma: self.lateral_sigma * s,
            dropout: (self.dropout * s).min(1.0),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.axial_a == 0.0 && self.axial_b == 0.0 && self.lateral_sigma == 0.0 && self.dropout == 0.0
    }
}

/// Simulation and experiment parameters.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct SimConfig {
    /// Side length of the square support plane, mm.
    pub plane_size: f64,
    /// Sensor range for the classification experiment, mm.
    pub classify_range: f64,
    /// Sensor elevation above the horizon for synthesized scenes, degrees.
    pub sensor_elevation_deg: f64,
    /// Recognitions per pose in the classification experiment.
    pub classify_iterations: usize,
    /// Scene render resolution (pixels per side).
    pub scene_resolution: u32,
    /// Pose-tolerance experiment trial count.
    pub pose_trials: usize,
    /// Vertex jitter σ applied to staged (physical) meshes only, mm.
    pub perturb_sigma: f64,
    /// Global multiplier on the noise model.
    pub noise_scale: f64,
    /// Staging grid for the assembly experiment: columns and pitch, mm.
    pub staging_cols: usize,
    pub staging_pitch_x: f64,
    pub staging_pitch_y: f64,
    pub staging_origin: [f64; 2],
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            plane_size: 4000.0,
            classify_range: 1000.0,
            sensor_elevation_deg: 35.0,
            classify_iterations: 100,
            scene_resolution: 150,
            pose_trials: 25,
            perturb_sigma: 0.0,
            noise_scale: 1.0,
            staging_cols: 5,
            staging_pitch_x: 380.0,
            staging_pitch_y: 380.0,
            staging_origin: [-360.0, 400.0],
        }
    }
}

/// Top-level configuration bundle (the single JSON file the CLI consumes).
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct Config {
    pub scan: ScanConfig,
    pub descriptor: DescriptorConfig,
    pub recognition: RecognitionConfig,
    pub planner: PlannerConfig,
    pub noise: NoiseModel,
    pub sim: SimConfig,
}

impl Config {
    pub fn from_file(path: &Path) -> Result<Self, std::io::Error> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_json_yields_defaults() {
        let cfg: Config = serde_json::from_str("{}").unwrap();
        assert_eq!(cfg, Config::default());
        assert_eq!(cfg.scan.cameras, 80);
        assert_eq!(cfg.scan.resolution, 150);
        assert_eq!(cfg.recognition.nn_candidates, 10);
    }

    #[test]
    fn partial_override_keeps_other_defaults() {
        let cfg: Config =
            serde_json::from_str(r#"{"recognition": {"accept_thresh": 0.05}}"#).unwrap();
        assert_eq!(cfg.recognition.accept_thresh, 0.05);
        assert_eq!(cfg.recognition.score_thresh, 0.7);
    }

    #[test]
    fn axial_sigma_matches_the_documented_formula() {
        let n = NoiseModel::default();
        assert!((n.axial_sigma(800.0) - (1.5 + 0.0019 * 400.0_f64.powi(2) / 1000.0)).abs() < 1e-12);
        assert!((n.axial_sigma(2500.0) - (1.5 + 0.0019 * 2100.0_f64.powi(2) / 1000.0)).abs() < 1e-12);
    }
}
