//! On-disk scenario schema (TOML, versioned, unknown keys rejected).
//!
//! Units are fixed per block and carried in the field names: lengths in m,
//! forces in N, torques in N·m, angles in degrees, times in seconds.

use std::collections::BTreeMap;

use serde::Deserialize;

use dhm_core::anthro::{Anthropometry, Gender};
use dhm_core::fatigue::MuscleGroup;
use dhm_core::status::{JointOfInterest, PopulationSelectors, ScenarioLoad, ScenarioSpec};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    pub anthropometry: AnthropometryBlock,
    pub posture: PostureBlock,
    #[serde(default)]
    pub world: WorldBlock,
    #[serde(default)]
    pub loads: Vec<LoadBlock>,
    pub phases: PhasesBlock,
    #[serde(default)]
    pub population: PopulationBlock,
    pub joints: Vec<JointBlock>,
    #[serde(default)]
    pub output: OutputBlock,
    /// Optional per-joint range overrides, anatomical degrees.
    #[serde(default)]
    pub limits_deg: BTreeMap<String, [f64; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnthropometryBlock {
    pub stature_m: f64,
    pub body_weight_kg: f64,
    pub gender: Gender,
    pub strength_percentile: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PostureBlock {
    pub angles_deg: BTreeMap<String, f64>,
    #[serde(default)]
    pub root_position_m: [f64; 3],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldBlock {
    pub gravity_mps2: [f64; 3],
}

impl Default for WorldBlock {
    fn default() -> Self {
        Self {
            gravity_mps2: dhm_core::DEFAULT_GRAVITY,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadBlock {
    pub frame: String,
    pub force_n: [f64; 3],
    #[serde(default)]
    pub torque_nm: [f64; 3],
    #[serde(default = "one")]
    pub share: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhasesBlock {
    pub durations_s: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationBlock {
    #[serde(default = "default_z_grid")]
    pub strength_z_grid: Vec<f64>,
    #[serde(default = "default_met_offsets")]
    pub met_resistance_offsets: Vec<f64>,
    #[serde(default = "default_reduction_offsets")]
    pub reduction_resistance_offsets: Vec<f64>,
    #[serde(default = "default_reduction_at")]
    pub reduction_at_s: f64,
}

fn default_z_grid() -> Vec<f64> {
    vec![-2.0, -1.0, 0.0, 1.0, 2.0]
}
fn default_met_offsets() -> Vec<f64> {
    vec![-1.0, 0.0, 1.0]
}
fn default_reduction_offsets() -> Vec<f64> {
    vec![0.0, 1.0, 2.0]
}
fn default_reduction_at() -> f64 {
    180.0
}

impl Default for PopulationBlock {
    fn default() -> Self {
        Self {
            strength_z_grid: default_z_grid(),
            met_resistance_offsets: default_met_offsets(),
            reduction_resistance_offsets: default_reduction_offsets(),
            reduction_at_s: default_reduction_at(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointBlock {
    pub chain_joint: String,
    pub label: String,
    pub muscle_group: String,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default)]
    pub directory: Option<String>,
    #[serde(default = "default_sample")]
    pub sample_every_s: f64,
}

fn default_sample() -> f64 {
    30.0
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self, String> {
        let file: ScenarioFile = toml::from_str(text).map_err(|e| e.to_string())?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                file.schema_version
            ));
        }
        Ok(file)
    }

    /// Convert to the engine's scenario form plus output settings.
    pub fn into_spec(self) -> Result<(ScenarioSpec, OutputBlock), String> {
        let mut joints = Vec::with_capacity(self.joints.len());
        for j in &self.joints {
            let group = MuscleGroup::parse(&j.muscle_group).ok_or_else(|| {
                format!(
                    "joint `{}`: unknown muscle_group `{}` (general, shoulder, elbow, hip_back)",
                    j.label, j.muscle_group
                )
            })?;
            joints.push(JointOfInterest {
                chain_joint: j.chain_joint.clone(),
                label: j.label.clone(),
                group,
            });
        }
        let spec = ScenarioSpec {
            anthropometry: Anthropometry {
                stature_m: self.anthropometry.stature_m,
                body_weight_kg: self.anthropometry.body_weight_kg,
                gender: self.anthropometry.gender,
                strength_percentile: self.anthropometry.strength_percentile,
            },
            posture_angles_deg: self.posture.angles_deg,
            root_position_m: self.posture.root_position_m,
            gravity_mps2: self.world.gravity_mps2,
            loads: self
                .loads
                .into_iter()
                .map(|l| ScenarioLoad {
                    frame: l.frame,
                    force_n: l.force_n,
                    torque_nm: l.torque_nm,
                    share: l.share,
                })
                .collect(),
            phase_durations_s: self.phases.durations_s,
            population: PopulationSelectors {
                z_grid: self.population.strength_z_grid,
                met_resistance_offsets: self.population.met_resistance_offsets,
                reduction_resistance_offsets: self.population.reduction_resistance_offsets,
                reduction_at_s: self.population.reduction_at_s,
            },
            joints,
            sample_every_s: self.output.sample_every_s,
        };
        spec.validate().map_err(|e| e.to_string())?;
        Ok((spec, self.output))
    }
}
