//! Bundled data files and their schemas.
//!
//! Every numeric table the engine depends on (anthropometric proportions,
//! weight distribution, the joint chain, joint limits, strength surfaces,
//! fatigue resistances, endurance-time models) lives in a versioned TOML
//! file embedded at build time. A directory with files of the same names
//! can override any of them, leaving the rest bundled.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::fatigue::{FatigueResistanceEntry, MetModel, MuscleGroup};
use crate::strength::StrengthProfile;

const ANTHROPOMETRY: &str = include_str!("../data/anthropometry.toml");
const CHAIN: &str = include_str!("../data/chain.toml");
const JOINT_LIMITS: &str = include_str!("../data/joint_limits.toml");
const FATIGUE_RESISTANCE: &str = include_str!("../data/fatigue_resistance.toml");
const MET_MODELS: &str = include_str!("../data/met_models.toml");
const STRENGTH_FILES: &[(&str, &str)] = &[
    (
        "strength/male_shoulder.toml",
        include_str!("../data/strength/male_shoulder.toml"),
    ),
    (
        "strength/male_elbow.toml",
        include_str!("../data/strength/male_elbow.toml"),
    ),
    (
        "strength/female_shoulder.toml",
        include_str!("../data/strength/female_shoulder.toml"),
    ),
    (
        "strength/female_elbow.toml",
        include_str!("../data/strength/female_elbow.toml"),
    ),
];

// ---------------------------------------------------------------------------
// Anthropometry tables

#[derive(Debug, Clone, Deserialize)]
pub struct AnthroTable {
    pub schema_version: u32,
    #[serde(default)]
    pub source: String,
    pub length_proportions: Vec<ProportionRow>,
    pub mass_groups: Vec<MassGroup>,
    pub extensions: Extensions,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ProportionRow {
    pub symbol: String,
    pub segment: String,
    pub proportion: f64,
    #[serde(default)]
    pub aliases: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct MassGroup {
    pub group: String,
    pub percent_of_body_weight: f64,
    pub per_side: bool,
    pub segments: Vec<MassSegment>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct MassSegment {
    pub name: String,
    pub percent_of_group: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Extensions {
    pub cylinder_radius_factor: f64,
    pub foot_length: f64,
    pub ankle_height: f64,
    pub head_ball_diameter: f64,
    pub head_neck_length: f64,
}

impl AnthroTable {
    /// Proportion of stature for `symbol`, searching aliases too.
    pub fn proportion(&self, symbol: &str) -> Option<f64> {
        self.length_proportions
            .iter()
            .find(|row| row.symbol == symbol || row.aliases.iter().any(|a| a == symbol))
            .map(|row| row.proportion)
    }
}

// ---------------------------------------------------------------------------
// Chain table

#[derive(Debug, Clone, Deserialize)]
pub struct ChainTable {
    pub schema_version: u32,
    pub rows: Vec<ChainRowSpec>,
    pub points: Vec<PointSpec>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ChainRowSpec {
    pub j: usize,
    pub parent: usize,
    pub u: u8,
    pub sigma: u8,
    pub gamma: String,
    pub b: String,
    pub alpha: String,
    pub d: String,
    pub r: String,
    pub q_ini: String,
    pub name: String,
    pub flexion_sign: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct PointSpec {
    pub name: String,
    pub carrier: usize,
    pub offsets: Vec<PointOffset>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct PointOffset {
    pub axis: String,
    pub symbol: String,
    pub scale: f64,
}

/// Parse an exact angle entry: "0", "pi", "pi/2", "-pi/2", or a plain
/// radian value.
pub fn parse_angle(text: &str) -> Result<f64> {
    let t = text.trim();
    let (sign, body) = match t.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, t),
    };
    let value = match body {
        "0" => 0.0,
        "pi" => std::f64::consts::PI,
        "pi/2" => std::f64::consts::FRAC_PI_2,
        other => other
            .parse::<f64>()
            .map_err(|_| Error::Config(format!("unparseable angle entry `{text}`")))?,
    };
    Ok(sign * value)
}

/// A length entry in the chain table: zero, a root coordinate, or a scaled
/// geometry symbol such as `-W_s/2`.
#[derive(Debug, Clone, PartialEq)]
pub enum LengthEntry {
    Zero,
    RootX,
    RootY,
    RootZ,
    Symbol { symbol: String, scale: f64 },
}

pub fn parse_length(text: &str) -> Result<LengthEntry> {
    let t = text.trim();
    let (mut scale, body) = match t.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, t),
    };
    let body = match body.strip_suffix("/2") {
        Some(rest) => {
            scale *= 0.5;
            rest
        }
        None => body,
    };
    Ok(match body {
        "0" => LengthEntry::Zero,
        "X_r" => LengthEntry::RootX,
        "Y_r" => LengthEntry::RootY,
        "Z_r" => LengthEntry::RootZ,
        sym => LengthEntry::Symbol {
            symbol: sym.to_string(),
            scale,
        },
    })
}

// ---------------------------------------------------------------------------
// Joint limits

#[derive(Debug, Clone, Deserialize)]
pub struct LimitsTable {
    pub schema_version: u32,
    #[serde(default)]
    pub source: String,
    pub limits: Vec<LimitRow>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct LimitRow {
    pub joint: String,
    pub min_deg: f64,
    pub max_deg: f64,
}

// ---------------------------------------------------------------------------
// Fatigue resistance registry and endurance-model registry

#[derive(Debug, Clone, Deserialize)]
struct ResistanceFile {
    #[allow(dead_code)]
    schema_version: u32,
    groups: Vec<ResistanceRow>,
}

#[derive(Debug, Clone, Deserialize)]
struct ResistanceRow {
    group: String,
    mean: f64,
    sigma: f64,
}

#[derive(Debug, Clone, Deserialize)]
struct MetModelFile {
    #[allow(dead_code)]
    schema_version: u32,
    models: Vec<MetModelRow>,
}

#[derive(Debug, Clone, Deserialize)]
struct MetModelRow {
    name: String,
    expression: String,
    domain: [f64; 2],
    subjects: String,
}

// ---------------------------------------------------------------------------
// The full data set

/// All data tables the engine needs, loaded from the bundled files or from
/// an override directory.
#[derive(Debug, Clone)]
pub struct DataSet {
    pub anthro: AnthroTable,
    pub chain: ChainTable,
    pub limits: LimitsTable,
    pub strength: Vec<StrengthProfile>,
    pub resistance: Vec<FatigueResistanceEntry>,
    pub met_models: Vec<MetModel>,
}

impl DataSet {
    /// Load the data set bundled with the crate.
    pub fn bundled() -> Result<Self> {
        Self::load(None)
    }

    /// Load the data set, taking any file present in `dir` (by its bundled
    /// name, e.g. `chain.toml` or `strength/male_elbow.toml`) in preference
    /// to the embedded copy.
    pub fn from_dir(dir: &Path) -> Result<Self> {
        Self::load(Some(dir))
    }

    fn load(dir: Option<&Path>) -> Result<Self> {
        let anthro: AnthroTable = read(dir, "anthropometry.toml", ANTHROPOMETRY)?;
        let chain: ChainTable = read(dir, "chain.toml", CHAIN)?;
        let limits: LimitsTable = read(dir, "joint_limits.toml", JOINT_LIMITS)?;
        let resistance_file: ResistanceFile =
            read(dir, "fatigue_resistance.toml", FATIGUE_RESISTANCE)?;
        let met_file: MetModelFile = read(dir, "met_models.toml", MET_MODELS)?;

        let mut strength = Vec::new();
        for (name, embedded) in STRENGTH_FILES {
            strength.push(read::<StrengthProfile>(dir, name, embedded)?);
        }

        let mut resistance = Vec::new();
        for row in &resistance_file.groups {
            let group = MuscleGroup::parse(&row.group).ok_or_else(|| Error::DataFile {
                file: "fatigue_resistance.toml".into(),
                msg: format!("unknown muscle group `{}`", row.group),
            })?;
            resistance.push(FatigueResistanceEntry {
                group,
                mean_min: row.mean,
                sigma_min: row.sigma,
            });
        }

        let mut met_models = Vec::new();
        for row in &met_file.models {
            met_models.push(MetModel::parse(
                &row.name,
                &row.expression,
                (row.domain[0], row.domain[1]),
                &row.subjects,
            )?);
        }

        Ok(DataSet {
            anthro,
            chain,
            limits,
            strength,
            resistance,
            met_models,
        })
    }

    /// Strength profile for a joint label ("shoulder", "elbow") and gender.
    pub fn strength_profile(
        &self,
        joint: &str,
        gender: crate::anthro::Gender,
    ) -> Result<&StrengthProfile> {
        self.strength
            .iter()
            .find(|p| p.joint == joint && p.gender == gender)
            .ok_or_else(|| {
                Error::Config(format!("no strength profile for {gender:?} joint `{joint}`"))
            })
    }

    /// Fatigue-resistance registry entry for a muscle group.
    pub fn resistance(&self, group: MuscleGroup) -> Result<&FatigueResistanceEntry> {
        self.resistance
            .iter()
            .find(|e| e.group == group)
            .ok_or_else(|| Error::Config(format!("no fatigue resistance entry for {group:?}")))
    }
}

/// The bundled data set, parsed once.
pub fn bundled_static() -> &'static DataSet {
    use once_cell::sync::Lazy;
    static DATA: Lazy<DataSet> = Lazy::new(|| {
        DataSet::bundled().expect("bundled data files are valid; checked by tests")
    });
    &DATA
}

fn read<T: serde::de::DeserializeOwned>(
    dir: Option<&Path>,
    name: &str,
    embedded: &str,
) -> Result<T> {
    let text: std::borrow::Cow<'_, str> = match dir {
        Some(d) => {
            let path = d.join(name);
            if path.is_file() {
                std::fs::read_to_string(&path)
                    .map_err(|e| Error::DataFile {
                        file: path.display().to_string(),
                        msg: e.to_string(),
                    })?
                    .into()
            } else {
                embedded.into()
            }
        }
        None => embedded.into(),
    };
    toml::from_str(&text).map_err(|e| Error::DataFile {
        file: name.into(),
        msg: e.to_string(),
    })
}

/// Parse a TOML override map of joint limits, used by scenarios.
pub fn limits_from_map(map: &BTreeMap<String, [f64; 2]>) -> Vec<LimitRow> {
    map.iter()
        .map(|(joint, range)| LimitRow {
            joint: joint.clone(),
            min_deg: range[0],
            max_deg: range[1],
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_data_parses() {
        let data = DataSet::bundled().unwrap();
        assert_eq!(data.chain.rows.len(), 28);
        assert_eq!(data.anthro.length_proportions.len(), 9);
        assert_eq!(data.resistance.len(), 4);
        assert!(!data.met_models.is_empty());
        assert_eq!(data.limits.limits.len(), 28);
    }

    #[test]
    fn angle_entries() {
        assert_eq!(parse_angle("0").unwrap(), 0.0);
        assert_eq!(parse_angle("pi/2").unwrap(), std::f64::consts::FRAC_PI_2);
        assert_eq!(parse_angle("-pi/2").unwrap(), -std::f64::consts::FRAC_PI_2);
        assert!(parse_angle("junk").is_err());
    }

    #[test]
    fn length_entries() {
        assert_eq!(parse_length("0").unwrap(), LengthEntry::Zero);
        assert_eq!(
            parse_length("-W_s/2").unwrap(),
            LengthEntry::Symbol {
                symbol: "W_s".into(),
                scale: -0.5
            }
        );
        assert_eq!(
            parse_length("D_ub").unwrap(),
            LengthEntry::Symbol {
                symbol: "D_ub".into(),
                scale: 1.0
            }
        );
        assert_eq!(parse_length("X_r").unwrap(), LengthEntry::RootX);
    }

    #[test]
    fn alias_lookup_resolves_lower_back() {
        let data = DataSet::bundled().unwrap();
        assert_eq!(data.anthro.proportion("R_lb"), Some(0.198));
        assert_eq!(data.anthro.proportion("D_ub"), Some(0.198));
        assert_eq!(data.anthro.proportion("nope"), None);
    }
}
