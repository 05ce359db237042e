//! Body scaling: segment lengths from stature, segment masses, centers of
//! mass and inertias from body weight.
//!
//! Lengths come from a proportion table (length = proportion × stature).
//! Masses follow a two-level percentage distribution: grouped segments as a
//! percentage of body weight, individual segments as a percentage of their
//! group. Inertias assume uniform density over simplified shapes: limbs as
//! cylinders, the head as a ball, torso boxes as cubes.

use serde::{Deserialize, Serialize};
use statrs::distribution::ContinuousCDF;

use crate::data::AnthroTable;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Male,
    Female,
}

/// Subject dimensions and population placement.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Anthropometry {
    /// Stature H in meters.
    pub stature_m: f64,
    /// Total body weight W in kilograms.
    pub body_weight_kg: f64,
    pub gender: Gender,
    /// Strength percentile in (0, 100), 50 = population mean.
    pub strength_percentile: f64,
}

impl Anthropometry {
    pub fn validate(&self) -> Result<()> {
        if self.stature_m <= 0.0 || !self.stature_m.is_finite() {
            return Err(Error::InvalidAnthropometry(format!(
                "stature must be > 0, got {} m",
                self.stature_m
            )));
        }
        if self.body_weight_kg <= 0.0 || !self.body_weight_kg.is_finite() {
            return Err(Error::InvalidAnthropometry(format!(
                "body weight must be > 0, got {} kg",
                self.body_weight_kg
            )));
        }
        if !(self.strength_percentile > 0.0 && self.strength_percentile < 100.0) {
            return Err(Error::InvalidAnthropometry(format!(
                "strength percentile must lie strictly between 0 and 100, got {}",
                self.strength_percentile
            )));
        }
        Ok(())
    }

    /// Standard-normal z-score of the strength percentile.
    pub fn strength_z(&self) -> f64 {
        if self.strength_percentile == 50.0 {
            return 0.0;
        }
        let normal = statrs::distribution::Normal::new(0.0, 1.0).expect("unit normal");
        normal.inverse_cdf(self.strength_percentile / 100.0)
    }
}

/// One scaled body segment length.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentGeometry {
    /// Symbol used by the kinematic chain (e.g. `R_ua`).
    pub symbol: String,
    pub segment: String,
    pub length_m: f64,
    pub proportion_of_stature: f64,
    /// Alternative symbols resolving to the same length.
    pub aliases: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentShape {
    Cylinder,
    Ball,
    Cube,
}

/// Mass properties of one body segment.
///
/// `com_offset_m` is the center-of-mass distance from the segment's proximal
/// end along its long axis. `inertia_about_com` holds the three principal
/// moments `[axial, transverse, transverse]` for cylinders, or three equal
/// values for balls and cubes.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentDynamics {
    pub name: String,
    pub mass_kg: f64,
    pub com_offset_m: f64,
    pub inertia_about_com: [f64; 3],
    pub shape: SegmentShape,
    /// Characteristic length used for the shape (cylinder length, ball
    /// diameter, cube edge).
    pub length_m: f64,
    /// Cylinder radius where applicable, 0 otherwise.
    pub radius_m: f64,
}

/// Scale the proportion table to a subject's stature.
pub fn scale_segments(anthro: &Anthropometry, table: &AnthroTable) -> Result<Vec<SegmentGeometry>> {
    anthro.validate()?;
    Ok(table
        .length_proportions
        .iter()
        .map(|row| SegmentGeometry {
            symbol: row.symbol.clone(),
            segment: row.segment.clone(),
            length_m: row.proportion * anthro.stature_m,
            proportion_of_stature: row.proportion,
            aliases: row.aliases.clone(),
        })
        .collect())
}

/// Distribute body weight over segments and derive uniform-density inertias.
///
/// Per-side groups (arms, legs) yield one entry per side, named
/// `right_<segment>` / `left_<segment>`; each side carries the full group
/// percentage.
pub fn distribute_masses(
    anthro: &Anthropometry,
    table: &AnthroTable,
) -> Result<Vec<SegmentDynamics>> {
    anthro.validate()?;
    let h = anthro.stature_m;
    let w = anthro.body_weight_kg;
    let ext = &table.extensions;

    let mut out = Vec::new();
    for group in &table.mass_groups {
        let group_mass = group.percent_of_body_weight / 100.0 * w;
        let sides: &[&str] = if group.per_side {
            &["right", "left"]
        } else {
            &[""]
        };
        for side in sides {
            for seg in &group.segments {
                let mass = seg.percent_of_group / 100.0 * group_mass;
                let name = if side.is_empty() {
                    seg.name.clone()
                } else {
                    format!("{side}_{}", seg.name)
                };
                out.push(make_segment(&name, &seg.name, mass, h, table, ext)?);
            }
        }
    }
    Ok(out)
}

fn make_segment(
    name: &str,
    base: &str,
    mass: f64,
    stature: f64,
    table: &AnthroTable,
    ext: &crate::data::Extensions,
) -> Result<SegmentDynamics> {
    let prop = |sym: &str| -> Result<f64> {
        table
            .proportion(sym)
            .ok_or_else(|| Error::Config(format!("missing proportion for symbol `{sym}`")))
    };

    let (shape, length) = match base {
        "upper_arm" => (SegmentShape::Cylinder, prop("R_ua")? * stature),
        "forearm" => (SegmentShape::Cylinder, prop("R_la")? * stature),
        "hand" => (SegmentShape::Cylinder, prop("R_h")? * stature),
        "thigh" => (SegmentShape::Cylinder, prop("R_ul")? * stature),
        "shank" => (SegmentShape::Cylinder, prop("D_ll")? * stature),
        "foot" => (SegmentShape::Cylinder, ext.foot_length * stature),
        "neck" => (
            SegmentShape::Cylinder,
            (ext.head_neck_length - ext.head_ball_diameter) * stature,
        ),
        "head" => (SegmentShape::Ball, ext.head_ball_diameter * stature),
        "thorax" => (SegmentShape::Cube, prop("D_ub")? * stature),
        "lumbar" => (SegmentShape::Cube, prop("R_lb")? * stature),
        "pelvis" => (SegmentShape::Cube, prop("W_w")? * stature),
        other => {
            return Err(Error::Config(format!(
                "no shape mapping for segment `{other}`"
            )))
        }
    };

    let (inertia, radius, com_offset) = match shape {
        SegmentShape::Cylinder => {
            let r = ext.cylinder_radius_factor * length;
            let axial = 0.5 * mass * r * r;
            let transverse = mass * (3.0 * r * r + length * length) / 12.0;
            // The hand is lumped at the wrist for load paths; its center of
            // mass sits at the proximal end.
            let com = if base == "hand" { 0.0 } else { length / 2.0 };
            ([axial, transverse, transverse], r, com)
        }
        SegmentShape::Ball => {
            let r = length / 2.0;
            let i = 0.4 * mass * r * r;
            ([i, i, i], r, r)
        }
        SegmentShape::Cube => {
            let i = mass * length * length / 6.0;
            // Torso boxes: center of mass halfway up the segment span;
            // the pelvis block is centered on the root point itself.
            let com = if base == "pelvis" { 0.0 } else { length / 2.0 };
            ([i, i, i], 0.0, com)
        }
    };

    Ok(SegmentDynamics {
        name: name.to_string(),
        mass_kg: mass,
        com_offset_m: com_offset,
        inertia_about_com: inertia,
        shape,
        length_m: length,
        radius_m: radius,
    })
}

/// Look up a scaled length by symbol (including aliases).
pub fn resolve_symbol(geometry: &[SegmentGeometry], symbol: &str) -> Option<f64> {
    geometry
        .iter()
        .find(|g| g.symbol == symbol || g.aliases.iter().any(|a| a == symbol))
        .map(|g| g.length_m)
}
