//! Posture-dependent joint moment capacity (MVC torque) with a population
//! percentile spread.
//!
//! A profile is a polynomial surface over shoulder and elbow flexion angles
//! (degrees), loaded from a coefficient data file with a declared valid
//! domain and provenance. Strength depends on posture only; movement speed
//! is neglected for the quasi-static operations this engine targets.

use std::collections::BTreeMap;

use serde::Deserialize;

use crate::anthro::Gender;
use crate::error::{Error, Result};

/// One polynomial term `c · shoulder_flexion^s · elbow_flexion^e`.
#[derive(Debug, Clone, Deserialize)]
pub struct PolyTerm {
    pub c: f64,
    #[serde(default)]
    pub s: u32,
    #[serde(default)]
    pub e: u32,
}

#[derive(Debug, Clone, Deserialize)]
pub struct AngleDomain {
    pub shoulder_flexion_deg: [f64; 2],
    pub elbow_flexion_deg: [f64; 2],
}

/// Strength surface for one joint and gender.
#[derive(Debug, Clone, Deserialize)]
pub struct StrengthProfile {
    pub schema_version: u32,
    pub joint: String,
    pub gender: Gender,
    pub unit: String,
    pub source: String,
    /// Coefficient of variation of strength across the population.
    pub cv: f64,
    pub domain: AngleDomain,
    pub terms: Vec<PolyTerm>,
}

/// The angle variables a profile consumes, by name.
pub const ANGLE_VARS: [&str; 2] = ["shoulder_flexion", "elbow_flexion"];

impl StrengthProfile {
    /// Evaluate the MVC torque at the given posture angles (degrees).
    /// `angles` must contain `shoulder_flexion` and `elbow_flexion`.
    pub fn joint_strength(&self, angles: &BTreeMap<String, f64>) -> Result<f64> {
        let get = |name: &str, range: [f64; 2]| -> Result<f64> {
            let value = *angles
                .get(name)
                .ok_or_else(|| Error::Config(format!("missing posture angle `{name}`")))?;
            if value < range[0] || value > range[1] || !value.is_finite() {
                return Err(Error::AngleOutOfDomain {
                    name: name.to_string(),
                    value,
                    lo: range[0],
                    hi: range[1],
                });
            }
            Ok(value)
        };
        let shoulder = get("shoulder_flexion", self.domain.shoulder_flexion_deg)?;
        let elbow = get("elbow_flexion", self.domain.elbow_flexion_deg)?;

        let strength: f64 = self
            .terms
            .iter()
            .map(|t| t.c * shoulder.powi(t.s as i32) * elbow.powi(t.e as i32))
            .sum();
        if strength <= 0.0 || strength.is_nan() {
            return Err(Error::NonphysicalStrength(strength));
        }
        Ok(strength)
    }

    /// Mean strength and its population spread at the given posture.
    pub fn spread(&self, angles: &BTreeMap<String, f64>) -> Result<PopulationSpread> {
        let mean = self.joint_strength(angles)?;
        Ok(PopulationSpread {
            mean_nm: mean,
            sigma_nm: self.cv * mean,
        })
    }
}

/// Population strength distribution at a fixed posture: mean S and standard
/// deviation σ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationSpread {
    pub mean_nm: f64,
    pub sigma_nm: f64,
}

impl PopulationSpread {
    pub fn from_cv(mean_nm: f64, cv: f64) -> Self {
        Self {
            mean_nm,
            sigma_nm: cv * mean_nm,
        }
    }

    pub fn cv(&self) -> f64 {
        self.sigma_nm / self.mean_nm
    }

    /// Strength at z standard deviations from the mean: S + z·σ.
    pub fn percentile_strength(&self, z: f64) -> Result<f64> {
        let s = self.mean_nm + z * self.sigma_nm;
        if s <= 0.0 || s.is_nan() {
            return Err(Error::NonphysicalStrength(s));
        }
        Ok(s)
    }

    /// The strength grid over a set of z values (e.g. −2σ … +2σ).
    pub fn grid(&self, zs: &[f64]) -> Result<Vec<f64>> {
        zs.iter().map(|&z| self.percentile_strength(z)).collect()
    }
}

/// Convenience: angles map for profile evaluation.
pub fn angles(shoulder_flexion_deg: f64, elbow_flexion_deg: f64) -> BTreeMap<String, f64> {
    let mut map = BTreeMap::new();
    map.insert("shoulder_flexion".to_string(), shoulder_flexion_deg);
    map.insert("elbow_flexion".to_string(), elbow_flexion_deg);
    map
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::DataSet;

    fn elbow_profile() -> StrengthProfile {
        DataSet::bundled()
            .unwrap()
            .strength_profile("elbow", Gender::Male)
            .unwrap()
            .clone()
    }

    /// Sweep a profile over its declared domain on a fine grid.
    fn sweep(profile: &StrengthProfile, step: f64) -> (f64, f64) {
        let [s_lo, s_hi] = profile.domain.shoulder_flexion_deg;
        let [e_lo, e_hi] = profile.domain.elbow_flexion_deg;
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        let mut s = s_lo;
        while s <= s_hi + 1e-9 {
            let mut e = e_lo;
            while e <= e_hi + 1e-9 {
                let v = profile
                    .joint_strength(&angles(s.min(s_hi), e.min(e_hi)))
                    .unwrap();
                min = min.min(v);
                max = max.max(v);
                e += step;
            }
            s += step;
        }
        (min, max)
    }

    #[test]
    fn elbow_surface_spans_published_range() {
        // 50th-percentile elbow strength varies over ~45..75 N*m
        let (min, max) = sweep(&elbow_profile(), 0.5);
        assert!((44.0..=46.0).contains(&min), "min = {min}");
        assert!((74.0..=76.0).contains(&max), "max = {max}");
    }

    #[test]
    fn evaluation_is_deterministic() {
        let profile = elbow_profile();
        let a = profile.joint_strength(&angles(30.0, 90.0)).unwrap();
        let b = profile.joint_strength(&angles(30.0, 90.0)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn matches_direct_polynomial_evaluation() {
        // independent scalar evaluation of the coefficient table
        let profile = elbow_profile();
        let (s, e) = (42.0, 117.0);
        let mut direct = 0.0;
        for term in &profile.terms {
            let mut value = term.c;
            for _ in 0..term.s {
                value *= s;
            }
            for _ in 0..term.e {
                value *= e;
            }
            direct += value;
        }
        let got = profile.joint_strength(&angles(s, e)).unwrap();
        assert!((got - direct).abs() < 1e-12);
    }

    #[test]
    fn out_of_domain_angle_is_named() {
        let profile = elbow_profile();
        let err = profile.joint_strength(&angles(30.0, 170.0)).unwrap_err();
        match err {
            Error::AngleOutOfDomain { name, .. } => assert_eq!(name, "elbow_flexion"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn percentile_strength_shifts_by_sigma() {
        let spread = PopulationSpread::from_cv(100.0, 0.224);
        assert_eq!(spread.percentile_strength(0.0).unwrap(), 100.0);
        assert!((spread.percentile_strength(1.0).unwrap() - 122.4).abs() < 1e-12);
        assert!(matches!(
            spread.percentile_strength(-5.0),
            Err(Error::NonphysicalStrength(_))
        ));
    }

    #[test]
    fn percentile_grid_is_symmetric_about_the_mean() {
        let spread = PopulationSpread::from_cv(52.0, 0.2311);
        let grid = spread.grid(&[-2.0, -1.0, 0.0, 1.0, 2.0]).unwrap();
        assert_eq!(grid.len(), 5);
        assert_eq!(grid[2], 52.0);
        assert!((grid[0] + grid[4] - 2.0 * 52.0).abs() < 1e-12);
        assert!((grid[1] + grid[3] - 2.0 * 52.0).abs() < 1e-12);
        assert!(grid.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn relative_load_decreases_with_percentile() {
        let profile = elbow_profile();
        let spread = profile.spread(&angles(30.0, 90.0)).unwrap();
        let load = 8.0;
        let mut last = f64::INFINITY;
        for z in [-2.0, -1.0, 0.0, 1.0, 2.0] {
            let f = load / spread.percentile_strength(z).unwrap();
            assert!(f < last, "f_MVC must strictly decrease with z");
            last = f;
        }
    }

    #[test]
    fn surface_has_bounded_gradient() {
        // no jumps: finite differences on a 1-degree grid stay small
        let profile = elbow_profile();
        let [s_lo, s_hi] = profile.domain.shoulder_flexion_deg;
        let [e_lo, e_hi] = profile.domain.elbow_flexion_deg;
        let mut s = s_lo;
        while s < s_hi {
            let mut e = e_lo;
            while e < e_hi {
                let v = profile.joint_strength(&angles(s, e)).unwrap();
                let vs = profile.joint_strength(&angles(s + 1.0, e)).unwrap();
                let ve = profile.joint_strength(&angles(s, e + 1.0)).unwrap();
                assert!((vs - v).abs() < 1.5, "jump in shoulder direction at ({s},{e})");
                assert!((ve - v).abs() < 1.5, "jump in elbow direction at ({s},{e})");
                e += 1.0;
            }
            s += 1.0;
        }
    }

    #[test]
    fn shoulder_profile_anchors_drilling_posture() {
        let data = DataSet::bundled().unwrap();
        let shoulder = data.strength_profile("shoulder", Gender::Male).unwrap();
        let s = shoulder.joint_strength(&angles(30.0, 90.0)).unwrap();
        assert!((s - 52.0).abs() < 1e-9, "S(30, 90) = {s}");
        assert_eq!(shoulder.cv, 0.2311);
        let elbow = data.strength_profile("elbow", Gender::Male).unwrap();
        assert_eq!(elbow.cv, 0.2458);
    }
}
