//! Muscle fatigue kernel.
//!
//! Joint capacity decays under load as
//!
//! ```text
//! dF_cem(t)/dt = -k · F_cem(t)/MVC · F_load(t)
//! ```
//!
//! where `MVC` is the fresh capacity, `F_cem` the current exertable maximum,
//! and `k` (1/min) the fatigue ratio. For a constant relative load
//! `f = F_load/MVC` the solution is `F_cem(t) = MVC·e^(−k·f·t)` and the
//! maximum endurance time — the time at which capacity meets the load — is
//!
//! ```text
//! MET = −ln(f) / (k·f)      (minutes)
//! ```
//!
//! The fatigue resistance `m = 1/k` of an empirical endurance model `f(x)`
//! is regressed by a least-squares fit through the origin against the
//! intrinsic curve `p(x) = −ln(x)/x` over x = 0.16..0.99 (step 0.01):
//! `m = Σ p(xᵢ)f(xᵢ) / Σ p(xᵢ)²`.
//!
//! Internally time is in minutes (k in 1/min); emitted series are in seconds.

pub mod expr;

use serde::Serialize;

use crate::error::{Error, Result};

/// Joint-level fatigue parameters.
///
/// Stores the resistance `m` (minutes); the fatigue ratio is derived as
/// `k = 1/m`, so the pair is consistent by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FatigueParams {
    mvc_nm: f64,
    resistance_min: f64,
}

impl FatigueParams {
    /// From capacity (N·m) and fatigue resistance m (minutes).
    pub fn from_resistance(mvc_nm: f64, resistance_min: f64) -> Result<Self> {
        if mvc_nm <= 0.0 || !mvc_nm.is_finite() {
            return Err(Error::NonphysicalStrength(mvc_nm));
        }
        if resistance_min <= 0.0 || !resistance_min.is_finite() {
            return Err(Error::Scenario(format!(
                "fatigue resistance must be > 0, got {resistance_min} min"
            )));
        }
        Ok(Self {
            mvc_nm,
            resistance_min,
        })
    }

    /// From capacity (N·m) and fatigue ratio k (1/min).
    pub fn from_fatigue_ratio(mvc_nm: f64, k_per_min: f64) -> Result<Self> {
        if k_per_min <= 0.0 || !k_per_min.is_finite() {
            return Err(Error::Scenario(format!(
                "fatigue ratio must be > 0, got {k_per_min} 1/min"
            )));
        }
        Self::from_resistance(mvc_nm, 1.0 / k_per_min)
    }

    pub fn mvc_nm(&self) -> f64 {
        self.mvc_nm
    }

    /// Fatigue resistance m, minutes.
    pub fn resistance_min(&self) -> f64 {
        self.resistance_min
    }

    /// Fatigue ratio k = 1/m, 1/min.
    pub fn fatigue_ratio_per_min(&self) -> f64 {
        1.0 / self.resistance_min
    }

    /// Remaining capacity ratio `F_cem(t)/MVC = e^(−k·f·t)` under a constant
    /// relative load `f ∈ (0, 1]`, after `t` minutes.
    pub fn decay_constant_load(&self, f_mvc: f64, t_min: f64) -> Result<f64> {
        check_ratio(f_mvc)?;
        if t_min < 0.0 || !t_min.is_finite() {
            return Err(Error::NegativeEnduranceTime(t_min));
        }
        Ok((-self.fatigue_ratio_per_min() * f_mvc * t_min).exp())
    }

    /// Maximum endurance time in minutes for a constant relative load.
    pub fn met_min(&self, f_mvc: f64) -> Result<f64> {
        check_ratio(f_mvc)?;
        // + 0.0 normalizes the -0.0 arising at f_mvc = 1
        Ok(-self.resistance_min * f_mvc.ln() / f_mvc + 0.0)
    }

    /// Maximum endurance time in seconds.
    pub fn met_s(&self, f_mvc: f64) -> Result<f64> {
        Ok(self.met_min(f_mvc)? * 60.0)
    }

    /// Invert the endurance-time formula: the unique `f ∈ (0, 1]` whose MET
    /// equals `met_min`. Bisection to 1e-10 (MET is strictly decreasing on
    /// (0, 1]).
    pub fn solve_fmvc_from_met_min(&self, met_min: f64) -> Result<f64> {
        if met_min < 0.0 || !met_min.is_finite() {
            return Err(Error::NegativeEnduranceTime(met_min));
        }
        if met_min == 0.0 {
            return Ok(1.0);
        }
        let mut lo = f64::MIN_POSITIVE;
        let mut hi = 1.0;
        // met(lo) = +inf > target, met(hi) = 0 < target
        while hi - lo > 1e-10 {
            let mid = 0.5 * (lo + hi);
            if self.met_min(mid)? > met_min {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Integrate the fatigue equation for a time-varying load (N·m as a
    /// function of minutes) with a classic fixed-step 4th-order scheme.
    /// Returns the capacity trajectory sampled at every step, in seconds.
    pub fn integrate_variable_load(
        &self,
        load_nm: impl Fn(f64) -> f64,
        t_end_min: f64,
        dt_min: f64,
    ) -> Result<FatigueSeries> {
        if dt_min <= 0.0 || !dt_min.is_finite() {
            return Err(Error::InvalidTimeStep(dt_min));
        }
        if t_end_min < 0.0 || !t_end_min.is_finite() {
            return Err(Error::NegativeEnduranceTime(t_end_min));
        }
        let rate = -self.fatigue_ratio_per_min() / self.mvc_nm;
        let sample = |t: f64| -> Result<f64> {
            let v = load_nm(t);
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Scenario(format!(
                    "load trajectory must be finite and nonnegative, got {v} N*m at t = {t} min"
                )));
            }
            Ok(v)
        };

        let mut samples = Vec::new();
        let mut f_cem = self.mvc_nm;
        let mut t = 0.0;
        samples.push(FatigueSample {
            t_s: 0.0,
            f_cem_nm: f_cem,
        });
        while t < t_end_min {
            let h = dt_min.min(t_end_min - t);
            let l0 = sample(t)?;
            let l1 = sample(t + 0.5 * h)?;
            let l2 = sample(t + h)?;
            let k1 = rate * l0 * f_cem;
            let k2 = rate * l1 * (f_cem + 0.5 * h * k1);
            let k3 = rate * l1 * (f_cem + 0.5 * h * k2);
            let k4 = rate * l2 * (f_cem + h * k3);
            f_cem += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t += h;
            samples.push(FatigueSample {
                t_s: t * 60.0,
                f_cem_nm: f_cem,
            });
        }
        Ok(FatigueSeries { samples })
    }
}

fn check_ratio(f_mvc: f64) -> Result<()> {
    if f_mvc.is_nan() || f_mvc <= 0.0 || f_mvc > 1.0 {
        return Err(Error::LoadRatioOutOfRange(f_mvc));
    }
    Ok(())
}

/// Capacity trajectory sample (time in seconds, capacity in N·m).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FatigueSample {
    pub t_s: f64,
    pub f_cem_nm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FatigueSeries {
    pub samples: Vec<FatigueSample>,
}

impl FatigueSeries {
    pub fn final_capacity_nm(&self) -> f64 {
        self.samples.last().map(|s| s.f_cem_nm).unwrap_or(0.0)
    }
}

// ---------------------------------------------------------------------------
// Fatigue-resistance registry

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MuscleGroup {
    General,
    Shoulder,
    Elbow,
    HipBack,
}

impl MuscleGroup {
    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "general" => Some(Self::General),
            "shoulder" => Some(Self::Shoulder),
            "elbow" => Some(Self::Elbow),
            "hip_back" | "hip" => Some(Self::HipBack),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::General => "general",
            Self::Shoulder => "shoulder",
            Self::Elbow => "elbow",
            Self::HipBack => "hip_back",
        }
    }
}

/// Mean fatigue resistance and its population spread for a muscle group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FatigueResistanceEntry {
    pub group: MuscleGroup,
    /// Mean resistance m̄, minutes.
    pub mean_min: f64,
    /// Standard deviation σ_m, minutes.
    pub sigma_min: f64,
}

/// The bundled resistance registry.
pub fn resistance_registry() -> &'static [FatigueResistanceEntry] {
    &crate::data::bundled_static().resistance
}

// ---------------------------------------------------------------------------
// Endurance-time models and the resistance regression

/// A static endurance model: an expression over the relative load x giving
/// minutes.
#[derive(Debug, Clone)]
pub struct MetModel {
    pub name: String,
    pub expression: String,
    pub expr: expr::Expr,
    pub domain: (f64, f64),
    pub subjects: String,
}

impl MetModel {
    pub fn parse(name: &str, expression: &str, domain: (f64, f64), subjects: &str) -> Result<Self> {
        Ok(Self {
            name: name.to_string(),
            expression: expression.to_string(),
            expr: expr::parse(expression)?,
            domain,
            subjects: subjects.to_string(),
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.expr.eval(x)
    }
}

/// The intrinsic endurance curve p(x) = −ln(x)/x (minutes, resistance 1).
pub fn intrinsic_endurance_min(x: f64) -> f64 {
    -x.ln() / x
}

/// The regression grid: x = 0.16, 0.17, …, 0.99 (84 points).
pub fn regression_grid() -> Vec<f64> {
    (16..=99).map(|n| n as f64 / 100.0).collect()
}

/// Fatigue resistance of an endurance model: least squares through the
/// origin against the intrinsic curve over the regression grid.
pub fn regress_fatigue_resistance(model: &MetModel) -> Result<f64> {
    let grid = regression_grid();
    if model.domain.0 > grid[0] + 1e-12 || model.domain.1 < grid[grid.len() - 1] - 1e-12 {
        return Err(Error::Config(format!(
            "model `{}` domain [{}, {}] does not cover the regression grid [0.16, 0.99]",
            model.name, model.domain.0, model.domain.1
        )));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for &x in &grid {
        let f = model.eval(x);
        if !f.is_finite() {
            return Err(Error::ModelNotFinite {
                name: model.name.clone(),
                x,
            });
        }
        let p = intrinsic_endurance_min(x);
        num += p * f;
        den += p * p;
    }
    Ok(num / den)
}

/// Mean and standard deviation of a set of regressed resistances.
/// `sample = true` uses the n−1 denominator.
pub fn group_statistics(values: &[f64], sample: bool) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    let denom = if sample { n - 1.0 } else { n };
    (mean, (ss / denom).sqrt())
}
