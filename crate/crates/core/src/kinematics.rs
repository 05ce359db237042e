//! Kinematic chain: 28 revolute joints in modified Denavit-Hartenberg
//! notation (Khalil-Kleinfinger tree form), posture state, forward
//! kinematics, and joint-limit checks.
//!
//! Frame `j` is placed relative to its antecedent frame `i = a(j)` by
//!
//! ```text
//! iTj = Rot(z, γj) · Trans(z, bj) · Rot(x, αj) · Trans(x, dj)
//!       · Rot(z, θj) · Trans(z, rj)
//! ```
//!
//! with θj the joint variable (rotation about the joint axis z_j). Rows with
//! branch flag u = 1 start a new branch from their antecedent. The root row
//! (j = 1) uses the posture's root position for its `X_r, Y_r, Z_r` entries,
//! which places the pelvis center at exactly that world point. In the
//! resulting world frame, +Y is the standing body's up axis and +Z its
//! anterior axis.
//!
//! The model is immutable after [`build_chain`]; forward kinematics is a
//! pure function of the posture.

use std::collections::BTreeMap;

use nalgebra::{Matrix3, Vector3};

use crate::anthro::SegmentGeometry;
use crate::data::{self, ChainTable, Extensions, LengthEntry, LimitsTable};
use crate::error::{Error, Result};

pub const N_JOINTS: usize = 28;

/// A length entry after symbol resolution: a constant, or one of the root
/// coordinates taken from the posture at evaluation time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResolvedLength {
    Value(f64),
    RootX,
    RootY,
    RootZ,
}

impl ResolvedLength {
    fn eval(self, root: &Vector3<f64>) -> f64 {
        match self {
            ResolvedLength::Value(v) => v,
            ResolvedLength::RootX => root.x,
            ResolvedLength::RootY => root.y,
            ResolvedLength::RootZ => root.z,
        }
    }

    /// Constant value, treating root coordinates as 0.
    pub fn constant_or_zero(self) -> f64 {
        match self {
            ResolvedLength::Value(v) => v,
            _ => 0.0,
        }
    }
}

/// One resolved chain row (modified-DH parameters of one revolute joint).
#[derive(Debug, Clone)]
pub struct DhRow {
    pub j: usize,
    /// Antecedent joint index, 0 for the world frame.
    pub parent: usize,
    /// Branching flag u_j.
    pub branch: bool,
    /// Joint type flag σ_j (0 = revolute for every row; kept for fidelity).
    pub sigma: u8,
    pub gamma_rad: f64,
    pub b: ResolvedLength,
    pub alpha_rad: f64,
    pub d: ResolvedLength,
    pub r: ResolvedLength,
    pub q_ini_rad: f64,
    pub name: String,
    /// Orientation of the anatomical angle: θ = q_ini + flexion_sign · angle.
    pub flexion_sign: f64,
}

/// Admissible joint range on θ (inclusive bounds).
#[derive(Debug, Clone)]
pub struct JointLimit {
    pub joint: usize,
    pub name: String,
    pub lower_rad: f64,
    pub upper_rad: f64,
}

/// A point rigidly attached to a joint frame (end effectors: wrists, palms,
/// soles, toes, head top).
#[derive(Debug, Clone)]
pub struct NamedPoint {
    pub name: String,
    /// Carrier joint (1-based).
    pub carrier: usize,
    pub local: Vector3<f64>,
}

/// The resolved chain: rows, limits, named points.
#[derive(Debug, Clone)]
pub struct ChainModel {
    pub rows: Vec<DhRow>,
    pub limits: Vec<JointLimit>,
    pub points: Vec<NamedPoint>,
}

/// Posture, rate, and acceleration state plus the root position.
#[derive(Debug, Clone, PartialEq)]
pub struct PostureState {
    pub q: Vec<f64>,
    pub q_dot: Vec<f64>,
    pub q_ddot: Vec<f64>,
    pub root_position: Vector3<f64>,
}

impl PostureState {
    pub fn is_static(&self) -> bool {
        self.q_dot.iter().all(|&v| v == 0.0) && self.q_ddot.iter().all(|&v| v == 0.0)
    }
}

/// World pose of one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FramePose {
    pub position: Vector3<f64>,
    pub rotation: Matrix3<f64>,
}

/// Forward-kinematics result: every joint frame plus the named points.
#[derive(Debug, Clone)]
pub struct FkSolution {
    pub joints: Vec<FramePose>,
    pub points: BTreeMap<String, FramePose>,
}

impl FkSolution {
    /// Pose of a joint frame (1-based index).
    pub fn joint(&self, j: usize) -> &FramePose {
        &self.joints[j - 1]
    }

    pub fn point(&self, name: &str) -> Option<&FramePose> {
        self.points.get(name)
    }

    /// World joint axis (z-axis of frame j, 1-based).
    pub fn joint_axis(&self, j: usize) -> Vector3<f64> {
        self.joints[j - 1].rotation.column(2).into()
    }
}

/// One out-of-range joint.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitViolation {
    pub joint: usize,
    pub name: String,
    pub value_rad: f64,
    /// Positive distance beyond the violated bound.
    pub overshoot_rad: f64,
}

fn rot_x(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

fn rot_z(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Resolve the chain table against scaled segment geometry.
///
/// `stature_m` scales the extension symbols (foot length `L_f`, ankle height
/// `H_a`, head+neck column `L_hn`) used only by named end-effector points.
/// A geometry symbol referenced by the table but absent from `geometry` is a
/// configuration error naming that symbol.
pub fn build_chain(
    chain: &ChainTable,
    limits: &LimitsTable,
    geometry: &[SegmentGeometry],
    extensions: &Extensions,
    stature_m: f64,
) -> Result<ChainModel> {
    let resolve_symbol = |symbol: &str, scale: f64| -> Result<f64> {
        let length = crate::anthro::resolve_symbol(geometry, symbol)
            .or(match symbol {
                "L_f" => Some(extensions.foot_length * stature_m),
                "H_a" => Some(extensions.ankle_height * stature_m),
                "L_hn" => Some(extensions.head_neck_length * stature_m),
                _ => None,
            })
            .ok_or_else(|| Error::Config(format!("missing segment symbol `{symbol}`")))?;
        Ok(scale * length)
    };

    let resolve_length = |text: &str| -> Result<ResolvedLength> {
        Ok(match data::parse_length(text)? {
            LengthEntry::Zero => ResolvedLength::Value(0.0),
            LengthEntry::RootX => ResolvedLength::RootX,
            LengthEntry::RootY => ResolvedLength::RootY,
            LengthEntry::RootZ => ResolvedLength::RootZ,
            LengthEntry::Symbol { symbol, scale } => {
                ResolvedLength::Value(resolve_symbol(&symbol, scale)?)
            }
        })
    };

    if chain.rows.len() != N_JOINTS {
        return Err(Error::Config(format!(
            "chain table has {} rows, expected {N_JOINTS}",
            chain.rows.len()
        )));
    }

    let mut rows = Vec::with_capacity(N_JOINTS);
    for (idx, spec) in chain.rows.iter().enumerate() {
        if spec.j != idx + 1 {
            return Err(Error::Config(format!(
                "chain rows out of order: row {} has j = {}",
                idx + 1,
                spec.j
            )));
        }
        if spec.parent >= spec.j {
            return Err(Error::Config(format!(
                "row {} has antecedent {} >= j (rows must form a tree)",
                spec.j, spec.parent
            )));
        }
        rows.push(DhRow {
            j: spec.j,
            parent: spec.parent,
            branch: spec.u != 0,
            sigma: spec.sigma,
            gamma_rad: data::parse_angle(&spec.gamma)?,
            b: resolve_length(&spec.b)?,
            alpha_rad: data::parse_angle(&spec.alpha)?,
            d: resolve_length(&spec.d)?,
            r: resolve_length(&spec.r)?,
            q_ini_rad: data::parse_angle(&spec.q_ini)?,
            name: spec.name.clone(),
            flexion_sign: spec.flexion_sign,
        });
    }

    let mut joint_limits = Vec::new();
    for lim in &limits.limits {
        let idx = rows
            .iter()
            .position(|r| r.name == lim.joint)
            .ok_or_else(|| Error::UnknownJoint(lim.joint.clone()))?;
        let row = &rows[idx];
        let a = row.q_ini_rad + row.flexion_sign * lim.min_deg.to_radians();
        let b = row.q_ini_rad + row.flexion_sign * lim.max_deg.to_radians();
        joint_limits.push(JointLimit {
            joint: idx + 1,
            name: lim.joint.clone(),
            lower_rad: a.min(b),
            upper_rad: a.max(b),
        });
    }

    let mut points = Vec::new();
    for spec in &chain.points {
        if spec.carrier == 0 || spec.carrier > N_JOINTS {
            return Err(Error::Config(format!(
                "point `{}` has carrier {} outside 1..={N_JOINTS}",
                spec.name, spec.carrier
            )));
        }
        let mut local = Vector3::zeros();
        for off in &spec.offsets {
            let axis = match off.axis.as_str() {
                "x" => 0,
                "y" => 1,
                "z" => 2,
                other => {
                    return Err(Error::Config(format!(
                        "point `{}` has unknown axis `{other}`",
                        spec.name
                    )))
                }
            };
            local[axis] += resolve_symbol(&off.symbol, off.scale)?;
        }
        points.push(NamedPoint {
            name: spec.name.clone(),
            carrier: spec.carrier,
            local,
        });
    }

    Ok(ChainModel {
        rows,
        limits: joint_limits,
        points,
    })
}

impl ChainModel {
    pub fn n_joints(&self) -> usize {
        self.rows.len()
    }

    /// 0-based index of a joint by name.
    pub fn joint_index(&self, name: &str) -> Option<usize> {
        self.rows.iter().position(|r| r.name == name)
    }

    /// Neutral standing posture (all θ at their initial column values).
    pub fn initial_posture(&self) -> PostureState {
        PostureState {
            q: self.rows.iter().map(|r| r.q_ini_rad).collect(),
            q_dot: vec![0.0; self.rows.len()],
            q_ddot: vec![0.0; self.rows.len()],
            root_position: Vector3::zeros(),
        }
    }

    /// Posture from named anatomical angles in degrees; joints not named
    /// stay at their initial value.
    pub fn posture_from_angles(
        &self,
        angles_deg: &BTreeMap<String, f64>,
        root_position: Vector3<f64>,
    ) -> Result<PostureState> {
        let mut posture = self.initial_posture();
        posture.root_position = root_position;
        for (name, deg) in angles_deg {
            let idx = self
                .joint_index(name)
                .ok_or_else(|| Error::UnknownJoint(name.clone()))?;
            let row = &self.rows[idx];
            posture.q[idx] = row.q_ini_rad + row.flexion_sign * deg.to_radians();
        }
        Ok(posture)
    }

    /// Anatomical angle (degrees) of joint `idx` (0-based) in a posture.
    pub fn anatomical_angle_deg(&self, idx: usize, posture: &PostureState) -> f64 {
        let row = &self.rows[idx];
        (row.flexion_sign * (posture.q[idx] - row.q_ini_rad)).to_degrees()
    }

    /// World pose of every joint frame and named point.
    pub fn forward_kinematics(&self, posture: &PostureState) -> Result<FkSolution> {
        let n = self.rows.len();
        if posture.q.len() != n {
            return Err(Error::Scenario(format!(
                "posture has {} joint angles, chain has {n}",
                posture.q.len()
            )));
        }
        let root = &posture.root_position;
        let mut joints: Vec<FramePose> = Vec::with_capacity(n);

        for (idx, row) in self.rows.iter().enumerate() {
            let (parent_rot, parent_pos) = if row.parent == 0 {
                (Matrix3::identity(), Vector3::zeros())
            } else {
                let p = &joints[row.parent - 1];
                (p.rotation, p.position)
            };

            let r_gamma = parent_rot * rot_z(row.gamma_rad);
            let r_alpha = r_gamma * rot_x(row.alpha_rad);
            let theta = posture.q[idx];

            let position = parent_pos
                + row.b.eval(root) * parent_rot.column(2)
                + row.d.eval(root) * r_gamma.column(0)
                + row.r.eval(root) * r_alpha.column(2);
            let rotation = r_alpha * rot_z(theta);
            joints.push(FramePose { position, rotation });
        }

        let mut points = BTreeMap::new();
        for point in &self.points {
            let carrier = &joints[point.carrier - 1];
            points.insert(
                point.name.clone(),
                FramePose {
                    position: carrier.position + carrier.rotation * point.local,
                    rotation: carrier.rotation,
                },
            );
        }

        Ok(FkSolution { joints, points })
    }

    /// Joints whose θ lies outside its admissible range (bounds inclusive).
    pub fn check_limits(&self, posture: &PostureState) -> Vec<LimitViolation> {
        let mut violations = Vec::new();
        for lim in &self.limits {
            let q = posture.q[lim.joint - 1];
            let overshoot = if q < lim.lower_rad {
                lim.lower_rad - q
            } else if q > lim.upper_rad {
                q - lim.upper_rad
            } else {
                continue;
            };
            violations.push(LimitViolation {
                joint: lim.joint,
                name: lim.name.clone(),
                value_rad: q,
                overshoot_rad: overshoot,
            });
        }
        violations
    }

    /// World position of a named frame: a point name, a joint name, or
    /// `joint_<j>`.
    pub fn locate(&self, fk: &FkSolution, frame: &str) -> Result<Vector3<f64>> {
        if let Some(pose) = fk.point(frame) {
            return Ok(pose.position);
        }
        if let Some(idx) = self.joint_index(frame) {
            return Ok(fk.joints[idx].position);
        }
        if let Some(num) = frame.strip_prefix("joint_") {
            if let Ok(j) = num.parse::<usize>() {
                if j >= 1 && j <= self.rows.len() {
                    return Ok(fk.joints[j - 1].position);
                }
            }
        }
        Err(Error::UnknownFrame(frame.to_string()))
    }

    /// Carrier joint (1-based) of a named frame, for rigid attachment.
    pub fn frame_carrier(&self, frame: &str) -> Result<usize> {
        if let Some(point) = self.points.iter().find(|p| p.name == frame) {
            return Ok(point.carrier);
        }
        if let Some(idx) = self.joint_index(frame) {
            return Ok(idx + 1);
        }
        if let Some(num) = frame.strip_prefix("joint_") {
            if let Ok(j) = num.parse::<usize>() {
                if j >= 1 && j <= self.rows.len() {
                    return Ok(j);
                }
            }
        }
        Err(Error::UnknownFrame(frame.to_string()))
    }
}
