//! Joint moments and forces by the recursive Newton-Euler method over the
//! chain tree, with a static specialization for sustained postures.
//!
//! Everything is computed in world coordinates: a forward pass propagates
//! angular velocity/acceleration and origin accelerations from the root out,
//! a backward pass accumulates forces and moments from the leaves in. Each
//! joint's reported moment is the actuation the joint must exert about its
//! rotation axis to balance gravity, inertial terms, and external loads.

use nalgebra::{Matrix3, Vector3};

use crate::anthro::{SegmentDynamics, SegmentGeometry, SegmentShape};
use crate::data::Extensions;
use crate::error::{Error, Result};
use crate::kinematics::{ChainModel, PostureState};

/// A force/torque applied to a named frame, in world coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalLoad {
    pub frame: String,
    pub force_n: Vector3<f64>,
    pub torque_nm: Vector3<f64>,
}

/// Load carried by one joint.
#[derive(Debug, Clone)]
pub struct JointLoad {
    /// 1-based joint index.
    pub joint: usize,
    pub name: String,
    /// Signed moment about the joint's rotation axis.
    pub moment_nm: f64,
    /// Full moment vector at the joint origin (world coordinates).
    pub moment_vec_nm: Vector3<f64>,
    /// Force transmitted through the joint from its parent.
    pub reaction_force_n: Vector3<f64>,
}

/// A mass rigidly attached to a joint frame.
#[derive(Debug, Clone)]
pub struct Body {
    pub segment: String,
    /// Carrier joint (1-based).
    pub carrier: usize,
    pub mass_kg: f64,
    pub com_local: Vector3<f64>,
    pub inertia_local: Matrix3<f64>,
}

fn diag(axial: f64, transverse: f64, axis: usize) -> Matrix3<f64> {
    let mut values = [transverse; 3];
    values[axis] = axial;
    Matrix3::from_diagonal(&Vector3::new(values[0], values[1], values[2]))
}

/// Bind scaled segment masses to their carrier frames.
///
/// The placement encodes the chain's frame conventions: arm segments hang
/// along local −z below their proximal joints, the shank along local −x of
/// the knee frame, trunk boxes along the frame axis that points up in the
/// standing posture. Hand masses sit at the wrist points.
pub fn attach_segments(
    geometry: &[SegmentGeometry],
    dynamics: &[SegmentDynamics],
    extensions: &Extensions,
    stature_m: f64,
) -> Result<Vec<Body>> {
    let length = |symbol: &str| -> Result<f64> {
        crate::anthro::resolve_symbol(geometry, symbol)
            .ok_or_else(|| Error::Config(format!("missing segment symbol `{symbol}`")))
    };
    let r_ua = length("R_ua")?;
    let r_la = length("R_la")?;
    let r_ul = length("R_ul")?;
    let d_ll = length("D_ll")?;
    let d_ub = length("D_ub")?;
    let r_lb = length("R_lb")?;
    let ankle_h = extensions.ankle_height * stature_m;

    let neck_len = dynamics
        .iter()
        .find(|s| s.name == "neck")
        .map(|s| s.length_m)
        .unwrap_or(0.0);

    let mut bodies = Vec::with_capacity(dynamics.len());
    for seg in dynamics {
        let it = seg.inertia_about_com[1];
        let ia = seg.inertia_about_com[0];
        let (carrier, com_local, inertia_local) = match seg.name.as_str() {
            "pelvis" => (1, Vector3::zeros(), diag(ia, it, 0)),
            "lumbar" => (4, Vector3::new(0.0, 0.0, -r_lb / 2.0), diag(ia, it, 2)),
            "thorax" => (5, Vector3::new(0.0, -d_ub / 2.0, 0.0), diag(ia, it, 1)),
            "neck" => (
                8,
                Vector3::new(seg.com_offset_m, 0.0, 0.0),
                diag(ia, it, 0),
            ),
            "head" => (
                8,
                Vector3::new(neck_len + seg.com_offset_m, 0.0, 0.0),
                diag(ia, it, 0),
            ),
            "right_upper_arm" => (
                11,
                Vector3::new(0.0, 0.0, r_ua - seg.com_offset_m),
                diag(ia, it, 2),
            ),
            "left_upper_arm" => (
                16,
                Vector3::new(0.0, 0.0, r_ua - seg.com_offset_m),
                diag(ia, it, 2),
            ),
            "right_forearm" => (
                13,
                Vector3::new(0.0, 0.0, -seg.com_offset_m),
                diag(ia, it, 2),
            ),
            "left_forearm" => (
                18,
                Vector3::new(0.0, 0.0, -seg.com_offset_m),
                diag(ia, it, 2),
            ),
            // hand mass is lumped at the wrist point for the load path
            "right_hand" => (13, Vector3::new(0.0, 0.0, -r_la), diag(ia, it, 2)),
            "left_hand" => (18, Vector3::new(0.0, 0.0, -r_la), diag(ia, it, 2)),
            "right_thigh" => (
                21,
                Vector3::new(0.0, 0.0, r_ul - seg.com_offset_m),
                diag(ia, it, 2),
            ),
            "left_thigh" => (
                26,
                Vector3::new(0.0, 0.0, r_ul - seg.com_offset_m),
                diag(ia, it, 2),
            ),
            "right_shank" => (
                22,
                Vector3::new(-d_ll / 2.0, 0.0, 0.0),
                diag(ia, it, 0),
            ),
            "left_shank" => (
                27,
                Vector3::new(-d_ll / 2.0, 0.0, 0.0),
                diag(ia, it, 0),
            ),
            "right_foot" => (
                23,
                Vector3::new(-ankle_h / 2.0, seg.com_offset_m / 2.0, 0.0),
                diag(ia, it, 1),
            ),
            "left_foot" => (
                28,
                Vector3::new(-ankle_h / 2.0, seg.com_offset_m / 2.0, 0.0),
                diag(ia, it, 1),
            ),
            other => {
                return Err(Error::Config(format!(
                    "no frame attachment for segment `{other}`"
                )))
            }
        };
        // balls and cubes are isotropic; only cylinders distinguish axes
        let inertia_local = if seg.shape == SegmentShape::Cylinder {
            inertia_local
        } else {
            Matrix3::from_diagonal(&Vector3::new(
                seg.inertia_about_com[0],
                seg.inertia_about_com[1],
                seg.inertia_about_com[2],
            ))
        };
        bodies.push(Body {
            segment: seg.name.clone(),
            carrier,
            mass_kg: seg.mass_kg,
            com_local,
            inertia_local,
        });
    }
    Ok(bodies)
}

/// Joint loads for a static posture (rates and accelerations zero).
pub fn inverse_dynamics_static(
    chain: &ChainModel,
    bodies: &[Body],
    posture: &PostureState,
    loads: &[ExternalLoad],
    gravity: Vector3<f64>,
) -> Result<Vec<JointLoad>> {
    let mut still = posture.clone();
    still.q_dot.iter_mut().for_each(|v| *v = 0.0);
    still.q_ddot.iter_mut().for_each(|v| *v = 0.0);
    general_inverse_dynamics(chain, bodies, &still, loads, gravity)
}

/// Full Newton-Euler recursion including velocity and acceleration terms.
/// Reduces exactly to the static case when the posture's rates are zero.
pub fn general_inverse_dynamics(
    chain: &ChainModel,
    bodies: &[Body],
    posture: &PostureState,
    loads: &[ExternalLoad],
    gravity: Vector3<f64>,
) -> Result<Vec<JointLoad>> {
    let n = chain.n_joints();
    for rate in posture.q_dot.iter().chain(posture.q_ddot.iter()) {
        if !rate.is_finite() {
            return Err(Error::Scenario("non-finite joint rate".into()));
        }
    }

    let fk = chain.forward_kinematics(posture)?;

    // external loads, accumulated per carrier joint
    let mut ext_force = vec![Vector3::zeros(); n + 1];
    let mut ext_moment = vec![Vector3::zeros(); n + 1]; // about the carrier origin
    for load in loads {
        if !(load.force_n.iter().all(|v| v.is_finite())
            && load.torque_nm.iter().all(|v| v.is_finite()))
        {
            return Err(Error::NonFiniteLoad(load.frame.clone()));
        }
        let carrier = chain.frame_carrier(&load.frame)?;
        let application = chain.locate(&fk, &load.frame)?;
        let origin = fk.joint(carrier).position;
        ext_force[carrier] += load.force_n;
        ext_moment[carrier] += (application - origin).cross(&load.force_n) + load.torque_nm;
    }

    // forward pass: world angular velocity/acceleration and origin acceleration
    let mut omega = vec![Vector3::zeros(); n + 1];
    let mut alpha = vec![Vector3::zeros(); n + 1];
    let mut accel = vec![Vector3::zeros(); n + 1];
    for (idx, row) in chain.rows.iter().enumerate() {
        let j = idx + 1;
        let (w_p, a_p, acc_p, o_p) = if row.parent == 0 {
            (
                Vector3::zeros(),
                Vector3::zeros(),
                Vector3::zeros(),
                Vector3::zeros(),
            )
        } else {
            (
                omega[row.parent],
                alpha[row.parent],
                accel[row.parent],
                fk.joint(row.parent).position,
            )
        };
        let z = fk.joint_axis(j);
        let r = fk.joint(j).position - o_p;
        let qd = posture.q_dot[idx];
        let qdd = posture.q_ddot[idx];
        omega[j] = w_p + qd * z;
        alpha[j] = a_p + qdd * z + w_p.cross(&(qd * z));
        accel[j] = acc_p + a_p.cross(&r) + w_p.cross(&w_p.cross(&r));
    }

    // per-joint force/moment contributions of the attached bodies
    let mut force = vec![Vector3::zeros(); n + 1];
    let mut moment = vec![Vector3::zeros(); n + 1];
    for body in bodies {
        let j = body.carrier;
        let pose = fk.joint(j);
        let rc = pose.rotation * body.com_local;
        let a_com = accel[j] + alpha[j].cross(&rc) + omega[j].cross(&omega[j].cross(&rc));
        let inertia_world = pose.rotation * body.inertia_local * pose.rotation.transpose();
        let f = body.mass_kg * (a_com - gravity);
        force[j] += f;
        moment[j] += inertia_world * alpha[j]
            + omega[j].cross(&(inertia_world * omega[j]))
            + rc.cross(&f);
    }
    for j in 1..=n {
        force[j] -= ext_force[j];
        moment[j] -= ext_moment[j];
    }

    // backward pass: fold children into parents
    for idx in (0..n).rev() {
        let j = idx + 1;
        let parent = chain.rows[idx].parent;
        if parent == 0 {
            continue;
        }
        let lever = fk.joint(j).position - fk.joint(parent).position;
        let child_force = force[j];
        let child_moment = moment[j] + lever.cross(&child_force);
        force[parent] += child_force;
        moment[parent] += child_moment;
    }

    Ok((0..n)
        .map(|idx| {
            let j = idx + 1;
            JointLoad {
                joint: j,
                name: chain.rows[idx].name.clone(),
                moment_nm: moment[j].dot(&fk.joint_axis(j)),
                moment_vec_nm: moment[j],
                reaction_force_n: force[j],
            }
        })
        .collect())
}

/// Potential energy of the attached bodies (for consistency checks):
/// PE = Σ mᵢ · (−g · p_com,i).
pub fn potential_energy(
    chain: &ChainModel,
    bodies: &[Body],
    posture: &PostureState,
    gravity: Vector3<f64>,
) -> Result<f64> {
    let fk = chain.forward_kinematics(posture)?;
    Ok(bodies
        .iter()
        .map(|b| {
            let p = fk.joint(b.carrier).position + fk.joint(b.carrier).rotation * b.com_local;
            -b.mass_kg * gravity.dot(&p)
        })
        .sum())
}
