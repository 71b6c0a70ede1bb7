//! Generalized inverse kinematics at the velocity level: recover joint rates
//! from prescribed per-body twists.
//!
//! The sweep solution projects the relative twist of each body with respect
//! to its parent onto the joint screw,
//! `qdot_i = <X_i, V_i - Ad_{C_{i,p}} V_p> / |X_i|^2`,
//! working entirely in the body-fixed representation (other representations
//! convert exactly first). For twists consistent with the kinematics this
//! recovers the rates exactly. For inconsistent twists the sweep and the
//! dense least-squares solution need not coincide; [`lsq_discrepancy`]
//! measures the gap so callers can report it instead of assuming it away.
//!
//! The denominator |X_i|^2 is a pairing of co-screw and screw coordinates,
//! not a frame-invariant norm; rate recovery from inconsistent data therefore
//! depends on the chosen body frames.

use crate::kinematics::{
    all_jacobians, convert_twist, fk, BodyPoses, BodyTwists, KinematicsError, TwistRep,
};
use crate::liegroup::Screw;
use crate::mbsmodel::MbsModel;
use nalgebra::{Cholesky, DMatrix, DVector};

/// Relative tolerance classifying a twist set as consistent with the tree
/// kinematics: `residual_norm <= 1e-8 * (1 + |V|)`.
pub const CONSISTENCY_REL_TOL: f64 = 1e-8;

/// Result of a joint-rate recovery.
#[derive(Debug, Clone)]
pub struct RateSolution {
    pub qdot: Vec<f64>,
    /// Per-body residual `V - J qdot` in the body-fixed representation.
    pub residual: Vec<Screw>,
    pub residual_norm: f64,
    /// True when the residual is small relative to the input magnitude.
    pub consistent: bool,
}

fn to_body_fixed(model: &MbsModel, poses: &BodyPoses, twists: &BodyTwists) -> Vec<Screw> {
    (1..=model.n())
        .map(|i| {
            convert_twist(
                &twists.twist(i),
                twists.rep,
                TwistRep::BodyFixed,
                &poses.pose(i),
            )
        })
        .collect()
}

/// Joint-rate recovery by the per-joint projection sweep.
pub fn rates_from_twists(
    model: &MbsModel,
    q: &[f64],
    twists: &BodyTwists,
) -> Result<RateSolution, KinematicsError> {
    if twists.n() != model.n() {
        return Err(KinematicsError::DimensionMismatch {
            expected: model.n(),
            got: twists.n(),
        });
    }
    let n = model.n();
    let poses = fk(model, q)?;
    let vb = to_body_fixed(model, &poses, twists);

    let mut qdot = vec![0.0; n];
    for i in 1..=n {
        let p = model.parent(i);
        let parent_twist = if p == 0 { Screw::zero() } else { vb[p - 1] };
        let carried = poses.rel(i, p).transform_screw(&parent_twist);
        let x = model.body_screw(i);
        qdot[i - 1] = x.screw().dot(&(vb[i - 1] - carried)) / x.norm_squared();
    }

    // Residual against the body-fixed Jacobian.
    let jacs = all_jacobians(model, &poses, TwistRep::BodyFixed);
    let mut residual = Vec::with_capacity(n);
    let mut sq = 0.0;
    let mut input_sq = 0.0;
    for i in 1..=n {
        let r = vb[i - 1] - jacs[i - 1].mul_rates(&qdot);
        sq += r.norm_squared();
        input_sq += vb[i - 1].norm_squared();
        residual.push(r);
    }
    let residual_norm = sq.sqrt();
    let consistent = residual_norm <= CONSISTENCY_REL_TOL * (1.0 + input_sq.sqrt());
    Ok(RateSolution {
        qdot,
        residual,
        residual_norm,
        consistent,
    })
}

/// Rate of a single joint from the twists of its body and parent, given in
/// `rep`. Performs exactly the operations of the corresponding component of
/// [`rates_from_twists`].
pub fn per_joint_rate(
    model: &MbsModel,
    q: &[f64],
    i: usize,
    v_i: &Screw,
    v_parent: &Screw,
    rep: TwistRep,
) -> Result<f64, KinematicsError> {
    if i == 0 || i > model.n() {
        return Err(KinematicsError::BodyOutOfRange {
            body: i,
            n: model.n(),
        });
    }
    let poses = fk(model, q)?;
    let p = model.parent(i);
    let vb_i = convert_twist(v_i, rep, TwistRep::BodyFixed, &poses.pose(i));
    let vb_p = if p == 0 {
        Screw::zero()
    } else {
        convert_twist(v_parent, rep, TwistRep::BodyFixed, &poses.pose(p))
    };
    let carried = poses.rel(i, p).transform_screw(&vb_p);
    let x = model.body_screw(i);
    Ok(x.screw().dot(&(vb_i - carried)) / x.norm_squared())
}

/// Dense least-squares rates `argmin |J^b qdot - V^b|` via the normal
/// equations on the stacked body-fixed system Jacobian. Solver route is
/// independent of the sweep; the Jacobian is shared by definition of the
/// problem.
pub fn dense_least_squares_rates(
    model: &MbsModel,
    q: &[f64],
    twists: &BodyTwists,
) -> Result<Vec<f64>, KinematicsError> {
    if twists.n() != model.n() {
        return Err(KinematicsError::DimensionMismatch {
            expected: model.n(),
            got: twists.n(),
        });
    }
    let n = model.n();
    let poses = fk(model, q)?;
    let vb = to_body_fixed(model, &poses, twists);

    let jacs = all_jacobians(model, &poses, TwistRep::BodyFixed);
    let mut j = DMatrix::zeros(6 * n, n);
    let mut v = DVector::zeros(6 * n);
    for i in 1..=n {
        j.view_mut((6 * (i - 1), 0), (6, n))
            .copy_from(&jacs[i - 1].to_matrix());
        v.rows_mut(6 * (i - 1), 6)
            .copy_from(&vb[i - 1].as_vector6());
    }
    let jt = j.transpose();
    let normal = &jt * &j;
    let rhs = &jt * &v;
    let sol = match Cholesky::new(normal) {
        Some(chol) => chol.solve(&rhs),
        // The normal matrix of a valid tree has full rank; SVD is the
        // fallback for near-singular configurations.
        None => j.svd(true, true).solve(&v, 1e-14).expect("svd solve"),
    };
    Ok(sol.iter().copied().collect())
}

/// Largest component difference between the sweep solution and the dense
/// least-squares solution for the same twists.
pub fn lsq_discrepancy(
    model: &MbsModel,
    q: &[f64],
    twists: &BodyTwists,
) -> Result<f64, KinematicsError> {
    let sweep = rates_from_twists(model, q, twists)?;
    let lsq = dense_least_squares_rates(model, q, twists)?;
    Ok(sweep
        .qdot
        .iter()
        .zip(&lsq)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}
