//! Independent reference implementations used to validate the analytic
//! paths: brute-force forward kinematics over 4x4 matrix chains, central
//! finite-difference Jacobians, and a truncated power-series exponential.
//!
//! Nothing in this module calls the recursive forward kinematics or the
//! analytic Jacobians; the layering is the point.

use crate::kinematics::{BodyPoses, KinematicsError, TwistRep};
use crate::liegroup::{unskew, Pose, Screw};
use crate::mbsmodel::MbsModel;
use nalgebra::{Matrix3, Matrix4, Vector3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdOrder {
    Central2,
}

/// Finite-difference scheme; only second-order central differences are
/// offered.
#[derive(Debug, Clone, Copy)]
pub struct FdScheme {
    pub step: f64,
    pub order: FdOrder,
}

impl Default for FdScheme {
    fn default() -> Self {
        // Balances truncation against rounding for trigonometric maps in f64.
        FdScheme {
            step: 1e-6,
            order: FdOrder::Central2,
        }
    }
}

/// Forward kinematics as a direct left-to-right 4x4 matrix chain through the
/// synthesized joint frames, recomputed from scratch for every body.
pub fn naive_fk(model: &MbsModel, q: &[f64]) -> Result<BodyPoses, KinematicsError> {
    if q.len() != model.n() {
        return Err(KinematicsError::DimensionMismatch {
            expected: model.n(),
            got: q.len(),
        });
    }
    let jfr = model.synthesize_jfr();
    let mut poses = Vec::with_capacity(model.n());
    for i in 1..=model.n() {
        let mut m = Matrix4::<f64>::identity();
        for j in model.topology().path(i) {
            let jd = &jfr.joints[j - 1];
            m = m
                * jd.s_pred.to_matrix4()
                * jd.z.exp(q[j - 1]).to_matrix4()
                * jd.s_succ.inverse().to_matrix4();
        }
        poses.push(Pose::from_matrix4_unchecked(&m));
    }
    Ok(BodyPoses::from_poses(poses))
}

/// Finite-difference Jacobian of body `i` in the requested representation.
///
/// Each column is the representation-specific combination of perturbed
/// configurations: `C^-1 dC` for body-fixed, `dC C^-1` for spatial, and the
/// angular/linear assemblies for the hybrid and mixed forms. Columns of
/// joints off the ground-to-`i` path are exactly zero.
pub fn fd_body_jacobian(
    model: &MbsModel,
    q: &[f64],
    i: usize,
    rep: TwistRep,
    scheme: FdScheme,
) -> Result<Vec<Screw>, KinematicsError> {
    if q.len() != model.n() {
        return Err(KinematicsError::DimensionMismatch {
            expected: model.n(),
            got: q.len(),
        });
    }
    assert!(scheme.step > 0.0, "finite-difference step must be positive");
    let h = scheme.step;
    let center = naive_fk(model, q)?.pose(i);
    let c_inv = center.inverse().to_matrix4();
    let r_center = *center.rot.matrix();
    let n = model.n();
    let mut cols = vec![Screw::zero(); n];
    for j in model.topology().path(i) {
        let mut qp = q.to_vec();
        let mut qm = q.to_vec();
        qp[j - 1] += h;
        qm[j - 1] -= h;
        let cp = naive_fk(model, &qp)?.pose(i);
        let cm = naive_fk(model, &qm)?.pose(i);
        let dc = (cp.to_matrix4() - cm.to_matrix4()) / (2.0 * h);
        cols[j - 1] = match rep {
            TwistRep::BodyFixed => Screw::from_hat(&(c_inv * dc)),
            TwistRep::Spatial => Screw::from_hat(&(dc * c_inv)),
            TwistRep::Hybrid => {
                let dr = (cp.rot.matrix() - cm.rot.matrix()) / (2.0 * h);
                Screw::new(
                    vee_rot(&(dr * r_center.transpose())),
                    (cp.pos - cm.pos) / (2.0 * h),
                )
            }
            TwistRep::Mixed => {
                let dr = (cp.rot.matrix() - cm.rot.matrix()) / (2.0 * h);
                Screw::new(
                    vee_rot(&(r_center.transpose() * dr)),
                    (cp.pos - cm.pos) / (2.0 * h),
                )
            }
        };
    }
    Ok(cols)
}

fn vee_rot(m: &Matrix3<f64>) -> Vector3<f64> {
    unskew(&((m - m.transpose()) * 0.5))
}

/// Truncated power series of the 4x4 matrix exponential: powers 0..=terms.
pub fn series_exp(v: &Screw, terms: usize) -> Pose {
    let hat = v.hat();
    let mut sum = Matrix4::<f64>::identity();
    let mut term = Matrix4::<f64>::identity();
    for k in 1..=terms {
        term = term * hat / (k as f64);
        sum += term;
    }
    Pose::from_matrix4_unchecked(&sum)
}
