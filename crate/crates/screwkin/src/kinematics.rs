//! Forward kinematics via the three product-of-exponentials forms, per-body
//! twists and Jacobians in the four representations, and conversions between
//! the representations.
//!
//! Representations follow the (measurement point, resolving frame) table:
//! body-fixed = (body, body), spatial = (world, world), hybrid = (body,
//! world), mixed = body-resolved angular part with world-resolved linear
//! part. Every recursion runs over the topological body order with the
//! ground as implicit identity/zero base case.

use crate::liegroup::{Pose, Screw};
use crate::mbsmodel::MbsModel;
use crate::screws::UnitScrew;
use nalgebra::DMatrix;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum KinematicsError {
    DimensionMismatch { expected: usize, got: usize },
    BodyOutOfRange { body: usize, n: usize },
}

impl fmt::Display for KinematicsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KinematicsError::DimensionMismatch { expected, got } => {
                write!(f, "expected {expected} joint values, got {got}")
            }
            KinematicsError::BodyOutOfRange { body, n } => {
                write!(f, "body index {body} out of range 1..={n}")
            }
        }
    }
}

impl std::error::Error for KinematicsError {}

/// The four twist representations; the set is closed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwistRep {
    BodyFixed,
    Spatial,
    Hybrid,
    Mixed,
}

impl TwistRep {
    pub const ALL: [TwistRep; 4] = [
        TwistRep::BodyFixed,
        TwistRep::Spatial,
        TwistRep::Hybrid,
        TwistRep::Mixed,
    ];
}

impl fmt::Display for TwistRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TwistRep::BodyFixed => "body",
            TwistRep::Spatial => "spatial",
            TwistRep::Hybrid => "hybrid",
            TwistRep::Mixed => "mixed",
        };
        f.pad(s)
    }
}

impl std::str::FromStr for TwistRep {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "body" | "body_fixed" | "bodyfixed" => Ok(TwistRep::BodyFixed),
            "spatial" => Ok(TwistRep::Spatial),
            "hybrid" => Ok(TwistRep::Hybrid),
            "mixed" => Ok(TwistRep::Mixed),
            other => Err(format!("unknown twist representation '{other}'")),
        }
    }
}

/// Forward-kinematics algorithm selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FkVariant {
    /// Two joint frames per joint, synthesized on demand.
    Jfr,
    /// Relative reference poses and body-frame screws.
    BodyPoe,
    /// World-frame screws and absolute reference poses.
    SpatialPoe,
}

impl std::str::FromStr for FkVariant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "jfr" => Ok(FkVariant::Jfr),
            "body" | "body_poe" => Ok(FkVariant::BodyPoe),
            "spatial" | "spatial_poe" => Ok(FkVariant::SpatialPoe),
            other => Err(format!("unknown fk variant '{other}'")),
        }
    }
}

/// Joint configuration bundle with validated lengths.
#[derive(Debug, Clone)]
pub struct JointConfig {
    pub q: Vec<f64>,
    pub qdot: Option<Vec<f64>>,
}

impl JointConfig {
    pub fn new(
        model: &MbsModel,
        q: Vec<f64>,
        qdot: Option<Vec<f64>>,
    ) -> Result<Self, KinematicsError> {
        check_dim(model, &q)?;
        if let Some(ref qd) = qdot {
            check_dim(model, qd)?;
        }
        Ok(JointConfig { q, qdot })
    }
}

fn check_dim(model: &MbsModel, v: &[f64]) -> Result<(), KinematicsError> {
    if v.len() != model.n() {
        return Err(KinematicsError::DimensionMismatch {
            expected: model.n(),
            got: v.len(),
        });
    }
    Ok(())
}

fn check_body(model: &MbsModel, i: usize) -> Result<(), KinematicsError> {
    if i == 0 || i > model.n() {
        return Err(KinematicsError::BodyOutOfRange {
            body: i,
            n: model.n(),
        });
    }
    Ok(())
}

/// Absolute poses of all bodies at one configuration.
#[derive(Debug, Clone)]
pub struct BodyPoses {
    poses: Vec<Pose>,
}

impl BodyPoses {
    pub fn from_poses(poses: Vec<Pose>) -> Self {
        BodyPoses { poses }
    }

    pub fn n(&self) -> usize {
        self.poses.len()
    }

    /// Pose of body `i`; index 0 yields the ground (identity).
    pub fn pose(&self, i: usize) -> Pose {
        if i == 0 {
            Pose::identity()
        } else {
            self.poses[i - 1]
        }
    }

    /// Relative pose `C_{i,j} = C_i^-1 C_j` of body `j` seen from body `i`.
    pub fn rel(&self, i: usize, j: usize) -> Pose {
        self.pose(i).inverse().compose(&self.pose(j))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Pose> {
        self.poses.iter()
    }
}

/// Per-body twists in one representation.
#[derive(Debug, Clone)]
pub struct BodyTwists {
    pub rep: TwistRep,
    twists: Vec<Screw>,
}

impl BodyTwists {
    pub fn new(rep: TwistRep, twists: Vec<Screw>) -> Self {
        BodyTwists { rep, twists }
    }

    pub fn n(&self) -> usize {
        self.twists.len()
    }

    /// Twist of body `i`; index 0 yields the ground (zero).
    pub fn twist(&self, i: usize) -> Screw {
        if i == 0 {
            Screw::zero()
        } else {
            self.twists[i - 1]
        }
    }

    pub fn as_slice(&self) -> &[Screw] {
        &self.twists
    }
}

/// Geometric Jacobian of one body: screw columns over the joints on the
/// ground-to-body path. Off-path columns are identically zero and are never
/// stored.
#[derive(Debug, Clone)]
pub struct BodyJacobian {
    pub rep: TwistRep,
    pub body: usize,
    n: usize,
    entries: Vec<(usize, Screw)>,
}

impl BodyJacobian {
    fn new(rep: TwistRep, body: usize, n: usize, entries: Vec<(usize, Screw)>) -> Self {
        BodyJacobian {
            rep,
            body,
            n,
            entries,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Joints on the support path, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.entries.iter().map(|(j, _)| *j).collect()
    }

    pub fn entries(&self) -> &[(usize, Screw)] {
        &self.entries
    }

    pub fn column(&self, j: usize) -> Screw {
        self.entries
            .iter()
            .find(|(k, _)| *k == j)
            .map(|(_, s)| *s)
            .unwrap_or_else(Screw::zero)
    }

    /// Contraction with joint rates.
    pub fn mul_rates(&self, qdot: &[f64]) -> Screw {
        let mut v = Screw::zero();
        for (j, col) in &self.entries {
            v = v + *col * qdot[*j - 1];
        }
        v
    }

    /// Dense 6 x n matrix, zero columns included.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(6, self.n);
        for (j, col) in &self.entries {
            m.column_mut(*j - 1).copy_from(&col.as_vector6());
        }
        m
    }
}

// ---------------------------------------------------------------------------
// Forward kinematics
// ---------------------------------------------------------------------------

/// Forward kinematics through the spatial product of exponentials.
pub fn fk(model: &MbsModel, q: &[f64]) -> Result<BodyPoses, KinematicsError> {
    fk_variant(model, q, FkVariant::SpatialPoe)
}

/// Forward kinematics with an explicit algorithm choice. All variants agree
/// to machine precision; they differ in the data they touch.
pub fn fk_variant(
    model: &MbsModel,
    q: &[f64],
    variant: FkVariant,
) -> Result<BodyPoses, KinematicsError> {
    check_dim(model, q)?;
    let n = model.n();
    let mut poses = Vec::with_capacity(n);
    match variant {
        FkVariant::SpatialPoe => {
            // C_i = exp(Y_1 q_1) ... exp(Y_i q_i) A_i along the path; the
            // running product P_i = C_i A_i^-1 recurses through the parent.
            let mut prefix = vec![Pose::identity(); n + 1];
            for i in 1..=n {
                let j = model.joint(i);
                let p = prefix[model.parent(i)].compose(&j.y.exp(q[i - 1]));
                poses.push(p.compose(&j.a));
                prefix[i] = p;
            }
        }
        FkVariant::BodyPoe => {
            // C_i = C_parent B_i exp(X_i q_i)
            let bf = model.to_body_fixed();
            let mut abs = vec![Pose::identity(); n + 1];
            for i in 1..=n {
                let jd = &bf.joints[i - 1];
                let c = abs[model.parent(i)]
                    .compose(&jd.b)
                    .compose(&jd.x.exp(q[i - 1]));
                abs[i] = c;
                poses.push(c);
            }
        }
        FkVariant::Jfr => {
            // C_i = C_parent S_pred exp(Z_i q_i) S_succ^-1
            let jfr = model.synthesize_jfr();
            let mut abs = vec![Pose::identity(); n + 1];
            for i in 1..=n {
                let jd = &jfr.joints[i - 1];
                let c = abs[model.parent(i)]
                    .compose(&jd.s_pred)
                    .compose(&jd.z.exp(q[i - 1]))
                    .compose(&jd.s_succ.inverse());
                abs[i] = c;
                poses.push(c);
            }
        }
    }
    Ok(BodyPoses { poses })
}

// ---------------------------------------------------------------------------
// Instantaneous joint screws
// ---------------------------------------------------------------------------

/// Instantaneous spatial screw of every joint at the given poses. The column
/// of joint `j` is the same for all bodies, so computing it once per
/// configuration serves every body Jacobian and the system factorizations.
pub fn spatial_joint_columns(model: &MbsModel, poses: &BodyPoses) -> Vec<Screw> {
    (1..=model.n())
        .map(|j| {
            let t = poses.pose(j).compose(&model.joint(j).a.inverse());
            t.transform_screw(&model.joint(j).y.screw())
        })
        .collect()
}

/// Instantaneous joint screws measured at the owning body but resolved in the
/// world frame: the hybrid building block, obtained by shifting the spatial
/// column back to the body origin.
pub fn hybrid_joint_screws(model: &MbsModel, poses: &BodyPoses) -> Vec<Screw> {
    let spatial = spatial_joint_columns(model, poses);
    (1..=model.n())
        .map(|j| {
            let r = poses.pose(j).pos;
            let s = spatial[j - 1];
            Screw::new(s.ang, s.lin - r.cross(&s.ang))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Per-body Jacobians
// ---------------------------------------------------------------------------

pub fn jacobian(
    model: &MbsModel,
    q: &[f64],
    i: usize,
    rep: TwistRep,
) -> Result<BodyJacobian, KinematicsError> {
    let poses = fk(model, q)?;
    jacobian_with_poses(model, &poses, i, rep)
}

pub fn body_jacobian(
    model: &MbsModel,
    q: &[f64],
    i: usize,
) -> Result<BodyJacobian, KinematicsError> {
    jacobian(model, q, i, TwistRep::BodyFixed)
}

pub fn spatial_jacobian(
    model: &MbsModel,
    q: &[f64],
    i: usize,
) -> Result<BodyJacobian, KinematicsError> {
    jacobian(model, q, i, TwistRep::Spatial)
}

pub fn hybrid_jacobian(
    model: &MbsModel,
    q: &[f64],
    i: usize,
) -> Result<BodyJacobian, KinematicsError> {
    jacobian(model, q, i, TwistRep::Hybrid)
}

pub fn mixed_jacobian(
    model: &MbsModel,
    q: &[f64],
    i: usize,
) -> Result<BodyJacobian, KinematicsError> {
    jacobian(model, q, i, TwistRep::Mixed)
}

/// Instantaneous spatial screw of a single joint.
fn spatial_column(model: &MbsModel, poses: &BodyPoses, j: usize) -> Screw {
    let t = poses.pose(j).compose(&model.joint(j).a.inverse());
    t.transform_screw(&model.joint(j).y.screw())
}

/// Hybrid screw of a single joint: the spatial column shifted back to the
/// owning body's origin.
fn hybrid_screw(model: &MbsModel, poses: &BodyPoses, j: usize) -> Screw {
    let s = spatial_column(model, poses, j);
    let r = poses.pose(j).pos;
    Screw::new(s.ang, s.lin - r.cross(&s.ang))
}

/// Jacobian of body `i` at precomputed poses; only the joints on the
/// ground-to-`i` path are touched.
pub fn jacobian_with_poses(
    model: &MbsModel,
    poses: &BodyPoses,
    i: usize,
    rep: TwistRep,
) -> Result<BodyJacobian, KinematicsError> {
    check_body(model, i)?;
    let path = model.topology().path(i);
    let entries = match rep {
        TwistRep::BodyFixed => {
            // Walk the path upward keeping C_{i,j}; column i is the body
            // screw itself.
            let mut entries = Vec::with_capacity(path.len());
            let mut t = Pose::identity();
            let mut j = i;
            entries.push((i, model.body_screw(i).screw()));
            while model.parent(j) != 0 {
                let p = model.parent(j);
                t = t.compose(&poses.rel(j, p));
                entries.push((p, t.transform_screw(&model.body_screw(p).screw())));
                j = p;
            }
            entries.reverse();
            entries
        }
        TwistRep::Spatial => path
            .iter()
            .map(|&j| (j, spatial_column(model, poses, j)))
            .collect(),
        TwistRep::Hybrid => {
            let ri = poses.pose(i).pos;
            path.iter()
                .map(|&j| {
                    let shift = poses.pose(j).pos - ri;
                    let s = hybrid_screw(model, poses, j);
                    (j, Screw::new(s.ang, shift.cross(&s.ang) + s.lin))
                })
                .collect()
        }
        TwistRep::Mixed => {
            let ci = poses.pose(i);
            path.iter()
                .map(|&j| {
                    let shift = poses.pose(j).pos - ci.pos;
                    let s = hybrid_screw(model, poses, j);
                    (
                        j,
                        Screw::new(ci.rot.apply_transpose(&s.ang), shift.cross(&s.ang) + s.lin),
                    )
                })
                .collect()
        }
    };
    Ok(BodyJacobian::new(rep, i, model.n(), entries))
}

/// Jacobians of every body at one configuration. The per-joint instantaneous
/// screws are computed once and shared: the spatial column of joint `j` is
/// identical for every body it supports, and the hybrid/mixed columns differ
/// only by reference-point shifts.
pub fn all_jacobians(model: &MbsModel, poses: &BodyPoses, rep: TwistRep) -> Vec<BodyJacobian> {
    let n = model.n();
    match rep {
        TwistRep::BodyFixed => {
            // Reuse the parent's columns: transform them into the child
            // frame and append the child's own screw.
            let mut per_body: Vec<Vec<(usize, Screw)>> = Vec::with_capacity(n);
            for i in 1..=n {
                let p = model.parent(i);
                let mut entries: Vec<(usize, Screw)> = if p == 0 {
                    Vec::new()
                } else {
                    let rel = poses.rel(i, p);
                    per_body[p - 1]
                        .iter()
                        .map(|(j, s)| (*j, rel.transform_screw(s)))
                        .collect()
                };
                entries.push((i, model.body_screw(i).screw()));
                per_body.push(entries);
            }
            per_body
                .into_iter()
                .enumerate()
                .map(|(k, entries)| BodyJacobian::new(rep, k + 1, n, entries))
                .collect()
        }
        TwistRep::Spatial => {
            let cols = spatial_joint_columns(model, poses);
            (1..=n)
                .map(|i| {
                    let entries = model
                        .topology()
                        .path(i)
                        .into_iter()
                        .map(|j| (j, cols[j - 1]))
                        .collect();
                    BodyJacobian::new(rep, i, n, entries)
                })
                .collect()
        }
        TwistRep::Hybrid | TwistRep::Mixed => {
            let xh = hybrid_joint_screws(model, poses);
            (1..=n)
                .map(|i| {
                    let ci = poses.pose(i);
                    let entries = model
                        .topology()
                        .path(i)
                        .into_iter()
                        .map(|j| {
                            let shift = poses.pose(j).pos - ci.pos;
                            let s = xh[j - 1];
                            let ang = if rep == TwistRep::Mixed {
                                ci.rot.apply_transpose(&s.ang)
                            } else {
                                s.ang
                            };
                            (j, Screw::new(ang, shift.cross(&s.ang) + s.lin))
                        })
                        .collect();
                    BodyJacobian::new(rep, i, n, entries)
                })
                .collect()
        }
    }
}

/// Body-fixed Jacobian by the parent-to-child recursion: transform the parent
/// columns by `Ad_{C_{i,parent}}` and append the body's own screw.
#[doc(hidden)]
pub fn body_jacobian_recursive(model: &MbsModel, poses: &BodyPoses, i: usize) -> BodyJacobian {
    fn build(model: &MbsModel, poses: &BodyPoses, i: usize) -> Vec<(usize, Screw)> {
        if i == 0 {
            return Vec::new();
        }
        let p = model.parent(i);
        let rel = poses.rel(i, p);
        let mut entries: Vec<(usize, Screw)> = build(model, poses, p)
            .into_iter()
            .map(|(j, s)| (j, rel.transform_screw(&s)))
            .collect();
        entries.push((i, model.body_screw(i).screw()));
        entries
    }
    BodyJacobian::new(TwistRep::BodyFixed, i, model.n(), build(model, poses, i))
}

/// Hybrid Jacobian by the shift recursion: parent columns move their
/// reference point by `r_parent - r_i`; the own column is the hybrid screw.
#[doc(hidden)]
pub fn hybrid_jacobian_recursive(model: &MbsModel, poses: &BodyPoses, i: usize) -> BodyJacobian {
    let xh = hybrid_joint_screws(model, poses);
    fn build(model: &MbsModel, poses: &BodyPoses, xh: &[Screw], i: usize) -> Vec<(usize, Screw)> {
        if i == 0 {
            return Vec::new();
        }
        let p = model.parent(i);
        let shift = poses.pose(p).pos - poses.pose(i).pos;
        let mut entries: Vec<(usize, Screw)> = build(model, poses, xh, p)
            .into_iter()
            .map(|(j, s)| (j, Screw::new(s.ang, shift.cross(&s.ang) + s.lin)))
            .collect();
        entries.push((i, xh[i - 1]));
        entries
    }
    BodyJacobian::new(TwistRep::Hybrid, i, model.n(), build(model, poses, &xh, i))
}

/// Mixed Jacobian by recursion. The propagation block rotates the angular
/// part into the child frame and shifts the linear part; written on the
/// parent's own mixed columns it is
/// `[[R_{i,p}, 0], [skew(r_p - r_i) R_p, I]]`.
#[doc(hidden)]
pub fn mixed_jacobian_recursive(model: &MbsModel, poses: &BodyPoses, i: usize) -> BodyJacobian {
    let xh = hybrid_joint_screws(model, poses);
    fn build(model: &MbsModel, poses: &BodyPoses, xh: &[Screw], i: usize) -> Vec<(usize, Screw)> {
        if i == 0 {
            return Vec::new();
        }
        let p = model.parent(i);
        let ci = poses.pose(i);
        let cp = poses.pose(p);
        let shift = cp.pos - ci.pos;
        let mut entries: Vec<(usize, Screw)> = build(model, poses, xh, p)
            .into_iter()
            .map(|(j, s)| {
                let world_ang = cp.rot.apply(&s.ang);
                (
                    j,
                    Screw::new(
                        ci.rot.apply_transpose(&world_ang),
                        shift.cross(&world_ang) + s.lin,
                    ),
                )
            })
            .collect();
        let own = xh[i - 1];
        entries.push((i, Screw::new(ci.rot.apply_transpose(&own.ang), own.lin)));
        entries
    }
    BodyJacobian::new(TwistRep::Mixed, i, model.n(), build(model, poses, &xh, i))
}

// ---------------------------------------------------------------------------
// Twists
// ---------------------------------------------------------------------------

/// Operation counts of one twist evaluation, split into per-joint screw
/// preparation and the propagation sweep itself.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCount {
    /// Full screw frame transformations during preparation.
    pub prep_adjoint: usize,
    /// Extra 3-vector rotations during preparation.
    pub prep_rot: usize,
    /// Full frame transformations inside the sweep.
    pub sweep_adjoint: usize,
    /// Reference-point shifts inside the sweep.
    pub sweep_shift: usize,
    /// Mixed-form block transforms inside the sweep.
    pub sweep_block: usize,
    pub screw_scale: usize,
    pub screw_add: usize,
}

/// Recursive twist evaluation in the requested representation; one sweep in
/// topological order, never materializing a Jacobian.
pub fn twists(
    model: &MbsModel,
    q: &[f64],
    qdot: &[f64],
    rep: TwistRep,
) -> Result<BodyTwists, KinematicsError> {
    Ok(twists_counted(model, q, qdot, rep)?.0)
}

/// Same as [`twists`] but also returns the operation counts of the sweep.
pub fn twists_counted(
    model: &MbsModel,
    q: &[f64],
    qdot: &[f64],
    rep: TwistRep,
) -> Result<(BodyTwists, OpCount), KinematicsError> {
    check_dim(model, q)?;
    check_dim(model, qdot)?;
    let poses = fk(model, q)?;
    Ok(twists_with_poses(model, &poses, qdot, rep))
}

pub fn twists_with_poses(
    model: &MbsModel,
    poses: &BodyPoses,
    qdot: &[f64],
    rep: TwistRep,
) -> (BodyTwists, OpCount) {
    let n = model.n();
    let mut ops = OpCount::default();
    let mut v = vec![Screw::zero(); n + 1];
    match rep {
        TwistRep::BodyFixed => {
            let x: Vec<UnitScrew> = (1..=n).map(|i| model.body_screw(i)).collect();
            ops.prep_adjoint += n;
            for i in 1..=n {
                let p = model.parent(i);
                let rel = poses.rel(i, p);
                let carried = rel.transform_screw(&v[p]);
                ops.sweep_adjoint += 1;
                v[i] = carried + x[i - 1].screw() * qdot[i - 1];
                ops.screw_scale += 1;
                ops.screw_add += 1;
            }
        }
        TwistRep::Spatial => {
            let cols = spatial_joint_columns(model, poses);
            ops.prep_adjoint += n;
            for i in 1..=n {
                let p = model.parent(i);
                v[i] = v[p] + cols[i - 1] * qdot[i - 1];
                ops.screw_scale += 1;
                ops.screw_add += 1;
            }
        }
        TwistRep::Hybrid => {
            let xh = hybrid_joint_screws(model, poses);
            ops.prep_adjoint += n;
            for i in 1..=n {
                let p = model.parent(i);
                let shift = poses.pose(p).pos - poses.pose(i).pos;
                let carried = Screw::new(v[p].ang, shift.cross(&v[p].ang) + v[p].lin);
                ops.sweep_shift += 1;
                v[i] = carried + xh[i - 1] * qdot[i - 1];
                ops.screw_scale += 1;
                ops.screw_add += 1;
            }
        }
        TwistRep::Mixed => {
            let xh = hybrid_joint_screws(model, poses);
            ops.prep_adjoint += n;
            for i in 1..=n {
                let p = model.parent(i);
                let ci = poses.pose(i);
                let cp = poses.pose(p);
                let shift = cp.pos - ci.pos;
                let world_ang = cp.rot.apply(&v[p].ang);
                let carried = Screw::new(
                    ci.rot.apply_transpose(&world_ang),
                    shift.cross(&world_ang) + v[p].lin,
                );
                ops.sweep_block += 1;
                let own = xh[i - 1];
                let own_mixed = Screw::new(ci.rot.apply_transpose(&own.ang), own.lin);
                ops.prep_rot += 1;
                v[i] = carried + own_mixed * qdot[i - 1];
                ops.screw_scale += 1;
                ops.screw_add += 1;
            }
        }
    }
    (BodyTwists::new(rep, v[1..].to_vec()), ops)
}

/// Cost report of one recursive twist evaluation per representation.
#[derive(Debug, Clone, Copy)]
pub struct CostReport {
    pub body: OpCount,
    pub spatial: OpCount,
    pub hybrid: OpCount,
    pub mixed: OpCount,
}

impl CostReport {
    pub fn get(&self, rep: TwistRep) -> OpCount {
        match rep {
            TwistRep::BodyFixed => self.body,
            TwistRep::Spatial => self.spatial,
            TwistRep::Hybrid => self.hybrid,
            TwistRep::Mixed => self.mixed,
        }
    }
}

/// Runs the four twist recursions and reports their operation counts; the
/// counts are deterministic for a given model.
pub fn op_counter(
    model: &MbsModel,
    q: &[f64],
    qdot: &[f64],
) -> Result<CostReport, KinematicsError> {
    check_dim(model, q)?;
    check_dim(model, qdot)?;
    let poses = fk(model, q)?;
    Ok(CostReport {
        body: twists_with_poses(model, &poses, qdot, TwistRep::BodyFixed).1,
        spatial: twists_with_poses(model, &poses, qdot, TwistRep::Spatial).1,
        hybrid: twists_with_poses(model, &poses, qdot, TwistRep::Hybrid).1,
        mixed: twists_with_poses(model, &poses, qdot, TwistRep::Mixed).1,
    })
}

// ---------------------------------------------------------------------------
// Conversions
// ---------------------------------------------------------------------------

/// Converts a twist between representations given the current absolute pose
/// of the body. Every pair routes through the hybrid form, which reaches any
/// other representation with a single block operation, so round trips close
/// to machine precision.
pub fn convert_twist(v: &Screw, from: TwistRep, to: TwistRep, pose: &Pose) -> Screw {
    if from == to {
        return *v;
    }
    let h = match from {
        TwistRep::Hybrid => *v,
        TwistRep::BodyFixed => Screw::new(pose.rot.apply(&v.ang), pose.rot.apply(&v.lin)),
        TwistRep::Spatial => Screw::new(v.ang, v.lin - pose.pos.cross(&v.ang)),
        TwistRep::Mixed => Screw::new(pose.rot.apply(&v.ang), v.lin),
    };
    match to {
        TwistRep::Hybrid => h,
        TwistRep::BodyFixed => Screw::new(
            pose.rot.apply_transpose(&h.ang),
            pose.rot.apply_transpose(&h.lin),
        ),
        TwistRep::Spatial => Screw::new(h.ang, pose.pos.cross(&h.ang) + h.lin),
        TwistRep::Mixed => Screw::new(pose.rot.apply_transpose(&h.ang), h.lin),
    }
}

/// Twist of body `i` relative to body `j`, represented in the frame of body
/// `j`: `Ad_{C_j}^-1 (V_i^s - V_j^s)`. Index 0 denotes the ground.
pub fn relative_twist(
    model: &MbsModel,
    q: &[f64],
    qdot: &[f64],
    i: usize,
    j: usize,
) -> Result<Screw, KinematicsError> {
    if i > model.n() {
        return Err(KinematicsError::BodyOutOfRange {
            body: i,
            n: model.n(),
        });
    }
    if j > model.n() {
        return Err(KinematicsError::BodyOutOfRange {
            body: j,
            n: model.n(),
        });
    }
    let poses = fk(model, q)?;
    let (vs, _) = twists_with_poses(model, &poses, qdot, TwistRep::Spatial);
    Ok(poses
        .pose(j)
        .inv_transform_screw(&(vs.twist(i) - vs.twist(j))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liegroup::{so3_exp, Rotation, Vec3};
    use crate::mbsmodel::{JointSpatialData, MbsModel, Topology};
    use crate::screws::Pitch;
    use nalgebra::Vector3;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    const TOL: f64 = 1e-12;

    fn random_q(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.random_range(-PI..PI)).collect()
    }

    fn single_revolute() -> MbsModel {
        let j = JointSpatialData::from_geometry(
            Pose::identity(),
            Vector3::new(0.0, 0.0, 1.0),
            Vector3::zeros(),
            Pitch::Finite(0.0),
        )
        .unwrap();
        MbsModel::from_parts_unchecked(Topology::chain(1), vec![j])
    }

    #[test]
    fn fk_at_zero_gives_reference_poses() {
        let model = MbsModel::random_tree(6, 100);
        let q = vec![0.0; 6];
        for variant in [FkVariant::SpatialPoe, FkVariant::BodyPoe, FkVariant::Jfr] {
            let poses = fk_variant(&model, &q, variant).unwrap();
            for i in 1..=6 {
                assert!(poses.pose(i).max_abs_diff(&model.joint(i).a) < TOL);
            }
        }
    }

    #[test]
    fn fk_single_revolute_quarter_turn() {
        let model = single_revolute();
        let poses = fk(&model, &[PI / 2.0]).unwrap();
        assert!(
            poses
                .pose(1)
                .max_abs_diff(&Pose::new(Rotation::rot_z(PI / 2.0), Vector3::zeros()))
                < TOL
        );
    }

    #[test]
    fn fk_variants_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        for seed in 0..10 {
            let model = MbsModel::random_tree(7, seed);
            for _ in 0..100 {
                let q = random_q(&mut rng, 7);
                let a = fk_variant(&model, &q, FkVariant::SpatialPoe).unwrap();
                let b = fk_variant(&model, &q, FkVariant::BodyPoe).unwrap();
                let c = fk_variant(&model, &q, FkVariant::Jfr).unwrap();
                for i in 1..=7 {
                    assert!(a.pose(i).max_abs_diff(&b.pose(i)) < TOL);
                    assert!(a.pose(i).max_abs_diff(&c.pose(i)) < TOL);
                    assert!(b.pose(i).max_abs_diff(&c.pose(i)) < TOL);
                }
            }
        }
    }

    #[test]
    fn fk_rejects_wrong_dimension() {
        let model = single_revolute();
        assert!(matches!(
            fk(&model, &[0.1, 0.2]),
            Err(KinematicsError::DimensionMismatch {
                expected: 1,
                got: 2
            })
        ));
    }

    #[test]
    fn joint_config_validates_lengths() {
        let model = MbsModel::random_chain(3, 99);
        assert!(JointConfig::new(&model, vec![0.1, 0.2, 0.3], None).is_ok());
        assert!(JointConfig::new(&model, vec![0.1, 0.2, 0.3], Some(vec![1.0, 2.0, 3.0])).is_ok());
        assert!(JointConfig::new(&model, vec![0.1], None).is_err());
        assert!(JointConfig::new(&model, vec![0.1, 0.2, 0.3], Some(vec![1.0])).is_err());
    }

    #[test]
    fn jacobian_own_column_is_joint_screw() {
        let mut rng = ChaCha8Rng::seed_from_u64(102);
        let model = MbsModel::random_chain(5, 7);
        let q = random_q(&mut rng, 5);
        let poses = fk(&model, &q).unwrap();
        for i in 1..=5 {
            let jb = jacobian_with_poses(&model, &poses, i, TwistRep::BodyFixed).unwrap();
            assert!(jb.column(i).max_abs_diff(&model.body_screw(i).screw()) < TOL);
            let jh = jacobian_with_poses(&model, &poses, i, TwistRep::Hybrid).unwrap();
            let xh = hybrid_joint_screws(&model, &poses);
            assert!(jh.column(i).max_abs_diff(&xh[i - 1]) < TOL);
        }
    }

    #[test]
    fn jacobian_at_zero_configuration() {
        // q = 0: C_{i,j} = A_i^-1 A_j, so the body Jacobian column is the
        // reference-transported joint screw.
        let model = MbsModel::random_tree(6, 8);
        let q = vec![0.0; 6];
        let poses = fk(&model, &q).unwrap();
        let cols = spatial_joint_columns(&model, &poses);
        for j in 1..=6 {
            assert!(cols[j - 1].max_abs_diff(&model.joint(j).y.screw()) < TOL);
        }
        for i in 1..=6 {
            let jb = jacobian_with_poses(&model, &poses, i, TwistRep::BodyFixed).unwrap();
            for j in model.topology().path(i) {
                let expected = model
                    .joint(i)
                    .a
                    .inverse()
                    .compose(&model.joint(j).a)
                    .transform_screw(&model.body_screw(j).screw());
                assert!(jb.column(j).max_abs_diff(&expected) < TOL);
            }
        }
    }

    #[test]
    fn recursions_match_direct_formulas() {
        let mut rng = ChaCha8Rng::seed_from_u64(103);
        for seed in 0..8 {
            let model = MbsModel::random_tree(7, 20 + seed);
            let q = random_q(&mut rng, 7);
            let poses = fk(&model, &q).unwrap();
            for i in 1..=7 {
                let direct_b = jacobian_with_poses(&model, &poses, i, TwistRep::BodyFixed).unwrap();
                let rec_b = body_jacobian_recursive(&model, &poses, i);
                let direct_h = jacobian_with_poses(&model, &poses, i, TwistRep::Hybrid).unwrap();
                let rec_h = hybrid_jacobian_recursive(&model, &poses, i);
                let direct_m = jacobian_with_poses(&model, &poses, i, TwistRep::Mixed).unwrap();
                let rec_m = mixed_jacobian_recursive(&model, &poses, i);
                for j in 1..=7 {
                    assert!(direct_b.column(j).max_abs_diff(&rec_b.column(j)) < TOL);
                    assert!(direct_h.column(j).max_abs_diff(&rec_h.column(j)) < TOL);
                    assert!(direct_m.column(j).max_abs_diff(&rec_m.column(j)) < TOL);
                }
            }
        }
    }

    #[test]
    fn all_jacobians_match_per_body_queries() {
        let mut rng = ChaCha8Rng::seed_from_u64(112);
        for seed in 0..5 {
            let model = MbsModel::random_tree(7, 80 + seed);
            let q = random_q(&mut rng, 7);
            let poses = fk(&model, &q).unwrap();
            for rep in TwistRep::ALL {
                let batch = all_jacobians(&model, &poses, rep);
                assert_eq!(batch.len(), 7);
                for i in 1..=7 {
                    let single = jacobian_with_poses(&model, &poses, i, rep).unwrap();
                    assert_eq!(batch[i - 1].body, i);
                    for j in 1..=7 {
                        assert!(batch[i - 1].column(j).max_abs_diff(&single.column(j)) < TOL);
                    }
                }
            }
        }
    }

    #[test]
    fn cross_representation_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(104);
        let model = MbsModel::random_chain(6, 30);
        let q = random_q(&mut rng, 6);
        let poses = fk(&model, &q).unwrap();
        for i in 1..=6 {
            let jb = jacobian_with_poses(&model, &poses, i, TwistRep::BodyFixed).unwrap();
            let js = jacobian_with_poses(&model, &poses, i, TwistRep::Spatial).unwrap();
            let jh = jacobian_with_poses(&model, &poses, i, TwistRep::Hybrid).unwrap();
            let jm = jacobian_with_poses(&model, &poses, i, TwistRep::Mixed).unwrap();
            let ci = poses.pose(i);
            for j in 1..=6 {
                // spatial = Ad_C body, hybrid = Ad_R body.
                assert!(
                    ci.transform_screw(&jb.column(j))
                        .max_abs_diff(&js.column(j))
                        < TOL
                );
                let rot_only = Pose::new(ci.rot, Vector3::zeros());
                assert!(
                    rot_only
                        .transform_screw(&jb.column(j))
                        .max_abs_diff(&jh.column(j))
                        < TOL
                );
                // Mixed stitches body angular and hybrid linear rows.
                let m = jm.column(j);
                assert!((m.ang - jb.column(j).ang).abs().max() < TOL);
                assert!((m.lin - jh.column(j).lin).abs().max() < TOL);
            }
        }
    }

    #[test]
    fn spatial_columns_shared_and_independent_of_own_joint() {
        let mut rng = ChaCha8Rng::seed_from_u64(105);
        let model = MbsModel::random_chain(5, 31);
        let mut q = random_q(&mut rng, 5);
        let j_all: Vec<_> = (1..=5)
            .map(|i| jacobian(&model, &q, i, TwistRep::Spatial).unwrap())
            .collect();
        for j in 1..=5 {
            for i in j..=5 {
                assert!(j_all[i - 1].column(j).max_abs_diff(&j_all[j - 1].column(j)) < TOL);
            }
        }
        // Perturbing q_j leaves column j unchanged.
        let before = j_all[2].column(3);
        q[2] += 0.613;
        let after = jacobian(&model, &q, 3, TwistRep::Spatial)
            .unwrap()
            .column(3);
        assert!(before.max_abs_diff(&after) < TOL);
    }

    #[test]
    fn body_jacobian_independent_of_first_joint_on_chain() {
        let mut rng = ChaCha8Rng::seed_from_u64(106);
        let model = MbsModel::random_chain(5, 32);
        let mut q = random_q(&mut rng, 5);
        let before = body_jacobian(&model, &q, 5).unwrap();
        q[0] += 1.234;
        let after = body_jacobian(&model, &q, 5).unwrap();
        for j in 1..=5 {
            assert!(before.column(j).max_abs_diff(&after.column(j)) < TOL);
        }
    }

    #[test]
    fn twists_match_jacobian_contraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(107);
        for seed in 0..6 {
            let model = MbsModel::random_tree(6, 40 + seed);
            let q = random_q(&mut rng, 6);
            let qdot: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
            for rep in TwistRep::ALL {
                let v = twists(&model, &q, &qdot, rep).unwrap();
                for i in 1..=6 {
                    let ji = jacobian(&model, &q, i, rep).unwrap();
                    assert!(v.twist(i).max_abs_diff(&ji.mul_rates(&qdot)) < TOL);
                }
            }
        }
    }

    #[test]
    fn zero_rates_give_zero_twists() {
        let model = MbsModel::random_tree(5, 50);
        let q = vec![0.3; 5];
        for rep in TwistRep::ALL {
            let v = twists(&model, &q, &[0.0; 5], rep).unwrap();
            for i in 1..=5 {
                assert!(v.twist(i).max_abs() == 0.0);
            }
        }
    }

    #[test]
    fn single_joint_twist_is_scaled_screw() {
        let model = single_revolute();
        let v = twists(&model, &[0.4], &[2.5], TwistRep::BodyFixed).unwrap();
        let expected = model.body_screw(1).screw() * 2.5;
        assert!(v.twist(1).max_abs_diff(&expected) < TOL);
    }

    #[test]
    fn convert_twist_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(108);
        for _ in 0..50 {
            let pose = Pose::new(
                so3_exp(&Vec3::new(
                    rng.random_range(-1.5..1.5),
                    rng.random_range(-1.5..1.5),
                    rng.random_range(-1.5..1.5),
                )),
                Vec3::new(
                    rng.random_range(-2.0..2.0),
                    rng.random_range(-2.0..2.0),
                    rng.random_range(-2.0..2.0),
                ),
            );
            let v = Screw::new(
                Vec3::new(rng.random(), rng.random(), rng.random()),
                Vec3::new(rng.random(), rng.random(), rng.random()),
            );
            for from in TwistRep::ALL {
                for to in TwistRep::ALL {
                    if from == to {
                        continue;
                    }
                    let there = convert_twist(&v, from, to, &pose);
                    let back = convert_twist(&there, to, from, &pose);
                    assert!(back.max_abs_diff(&v) < 1e-14);
                }
            }
        }
    }

    #[test]
    fn convert_twist_identity_pose_special_cases() {
        let v = Screw::new(Vec3::new(0.1, 0.2, 0.3), Vec3::new(0.4, 0.5, 0.6));
        let id = Pose::identity();
        // With R = I, body-fixed and hybrid coincide.
        assert!(
            convert_twist(&v, TwistRep::BodyFixed, TwistRep::Hybrid, &id).max_abs_diff(&v) < TOL
        );
        // Spatial to body-fixed is the inverse adjoint.
        let pose = Pose::new(Rotation::rot_z(0.7), Vec3::new(1.0, -2.0, 0.5));
        let converted = convert_twist(&v, TwistRep::Spatial, TwistRep::BodyFixed, &pose);
        assert!(converted.max_abs_diff(&pose.inv_transform_screw(&v)) < TOL);
    }

    #[test]
    fn spatial_equals_adjoint_of_body_twist() {
        let mut rng = ChaCha8Rng::seed_from_u64(109);
        let model = MbsModel::random_tree(6, 60);
        let q = random_q(&mut rng, 6);
        let qdot: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
        let poses = fk(&model, &q).unwrap();
        let vb = twists(&model, &q, &qdot, TwistRep::BodyFixed).unwrap();
        let vs = twists(&model, &q, &qdot, TwistRep::Spatial).unwrap();
        for i in 1..=6 {
            assert!(
                poses
                    .pose(i)
                    .transform_screw(&vb.twist(i))
                    .max_abs_diff(&vs.twist(i))
                    < TOL
            );
        }
    }

    #[test]
    fn invariance_under_frame_changes() {
        let mut rng = ChaCha8Rng::seed_from_u64(110);
        let model = MbsModel::random_chain(5, 61);
        let q = random_q(&mut rng, 5);
        let qdot: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
        let s = Pose::new(
            so3_exp(&Vec3::new(0.3, -0.4, 0.9)),
            Vec3::new(1.0, 2.0, -0.5),
        );

        // World-frame change S: A_i -> S A_i, Y_i -> Ad_S Y_i. Body-fixed
        // twists are unchanged.
        let moved: Vec<JointSpatialData> = (1..=5)
            .map(|i| {
                let j = model.joint(i);
                JointSpatialData {
                    a: s.compose(&j.a),
                    y: crate::screws::screw_frame_transform(&s, &j.y),
                }
            })
            .collect();
        let moved_model = MbsModel::from_parts_unchecked(model.topology().clone(), moved);
        let vb = twists(&model, &q, &qdot, TwistRep::BodyFixed).unwrap();
        let vb2 = twists(&moved_model, &q, &qdot, TwistRep::BodyFixed).unwrap();
        for i in 1..=5 {
            assert!(vb.twist(i).max_abs_diff(&vb2.twist(i)) < TOL);
        }

        // Body-frame change of body 3: A_3 -> A_3 S. Spatial twists are
        // unchanged.
        let mut joints = model.joints().to_vec();
        joints[2].a = joints[2].a.compose(&s);
        let rebased = MbsModel::from_parts_unchecked(model.topology().clone(), joints);
        let vs = twists(&model, &q, &qdot, TwistRep::Spatial).unwrap();
        let vs2 = twists(&rebased, &q, &qdot, TwistRep::Spatial).unwrap();
        for i in 1..=5 {
            assert!(vs.twist(i).max_abs_diff(&vs2.twist(i)) < TOL);
        }
    }

    #[test]
    fn relative_twist_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(111);
        let model = MbsModel::random_chain(6, 62);
        let q = random_q(&mut rng, 6);
        let qdot: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();

        // Same body: zero. Ground reference: the spatial twist.
        assert!(relative_twist(&model, &q, &qdot, 4, 4).unwrap().max_abs() == 0.0);
        let vs = twists(&model, &q, &qdot, TwistRep::Spatial).unwrap();
        assert!(
            relative_twist(&model, &q, &qdot, 5, 0)
                .unwrap()
                .max_abs_diff(&vs.twist(5))
                < TOL
        );

        // Both appendix-style expressions agree:
        // Ad_{C_j}^-1 (V_i^s - V_j^s) = Ad_{C_j}^-1 V_i^s - V_j^b.
        let poses = fk(&model, &q).unwrap();
        let vb = twists(&model, &q, &qdot, TwistRep::BodyFixed).unwrap();
        for i in 1..=6 {
            for j in 1..=6 {
                let lhs = relative_twist(&model, &q, &qdot, i, j).unwrap();
                let rhs = poses.pose(j).inv_transform_screw(&vs.twist(i)) - vb.twist(j);
                assert!(lhs.max_abs_diff(&rhs) < TOL);
            }
        }
    }

    #[test]
    fn types_are_send_and_sync_and_evaluation_parallelizes() {
        fn check<T: Send + Sync>() {}
        check::<MbsModel>();
        check::<BodyPoses>();
        check::<BodyTwists>();
        check::<BodyJacobian>();
        check::<Pose>();
        check::<Screw>();

        // Batch evaluation over many q shares the model with no locking.
        let model = std::sync::Arc::new(MbsModel::random_tree(6, 90));
        let reference = fk(&model, &[0.1, 0.2, 0.3, 0.4, 0.5, 0.6]).unwrap();
        let handles: Vec<_> = (0..4)
            .map(|_| {
                let m = model.clone();
                std::thread::spawn(move || fk(&m, &[0.1, 0.2, 0.3, 0.4, 0.5, 0.6]).unwrap())
            })
            .collect();
        for h in handles {
            let poses = h.join().unwrap();
            for i in 1..=6 {
                assert!(poses.pose(i).max_abs_diff(&reference.pose(i)) == 0.0);
            }
        }
    }

    #[test]
    fn op_counts_per_representation() {
        let model = MbsModel::random_chain(8, 70);
        let q = vec![0.2; 8];
        let qdot = vec![1.0; 8];
        let report = op_counter(&model, &q, &qdot).unwrap();
        // The spatial sweep adds screws directly; the body-fixed sweep
        // transforms the parent twist once per body.
        assert_eq!(report.spatial.sweep_adjoint, 0);
        assert_eq!(report.body.sweep_adjoint, 8);
        assert_eq!(report.hybrid.sweep_adjoint, 0);
        assert_eq!(report.hybrid.sweep_shift, 8);

        let tiny = MbsModel::random_chain(1, 71);
        let r1 = op_counter(&tiny, &[0.1], &[1.0]).unwrap();
        for rep in TwistRep::ALL {
            assert_eq!(r1.get(rep).screw_scale, 1);
        }
    }
}
