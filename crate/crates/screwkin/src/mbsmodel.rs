//! Mechanism data model: bodies and 1-DOF joints in tree topology, with the
//! joint geometry stored in any of three conventions.
//!
//! * joint-frame (JFR): two constant frames per joint plus a screw in the
//!   predecessor-side joint frame,
//! * body-fixed: one relative reference pose per joint plus a screw in the
//!   body frame,
//! * spatial: absolute reference poses plus screws in the world frame.
//!
//! The spatial form is the canonical one — it needs the least data and maps
//! directly onto CAD-style input — and the other two convert losslessly into
//! and out of it. Bodies are numbered 1..=n with 0 denoting the ground; the
//! parent of body i always has a smaller index, so every recursion can run in
//! plain index order.

use crate::liegroup::{so3_exp, Pose, Rotation, Vec3};
use crate::screws::{
    decompose_screw, make_unit_screw, screw_frame_transform, Pitch, ScrewError, ScrewGeometry,
    ScrewKind, UnitScrew,
};
use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;

/// Tolerance for the validation pass over screws and rotations.
pub const VALIDATE_TOL: f64 = 1e-9;

/// Lower-pair joint classification; the pitch value itself lives in the
/// screw coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JointKind {
    Revolute,
    Prismatic,
    Helical,
}

impl JointKind {
    /// Classifies a unit screw: prismatic by kind, otherwise revolute when
    /// the pitch vanishes and helical when it does not.
    pub fn of(screw: &UnitScrew) -> JointKind {
        match screw.kind() {
            ScrewKind::Prismatic => JointKind::Prismatic,
            ScrewKind::Rotary => {
                let g = decompose_screw(screw);
                match g.pitch {
                    Pitch::Finite(h) if h.abs() <= 1e-12 => JointKind::Revolute,
                    _ => JointKind::Helical,
                }
            }
        }
    }

    pub fn pitch_for(&self, helical_pitch: f64) -> Pitch {
        match self {
            JointKind::Revolute => Pitch::Finite(0.0),
            JointKind::Prismatic => Pitch::Infinite,
            JointKind::Helical => Pitch::Finite(helical_pitch),
        }
    }
}

impl fmt::Display for JointKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            JointKind::Revolute => "revolute",
            JointKind::Prismatic => "prismatic",
            JointKind::Helical => "helical",
        };
        f.pad(s)
    }
}

/// Joint data in the two-frame convention: `s_pred` places the joint frame on
/// the predecessor body, `s_succ` the coincident frame on the body itself,
/// and `z` is the joint screw in the predecessor-side joint frame.
#[derive(Debug, Clone, Copy)]
pub struct JointJfrData {
    pub s_pred: Pose,
    pub s_succ: Pose,
    pub z: UnitScrew,
}

/// Joint data in the body-fixed convention: `b` is the parent-to-body pose at
/// zero joint variable and `x` the joint screw in the body frame.
#[derive(Debug, Clone, Copy)]
pub struct JointBodyFixedData {
    pub b: Pose,
    pub x: UnitScrew,
}

/// Joint data in the spatial convention: `a` is the absolute reference pose
/// at zero configuration and `y` the joint screw in the world frame.
#[derive(Debug, Clone, Copy)]
pub struct JointSpatialData {
    pub a: Pose,
    pub y: UnitScrew,
}

impl JointSpatialData {
    pub fn from_geometry(
        a: Pose,
        axis: Vec3,
        point: Vec3,
        pitch: Pitch,
    ) -> Result<Self, ScrewError> {
        Ok(JointSpatialData {
            a,
            y: make_unit_screw(&ScrewGeometry { axis, point, pitch })?,
        })
    }
}

// ---------------------------------------------------------------------------
// Topology
// ---------------------------------------------------------------------------

/// Parent array and labels of a tree of n moving bodies. Body indices are
/// 1..=n; index 0 is the ground.
#[derive(Debug, Clone)]
pub struct Topology {
    parents: Vec<usize>,
    names: Vec<String>,
}

impl Topology {
    pub fn new(parents: Vec<usize>, names: Option<Vec<String>>) -> Self {
        let names =
            names.unwrap_or_else(|| (1..=parents.len()).map(|i| format!("body{i}")).collect());
        assert_eq!(names.len(), parents.len());
        Topology { parents, names }
    }

    pub fn chain(n: usize) -> Self {
        Topology::new((0..n).collect(), None)
    }

    pub fn n(&self) -> usize {
        self.parents.len()
    }

    /// Parent body index of body `i` (1..=n); 0 means the ground.
    pub fn parent(&self, i: usize) -> usize {
        self.parents[i - 1]
    }

    pub fn parents(&self) -> &[usize] {
        &self.parents
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i - 1]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Bodies from the ground-adjacent one down to `i`, in ascending order.
    pub fn path(&self, i: usize) -> Vec<usize> {
        let mut p = Vec::new();
        let mut k = i;
        while k != 0 {
            p.push(k);
            k = self.parent(k);
        }
        p.reverse();
        p
    }

    /// True when `j` lies on the ground-to-`i` path (including `j == i`).
    pub fn on_path(&self, j: usize, i: usize) -> bool {
        let mut k = i;
        while k != 0 {
            if k == j {
                return true;
            }
            k = self.parent(k);
        }
        false
    }

    /// Length of the longest ground-to-leaf path.
    pub fn depth(&self) -> usize {
        let mut depth = vec![0usize; self.n() + 1];
        let mut max = 0;
        for i in 1..=self.n() {
            depth[i] = depth[self.parent(i)] + 1;
            max = max.max(depth[i]);
        }
        max
    }

    pub fn is_topologically_ordered(&self) -> bool {
        self.parents.iter().enumerate().all(|(k, &p)| p <= k)
    }
}

// ---------------------------------------------------------------------------
// Models
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct JfrModel {
    pub topo: Topology,
    pub joints: Vec<JointJfrData>,
}

#[derive(Debug, Clone)]
pub struct BodyFixedModel {
    pub topo: Topology,
    pub joints: Vec<JointBodyFixedData>,
}

/// Canonical model form: spatial reference poses and world-frame screws.
#[derive(Debug, Clone)]
pub struct MbsModel {
    topo: Topology,
    joints: Vec<JointSpatialData>,
}

impl JfrModel {
    /// Collapses the two joint frames into the body-fixed convention:
    /// `B_i = S_pred S_succ^-1` and the screw re-expressed in the body frame.
    pub fn to_body_fixed(&self) -> BodyFixedModel {
        let joints = self
            .joints
            .iter()
            .map(|j| JointBodyFixedData {
                b: j.s_pred.compose(&j.s_succ.inverse()),
                x: screw_frame_transform(&j.s_succ, &j.z),
            })
            .collect();
        BodyFixedModel {
            topo: self.topo.clone(),
            joints,
        }
    }
}

impl BodyFixedModel {
    /// Accumulates absolute reference poses along the tree and moves the
    /// screws into the world frame.
    pub fn to_spatial(&self) -> MbsModel {
        let n = self.topo.n();
        let mut abs = vec![Pose::identity(); n + 1];
        let mut joints = Vec::with_capacity(n);
        for i in 1..=n {
            let a = abs[self.topo.parent(i)].compose(&self.joints[i - 1].b);
            let y = screw_frame_transform(&a, &self.joints[i - 1].x);
            abs[i] = a;
            joints.push(JointSpatialData { a, y });
        }
        MbsModel {
            topo: self.topo.clone(),
            joints,
        }
    }

    /// Joint screw of body `i` re-expressed in the parent body frame:
    /// `xbar = Ad_B x`, satisfying `exp(xbar q) B = B exp(x q)`.
    pub fn xbar(&self, i: usize) -> UnitScrew {
        let j = &self.joints[i - 1];
        screw_frame_transform(&j.b, &j.x)
    }
}

impl MbsModel {
    pub fn from_parts(
        topo: Topology,
        joints: Vec<JointSpatialData>,
    ) -> Result<Self, ValidationReport> {
        let model = MbsModel::from_parts_unchecked(topo, joints);
        let report = model.validate();
        if report.is_ok() {
            Ok(model)
        } else {
            Err(report)
        }
    }

    pub fn from_parts_unchecked(topo: Topology, joints: Vec<JointSpatialData>) -> Self {
        assert_eq!(topo.n(), joints.len());
        MbsModel { topo, joints }
    }

    pub fn n(&self) -> usize {
        self.topo.n()
    }

    pub fn topology(&self) -> &Topology {
        &self.topo
    }

    pub fn parent(&self, i: usize) -> usize {
        self.topo.parent(i)
    }

    pub fn joint(&self, i: usize) -> &JointSpatialData {
        &self.joints[i - 1]
    }

    pub fn joints(&self) -> &[JointSpatialData] {
        &self.joints
    }

    /// Absolute reference pose of body `i` (identity for the ground).
    pub fn reference_pose(&self, i: usize) -> Pose {
        if i == 0 {
            Pose::identity()
        } else {
            self.joints[i - 1].a
        }
    }

    /// Joint screw in the frame of body `i`: `X_i = Ad_{A_i}^-1 Y_i`.
    pub fn body_screw(&self, i: usize) -> UnitScrew {
        let j = &self.joints[i - 1];
        screw_frame_transform(&j.a.inverse(), &j.y)
    }

    /// Parent-to-body reference pose `B_i = A_parent^-1 A_i`.
    pub fn body_reference(&self, i: usize) -> Pose {
        self.reference_pose(self.parent(i))
            .inverse()
            .compose(&self.joints[i - 1].a)
    }

    pub fn to_body_fixed(&self) -> BodyFixedModel {
        let joints = (1..=self.n())
            .map(|i| JointBodyFixedData {
                b: self.body_reference(i),
                x: self.body_screw(i),
            })
            .collect();
        BodyFixedModel {
            topo: self.topo.clone(),
            joints,
        }
    }

    /// Synthesizes a two-frame description: the body-side joint frame sits on
    /// the joint axis with its 3-axis along it, so every synthesized screw is
    /// the canonical `(0,0,1 | 0,0,h)` or `(0,0,0 | 0,0,1)`.
    pub fn synthesize_jfr(&self) -> JfrModel {
        let bf = self.to_body_fixed();
        let joints = bf
            .joints
            .iter()
            .map(|j| {
                let g = decompose_screw(&j.x);
                let origin = match j.x.kind() {
                    ScrewKind::Rotary => g.point,
                    ScrewKind::Prismatic => Vector3::zeros(),
                };
                let s_succ = Pose::new(rotation_aligning_z(&g.axis), origin);
                JointJfrData {
                    s_pred: j.b.compose(&s_succ),
                    s_succ,
                    z: screw_frame_transform(&s_succ.inverse(), &j.x),
                }
            })
            .collect();
        JfrModel {
            topo: self.topo.clone(),
            joints,
        }
    }

    /// Structural and numerical checks: topological ordering of the parent
    /// array, unit-screw invariants, and orthonormality of reference poses.
    /// Returns diagnostics instead of aborting.
    pub fn validate(&self) -> ValidationReport {
        let mut issues = Vec::new();
        for i in 1..=self.n() {
            let p = self.topo.parent(i);
            if p >= i {
                issues.push(ValidationIssue {
                    body: i,
                    kind: IssueKind::Topology,
                    message: format!("parent {p} of body {i} is not an earlier body"),
                });
            }
        }
        for i in 1..=self.n() {
            let j = &self.joints[i - 1];
            let defect = j.y.invariant_defect();
            if defect > VALIDATE_TOL {
                issues.push(ValidationIssue {
                    body: i,
                    kind: IssueKind::UnitScrew,
                    message: format!("joint {i} screw violates the unit invariant by {defect:.3e}"),
                });
            }
            let ortho = j.a.rot.orthonormality_defect();
            if ortho > VALIDATE_TOL {
                issues.push(ValidationIssue {
                    body: i,
                    kind: IssueKind::Orthonormality,
                    message: format!("body {i} reference rotation defect {ortho:.3e}"),
                });
            }
        }
        ValidationReport { issues }
    }

    /// Random serial chain with mixed joint kinds; deterministic in the seed.
    pub fn random_chain(n: usize, seed: u64) -> MbsModel {
        random_model(n, seed, false)
    }

    /// Random tree (parents drawn uniformly among earlier bodies) with mixed
    /// joint kinds including helical joints of pitch 0.5.
    pub fn random_tree(n: usize, seed: u64) -> MbsModel {
        random_model(n, seed, true)
    }
}

/// Rotation taking the canonical 3-axis onto `axis` (unit). Antiparallel
/// input maps to the half-turn about the 1-axis.
fn rotation_aligning_z(axis: &Vec3) -> Rotation {
    let ez = Vector3::new(0.0, 0.0, 1.0);
    let w = ez.cross(axis);
    let s = w.norm();
    let c = ez.dot(axis);
    if s < 1e-12 {
        if c > 0.0 {
            Rotation::identity()
        } else {
            Rotation::rot_x(std::f64::consts::PI)
        }
    } else {
        so3_exp(&(w * (s.atan2(c) / s)))
    }
}

fn random_unit_vec(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 0.2 {
            return v / n;
        }
    }
}

fn random_model(n: usize, seed: u64, tree: bool) -> MbsModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut parents = Vec::with_capacity(n);
    for i in 1..=n {
        if tree && i > 1 {
            parents.push(rng.random_range(0..i));
        } else {
            parents.push(i - 1);
        }
    }
    let joints = (1..=n)
        .map(|i| {
            // The first three joints cycle through the kinds so that small
            // models always mix revolute, prismatic, and helical motion.
            let kind = match i {
                1 => JointKind::Revolute,
                2 => JointKind::Prismatic,
                3 => JointKind::Helical,
                _ => match rng.random_range(0..4) {
                    0 | 1 => JointKind::Revolute,
                    2 => JointKind::Prismatic,
                    _ => JointKind::Helical,
                },
            };
            let axis = random_unit_vec(&mut rng);
            let point = Vector3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let xi = random_unit_vec(&mut rng) * rng.random_range(0.0..1.2);
            let pos = Vector3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let a = Pose::new(so3_exp(&xi), pos);
            JointSpatialData::from_geometry(a, axis, point, kind.pitch_for(0.5))
                .expect("random axis is unit")
        })
        .collect();
    MbsModel::from_parts_unchecked(Topology::new(parents, None), joints)
}

// ---------------------------------------------------------------------------
// Validation report
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IssueKind {
    Topology,
    UnitScrew,
    Orthonormality,
}

#[derive(Debug, Clone)]
pub struct ValidationIssue {
    pub body: usize,
    pub kind: IssueKind,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            return write!(f, "model ok");
        }
        for issue in &self.issues {
            writeln!(f, "body {}: {}", issue.body, issue.message)?;
        }
        Ok(())
    }
}
