//! Rigid-motion group elements, their Lie algebra, exponential maps, and
//! adjoint transformations.
//!
//! Poses are stored as a rotation matrix plus a position vector so that every
//! formula in the kinematics layer maps one-to-one onto 3-vector algebra.
//! All types are immutable values and all operations are pure.

use nalgebra::{Matrix3, Matrix4, Matrix6, Vector3, Vector6};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

pub type Vec3 = Vector3<f64>;
pub type AxisVec = nalgebra::UnitVector3<f64>;

/// Orthonormality / group-identity tolerance used by validating constructors.
pub const ORTHONORMAL_TOL: f64 = 1e-12;
/// Tolerance for classifying the angular part of a screw as unit or zero.
pub const UNIT_SCREW_TOL: f64 = 1e-9;
/// Below this rotation angle the exponential switches to Taylor expansions of
/// sinc(t) and sinc^2(t/2)/2 so the map is branch-free through the identity.
const SMALL_ANGLE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub enum LieError {
    /// Matrix failed the R^T R = I or det R = +1 check.
    NotARotation { defect: f64 },
    /// Screw passed to `se3_exp` has |ang| outside {0, 1} (tolerance 1e-9).
    NotAUnitScrew { ang_norm: f64 },
}

impl fmt::Display for LieError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LieError::NotARotation { defect } => {
                write!(
                    f,
                    "matrix is not a rotation (orthonormality defect {defect:.3e})"
                )
            }
            LieError::NotAUnitScrew { ang_norm } => {
                write!(
                    f,
                    "screw is not unit: |ang| = {ang_norm:.12} is neither 0 nor 1"
                )
            }
        }
    }
}

impl std::error::Error for LieError {}

/// Skew-symmetric matrix of `v`, so that `skew(v) * w == v.cross(&w)`.
pub fn skew(v: &Vec3) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Inverse of [`skew`]; reads the off-diagonal entries without symmetrizing.
pub fn unskew(m: &Matrix3<f64>) -> Vec3 {
    Vector3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)])
}

// ---------------------------------------------------------------------------
// Rotation
// ---------------------------------------------------------------------------

/// Element of the rotation group, stored as a 3x3 direction-cosine matrix.
#[derive(Debug, Clone, Copy)]
pub struct Rotation {
    m: Matrix3<f64>,
}

impl Rotation {
    pub fn identity() -> Self {
        Rotation {
            m: Matrix3::identity(),
        }
    }

    /// Validating constructor: checks orthonormality and positive determinant
    /// against [`ORTHONORMAL_TOL`].
    pub fn new(m: Matrix3<f64>) -> Result<Self, LieError> {
        let defect = orthonormality_defect(&m);
        if defect > ORTHONORMAL_TOL {
            return Err(LieError::NotARotation { defect });
        }
        Ok(Rotation { m })
    }

    /// Trusting constructor for hot paths; inputs are assumed orthonormal.
    pub fn from_matrix_unchecked(m: Matrix3<f64>) -> Self {
        Rotation { m }
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.m
    }

    pub fn transposed(&self) -> Rotation {
        Rotation {
            m: self.m.transpose(),
        }
    }

    /// R * v
    pub fn apply(&self, v: &Vec3) -> Vec3 {
        self.m * v
    }

    /// R^T * v
    pub fn apply_transpose(&self, v: &Vec3) -> Vec3 {
        self.m.tr_mul(v)
    }

    pub fn rot_x(angle: f64) -> Rotation {
        so3_exp(&Vector3::new(angle, 0.0, 0.0))
    }

    pub fn rot_y(angle: f64) -> Rotation {
        so3_exp(&Vector3::new(0.0, angle, 0.0))
    }

    pub fn rot_z(angle: f64) -> Rotation {
        so3_exp(&Vector3::new(0.0, 0.0, angle))
    }

    pub fn orthonormality_defect(&self) -> f64 {
        orthonormality_defect(&self.m)
    }

    pub fn max_abs_diff(&self, other: &Rotation) -> f64 {
        (self.m - other.m).abs().max()
    }
}

fn orthonormality_defect(m: &Matrix3<f64>) -> f64 {
    let gram = (m.transpose() * m - Matrix3::identity()).abs().max();
    let det = (m.determinant() - 1.0).abs();
    gram.max(det)
}

impl Mul for Rotation {
    type Output = Rotation;
    fn mul(self, rhs: Rotation) -> Rotation {
        Rotation { m: self.m * rhs.m }
    }
}

// ---------------------------------------------------------------------------
// Screw vectors
// ---------------------------------------------------------------------------

/// 6-vector of screw coordinates: angular part first, linear part second.
///
/// Holds unit joint screws, instantaneous Jacobian columns, and twists alike;
/// general screws carry no intrinsic constraint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Screw {
    pub ang: Vec3,
    pub lin: Vec3,
}

impl Screw {
    pub fn new(ang: Vec3, lin: Vec3) -> Self {
        Screw { ang, lin }
    }

    pub fn zero() -> Self {
        Screw {
            ang: Vector3::zeros(),
            lin: Vector3::zeros(),
        }
    }

    pub fn from_vector6(v: &Vector6<f64>) -> Self {
        Screw {
            ang: Vector3::new(v[0], v[1], v[2]),
            lin: Vector3::new(v[3], v[4], v[5]),
        }
    }

    pub fn as_vector6(&self) -> Vector6<f64> {
        Vector6::new(
            self.ang.x, self.ang.y, self.ang.z, self.lin.x, self.lin.y, self.lin.z,
        )
    }

    /// 4x4 matrix form: [[skew(ang), lin], [0, 0]].
    pub fn hat(&self) -> Matrix4<f64> {
        let mut m = Matrix4::zeros();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&skew(&self.ang));
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.lin);
        m
    }

    /// Reads the angular part from the skew block and the linear part from the
    /// last column of a 4x4 algebra element.
    pub fn from_hat(m: &Matrix4<f64>) -> Self {
        let r = m.fixed_view::<3, 3>(0, 0).into_owned();
        let a = (r - r.transpose()) * 0.5;
        Screw {
            ang: unskew(&a),
            lin: Vector3::new(m[(0, 3)], m[(1, 3)], m[(2, 3)]),
        }
    }

    pub fn dot(&self, other: &Screw) -> f64 {
        self.ang.dot(&other.ang) + self.lin.dot(&other.lin)
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm_squared(&self) -> f64 {
        self.dot(self)
    }

    pub fn max_abs_diff(&self, other: &Screw) -> f64 {
        (self.ang - other.ang)
            .abs()
            .max()
            .max((self.lin - other.lin).abs().max())
    }

    pub fn max_abs(&self) -> f64 {
        self.ang.abs().max().max(self.lin.abs().max())
    }
}

impl Add for Screw {
    type Output = Screw;
    fn add(self, rhs: Screw) -> Screw {
        Screw {
            ang: self.ang + rhs.ang,
            lin: self.lin + rhs.lin,
        }
    }
}

impl Sub for Screw {
    type Output = Screw;
    fn sub(self, rhs: Screw) -> Screw {
        Screw {
            ang: self.ang - rhs.ang,
            lin: self.lin - rhs.lin,
        }
    }
}

impl Mul<f64> for Screw {
    type Output = Screw;
    fn mul(self, rhs: f64) -> Screw {
        Screw {
            ang: self.ang * rhs,
            lin: self.lin * rhs,
        }
    }
}

impl Neg for Screw {
    type Output = Screw;
    fn neg(self) -> Screw {
        Screw {
            ang: -self.ang,
            lin: -self.lin,
        }
    }
}

// ---------------------------------------------------------------------------
// Pose
// ---------------------------------------------------------------------------

/// Rigid-motion group element (R, r); the frame transformation taking
/// coordinates resolved in the moved frame to the reference frame.
#[derive(Debug, Clone, Copy)]
pub struct Pose {
    pub rot: Rotation,
    pub pos: Vec3,
}

impl Pose {
    pub fn identity() -> Self {
        Pose {
            rot: Rotation::identity(),
            pos: Vector3::zeros(),
        }
    }

    pub fn new(rot: Rotation, pos: Vec3) -> Self {
        Pose { rot, pos }
    }

    pub fn from_parts(m: Matrix3<f64>, pos: Vec3) -> Self {
        Pose {
            rot: Rotation::from_matrix_unchecked(m),
            pos,
        }
    }

    /// Product rule (R'R'', r' + R'r'').
    pub fn compose(&self, other: &Pose) -> Pose {
        Pose {
            rot: self.rot * other.rot,
            pos: self.pos + self.rot.apply(&other.pos),
        }
    }

    /// (R^T, -R^T r)
    pub fn inverse(&self) -> Pose {
        let rt = self.rot.transposed();
        Pose {
            pos: -rt.apply(&self.pos),
            rot: rt,
        }
    }

    /// s = r + R b
    pub fn transform_point(&self, p: &Vec3) -> Vec3 {
        self.pos + self.rot.apply(p)
    }

    pub fn adjoint(&self) -> AdjointMap {
        adjoint(self)
    }

    /// Adjoint action on screw coordinates without forming the 6x6 matrix:
    /// (R w, r x R w + R v).
    pub fn transform_screw(&self, x: &Screw) -> Screw {
        let ang = self.rot.apply(&x.ang);
        let lin = self.pos.cross(&ang) + self.rot.apply(&x.lin);
        Screw { ang, lin }
    }

    /// Action of the inverse adjoint: (R^T w, R^T (v - r x w)).
    pub fn inv_transform_screw(&self, x: &Screw) -> Screw {
        Screw {
            ang: self.rot.apply_transpose(&x.ang),
            lin: self.rot.apply_transpose(&(x.lin - self.pos.cross(&x.ang))),
        }
    }

    pub fn to_matrix4(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(self.rot.matrix());
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.pos);
        m
    }

    pub fn from_matrix4_unchecked(m: &Matrix4<f64>) -> Pose {
        Pose {
            rot: Rotation::from_matrix_unchecked(m.fixed_view::<3, 3>(0, 0).into_owned()),
            pos: Vector3::new(m[(0, 3)], m[(1, 3)], m[(2, 3)]),
        }
    }

    pub fn max_abs_diff(&self, other: &Pose) -> f64 {
        self.rot
            .max_abs_diff(&other.rot)
            .max((self.pos - other.pos).abs().max())
    }
}

// ---------------------------------------------------------------------------
// Exponential maps
// ---------------------------------------------------------------------------

/// Rotation exponential in the sinc form
/// `R = I + sinc|xi| xi~ + (sinc^2(|xi|/2)/2) xi~^2`,
/// with Taylor expansions of both coefficients below [`SMALL_ANGLE`].
pub fn so3_exp(xi: &Vec3) -> Rotation {
    let theta2 = xi.norm_squared();
    let theta = theta2.sqrt();
    let (a, b) = if theta < SMALL_ANGLE {
        // sinc t = 1 - t^2/6 + t^4/120, sinc^2(t/2)/2 = 1/2 - t^2/24 + t^4/720
        (
            1.0 - theta2 / 6.0 + theta2 * theta2 / 120.0,
            0.5 - theta2 / 24.0 + theta2 * theta2 / 720.0,
        )
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / theta2)
    };
    let s = skew(xi);
    Rotation::from_matrix_unchecked(Matrix3::identity() + s * a + s * s * b)
}

/// Principal logarithm; returns the scaled axis with |xi| in [0, pi].
///
/// The angle comes from atan2 of the antisymmetric-part norm against the
/// trace, which stays conditioned at both ends of the range. Near pi the
/// antisymmetric part vanishes, so the axis is recovered from the outer
/// product `e e^T = (sym(R) - cos I) / (1 - cos)` via its largest diagonal
/// entry; the sign comes from the antisymmetric part while it carries
/// signal, and at pi itself — where both signs generate the same rotation —
/// the first nonzero component is made positive for determinism.
pub fn so3_log(r: &Rotation) -> Vec3 {
    let m = r.matrix();
    let anti = unskew(&((m - m.transpose()) * 0.5)); // sin(theta) * e
    let s = anti.norm();
    let c = ((m.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    let theta = s.atan2(c);

    if theta < 1e-9 {
        return anti;
    }
    if theta < std::f64::consts::PI - 1e-4 {
        return anti * (theta / s);
    }

    let sym = (m + m.transpose()) * 0.5;
    let outer = (sym - Matrix3::identity() * c) / (1.0 - c);
    let k = (0..3)
        .max_by(|&i, &j| outer[(i, i)].partial_cmp(&outer[(j, j)]).unwrap())
        .unwrap();
    let mut e = outer.column(k).into_owned() / outer[(k, k)].sqrt();
    e.normalize_mut();
    // sin(theta) stays two orders above the rounding floor down to
    // theta = pi - 1e-14; past that the two signs alter R by < 2e-14.
    let along = e.dot(&anti);
    if along.abs() > 1e-14 {
        if along < 0.0 {
            e = -e;
        }
    } else {
        for i in 0..3 {
            if e[i] != 0.0 {
                if e[i] < 0.0 {
                    e = -e;
                }
                break;
            }
        }
    }
    e * theta
}

/// Closed-form screw motion for a unit screw: rotation by `phi` about the
/// axis for finite pitch, with translation `(I - exp(phi e~)) p + phi h e`;
/// pure translation `phi * lin` when the angular part vanishes.
///
/// Rejects screws whose angular norm is neither 0 nor 1 within 1e-9; general
/// twists go through [`se3_exp_vec`] instead.
pub fn se3_exp(x: &Screw, phi: f64) -> Result<Pose, LieError> {
    let na = x.ang.norm();
    if na <= UNIT_SCREW_TOL {
        return Ok(Pose::new(Rotation::identity(), x.lin * phi));
    }
    if (na - 1.0).abs() > UNIT_SCREW_TOL {
        return Err(LieError::NotAUnitScrew { ang_norm: na });
    }
    let inv_n2 = 1.0 / (na * na);
    let pitch = x.ang.dot(&x.lin) * inv_n2;
    let point = x.ang.cross(&x.lin) * inv_n2; // axis point closest to origin
    let rot = so3_exp(&(x.ang * phi));
    let pos = point - rot.apply(&point) + x.ang * (phi * pitch);
    Ok(Pose::new(rot, pos))
}

/// Exponential of an arbitrary twist, equal to the matrix exponential of its
/// 4x4 form: rotation from [`so3_exp`], translation from the closed-form
/// integral `(I + a w~ + b w~^2) v` with a = (1-cos t)/t^2, b = (t-sin t)/t^3.
pub fn se3_exp_vec(v: &Screw) -> Pose {
    let theta2 = v.ang.norm_squared();
    let theta = theta2.sqrt();
    let (a, b) = if theta < SMALL_ANGLE {
        (
            0.5 - theta2 / 24.0 + theta2 * theta2 / 720.0,
            1.0 / 6.0 - theta2 / 120.0 + theta2 * theta2 / 5040.0,
        )
    } else {
        (
            (1.0 - theta.cos()) / theta2,
            (theta - theta.sin()) / (theta2 * theta),
        )
    };
    let s = skew(&v.ang);
    let g = Matrix3::identity() + s * a + s * s * b;
    Pose::new(so3_exp(&v.ang), g * v.lin)
}

// ---------------------------------------------------------------------------
// Adjoint transformations
// ---------------------------------------------------------------------------

/// 6x6 screw-coordinate transformation with block structure
/// [[R, 0], [r~ R, R]].
#[derive(Debug, Clone, Copy)]
pub struct AdjointMap {
    m: Matrix6<f64>,
}

impl AdjointMap {
    pub fn identity() -> Self {
        AdjointMap {
            m: Matrix6::identity(),
        }
    }

    pub fn matrix(&self) -> &Matrix6<f64> {
        &self.m
    }

    pub fn apply(&self, x: &Screw) -> Screw {
        Screw::from_vector6(&(self.m * x.as_vector6()))
    }

    pub fn from_blocks(
        top_left: Matrix3<f64>,
        bottom_left: Matrix3<f64>,
        bottom_right: Matrix3<f64>,
    ) -> Self {
        let mut m = Matrix6::zeros();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&top_left);
        m.fixed_view_mut::<3, 3>(3, 0).copy_from(&bottom_left);
        m.fixed_view_mut::<3, 3>(3, 3).copy_from(&bottom_right);
        AdjointMap { m }
    }

    pub fn max_abs_diff(&self, other: &AdjointMap) -> f64 {
        (self.m - other.m).abs().max()
    }
}

impl Mul for AdjointMap {
    type Output = AdjointMap;
    fn mul(self, rhs: AdjointMap) -> AdjointMap {
        AdjointMap { m: self.m * rhs.m }
    }
}

/// Adjoint of a full pose; factorizes as `adjoint_trans(r) * adjoint_rot(R)`.
pub fn adjoint(c: &Pose) -> AdjointMap {
    let r = c.rot.matrix();
    AdjointMap::from_blocks(*r, skew(&c.pos) * r, *r)
}

/// Change of basis only: block-diagonal [[R, 0], [0, R]].
pub fn adjoint_rot(r: &Rotation) -> AdjointMap {
    AdjointMap::from_blocks(*r.matrix(), Matrix3::zeros(), *r.matrix())
}

/// Change of reference point only: [[I, 0], [r~, I]].
pub fn adjoint_trans(r: &Vec3) -> AdjointMap {
    AdjointMap::from_blocks(Matrix3::identity(), skew(r), Matrix3::identity())
}

pub fn adjoint_apply(a: &AdjointMap, x: &Screw) -> Screw {
    a.apply(x)
}

/// Applies the adjoint of `c.inverse()` without forming either inverse.
pub fn adjoint_inv_apply(c: &Pose, x: &Screw) -> Screw {
    c.inv_transform_screw(x)
}

/// Conjugated screw motion: `s exp(X phi) s^-1 = exp((Ad_s X) phi)`,
/// evaluated through the right-hand side.
pub fn conjugate_exp(s: &Pose, x: &Screw, phi: f64) -> Result<Pose, LieError> {
    se3_exp(&s.transform_screw(x), phi)
}
