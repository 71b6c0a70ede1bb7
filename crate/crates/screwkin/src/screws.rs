//! Joint screw coordinates: construction from axis/point/pitch geometry,
//! validation, decomposition, and frame transformation.

use crate::liegroup::{se3_exp, Pose, Screw, Vec3, UNIT_SCREW_TOL};
use nalgebra::Vector3;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum ScrewError {
    NonUnitAxis {
        norm: f64,
    },
    /// Angular part is neither zero nor unit within tolerance; rejected
    /// rather than silently reclassified.
    DegenerateAngularPart {
        norm: f64,
    },
    NonUnitLinearPart {
        norm: f64,
    },
}

impl fmt::Display for ScrewError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScrewError::NonUnitAxis { norm } => write!(f, "non-unit axis (norm {norm:.12})"),
            ScrewError::DegenerateAngularPart { norm } => {
                write!(
                    f,
                    "angular part has norm {norm:.12}, expected exactly 0 or 1 within 1e-9"
                )
            }
            ScrewError::NonUnitLinearPart { norm } => {
                write!(
                    f,
                    "prismatic screw needs a unit linear part (norm {norm:.12})"
                )
            }
        }
    }
}

impl std::error::Error for ScrewError {}

/// Pitch of a screw; the infinite case is a distinct variant so that no
/// floating-point infinity ever enters `p x e + h e`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pitch {
    Finite(f64),
    Infinite,
}

impl Pitch {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Pitch::Infinite)
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            Pitch::Finite(h) => Some(*h),
            Pitch::Infinite => None,
        }
    }
}

/// Axis/point/pitch description of a screw: a line in space plus pitch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScrewGeometry {
    /// Unit vector along the screw axis.
    pub axis: Vec3,
    /// Any point on the axis.
    pub point: Vec3,
    pub pitch: Pitch,
}

/// The two admissible normalizations of a joint screw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScrewKind {
    /// |ang| = 1, finite pitch (revolute and helical joints).
    Rotary,
    /// ang = 0 exactly, |lin| = 1 (prismatic joints).
    Prismatic,
}

/// Unit screw coordinates of a 1-DOF joint.
#[derive(Debug, Clone, Copy)]
pub struct UnitScrew {
    ang: Vec3,
    lin: Vec3,
    kind: ScrewKind,
}

impl UnitScrew {
    /// Classifies and validates raw coordinates: |ang| within 1e-9 of 1 is
    /// rotary, ang identically zero is prismatic (then |lin| must be 1), and
    /// anything else is rejected.
    pub fn new(ang: Vec3, lin: Vec3) -> Result<Self, ScrewError> {
        let na = ang.norm();
        if (na - 1.0).abs() <= UNIT_SCREW_TOL {
            return Ok(UnitScrew {
                ang,
                lin,
                kind: ScrewKind::Rotary,
            });
        }
        if na == 0.0 {
            let nl = lin.norm();
            if (nl - 1.0).abs() > UNIT_SCREW_TOL {
                return Err(ScrewError::NonUnitLinearPart { norm: nl });
            }
            return Ok(UnitScrew {
                ang,
                lin,
                kind: ScrewKind::Prismatic,
            });
        }
        Err(ScrewError::DegenerateAngularPart { norm: na })
    }

    pub fn from_parts_unchecked(ang: Vec3, lin: Vec3, kind: ScrewKind) -> Self {
        UnitScrew { ang, lin, kind }
    }

    pub fn ang(&self) -> Vec3 {
        self.ang
    }

    pub fn lin(&self) -> Vec3 {
        self.lin
    }

    pub fn kind(&self) -> ScrewKind {
        self.kind
    }

    pub fn screw(&self) -> Screw {
        Screw::new(self.ang, self.lin)
    }

    /// Screw motion by `phi` (an angle for rotary screws, a displacement for
    /// prismatic ones). Infallible: the invariants hold by construction.
    pub fn exp(&self, phi: f64) -> Pose {
        match self.kind {
            ScrewKind::Rotary => se3_exp(&self.screw(), phi).expect("unit screw invariant"),
            ScrewKind::Prismatic => {
                Pose::new(crate::liegroup::Rotation::identity(), self.lin * phi)
            }
        }
    }

    pub fn norm_squared(&self) -> f64 {
        self.screw().norm_squared()
    }

    /// Violation of the kind-specific unit invariant; zero for a valid screw.
    pub fn invariant_defect(&self) -> f64 {
        match self.kind {
            ScrewKind::Rotary => (self.ang.norm() - 1.0).abs(),
            ScrewKind::Prismatic => self.ang.norm().max((self.lin.norm() - 1.0).abs()),
        }
    }
}

/// Builds unit screw coordinates from geometry: `(e, p x e + h e)` for finite
/// pitch and `(0, e)` for infinite pitch.
pub fn make_unit_screw(g: &ScrewGeometry) -> Result<UnitScrew, ScrewError> {
    let na = g.axis.norm();
    if (na - 1.0).abs() > UNIT_SCREW_TOL {
        return Err(ScrewError::NonUnitAxis { norm: na });
    }
    match g.pitch {
        Pitch::Finite(h) => Ok(UnitScrew {
            ang: g.axis,
            lin: g.point.cross(&g.axis) + g.axis * h,
            kind: ScrewKind::Rotary,
        }),
        Pitch::Infinite => Ok(UnitScrew {
            ang: Vector3::zeros(),
            lin: g.axis,
            kind: ScrewKind::Prismatic,
        }),
    }
}

/// Recovers axis, pitch, and the axis point closest to the origin:
/// `h = ang . lin`, `point = ang x lin` for rotary screws.
pub fn decompose_screw(x: &UnitScrew) -> ScrewGeometry {
    match x.kind {
        ScrewKind::Rotary => ScrewGeometry {
            axis: x.ang,
            point: x.ang.cross(&x.lin),
            pitch: Pitch::Finite(x.ang.dot(&x.lin)),
        },
        ScrewKind::Prismatic => ScrewGeometry {
            axis: x.lin,
            point: Vector3::zeros(),
            pitch: Pitch::Infinite,
        },
    }
}

/// Re-expresses a unit screw in another frame via the adjoint of `s`; the
/// kind (and hence the pitch) is preserved.
pub fn screw_frame_transform(s: &Pose, x: &UnitScrew) -> UnitScrew {
    let t = s.transform_screw(&x.screw());
    UnitScrew {
        ang: t.ang,
        lin: t.lin,
        kind: x.kind,
    }
}

/// Pairing of co-screw and screw coordinates: the plain 6-vector dot product.
/// No frame invariance is claimed; the value depends on where both operands
/// are resolved.
pub fn coscrew_pairing(w: &Screw, x: &Screw) -> f64 {
    w.dot(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liegroup::{so3_exp, Rotation};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const TOL: f64 = 1e-10;

    fn random_pose(rng: &mut ChaCha8Rng) -> Pose {
        let xi = Vector3::new(
            rng.random_range(-1.5..1.5),
            rng.random_range(-1.5..1.5),
            rng.random_range(-1.5..1.5),
        );
        let r = Vector3::new(
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
        );
        Pose::new(so3_exp(&xi), r)
    }

    fn random_unit_screw(rng: &mut ChaCha8Rng) -> UnitScrew {
        let axis = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        )
        .normalize();
        let point = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let pitch = if rng.random_range(0..3) == 0 {
            Pitch::Infinite
        } else {
            Pitch::Finite(rng.random_range(-0.5..0.5))
        };
        make_unit_screw(&ScrewGeometry { axis, point, pitch }).unwrap()
    }

    #[test]
    fn canonical_lower_pair_screws() {
        let ez = Vector3::new(0.0, 0.0, 1.0);
        let rev = make_unit_screw(&ScrewGeometry {
            axis: ez,
            point: Vector3::zeros(),
            pitch: Pitch::Finite(0.0),
        })
        .unwrap();
        assert_eq!(
            rev.screw().as_vector6().as_slice(),
            &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0]
        );
        assert_eq!(rev.kind(), ScrewKind::Rotary);

        let prism = make_unit_screw(&ScrewGeometry {
            axis: ez,
            point: Vector3::zeros(),
            pitch: Pitch::Infinite,
        })
        .unwrap();
        assert_eq!(
            prism.screw().as_vector6().as_slice(),
            &[0.0, 0.0, 0.0, 0.0, 0.0, 1.0]
        );
        assert_eq!(prism.kind(), ScrewKind::Prismatic);

        // Axis through (1,0,0): p x e = (1,0,0) x (0,0,1) = (0,-1,0).
        let offset = make_unit_screw(&ScrewGeometry {
            axis: ez,
            point: Vector3::new(1.0, 0.0, 0.0),
            pitch: Pitch::Finite(0.0),
        })
        .unwrap();
        assert!(
            offset
                .screw()
                .max_abs_diff(&Screw::new(ez, Vector3::new(0.0, -1.0, 0.0)))
                < TOL
        );
    }

    #[test]
    fn rejects_bad_geometry() {
        let bad = make_unit_screw(&ScrewGeometry {
            axis: Vector3::new(0.0, 0.0, 2.0),
            point: Vector3::zeros(),
            pitch: Pitch::Finite(0.0),
        });
        assert!(matches!(bad, Err(ScrewError::NonUnitAxis { .. })));

        // Near-degenerate angular part: small but nonzero is rejected.
        let degenerate = UnitScrew::new(Vector3::new(0.0, 0.0, 1e-6), Vector3::new(0.0, 0.0, 1.0));
        assert!(matches!(
            degenerate,
            Err(ScrewError::DegenerateAngularPart { .. })
        ));

        let bad_prism = UnitScrew::new(Vector3::zeros(), Vector3::new(0.0, 0.0, 2.0));
        assert!(matches!(
            bad_prism,
            Err(ScrewError::NonUnitLinearPart { .. })
        ));
    }

    #[test]
    fn decompose_hand_examples() {
        let x = UnitScrew::new(Vector3::new(0.0, 0.0, 1.0), Vector3::new(0.0, -1.0, 0.0)).unwrap();
        let g = decompose_screw(&x);
        assert!((g.axis - Vector3::new(0.0, 0.0, 1.0)).abs().max() < TOL);
        assert!((g.point - Vector3::new(1.0, 0.0, 0.0)).abs().max() < TOL);
        assert_eq!(g.pitch, Pitch::Finite(0.0));

        let helical =
            UnitScrew::new(Vector3::new(0.0, 0.0, 1.0), Vector3::new(0.0, 0.0, 0.5)).unwrap();
        let g = decompose_screw(&helical);
        assert!(g.point.abs().max() < TOL);
        assert_eq!(g.pitch, Pitch::Finite(0.5));

        let prism = UnitScrew::new(Vector3::zeros(), Vector3::new(0.0, 0.0, 1.0)).unwrap();
        let g = decompose_screw(&prism);
        assert!(g.pitch.is_infinite());
        assert!((g.axis - Vector3::new(0.0, 0.0, 1.0)).abs().max() < TOL);
    }

    #[test]
    fn make_decompose_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let x = random_unit_screw(&mut rng);
            let again = make_unit_screw(&decompose_screw(&x)).unwrap();
            assert!(x.screw().max_abs_diff(&again.screw()) < TOL);
            assert_eq!(x.kind(), again.kind());
        }
    }

    #[test]
    fn frame_transform_hand_example() {
        // Pure shift by (0,1,0) of the z-axis revolute screw through origin:
        // r x w = (0,1,0) x (0,0,1) = (1,0,0).
        let s = Pose::new(Rotation::identity(), Vector3::new(0.0, 1.0, 0.0));
        let x = UnitScrew::new(Vector3::new(0.0, 0.0, 1.0), Vector3::zeros()).unwrap();
        let t = screw_frame_transform(&s, &x);
        assert!(
            t.screw().max_abs_diff(&Screw::new(
                Vector3::new(0.0, 0.0, 1.0),
                Vector3::new(1.0, 0.0, 0.0)
            )) < TOL
        );

        let id = screw_frame_transform(&Pose::identity(), &x);
        assert!(id.screw().max_abs_diff(&x.screw()) == 0.0);
    }

    #[test]
    fn pitch_and_axis_invariant_under_frame_transform() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..100 {
            let s = random_pose(&mut rng);
            let x = random_unit_screw(&mut rng);
            let t = screw_frame_transform(&s, &x);
            let gx = decompose_screw(&x);
            let gt = decompose_screw(&t);
            match (gx.pitch, gt.pitch) {
                (Pitch::Finite(a), Pitch::Finite(b)) => assert!((a - b).abs() < TOL),
                (Pitch::Infinite, Pitch::Infinite) => {}
                _ => panic!("pitch class changed under frame transform"),
            }
            assert!((gt.axis - s.rot.apply(&gx.axis)).abs().max() < TOL);
        }
    }

    #[test]
    fn transform_under_composition_matches_composed_transforms() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..50 {
            let a = random_pose(&mut rng);
            let b = random_pose(&mut rng);
            let x = random_unit_screw(&mut rng);
            let once = screw_frame_transform(&a.compose(&b), &x);
            let twice = screw_frame_transform(&a, &screw_frame_transform(&b, &x));
            assert!(once.screw().max_abs_diff(&twice.screw()) < 1e-12);
        }
    }

    #[test]
    fn coscrew_pairing_values() {
        let x = Screw::new(Vector3::new(0.0, 0.0, 1.0), Vector3::new(0.0, -1.0, 0.0));
        assert_eq!(coscrew_pairing(&x, &x), 2.0);
        assert_eq!(coscrew_pairing(&Screw::zero(), &x), 0.0);

        // Revolute and prismatic screws sharing an axis pair to zero for any
        // pitch: the blocks never meet.
        let e = Vector3::new(0.0, 0.0, 1.0);
        let rev = Screw::new(e, Vector3::zeros());
        let prism = Screw::new(Vector3::zeros(), e);
        assert_eq!(coscrew_pairing(&rev, &prism), 0.0);
    }
}
