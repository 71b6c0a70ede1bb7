//! Tour of the group kernel: screw exponentials, logarithms, adjoints, and
//! the conjugation identity that moves a screw axis with a frame.
//!
//! ```text
//! cargo run --example screw_exponentials
//! ```

use nalgebra::Vector3;
use screwkin::liegroup::{
    adjoint, conjugate_exp, se3_exp, se3_exp_vec, so3_exp, so3_log, Pose, Rotation, Screw,
};
use screwkin::screws::{decompose_screw, make_unit_screw, Pitch, ScrewGeometry};
use std::f64::consts::PI;

fn v3(v: &Vector3<f64>) -> String {
    format!("[{:.4} {:.4} {:.4}]", v.x, v.y, v.z)
}

fn main() {
    // A screw with pitch: rotate about z through (1,0,0) while advancing.
    let geometry = ScrewGeometry {
        axis: Vector3::new(0.0, 0.0, 1.0),
        point: Vector3::new(1.0, 0.0, 0.0),
        pitch: Pitch::Finite(0.25),
    };
    let screw = make_unit_screw(&geometry).unwrap();
    println!(
        "unit screw coordinates: ang {} lin {}",
        v3(&screw.ang()),
        v3(&screw.lin())
    );

    let half_turn = screw.exp(PI);
    println!(
        "half turn about the offset axis: pos = [{:.4} {:.4} {:.4}]",
        half_turn.pos.x, half_turn.pos.y, half_turn.pos.z
    );

    // Decomposition recovers the generating geometry.
    let g = decompose_screw(&screw);
    println!(
        "decomposed: axis {}, closest point {}, pitch {:?}",
        v3(&g.axis),
        v3(&g.point),
        g.pitch
    );

    // Rotation log/exp round trip.
    let xi = Vector3::new(0.3, -0.7, 0.5);
    let back = so3_log(&so3_exp(&xi));
    println!("\nso3 log(exp(xi)) - xi = {:.2e}", (back - xi).abs().max());

    // exp of a general twist equals the matrix exponential of its 4x4 form;
    // check against a unit-screw exponential of the same motion.
    let v = screw.screw() * 0.9;
    let a = se3_exp_vec(&v);
    let b = se3_exp(&screw.screw(), 0.9).unwrap();
    println!("se3 exp vs unit-screw exp: {:.2e}", a.max_abs_diff(&b));

    // Conjugation: S exp(X phi) S^-1 = exp((Ad_S X) phi).
    let s = Pose::new(Rotation::rot_x(0.4), Vector3::new(0.0, 2.0, 0.0));
    let lhs = s.compose(&screw.exp(0.8)).compose(&s.inverse());
    let rhs = conjugate_exp(&s, &screw.screw(), 0.8).unwrap();
    println!(
        "conjugation identity defect: {:.2e}",
        lhs.max_abs_diff(&rhs)
    );

    // The adjoint is a homomorphism.
    let t = Pose::new(Rotation::rot_z(1.1), Vector3::new(-1.0, 0.5, 0.2));
    let hom = adjoint(&s.compose(&t)).max_abs_diff(&(adjoint(&s) * adjoint(&t)));
    println!("adjoint homomorphism defect: {hom:.2e}");

    // Frame transport of a twist without forming the 6x6 matrix.
    let twist = Screw::new(Vector3::new(0.0, 0.0, 1.5), Vector3::new(0.2, 0.0, 0.0));
    let moved = s.transform_screw(&twist);
    let back = s.inv_transform_screw(&moved);
    println!(
        "screw transport round trip: {:.2e}",
        back.max_abs_diff(&twist)
    );
}
