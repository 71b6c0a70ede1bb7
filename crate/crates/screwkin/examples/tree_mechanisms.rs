//! Building a branching mechanism programmatically: a torso with two arms.
//! Jacobian columns live only on the ground-to-body path, and editing one
//! branch never disturbs the other.
//!
//! ```text
//! cargo run --example tree_mechanisms
//! ```

use nalgebra::Vector3;
use screwkin::kinematics::{fk, jacobian_with_poses, TwistRep};
use screwkin::liegroup::{Pose, Rotation};
use screwkin::mbsmodel::{JointSpatialData, MbsModel, Topology};
use screwkin::screws::Pitch;

fn main() {
    // 1 torso on the ground, 2/3 = left upper arm + forearm, 4/5 = right.
    //         ground
    //           |
    //         torso(1)
    //         /     \
    //   l_upper(2) r_upper(4)
    //        |         |
    //   l_fore(3)  r_fore(5)
    let topo = Topology::new(
        vec![0, 1, 2, 1, 4],
        Some(vec![
            "torso".into(),
            "l_upper".into(),
            "l_fore".into(),
            "r_upper".into(),
            "r_fore".into(),
        ]),
    );
    let ez = Vector3::new(0.0, 0.0, 1.0);
    let ex = Vector3::new(1.0, 0.0, 0.0);
    let joint = |pos: Vector3<f64>, axis: Vector3<f64>| {
        JointSpatialData::from_geometry(
            Pose::new(Rotation::identity(), pos),
            axis,
            pos,
            Pitch::Finite(0.0),
        )
        .unwrap()
    };
    let model = MbsModel::from_parts(
        topo,
        vec![
            joint(Vector3::new(0.0, 0.0, 1.0), ez),
            joint(Vector3::new(0.0, 0.4, 1.0), ex),
            joint(Vector3::new(0.0, 0.8, 1.0), ex),
            joint(Vector3::new(0.0, -0.4, 1.0), ex),
            joint(Vector3::new(0.0, -0.8, 1.0), ex),
        ],
    )
    .expect("valid tree");

    println!("paths to ground:");
    for i in 1..=model.n() {
        println!(
            "  {}: {:?}",
            model.topology().name(i),
            model.topology().path(i)
        );
    }

    let q = [0.3, 0.5, -0.4, -0.2, 0.6];
    let poses = fk(&model, &q).unwrap();

    // Jacobian support = path; the left forearm never sees right-arm joints.
    let j3 = jacobian_with_poses(&model, &poses, 3, TwistRep::Spatial).unwrap();
    let j5 = jacobian_with_poses(&model, &poses, 5, TwistRep::Spatial).unwrap();
    println!("\nJacobian support of l_fore: {:?}", j3.support());
    println!("Jacobian support of r_fore: {:?}", j5.support());
    assert!(j3.column(4).max_abs() == 0.0 && j3.column(5).max_abs() == 0.0);

    // Moving a right-arm joint leaves the whole left branch in place.
    let mut q2 = q;
    q2[3] += 0.9;
    let poses2 = fk(&model, &q2).unwrap();
    println!("\nafter moving r_upper by 0.9 rad:");
    for i in 1..=model.n() {
        let moved = poses.pose(i).max_abs_diff(&poses2.pose(i));
        println!("  {:<8} moved by {moved:.2e}", model.topology().name(i));
    }

    // The torso column of both forearm Jacobians is the same spatial screw.
    let shared = j3.column(1).max_abs_diff(&j5.column(1));
    println!("\ntorso column shared between branches: {shared:.2e}");
}
