//! The four geometric Jacobians of one body — body-fixed, spatial, hybrid,
//! mixed — their cross-representation identities, and a finite-difference
//! check of every column.
//!
//! ```text
//! cargo run --example jacobian_representations
//! ```

use nalgebra::Vector3;
use screwkin::interface::cli::RCM_MODEL_TEXT;
use screwkin::interface::parse_model;
use screwkin::kinematics::{fk, jacobian_with_poses, TwistRep};
use screwkin::liegroup::Pose;
use screwkin::oracle::{fd_body_jacobian, FdScheme};

fn main() {
    let model = parse_model(RCM_MODEL_TEXT).unwrap().model;
    let q = [0.4, -0.3, 0.9, 0.2, -0.6];
    let body = 3;
    let poses = fk(&model, &q).unwrap();

    for rep in TwistRep::ALL {
        let j = jacobian_with_poses(&model, &poses, body, rep).unwrap();
        println!("J_{body} ({rep}), support {:?}", j.support());
        let m = j.to_matrix();
        for r in 0..6 {
            let row: Vec<String> = (0..model.n())
                .map(|c| format!("{:>9.5}", m[(r, c)]))
                .collect();
            println!("  [{}]", row.join(" "));
        }
        // Columns against central finite differences of the pose map.
        let fd = fd_body_jacobian(&model, &q, body, rep, FdScheme::default()).unwrap();
        let worst = (1..=model.n())
            .map(|c| j.column(c).max_abs_diff(&fd[c - 1]))
            .fold(0.0f64, f64::max);
        println!("  finite-difference agreement: {worst:.2e}\n");
    }

    // Identities relating the representations.
    let jb = jacobian_with_poses(&model, &poses, body, TwistRep::BodyFixed).unwrap();
    let js = jacobian_with_poses(&model, &poses, body, TwistRep::Spatial).unwrap();
    let jh = jacobian_with_poses(&model, &poses, body, TwistRep::Hybrid).unwrap();
    let jm = jacobian_with_poses(&model, &poses, body, TwistRep::Mixed).unwrap();
    let c = poses.pose(body);
    let rot_only = Pose::new(c.rot, Vector3::zeros());

    let mut spatial_defect = 0.0f64;
    let mut hybrid_defect = 0.0f64;
    let mut mixed_defect = 0.0f64;
    for col in 1..=model.n() {
        spatial_defect = spatial_defect.max(
            c.transform_screw(&jb.column(col))
                .max_abs_diff(&js.column(col)),
        );
        hybrid_defect = hybrid_defect.max(
            rot_only
                .transform_screw(&jb.column(col))
                .max_abs_diff(&jh.column(col)),
        );
        let m = jm.column(col);
        mixed_defect = mixed_defect
            .max((m.ang - jb.column(col).ang).abs().max())
            .max((m.lin - jh.column(col).lin).abs().max());
    }
    println!("identities at body {body}:");
    println!("  spatial = Ad_C body-fixed      : {spatial_defect:.2e}");
    println!("  hybrid  = Ad_R body-fixed      : {hybrid_defect:.2e}");
    println!("  mixed   = (body ang, hybrid lin): {mixed_defect:.2e}");

    // The spatial column of a joint is shared by every body it supports.
    let js5 = jacobian_with_poses(&model, &poses, 5, TwistRep::Spatial).unwrap();
    let shared = (1..=3)
        .map(|j| js.column(j).max_abs_diff(&js5.column(j)))
        .fold(0.0f64, f64::max);
    println!("  spatial columns shared across bodies: {shared:.2e}");
}
