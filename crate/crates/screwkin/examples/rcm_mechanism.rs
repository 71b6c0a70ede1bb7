//! The bundled remote-center-of-motion surgical positioner: load the model
//! file, run forward kinematics through all three algorithm variants, and
//! show that they agree to machine precision.
//!
//! ```text
//! cargo run --example rcm_mechanism
//! ```

use screwkin::interface::cli::RCM_MODEL_TEXT;
use screwkin::interface::parse_model;
use screwkin::kinematics::{fk_variant, FkVariant};

fn main() {
    let loaded = parse_model(RCM_MODEL_TEXT).expect("bundled model is valid");
    let model = loaded.model;
    println!("model: {} bodies", model.n());
    for i in 1..=model.n() {
        let parent = model.parent(i);
        let parent_name = if parent == 0 {
            "ground"
        } else {
            model.topology().name(parent)
        };
        println!("  body {i} '{}' <- {parent_name}", model.topology().name(i));
    }

    let q = [0.1, 0.2, 0.3, 0.4, 0.5];
    println!("\nforward kinematics at q = {q:?}");

    let spatial = fk_variant(&model, &q, FkVariant::SpatialPoe).unwrap();
    let body = fk_variant(&model, &q, FkVariant::BodyPoe).unwrap();
    let jfr = fk_variant(&model, &q, FkVariant::Jfr).unwrap();

    println!(
        "\n{:<12} {:>32} {:>12}",
        "body", "position (spatial variant)", "spread"
    );
    for i in 1..=model.n() {
        let p = spatial.pose(i);
        let spread = p
            .max_abs_diff(&body.pose(i))
            .max(p.max_abs_diff(&jfr.pose(i)));
        println!(
            "{:<12} [{:>9.5} {:>9.5} {:>9.5}] {:>12.2e}",
            model.topology().name(i),
            p.pos.x,
            p.pos.y,
            p.pos.z,
            spread
        );
    }

    // The instrument's remote pivot: the axes of joints 4 and 5 keep
    // intersecting in one point however the arm moves.
    let poses = spatial;
    let cols = screwkin::kinematics::spatial_joint_columns(&model, &poses);
    let g4 =
        screwkin::decompose_screw(&screwkin::UnitScrew::new(cols[3].ang, cols[3].lin).unwrap());
    let g5 =
        screwkin::decompose_screw(&screwkin::UnitScrew::new(cols[4].ang, cols[4].lin).unwrap());
    // Closest points of the two instantaneous axes.
    let w = g4.axis.cross(&g5.axis);
    let d = (g5.point - g4.point).dot(&w) / w.norm_squared();
    println!(
        "\ninstantaneous axes of joints 4 and 5: distance {:.2e} (they intersect)",
        d.abs()
    );
}
