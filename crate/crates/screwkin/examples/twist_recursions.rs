//! One topological sweep per representation computes every body twist
//! without forming a Jacobian; the operation counts show where each
//! representation spends its effort.
//!
//! ```text
//! cargo run --example twist_recursions
//! ```

use screwkin::kinematics::{jacobian, op_counter, relative_twist, twists, TwistRep};
use screwkin::mbsmodel::MbsModel;

fn main() {
    let n = 8;
    let model = MbsModel::random_chain(n, 31);
    let q: Vec<f64> = (0..n).map(|k| 0.3 * (k as f64 + 1.0).sin()).collect();
    let qdot: Vec<f64> = (0..n).map(|k| 1.0 - 0.2 * k as f64).collect();

    println!("chain of {n} bodies; twist of the terminal body per representation:\n");
    for rep in TwistRep::ALL {
        let v = twists(&model, &q, &qdot, rep).unwrap();
        let t = v.twist(n);
        // Cross-check against the Jacobian contraction.
        let j = jacobian(&model, &q, n, rep).unwrap();
        let defect = t.max_abs_diff(&j.mul_rates(&qdot));
        println!(
            "{rep:>8}: ang [{:>8.4} {:>8.4} {:>8.4}] lin [{:>8.4} {:>8.4} {:>8.4}]  vs J*qdot {defect:.1e}",
            t.ang.x, t.ang.y, t.ang.z, t.lin.x, t.lin.y, t.lin.z
        );
    }

    println!("\noperation counts of one sweep (n = {n}):");
    println!(
        "{:>8} {:>12} {:>12} {:>11} {:>11} {:>11}",
        "rep", "prep adjoint", "sweep adjoint", "sweep shift", "sweep block", "screw scale"
    );
    let report = op_counter(&model, &q, &qdot).unwrap();
    for rep in TwistRep::ALL {
        let c = report.get(rep);
        println!(
            "{rep:>8} {:>12} {:>12} {:>11} {:>11} {:>11}",
            c.prep_adjoint, c.sweep_adjoint, c.sweep_shift, c.sweep_block, c.screw_scale
        );
    }
    println!("\nthe spatial sweep adds screws directly - no frame transformation at all;");
    println!("the body-fixed sweep transports the parent twist once per body.");

    // Relative twist of the tip with respect to body 4, resolved in body 4.
    let rel = relative_twist(&model, &q, &qdot, n, 4).unwrap();
    println!(
        "\nrelative twist of body {n} w.r.t. body 4: ang [{:>8.4} {:>8.4} {:>8.4}]",
        rel.ang.x, rel.ang.y, rel.ang.z
    );
}
