//! The stacked 6n x n system Jacobian factorizes as a block-triangular
//! transport matrix times a block-diagonal screw matrix, J = A X, and the
//! transport matrix inverts in closed form because its subdiagonal companion
//! is nilpotent.
//!
//! ```text
//! cargo run --example system_factorization
//! ```

use nalgebra::DVector;
use screwkin::kinematics::TwistRep;
use screwkin::mbsmodel::MbsModel;
use screwkin::sysjac::{
    closed_form_inverse, nilpotent_expand, spatial_factorizations, system_jacobian, system_twist,
    BlockMatrix,
};

fn main() {
    let n = 6;
    let model = MbsModel::random_tree(n, 77);
    let parents: Vec<usize> = (1..=n).map(|i| model.parent(i)).collect();
    println!(
        "random tree, parents: {parents:?}, depth {}",
        model.topology().depth()
    );

    let q: Vec<f64> = (0..n).map(|k| 0.2 * (k as f64) - 0.5).collect();
    let qdot: Vec<f64> = (0..n).map(|k| (-1.0f64).powi(k as i32)).collect();

    for rep in TwistRep::ALL {
        let (j, f) = system_jacobian(&model, &q, rep).unwrap();
        // J qdot equals the stacked recursive twists.
        let v = system_twist(&model, &q, &qdot, rep).unwrap();
        let defect = (&j * DVector::from_column_slice(&qdot) - v.to_dvector())
            .abs()
            .max();
        print!(
            "{rep:>8}: J is {}x{}, J*qdot vs recursion {defect:.1e}",
            j.nrows(),
            j.ncols()
        );

        // Closed-form inverse of the transport matrix.
        let inv = closed_form_inverse(&f);
        let id = BlockMatrix::identity(n);
        print!(", A A^-1 defect {:.1e}", f.a.mul(&inv).max_abs_diff(&id));

        if let Some(d) = &f.d_or_t {
            // Von-Neumann series of the nilpotent companion terminates.
            let series = nilpotent_expand(d);
            let mut power = d.clone();
            let mut steps = 1;
            while !power.is_structurally_zero() {
                power = power.mul(d);
                steps += 1;
            }
            println!(
                ", series = A to {:.1e}, D^{steps} = 0",
                series.max_abs_diff(&f.a)
            );
        } else {
            println!(" (transport blocks sit on all ancestor positions)");
        }
    }

    // The spatial system Jacobian factorizes three ways.
    let sf = spatial_factorizations(&model, &q).unwrap();
    let j1 = sf.a_s.to_dense() * sf.y.to_dense();
    let j2 = sf.a_sb.to_dense() * sf.x_b.to_dense();
    let j3 = sf.a_sh.to_dense() * sf.x_h.to_dense();
    println!("\nspatial factorizations:");
    println!("  A^s Y   vs A^sb X^b: {:.1e}", (&j1 - &j2).abs().max());
    println!("  A^s Y   vs A^sh X^h: {:.1e}", (&j1 - &j3).abs().max());
    println!(
        "  columns of A^sb hold one repeated block: {}",
        sf.a_sb.columns_have_identical_blocks()
    );
    let inv = sf.a_sb_inverse();
    println!(
        "  closed-form (A^sb)^-1 defect: {:.1e}",
        sf.a_sb.mul(&inv).max_abs_diff(&BlockMatrix::identity(n))
    );
}
