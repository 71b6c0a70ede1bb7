//! System-level stacked objects: the 6n twist vector, the block-triangular
//! factorizations `J = A X` of the system Jacobian in every representation,
//! the nilpotent transport matrices behind them, and their closed-form
//! inverses.
//!
//! Dense matrices here exist for analysis and verification; the evaluation
//! hot path stays with the recursions in [`crate::kinematics`]. Blocks are
//! stored in an index map so the sparsity pattern is exact: block (i, j) of a
//! transport matrix is populated iff joint j lies on the ground-to-i path.

use crate::kinematics::{self, fk, hybrid_joint_screws, BodyPoses, KinematicsError, TwistRep};
use crate::liegroup::{adjoint, adjoint_trans, skew, Pose, Screw};
use crate::mbsmodel::MbsModel;
use nalgebra::{DMatrix, DVector, Matrix3, Matrix6};
use std::collections::BTreeMap;

/// Square block matrix over 6x6 blocks with an explicit sparsity pattern.
#[derive(Debug, Clone)]
pub struct BlockMatrix {
    n: usize,
    blocks: BTreeMap<(usize, usize), Matrix6<f64>>,
}

impl BlockMatrix {
    pub fn zeros(n: usize) -> Self {
        BlockMatrix {
            n,
            blocks: BTreeMap::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = BlockMatrix::zeros(n);
        for i in 0..n {
            m.set_block(i, i, Matrix6::identity());
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of stored (structurally nonzero) blocks.
    pub fn nnz_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_structurally_zero(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn set_block(&mut self, i: usize, j: usize, m: Matrix6<f64>) {
        self.blocks.insert((i, j), m);
    }

    pub fn block(&self, i: usize, j: usize) -> Option<&Matrix6<f64>> {
        self.blocks.get(&(i, j))
    }

    pub fn blocks(&self) -> impl Iterator<Item = (&(usize, usize), &Matrix6<f64>)> {
        self.blocks.iter()
    }

    pub fn mul(&self, rhs: &BlockMatrix) -> BlockMatrix {
        assert_eq!(self.n, rhs.n);
        let mut out: BTreeMap<(usize, usize), Matrix6<f64>> = BTreeMap::new();
        for (&(i, k), a) in &self.blocks {
            for (&(_, j), b) in rhs.blocks.range((k, 0)..=(k, usize::MAX)) {
                *out.entry((i, j)).or_insert_with(Matrix6::zeros) += a * b;
            }
        }
        BlockMatrix {
            n: self.n,
            blocks: out,
        }
    }

    pub fn add(&self, rhs: &BlockMatrix) -> BlockMatrix {
        assert_eq!(self.n, rhs.n);
        let mut out = self.blocks.clone();
        for (&k, b) in &rhs.blocks {
            *out.entry(k).or_insert_with(Matrix6::zeros) += b;
        }
        BlockMatrix {
            n: self.n,
            blocks: out,
        }
    }

    /// I - self
    pub fn identity_minus(&self) -> BlockMatrix {
        let mut out = BlockMatrix::identity(self.n);
        for (&(i, j), b) in &self.blocks {
            let entry = out.blocks.entry((i, j)).or_insert_with(Matrix6::zeros);
            *entry -= b;
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(6 * self.n, 6 * self.n);
        for (&(i, j), b) in &self.blocks {
            m.view_mut((6 * i, 6 * j), (6, 6)).copy_from(b);
        }
        m
    }

    pub fn max_abs_diff(&self, other: &BlockMatrix) -> f64 {
        (self.to_dense() - other.to_dense()).abs().max()
    }

    /// True when all stored blocks in each column are bitwise identical.
    pub fn columns_have_identical_blocks(&self) -> bool {
        for j in 0..self.n {
            let mut first: Option<&Matrix6<f64>> = None;
            for i in 0..self.n {
                if let Some(b) = self.block(i, j) {
                    match first {
                        None => first = Some(b),
                        Some(f) => {
                            if f != b {
                                return false;
                            }
                        }
                    }
                }
            }
        }
        true
    }
}

/// Block-diagonal 6n x n matrix of joint screws.
#[derive(Debug, Clone)]
pub struct ScrewDiag {
    cols: Vec<Screw>,
}

impl ScrewDiag {
    pub fn new(cols: Vec<Screw>) -> Self {
        ScrewDiag { cols }
    }

    pub fn n(&self) -> usize {
        self.cols.len()
    }

    pub fn col(&self, i: usize) -> Screw {
        self.cols[i - 1]
    }

    pub fn cols(&self) -> &[Screw] {
        &self.cols
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.cols.len();
        let mut m = DMatrix::zeros(6 * n, n);
        for (k, s) in self.cols.iter().enumerate() {
            m.view_mut((6 * k, k), (6, 1)).copy_from(&s.as_vector6());
        }
        m
    }
}

/// Stacked per-body twists of one representation.
#[derive(Debug, Clone)]
pub struct SystemTwist {
    pub rep: TwistRep,
    blocks: Vec<Screw>,
}

impl SystemTwist {
    pub fn blocks(&self) -> &[Screw] {
        &self.blocks
    }

    pub fn to_dvector(&self) -> DVector<f64> {
        let mut v = DVector::zeros(6 * self.blocks.len());
        for (k, s) in self.blocks.iter().enumerate() {
            v.rows_mut(6 * k, 6).copy_from(&s.as_vector6());
        }
        v
    }
}

/// Factorization `J = A X` of one system Jacobian. For the body-fixed,
/// hybrid, and mixed representations `A = (I - D)^-1` with the nilpotent
/// parent-subdiagonal transport matrix in `d_or_t`; the spatial
/// representation has no such companion (its transport blocks sit on full
/// ancestor positions and invert through the pose data instead).
#[derive(Debug, Clone)]
pub struct SystemFactorization {
    pub rep: TwistRep,
    pub a: BlockMatrix,
    pub x: ScrewDiag,
    pub d_or_t: Option<BlockMatrix>,
    parents: Vec<usize>,
}

/// The three factorizations of the spatial system Jacobian:
/// `J^s = A^s Y = A^sb X^b = A^sh X^h`.
#[derive(Debug, Clone)]
pub struct SpatialFactorizations {
    pub a_s: BlockMatrix,
    pub y: ScrewDiag,
    pub a_sb: BlockMatrix,
    pub x_b: ScrewDiag,
    pub a_sh: BlockMatrix,
    pub x_h: ScrewDiag,
    parents: Vec<usize>,
}

/// Stacked recursive twists as a system vector.
pub fn system_twist(
    model: &MbsModel,
    q: &[f64],
    qdot: &[f64],
    rep: TwistRep,
) -> Result<SystemTwist, KinematicsError> {
    let v = kinematics::twists(model, q, qdot, rep)?;
    Ok(SystemTwist {
        rep,
        blocks: v.as_slice().to_vec(),
    })
}

fn mixed_transport_block(child: &Pose, parent: &Pose) -> Matrix6<f64> {
    // [[R_{i,p}, 0], [skew(r_p - r_i) R_p, I]]
    let rel_rot = child.rot.matrix().transpose() * parent.rot.matrix();
    let shift = skew(&(parent.pos - child.pos)) * parent.rot.matrix();
    let mut m = Matrix6::zeros();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&rel_rot);
    m.fixed_view_mut::<3, 3>(3, 0).copy_from(&shift);
    m.fixed_view_mut::<3, 3>(3, 3)
        .copy_from(&Matrix3::identity());
    m
}

/// Builds the system Jacobian of the requested representation together with
/// its factorization. The returned dense matrix is the block product `A X`;
/// its row blocks coincide with the per-body Jacobians.
pub fn system_jacobian(
    model: &MbsModel,
    q: &[f64],
    rep: TwistRep,
) -> Result<(DMatrix<f64>, SystemFactorization), KinematicsError> {
    let poses = fk(model, q)?;
    let f = factorization_with_poses(model, &poses, rep);
    let j = f.a.to_dense() * f.x.to_dense();
    Ok((j, f))
}

pub fn factorization_with_poses(
    model: &MbsModel,
    poses: &BodyPoses,
    rep: TwistRep,
) -> SystemFactorization {
    let n = model.n();
    let parents: Vec<usize> = (1..=n).map(|i| model.parent(i)).collect();
    match rep {
        TwistRep::BodyFixed => {
            let x = ScrewDiag::new((1..=n).map(|i| model.body_screw(i).screw()).collect());
            let mut a = BlockMatrix::identity(n);
            let mut d = BlockMatrix::zeros(n);
            for i in 1..=n {
                // Walk ancestors accumulating C_{i,j}.
                let mut t = Pose::identity();
                let mut j = i;
                while model.parent(j) != 0 {
                    let p = model.parent(j);
                    t = t.compose(&poses.rel(j, p));
                    a.set_block(i - 1, p - 1, *adjoint(&t).matrix());
                    j = p;
                }
                let p = model.parent(i);
                if p != 0 {
                    d.set_block(i - 1, p - 1, *adjoint(&poses.rel(i, p)).matrix());
                }
            }
            SystemFactorization {
                rep,
                a,
                x,
                d_or_t: Some(d),
                parents,
            }
        }
        TwistRep::Hybrid => {
            let x = ScrewDiag::new(hybrid_joint_screws(model, poses));
            let mut a = BlockMatrix::identity(n);
            let mut t = BlockMatrix::zeros(n);
            for i in 1..=n {
                let ri = poses.pose(i).pos;
                let mut j = model.parent(i);
                while j != 0 {
                    a.set_block(
                        i - 1,
                        j - 1,
                        *adjoint_trans(&(poses.pose(j).pos - ri)).matrix(),
                    );
                    j = model.parent(j);
                }
                let p = model.parent(i);
                if p != 0 {
                    t.set_block(
                        i - 1,
                        p - 1,
                        *adjoint_trans(&(poses.pose(p).pos - ri)).matrix(),
                    );
                }
            }
            SystemFactorization {
                rep,
                a,
                x,
                d_or_t: Some(t),
                parents,
            }
        }
        TwistRep::Mixed => {
            // Diagonal columns are the bodies' own mixed screws; the
            // transport blocks telescope along ancestor paths.
            let xh = hybrid_joint_screws(model, poses);
            let x = ScrewDiag::new(
                (1..=n)
                    .map(|i| {
                        let s = xh[i - 1];
                        Screw::new(poses.pose(i).rot.apply_transpose(&s.ang), s.lin)
                    })
                    .collect(),
            );
            let mut a = BlockMatrix::identity(n);
            let mut d = BlockMatrix::zeros(n);
            for i in 1..=n {
                let ci = poses.pose(i);
                let mut j = model.parent(i);
                while j != 0 {
                    a.set_block(i - 1, j - 1, mixed_transport_block(&ci, &poses.pose(j)));
                    j = model.parent(j);
                }
                let p = model.parent(i);
                if p != 0 {
                    d.set_block(i - 1, p - 1, mixed_transport_block(&ci, &poses.pose(p)));
                }
            }
            SystemFactorization {
                rep,
                a,
                x,
                d_or_t: Some(d),
                parents,
            }
        }
        TwistRep::Spatial => {
            let y = ScrewDiag::new((1..=n).map(|i| model.joint(i).y.screw()).collect());
            let mut a = BlockMatrix::zeros(n);
            // One adjoint per joint, copied to every body it supports.
            let per_joint: Vec<Matrix6<f64>> = (1..=n)
                .map(|j| *adjoint(&poses.pose(j).compose(&model.joint(j).a.inverse())).matrix())
                .collect();
            for i in 1..=n {
                let mut j = i;
                while j != 0 {
                    a.set_block(i - 1, j - 1, per_joint[j - 1]);
                    j = model.parent(j);
                }
            }
            SystemFactorization {
                rep,
                a,
                x: y,
                d_or_t: None,
                parents,
            }
        }
    }
}

/// All three factorizations of the spatial system Jacobian at one
/// configuration; the per-joint blocks are computed once and copied down
/// the columns.
pub fn spatial_factorizations(
    model: &MbsModel,
    q: &[f64],
) -> Result<SpatialFactorizations, KinematicsError> {
    let poses = fk(model, q)?;
    let n = model.n();
    let parents: Vec<usize> = (1..=n).map(|i| model.parent(i)).collect();

    let y = ScrewDiag::new((1..=n).map(|i| model.joint(i).y.screw()).collect());
    let x_b = ScrewDiag::new((1..=n).map(|i| model.body_screw(i).screw()).collect());
    let x_h = ScrewDiag::new(hybrid_joint_screws(model, &poses));

    let blocks_s: Vec<Matrix6<f64>> = (1..=n)
        .map(|j| *adjoint(&poses.pose(j).compose(&model.joint(j).a.inverse())).matrix())
        .collect();
    let blocks_sb: Vec<Matrix6<f64>> = (1..=n).map(|j| *adjoint(&poses.pose(j)).matrix()).collect();
    let blocks_sh: Vec<Matrix6<f64>> = (1..=n)
        .map(|j| *adjoint_trans(&poses.pose(j).pos).matrix())
        .collect();

    let fill = |blocks: &[Matrix6<f64>]| {
        let mut a = BlockMatrix::zeros(n);
        for i in 1..=n {
            let mut j = i;
            while j != 0 {
                a.set_block(i - 1, j - 1, blocks[j - 1]);
                j = model.parent(j);
            }
        }
        a
    };

    Ok(SpatialFactorizations {
        a_s: fill(&blocks_s),
        y,
        a_sb: fill(&blocks_sb),
        x_b,
        a_sh: fill(&blocks_sh),
        x_h,
        parents,
    })
}

/// Von-Neumann expansion of the resolvent: `A = I + D + D^2 + ...`, which
/// terminates once the powers run off the tree depth.
pub fn nilpotent_expand(d: &BlockMatrix) -> BlockMatrix {
    let mut a = BlockMatrix::identity(d.n());
    let mut power = d.clone();
    let mut k = 0;
    while !power.is_structurally_zero() && k <= d.n() {
        a = a.add(&power);
        power = power.mul(d);
        k += 1;
    }
    a
}

/// Inverse of an adjoint-structured 6x6 block using only its own entries:
/// for [[R, 0], [B, R]] the inverse is [[R^T, 0], [B^T, R^T]].
fn adjoint_block_inverse(m: &Matrix6<f64>) -> Matrix6<f64> {
    let r = m.fixed_view::<3, 3>(0, 0).into_owned();
    let b = m.fixed_view::<3, 3>(3, 0).into_owned();
    let mut out = Matrix6::zeros();
    out.fixed_view_mut::<3, 3>(0, 0).copy_from(&r.transpose());
    out.fixed_view_mut::<3, 3>(3, 0).copy_from(&b.transpose());
    out.fixed_view_mut::<3, 3>(3, 3).copy_from(&r.transpose());
    out
}

/// Closed-form inverse of the transport matrix `A` of a factorization.
///
/// Body-fixed, hybrid, and mixed: `A^-1 = I - D`. Spatial: the diagonal
/// holds the inverses of A's own diagonal blocks and each parent position
/// their negation.
pub fn closed_form_inverse(f: &SystemFactorization) -> BlockMatrix {
    match &f.d_or_t {
        Some(d) => d.identity_minus(),
        None => {
            let n = f.a.n();
            let mut inv = BlockMatrix::zeros(n);
            for i in 0..n {
                let m = adjoint_block_inverse(f.a.block(i, i).expect("diagonal block"));
                inv.set_block(i, i, m);
                let p = f.parents[i];
                if p != 0 {
                    inv.set_block(i, p - 1, -m);
                }
            }
            inv
        }
    }
}

impl SpatialFactorizations {
    /// Closed-form inverse of `A^sb`: diagonal blocks are the inverse body
    /// adjoints and each parent position carries their negation.
    pub fn a_sb_inverse(&self) -> BlockMatrix {
        let n = self.a_sb.n();
        let mut inv = BlockMatrix::zeros(n);
        for i in 0..n {
            let m = adjoint_block_inverse(self.a_sb.block(i, i).expect("diagonal block"));
            inv.set_block(i, i, m);
            let p = self.parents[i];
            if p != 0 {
                inv.set_block(i, p - 1, -m);
            }
        }
        inv
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::jacobian;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    const TOL: f64 = 1e-12;

    fn random_q(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.random_range(-PI..PI)).collect()
    }

    #[test]
    fn single_body_factorization_is_trivial() {
        let model = MbsModel::random_chain(1, 400);
        let (j, f) = system_jacobian(&model, &[0.4], TwistRep::BodyFixed).unwrap();
        assert!((f.a.to_dense() - DMatrix::identity(6, 6)).abs().max() == 0.0);
        assert!((j - f.x.to_dense()).abs().max() == 0.0);
        let inv = closed_form_inverse(&f);
        assert!((inv.to_dense() - DMatrix::identity(6, 6)).abs().max() == 0.0);
    }

    #[test]
    fn body_transport_blocks_are_relative_adjoints() {
        let mut rng = ChaCha8Rng::seed_from_u64(401);
        let model = MbsModel::random_chain(3, 402);
        let q = random_q(&mut rng, 3);
        let poses = fk(&model, &q).unwrap();
        let f = factorization_with_poses(&model, &poses, TwistRep::BodyFixed);
        let expected = adjoint(&poses.rel(3, 1));
        assert!((f.a.block(2, 0).unwrap() - expected.matrix()).abs().max() < TOL);
    }

    #[test]
    fn row_blocks_equal_per_body_jacobians() {
        let mut rng = ChaCha8Rng::seed_from_u64(403);
        for seed in 0..5 {
            let model = MbsModel::random_tree(6, 410 + seed);
            let q = random_q(&mut rng, 6);
            for rep in TwistRep::ALL {
                let (j, _) = system_jacobian(&model, &q, rep).unwrap();
                for i in 1..=6 {
                    let ji = jacobian(&model, &q, i, rep).unwrap().to_matrix();
                    let row = j.view((6 * (i - 1), 0), (6, 6));
                    assert!((row - ji).abs().max() < TOL, "rep {rep} body {i}");
                }
            }
        }
    }

    #[test]
    fn resolvent_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(404);
        for seed in 0..5 {
            let model = MbsModel::random_tree(7, 420 + seed);
            let q = random_q(&mut rng, 7);
            let poses = fk(&model, &q).unwrap();
            for rep in [TwistRep::BodyFixed, TwistRep::Hybrid, TwistRep::Mixed] {
                let f = factorization_with_poses(&model, &poses, rep);
                let d = f.d_or_t.as_ref().unwrap();
                // A (I - D) = I
                let prod = f.a.mul(&d.identity_minus());
                assert!(prod.max_abs_diff(&BlockMatrix::identity(7)) < TOL);
                // Closed-form inverse agrees.
                let inv = closed_form_inverse(&f);
                assert!(f.a.mul(&inv).max_abs_diff(&BlockMatrix::identity(7)) < TOL);
                // Von-Neumann series reproduces A and terminates at depth.
                let series = nilpotent_expand(d);
                assert!(series.max_abs_diff(&f.a) < TOL);
                let depth = model.topology().depth();
                let mut power = d.clone();
                for _ in 0..depth {
                    power = power.mul(d);
                }
                assert!(power.is_structurally_zero());
            }
        }
    }

    #[test]
    fn two_link_chain_series_is_i_plus_d() {
        let model = MbsModel::random_chain(2, 430);
        let q = [0.3, -0.8];
        let poses = fk(&model, &q).unwrap();
        let f = factorization_with_poses(&model, &poses, TwistRep::BodyFixed);
        let d = f.d_or_t.unwrap();
        assert!(d.mul(&d).is_structurally_zero());
        assert!(nilpotent_expand(&d).max_abs_diff(&BlockMatrix::identity(2).add(&d)) == 0.0);
    }

    #[test]
    fn von_neumann_matches_dense_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(405);
        let model = MbsModel::random_chain(6, 431);
        let q = random_q(&mut rng, 6);
        let poses = fk(&model, &q).unwrap();
        let f = factorization_with_poses(&model, &poses, TwistRep::BodyFixed);
        let d = f.d_or_t.unwrap();
        let dense_inv = d
            .identity_minus()
            .to_dense()
            .try_inverse()
            .expect("I - D is invertible");
        assert!((nilpotent_expand(&d).to_dense() - dense_inv).abs().max() < TOL);
    }

    #[test]
    fn spatial_factorizations_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(406);
        for seed in 0..5 {
            let model = MbsModel::random_tree(6, 440 + seed);
            let q = random_q(&mut rng, 6);
            let sf = spatial_factorizations(&model, &q).unwrap();
            let j1 = sf.a_s.to_dense() * sf.y.to_dense();
            let j2 = sf.a_sb.to_dense() * sf.x_b.to_dense();
            let j3 = sf.a_sh.to_dense() * sf.x_h.to_dense();
            assert!((&j1 - &j2).abs().max() < TOL);
            assert!((&j1 - &j3).abs().max() < TOL);
            let (j, _) = system_jacobian(&model, &q, TwistRep::Spatial).unwrap();
            assert!((&j1 - &j).abs().max() < TOL);

            // Columns repeat one block; construction copies, so exact.
            assert!(sf.a_s.columns_have_identical_blocks());
            assert!(sf.a_sb.columns_have_identical_blocks());
            assert!(sf.a_sh.columns_have_identical_blocks());

            // A^sb = diag(Ad_{C_i}) A^b
            let poses = fk(&model, &q).unwrap();
            let fb = factorization_with_poses(&model, &poses, TwistRep::BodyFixed);
            let mut diag = BlockMatrix::zeros(6);
            for i in 1..=6 {
                diag.set_block(i - 1, i - 1, *adjoint(&poses.pose(i)).matrix());
            }
            assert!(diag.mul(&fb.a).max_abs_diff(&sf.a_sb) < TOL);
        }
    }

    #[test]
    fn a_sb_inverse_pattern_and_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(407);
        let model = MbsModel::random_chain(5, 450);
        let q = random_q(&mut rng, 5);
        let sf = spatial_factorizations(&model, &q).unwrap();
        let inv = sf.a_sb_inverse();
        assert!(inv.mul(&sf.a_sb).max_abs_diff(&BlockMatrix::identity(5)) < TOL);
        assert!(sf.a_sb.mul(&inv).max_abs_diff(&BlockMatrix::identity(5)) < TOL);

        let poses = fk(&model, &q).unwrap();
        for i in 1..=5 {
            let expected = adjoint(&poses.pose(i).inverse());
            assert!(
                (inv.block(i - 1, i - 1).unwrap() - expected.matrix())
                    .abs()
                    .max()
                    < TOL
            );
            if i > 1 {
                assert!(
                    (inv.block(i - 1, i - 2).unwrap() + expected.matrix())
                        .abs()
                        .max()
                        < TOL
                );
            }
        }
    }

    #[test]
    fn spatial_closed_form_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(408);
        let model = MbsModel::random_tree(6, 451);
        let q = random_q(&mut rng, 6);
        let (_, f) = system_jacobian(&model, &q, TwistRep::Spatial).unwrap();
        let inv = closed_form_inverse(&f);
        assert!(f.a.mul(&inv).max_abs_diff(&BlockMatrix::identity(6)) < TOL);
        assert!(inv.mul(&f.a).max_abs_diff(&BlockMatrix::identity(6)) < TOL);
    }

    #[test]
    fn system_jacobian_contracts_to_system_twist() {
        let mut rng = ChaCha8Rng::seed_from_u64(409);
        for seed in 0..5 {
            let model = MbsModel::random_tree(7, 460 + seed);
            let q = random_q(&mut rng, 7);
            let qdot: Vec<f64> = (0..7).map(|_| rng.random_range(-1.0..1.0)).collect();
            let qd = DVector::from_column_slice(&qdot);
            for rep in TwistRep::ALL {
                let (j, _) = system_jacobian(&model, &q, rep).unwrap();
                let v = system_twist(&model, &q, &qdot, rep).unwrap();
                assert!((j * &qd - v.to_dvector()).abs().max() < TOL, "rep {rep}");
            }
        }
    }
}
