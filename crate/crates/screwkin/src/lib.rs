//! screwkin — screw-theory kinematics for rigid multibody systems in tree
//! topology.
//!
//! Mechanisms are described by joint screw coordinates in one of three
//! conventions (two joint frames per joint, body-fixed reference poses, or
//! purely spatial data), configurations come from products of exponentials,
//! and body twists and geometric Jacobians are available in the four
//! standard representations (body-fixed, spatial, hybrid, mixed) through
//! O(n) recursions. On top of that sit the stacked system Jacobian with its
//! block-triangular factorizations and a velocity-level inverse kinematics
//! that recovers joint rates from prescribed per-body twists.
//!
//! Every analytic path is checkable against independent oracles
//! ([`oracle::naive_fk`], [`oracle::fd_body_jacobian`], [`oracle::series_exp`]);
//! the `verify` subcommand of the bundled CLI runs that suite on any model.
//!
//! Start with the examples, one per capability:
//!
//! ```text
//! cargo run --example rcm_mechanism            # remote-center-of-motion device
//! cargo run --example screw_exponentials       # group kernel tour
//! cargo run --example jacobian_representations # four Jacobians, one body
//! cargo run --example twist_recursions         # O(n) sweeps and their costs
//! cargo run --example system_factorization     # J = A X, nilpotent inverses
//! cargo run --example rate_recovery            # twists -> joint rates
//! cargo run --example tree_mechanisms          # branching topologies
//! cargo run --example model_diagnostics        # file format and diagnostics
//! ```

pub mod interface;
pub mod invkin;
pub mod kinematics;
pub mod liegroup;
pub mod mbsmodel;
pub mod oracle;
pub mod screws;
pub mod sysjac;

pub use invkin::{rates_from_twists, RateSolution};
pub use kinematics::{
    body_jacobian, convert_twist, fk, fk_variant, hybrid_jacobian, jacobian, mixed_jacobian,
    relative_twist, spatial_jacobian, twists, BodyJacobian, BodyPoses, BodyTwists, FkVariant,
    JointConfig, KinematicsError, TwistRep,
};
pub use liegroup::{AdjointMap, Pose, Rotation, Screw, Vec3};
pub use mbsmodel::{
    BodyFixedModel, JfrModel, JointBodyFixedData, JointJfrData, JointKind, JointSpatialData,
    MbsModel, Topology, ValidationReport,
};
pub use screws::{
    coscrew_pairing, decompose_screw, make_unit_screw, screw_frame_transform, Pitch, ScrewGeometry,
    UnitScrew,
};
