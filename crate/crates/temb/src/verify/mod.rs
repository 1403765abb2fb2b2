//! Numerical checks of the t-embedding and origami hypotheses.

pub mod compact;
pub mod dual;
pub mod geometry;
pub mod moves;
pub mod origami;
pub mod report;
pub mod suite;

pub use dual::{DualFace, DualGraph, FaceColor};
pub use geometry::{angle_condition_check, corner_sums, crossing_edges, perfectness_check, properness_check};
pub use origami::{fold_consistency_check, origami_fold, origami_fold_from, recurrence_normalised_fold, origami_metric_checks, Fold, Isometry};
pub use report::{CheckReport, VerifyReport};
pub use moves::{
    central_move, central_move_roots, face_weight_check, face_weights, rule5_check,
};
pub use compact::{
    convergence_sup, default_delta, default_delta_prime, exp_fat_check, exp_fat_check_rho, frozen_collapse_report, lip_check,
    rigidity_report, CompactSubset, FrozenCollapse, LipSampling,
};
pub use suite::{run_sequence, run_suite, SuiteReport, VerifyConfig};
