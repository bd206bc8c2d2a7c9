//! Defining sums of the absolute-continuity classes on a given family, and
//! numerical diagnostics: ball oscillation, pointwise Lipschitz ratios,
//! directional derivatives and grid Dirichlet energy.

mod class;
mod diagnostics;
mod sums;

pub use class::{AcClassSpec, ClassKind, MeasureMode};
pub use diagnostics::{
    default_lip_radii, default_steps, dir_derivative, dirichlet_energy, lip_at, osc_on_ball, OscBound, Sampler,
    Scan, ScanFlag, ScanRow, DIR_TOL, MAX_ENERGY_LEVEL, PROBE_CAP,
};
pub use sums::{
    abs_pow, ball_sums, check_admissible, check_family, lower_bound, osc_terms, pairwise_sum, sum_values,
    violation_sums, Sums, Verdict,
};
