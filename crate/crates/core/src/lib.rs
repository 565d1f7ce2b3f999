//! Threshold phenomena for reaction-diffusion equations on the line.
//!
//! The model is T_t = T_xx + f(T) with temperature-like solutions
//! 0 <= T <= 1 started from indicator data alpha on [-L, L]. Depending on
//! the reaction term and the data, the solution either dies back to zero
//! or ignites and spreads; this crate provides the reaction catalogue, a
//! monotone solver, the sharp-threshold search over L, the limiting
//! stationary objects (plateau, bump, traveling front), and the
//! comparison machinery used to certify what the runs show.

pub mod error;
pub mod front;
pub mod grid;
pub mod nonlinearity;
pub mod quad;
pub mod solver;
pub mod stationary;
pub mod threshold;

pub use error::{Error, Result};
pub use front::{front_speed, FrontSolution};
pub use grid::{indicator_ic, Field, Grid};
pub use nonlinearity::{Kind, NonlinearitySpec, SignPattern, SignReport};
pub use solver::{
    rescaled_problem, simulate, simulate_with_stop, single_dip_violation, step, Boundary,
    DiffusionSolver, ProbeSet, ReferenceProbe, Rescaling, SimParams, Simulator, StopReason,
    StopRule, Trajectory,
};
pub use stationary::{solve_bump, BellReport, StationaryProfile};
pub use threshold::{
    check_domination, classify_outcome, continuity_bound_check, find_threshold,
    find_threshold_with, ratio_witness, run_indicator, ClassifyCriteria, ContinuityReport,
    Outcome, RatioWitness, ThresholdPoint, ThresholdResult,
};
