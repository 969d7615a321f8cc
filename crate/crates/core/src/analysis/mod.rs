pub mod alpha_gamma;
pub mod classify;
pub mod conditions;
pub mod integrals;
pub mod lyapunov;
pub mod moments;
pub mod report;

pub use alpha_gamma::solve_alpha_gamma;
pub use classify::{classify_running_example, non_redundancy_presets, Applicable, ClassifyOptions, Proposition};
pub use conditions::{check_condition, Assumption, ConditionQuery, GridSpec, Window};
pub use integrals::{compute_ca, compute_ca_alt, compute_ga, compute_ia, compute_ia_separated, power_law_j, GaEvaluator};
pub use lyapunov::{lyapunov_search, LyapunovConstants};
pub use moments::{AdaptedMomentBounds, GrowthRegime, MomentFormulas};
pub use report::*;
