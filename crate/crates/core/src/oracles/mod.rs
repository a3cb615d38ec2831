//! Reference solutions: closed-form equilibria, a synthetic game with exact
//! utilities, and brute-force versions of the mechanism computations.

pub mod analytic;
pub mod brute;
pub mod formula;
pub mod synthetic;

pub use analytic::{l_infinity_distance, nearest_bid_corrected, AnalyticStrategy};
pub use brute::{brute_core_projection, brute_min_core_revenue, brute_winner_determination, grid_llg_core_payments};
pub use formula::{parse_formula_file, read_formula_file, Expr, Piecewise};
pub use synthetic::{synthetic_best_response_utility, synthetic_utility, SyntheticFirstPrice, SyntheticIntegration};
