//! Iterated best-response search for pure-strategy equilibria.

pub mod adaptive;
pub mod brent;
pub mod dampening;
pub mod driver;
pub mod pattern;
pub mod point;

pub use adaptive::{adaptive_best_response, curvature_priority, AdaptivePoint};
pub use brent::brent_maximize;
pub use dampening::{dampening_weight, update_bid, update_strategy, DampeningConfig};
pub use driver::{run_search, Phase, SearchOutcome, TraceRow};
pub use pattern::{pattern_search, Optimum, PatternSearchConfig};
pub use point::{BestResponder, PointResult};
