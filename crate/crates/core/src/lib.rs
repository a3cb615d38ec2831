//! Computation and verification of pure-strategy Bayes-Nash equilibria in
//! combinatorial auctions with iterated best responses.
pub mod config;
pub mod domains;
pub mod error;
pub mod mechanisms;
pub mod model;
pub mod oracles;
pub mod pipeline;
pub mod sampling;
pub mod search;
pub mod strategies;
pub mod verification;

pub use error::{Error, Result};
pub use config::RunConfig;
pub use domains::{Domain, DomainKind, StrategyGroup};
pub use mechanisms::{LlgRule, LlllggRule, Mechanism, MechanismKey};
pub use model::{Allocation, Bid, BidderSpec, Bundle, Good, Outcome, Role, Valuation};
pub use pipeline::{solve, RunStatus, SolveResult};
pub use strategies::{ControlGrid, InterpolatedStrategy, InterpolationMode, Profile, Strategy};
pub use verification::{EpsilonReport, VerificationSettings};
