//! Valuation samplers, point streams and expected-utility estimation.

mod estimator;
mod llg;
mod llllgg;
mod samplers;
pub mod sobol;
pub mod stream;

use std::sync::Arc;

pub use estimator::{
    common_random_compare, estimate_expected_utility, AuctionGame, Integrator, MechanismGame, SampleTable,
    UtilityDecomposition, ValueSampler,
};
pub use llg::LlgGame;
pub use llllgg::LlllggFirstPriceGame;
pub use samplers::{LlgImportanceSampler, LlgSampler, LlllggSampler};
pub use sobol::{SobolSequence, MAX_DIMENSION};
pub use stream::{derive_key, splitmix64, RngKind, SampleStream};

use crate::domains::{Domain, DomainKind};
use crate::error::{Error, Result};
use crate::mechanisms::{LlllggMechanism, LlllggRule, MechanismKey};

/// The setting for a domain/mechanism pair with the requested integrator.
pub fn build_game(
    domain: DomainKind,
    mechanism: MechanismKey,
    integrator: Integrator,
    quadrature_grid: usize,
) -> Result<Arc<dyn AuctionGame>> {
    match (domain, mechanism) {
        (DomainKind::Llg { alpha, gamma }, MechanismKey::Llg(rule)) => {
            Ok(Arc::new(LlgGame::new(alpha, gamma, rule, integrator, quadrature_grid)?))
        }
        (DomainKind::Llllgg, MechanismKey::Llllgg(rule)) => {
            if integrator != Integrator::Mc {
                return Err(Error::Unsupported(format!("integrator {} on LLLLGG", integrator.name())));
            }
            Ok(match rule {
                LlllggRule::FirstPrice => Arc::new(LlllggFirstPriceGame::new()),
                LlllggRule::VcgNearest => {
                    let domain = Domain::llllgg();
                    let sampler = LlllggSampler { value_hi: domain.value_hi.clone() };
                    Arc::new(MechanismGame::new(domain, Arc::new(LlllggMechanism::new(rule)), Box::new(sampler)))
                }
            })
        }
        (d, m) => Err(Error::Config(format!("mechanism {m} does not belong to domain {d:?}"))),
    }
}
