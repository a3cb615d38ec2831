use super::{LlgRule, Mechanism};
use crate::error::{Error, Result};
use crate::model::{Allocation, Bid, Bundle, Good, Outcome};

const A: Bundle = Bundle::from_bits(0b01);
const B: Bundle = Bundle::from_bits(0b10);
const AB: Bundle = Bundle::from_bits(0b11);

/// Locals win when their bids sum to at least the package bid.
pub fn llg_allocate(b1: f64, b2: f64, b3: f64) -> Allocation {
    debug_assert_eq!(Bundle::from_goods([Good(0), Good(1)]), AB);
    if b1 + b2 >= b3 {
        Allocation { assignments: vec![A, B, Bundle::EMPTY] }
    } else {
        Allocation { assignments: vec![Bundle::EMPTY, Bundle::EMPTY, AB] }
    }
}

/// Payment of a winning local bidding `bi` whose partner bids `bj`, against
/// package bid `b3` (requires `bi + bj >= b3`).
#[inline]
pub fn llg_local_payment(rule: LlgRule, bi: f64, bj: f64, b3: f64) -> f64 {
    // Core payments lie on the face p_i + p_j = b3 with p_i in [lo, hi].
    let lo = (b3 - bj).max(0.0);
    let hi = bi.min(b3);
    match rule {
        LlgRule::FirstPrice => bi,
        LlgRule::Vcg => lo,
        LlgRule::VcgNearest => {
            let vj = (b3 - bi).max(0.0);
            (lo + 0.5 * (b3 - lo - vj)).clamp(lo, hi)
        }
        LlgRule::NearestBid => (0.5 * (b3 + bi - bj)).clamp(lo, hi),
        LlgRule::Proxy => (0.5 * b3).clamp(lo, hi),
        LlgRule::Proportional => {
            let s = bi + bj;
            if s > 0.0 {
                (b3 * bi / s).clamp(lo, hi)
            } else {
                0.0
            }
        }
    }
}

/// Payment of the package bidder when it wins.
#[inline]
pub fn llg_global_payment(rule: LlgRule, b1: f64, b2: f64, b3: f64) -> f64 {
    match rule {
        LlgRule::FirstPrice => b3,
        _ => b1 + b2,
    }
}

pub fn llg_payments(rule: LlgRule, b: [f64; 3], alloc: &Allocation) -> Result<[f64; 3]> {
    if b.iter().any(|&x| !(x >= 0.0)) {
        return Err(Error::InvalidArgument(format!("bids must be nonnegative, got {b:?}")));
    }
    let expected = llg_allocate(b[0], b[1], b[2]);
    if *alloc != expected {
        return Err(Error::InconsistentAllocation(format!("{alloc:?} for bids {b:?}")));
    }
    Ok(if alloc.assignments[2].is_empty() {
        [llg_local_payment(rule, b[0], b[1], b[2]), llg_local_payment(rule, b[1], b[0], b[2]), 0.0]
    } else {
        [0.0, 0.0, llg_global_payment(rule, b[0], b[1], b[2])]
    })
}

#[derive(Debug, Clone, Copy)]
pub struct LlgMechanism {
    rule: LlgRule,
}

impl LlgMechanism {
    pub fn new(rule: LlgRule) -> Self {
        LlgMechanism { rule }
    }
}

impl Mechanism for LlgMechanism {
    fn bidder_count(&self) -> usize {
        3
    }

    fn run(&self, bids: &[Bid]) -> Result<Outcome> {
        if bids.len() != 3 || bids.iter().any(|b| b.0.len() != 1) {
            return Err(Error::InvalidArgument("LLG expects three single-atom bids".into()));
        }
        let b = [bids[0].0[0], bids[1].0[0], bids[2].0[0]];
        let allocation = llg_allocate(b[0], b[1], b[2]);
        let payments = llg_payments(self.rule, b, &allocation)?.to_vec();
        Ok(Outcome { allocation, payments })
    }
}
