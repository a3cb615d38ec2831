use std::sync::OnceLock;

use super::core_payments::{core_constraints, vcg_nearest_payments};
use super::{LlllggRule, Mechanism};
use crate::domains::Domain;
use crate::error::{Error, Result};
use crate::model::{Allocation, Bid, Bundle, Outcome};

const BIDDERS: usize = 6;

/// One choice per bidder: 0 = nothing, 1 = first atom, 2 = second atom.
/// `code` reads the choices as a base-3 number with bidder 0 most significant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Assignment {
    pub choices: [u8; BIDDERS],
    pub code: u16,
}

impl Assignment {
    /// Bitmask of bidders receiving a bundle.
    pub fn participants(&self) -> u64 {
        self.choices.iter().enumerate().filter(|(_, &c)| c != 0).fold(0, |m, (i, _)| m | 1 << i)
    }

    pub fn welfare(&self, bids: &[[f64; 2]; BIDDERS]) -> f64 {
        let mut w = 0.0;
        for (i, &c) in self.choices.iter().enumerate() {
            if c != 0 {
                w += bids[i][c as usize - 1];
            }
        }
        w
    }
}

/// The static combinatorics of the eight-good ring: atoms and all feasible
/// assignments in increasing code order.
#[derive(Debug)]
pub struct LlllggStructure {
    pub atoms: [[Bundle; 2]; BIDDERS],
    pub feasible: Vec<Assignment>,
}

impl LlllggStructure {
    pub fn get() -> &'static LlllggStructure {
        static CELL: OnceLock<LlllggStructure> = OnceLock::new();
        CELL.get_or_init(|| {
            let domain = Domain::llllgg();
            let mut atoms = [[Bundle::EMPTY; 2]; BIDDERS];
            for (i, b) in domain.bidders.iter().enumerate() {
                atoms[i] = [b.action_atoms[0], b.action_atoms[1]];
            }
            let mut feasible = Vec::new();
            for code in 0..3u16.pow(BIDDERS as u32) {
                let mut choices = [0u8; BIDDERS];
                let mut rest = code;
                for i in (0..BIDDERS).rev() {
                    choices[i] = (rest % 3) as u8;
                    rest /= 3;
                }
                let mut taken = Bundle::EMPTY;
                let ok = choices.iter().enumerate().all(|(i, &c)| {
                    if c == 0 {
                        return true;
                    }
                    let k = atoms[i][c as usize - 1];
                    let free = !k.intersects(taken);
                    taken = taken.union(k);
                    free
                });
                if ok {
                    feasible.push(Assignment { choices, code });
                }
            }
            LlllggStructure { atoms, feasible }
        })
    }

    pub fn allocation(&self, a: &Assignment) -> Allocation {
        Allocation {
            assignments: a
                .choices
                .iter()
                .enumerate()
                .map(|(i, &c)| if c == 0 { Bundle::EMPTY } else { self.atoms[i][c as usize - 1] })
                .collect(),
        }
    }

    /// Welfare-maximizing assignment; the first in code order among ties.
    pub fn best(&self, bids: &[[f64; 2]; BIDDERS]) -> (&Assignment, f64) {
        let mut best = &self.feasible[0];
        let mut best_w = 0.0;
        for a in &self.feasible[1..] {
            let w = a.welfare(bids);
            if w > best_w {
                best = a;
                best_w = w;
            }
        }
        (best, best_w)
    }
}

fn bid_array(bids: &[Bid]) -> Result<[[f64; 2]; BIDDERS]> {
    if bids.len() != BIDDERS || bids.iter().any(|b| b.0.len() != 2) {
        return Err(Error::InvalidArgument("LLLLGG expects six two-atom bids".into()));
    }
    let mut out = [[0.0; 2]; BIDDERS];
    for (o, b) in out.iter_mut().zip(bids) {
        if b.0.iter().any(|&x| !(x >= 0.0)) {
            return Err(Error::InvalidArgument(format!("bids must be nonnegative, got {:?}", b.0)));
        }
        *o = [b.0[0], b.0[1]];
    }
    Ok(out)
}

pub fn llllgg_winner_determination(bids: &[Bid]) -> Result<Allocation> {
    let s = LlllggStructure::get();
    let b = bid_array(bids)?;
    Ok(s.allocation(s.best(&b).0))
}

/// Optimal welfare of every coalition of the six bidders under reported bids.
#[derive(Debug, Clone)]
pub struct CoalitionValueCache {
    welfare: [f64; 1 << BIDDERS],
}

impl CoalitionValueCache {
    pub fn new(bids: &[[f64; 2]; BIDDERS]) -> Self {
        let mut welfare = [0.0f64; 1 << BIDDERS];
        for a in &LlllggStructure::get().feasible {
            let p = a.participants() as usize;
            welfare[p] = welfare[p].max(a.welfare(bids));
        }
        // Max over subsets, one bidder dimension at a time.
        for bit in 0..BIDDERS {
            for c in 0..1usize << BIDDERS {
                if c >> bit & 1 == 1 {
                    welfare[c] = welfare[c].max(welfare[c ^ 1 << bit]);
                }
            }
        }
        CoalitionValueCache { welfare }
    }

    pub fn get(&self, coalition: u64) -> f64 {
        self.welfare[coalition as usize]
    }
}

fn winning_bids(bids: &[[f64; 2]; BIDDERS], a: &Assignment) -> (Vec<usize>, Vec<f64>) {
    let winners: Vec<usize> = (0..BIDDERS).filter(|&i| a.choices[i] != 0).collect();
    let amounts = winners.iter().map(|&i| bids[i][a.choices[i] as usize - 1]).collect();
    (winners, amounts)
}

pub fn llllgg_payments(rule: LlllggRule, bids: &[Bid], alloc: &Allocation) -> Result<Vec<f64>> {
    let s = LlllggStructure::get();
    let b = bid_array(bids)?;
    let (best, _) = s.best(&b);
    if s.allocation(best) != *alloc {
        return Err(Error::InconsistentAllocation(format!("{alloc:?}")));
    }
    let (winners, amounts) = winning_bids(&b, best);
    let mut payments = vec![0.0; BIDDERS];
    match rule {
        LlllggRule::FirstPrice => {
            for (&w, &x) in winners.iter().zip(&amounts) {
                payments[w] = x;
            }
        }
        LlllggRule::VcgNearest => {
            let cache = CoalitionValueCache::new(&b);
            let cons = core_constraints(BIDDERS, &winners, &amounts, |c| cache.get(c));
            let pt = vcg_nearest_payments(&amounts, &cons)?;
            for (&w, &p) in winners.iter().zip(&pt.payments) {
                payments[w] = p;
            }
        }
    }
    Ok(payments)
}

#[derive(Debug, Clone, Copy)]
pub struct LlllggMechanism {
    rule: LlllggRule,
}

impl LlllggMechanism {
    pub fn new(rule: LlllggRule) -> Self {
        LlllggMechanism { rule }
    }
}

impl Mechanism for LlllggMechanism {
    fn bidder_count(&self) -> usize {
        BIDDERS
    }

    fn run(&self, bids: &[Bid]) -> Result<Outcome> {
        let allocation = llllgg_winner_determination(bids)?;
        let payments = llllgg_payments(self.rule, bids, &allocation)?;
        Ok(Outcome { allocation, payments })
    }
}
