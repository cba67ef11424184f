//! Set union, intersection and difference over bitvector-encoded sets.

use std::str::FromStr;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bits::BitRow;
use crate::controller::BbopKind;
use crate::runtime::{Runtime, RuntimeError};

/// Per-element cost used for the balanced-tree estimate.
pub const RBTREE_NS_PER_STEP: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SetOpKind {
    Union,
    Intersection,
    /// First set minus all others.
    Difference,
}

impl FromStr for SetOpKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "union" => Ok(SetOpKind::Union),
            "intersection" => Ok(SetOpKind::Intersection),
            "difference" => Ok(SetOpKind::Difference),
            _ => Err(format!("unknown set operation `{s}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetInstance {
    /// Elements are drawn from `1..=domain`.
    pub domain: usize,
    /// Sorted, duplicate-free element lists.
    pub sets: Vec<Vec<u32>>,
}

impl SetInstance {
    pub fn new(domain: usize, mut sets: Vec<Vec<u32>>) -> Self {
        for s in &mut sets {
            s.sort_unstable();
            s.dedup();
            assert!(
                s.iter().all(|&x| x >= 1 && x as usize <= domain),
                "elements must lie in 1..={domain}"
            );
        }
        Self { domain, sets }
    }

    /// `m` sets of `e` distinct random elements each.
    pub fn random(m: usize, domain: usize, e: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sets = (0..m)
            .map(|_| {
                let mut s: Vec<u32> = sample(&mut rng, domain, e.min(domain))
                    .into_iter()
                    .map(|i| i as u32 + 1)
                    .collect();
                s.sort_unstable();
                s
            })
            .collect();
        Self { domain, sets }
    }

    pub fn to_bits(&self, set: usize) -> BitRow {
        let mut bits = BitRow::zeros(self.domain);
        for &x in &self.sets[set] {
            bits.set(x as usize - 1, true);
        }
        bits
    }

    /// Balanced-tree cost estimate, `c * sum |s| * log2(max |s|)`.
    pub fn rbtree_ns_estimate(&self) -> f64 {
        let total: usize = self.sets.iter().map(Vec::len).sum();
        let max = self.sets.iter().map(Vec::len).max().unwrap_or(0).max(2);
        RBTREE_NS_PER_STEP * total as f64 * (max as f64).log2()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SetResult {
    pub elements: Vec<u32>,
    pub sim_ns: f64,
    pub baseline_ns: f64,
    pub rbtree_ns_estimate: f64,
}

pub fn set_op(rt: &mut Runtime, kind: SetOpKind, inst: &SetInstance) -> Result<SetResult, RuntimeError> {
    assert!(inst.sets.len() >= 2, "need at least two sets");
    let g = rt.new_group();
    let mut handles = Vec::with_capacity(inst.sets.len());
    for i in 0..inst.sets.len() {
        let h = rt.alloc(inst.domain, g)?;
        rt.write(&h, &inst.to_bits(i))?;
        handles.push(h);
    }
    let out = rt.alloc(inst.domain, g)?;

    rt.reset_costs();
    match kind {
        SetOpKind::Union | SetOpKind::Intersection => {
            let op = if kind == SetOpKind::Union {
                BbopKind::Or
            } else {
                BbopKind::And
            };
            rt.bbop(op, &out, &handles[0], Some(&handles[1]))?;
            for h in &handles[2..] {
                rt.bbop(op, &out, &out, Some(h))?;
            }
        }
        SetOpKind::Difference => {
            if handles.len() == 2 {
                rt.bbop(BbopKind::Not, &out, &handles[1], None)?;
            } else {
                rt.bbop(BbopKind::Or, &out, &handles[1], Some(&handles[2]))?;
                for h in &handles[3..] {
                    rt.bbop(BbopKind::Or, &out, &out, Some(h))?;
                }
                rt.bbop(BbopKind::Not, &out, &out, None)?;
            }
            rt.bbop(BbopKind::And, &out, &handles[0], Some(&out))?;
        }
    }
    let bits = rt.read(&out)?;
    let result = SetResult {
        elements: bits.iter_ones().map(|i| i as u32 + 1).collect(),
        sim_ns: rt.ledger().sim_ns(),
        baseline_ns: rt.ledger().baseline_ns,
        rbtree_ns_estimate: inst.rbtree_ns_estimate(),
    };
    for h in handles.iter().chain([&out]) {
        rt.free(h);
    }
    Ok(result)
}
