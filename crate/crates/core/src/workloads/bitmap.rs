//! Bitmap-index query over user activity: how many users were active in
//! every one of the past `w` weeks, and how many male users were active in
//! each week.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bits::BitRow;
use crate::controller::BbopKind;
use crate::runtime::{BitvectorHandle, Runtime, RuntimeError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitmapWorkload {
    pub users: usize,
    pub weeks: usize,
    /// One bitmap per day, `7 * weeks` in total, oldest first.
    pub daily: Vec<BitRow>,
    /// Set for male users.
    pub gender: BitRow,
}

impl BitmapWorkload {
    /// Random activity: each user is active on a day with probability
    /// `p_active`.
    pub fn generate(users: usize, weeks: usize, p_active: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let daily = (0..7 * weeks)
            .map(|_| BitRow::random_with_density(users, p_active, &mut rng))
            .collect();
        let gender = BitRow::from_fn(users, |_| rng.random_bool(0.5));
        Self {
            users,
            weeks,
            daily,
            gender,
        }
    }

    pub fn day(&self, week: usize, day: usize) -> &BitRow {
        &self.daily[7 * week + day]
    }
}

/// Bulk operations issued by a query.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BitmapTally {
    pub or: u64,
    pub and: u64,
    pub bitcount: u64,
}

impl BitmapTally {
    /// Expected tally for `w` weeks.
    pub fn expected(w: u64) -> Self {
        Self {
            or: 6 * w,
            and: 2 * w - 1,
            bitcount: w + 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BitmapResult {
    pub weekly_active_count: u64,
    pub male_weekly_counts: Vec<u64>,
    pub op_tally: BitmapTally,
    pub sim_ns: f64,
    pub baseline_ns: f64,
}

pub fn bitmap_query(rt: &mut Runtime, wl: &BitmapWorkload) -> Result<BitmapResult, RuntimeError> {
    assert!(wl.weeks >= 1, "need at least one week");
    let u = wl.users;
    let g = rt.new_group();
    let mut handles = Vec::new();
    let new = |rt: &mut Runtime, handles: &mut Vec<BitvectorHandle>| -> Result<BitvectorHandle, RuntimeError> {
        let h = rt.alloc(u, g)?;
        handles.push(h.clone());
        Ok(h)
    };
    let mut days = Vec::with_capacity(wl.daily.len());
    for bits in &wl.daily {
        let h = new(rt, &mut handles)?;
        rt.write(&h, bits)?;
        days.push(h);
    }
    let gender = new(rt, &mut handles)?;
    rt.write(&gender, &wl.gender)?;
    let weekly: Vec<_> = (0..wl.weeks)
        .map(|_| new(rt, &mut handles))
        .collect::<Result<_, _>>()?;
    let acc = new(rt, &mut handles)?;
    let tmp = new(rt, &mut handles)?;

    rt.reset_costs();
    for (w, week) in weekly.iter().enumerate() {
        rt.bbop(BbopKind::Or, week, &days[7 * w], Some(&days[7 * w + 1]))?;
        for d in 2..7 {
            rt.bbop(BbopKind::Or, week, week, Some(&days[7 * w + d]))?;
        }
    }
    let all_weeks = if wl.weeks == 1 {
        &weekly[0]
    } else {
        rt.bbop(BbopKind::And, &acc, &weekly[0], Some(&weekly[1]))?;
        for week in &weekly[2..] {
            rt.bbop(BbopKind::And, &acc, &acc, Some(week))?;
        }
        &acc
    };
    let weekly_active_count = rt.host_bitcount(all_weeks)?;
    let mut male_weekly_counts = Vec::with_capacity(wl.weeks);
    for week in &weekly {
        rt.bbop(BbopKind::And, &tmp, &gender, Some(week))?;
        male_weekly_counts.push(rt.host_bitcount(&tmp)?);
    }

    let tally = rt.tally();
    let result = BitmapResult {
        weekly_active_count,
        male_weekly_counts,
        op_tally: BitmapTally {
            or: tally.get(BbopKind::Or),
            and: tally.get(BbopKind::And),
            bitcount: tally.bitcounts,
        },
        sim_ns: rt.ledger().sim_ns(),
        baseline_ns: rt.ledger().baseline_ns,
    };
    for h in &handles {
        rt.free(h);
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SimConfig;
    use crate::dram::ChipConfig;

    fn rt() -> Runtime {
        Runtime::new(SimConfig {
            chip: ChipConfig::default().with_row_bits(4096),
            ..SimConfig::default()
        })
        .unwrap()
    }

    #[test]
    fn tally_closed_form() {
        let mut r = rt();
        for w in [1, 2, 4] {
            let wl = BitmapWorkload::generate(5000, w, 0.3, w as u64);
            let res = bitmap_query(&mut r, &wl).unwrap();
            assert_eq!(res.op_tally, BitmapTally::expected(w as u64));
        }
    }

    #[test]
    fn everyone_active() {
        let mut r = rt();
        let mut wl = BitmapWorkload::generate(1000, 2, 0.5, 1);
        for d in &mut wl.daily {
            *d = BitRow::ones(1000);
        }
        let res = bitmap_query(&mut r, &wl).unwrap();
        assert_eq!(res.weekly_active_count, 1000);
        assert_eq!(res.male_weekly_counts, vec![wl.gender.count_ones(); 2]);
    }
}
