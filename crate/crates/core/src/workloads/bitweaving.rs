//! Range scans over a vertically bit-sliced column.
//!
//! `c1 <= val <= c2` is evaluated one bit slice at a time, most significant
//! first, with running "equal so far" and "less/greater so far" masks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::bits::BitRow;
use crate::controller::BbopKind;
use crate::runtime::{AffinityGroup, BitvectorHandle, Runtime, RuntimeError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScanError {
    #[error("predicate constants {c1}..={c2} out of range for {bits}-bit values")]
    ConstantOutOfRange { c1: u64, c2: u64, bits: u32 },
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitWeavingTable {
    pub bits: u32,
    pub values: Vec<u64>,
    /// Slice j holds bit `bits - 1 - j` of every value.
    pub slices: Vec<BitRow>,
}

impl BitWeavingTable {
    pub fn from_values(values: Vec<u64>, bits: u32) -> Self {
        assert!((1..=32).contains(&bits), "1..=32 bits per value");
        let slices = (0..bits)
            .map(|j| {
                let shift = bits - 1 - j;
                BitRow::from_fn(values.len(), |i| values[i] >> shift & 1 == 1)
            })
            .collect();
        Self {
            bits,
            values,
            slices,
        }
    }

    pub fn random(rows: usize, bits: u32, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let max = 1u64 << bits;
        let values = (0..rows).map(|_| rng.random_range(0..max)).collect();
        Self::from_values(values, bits)
    }

    pub fn rows(&self) -> usize {
        self.values.len()
    }

    /// Rebuilds the column from its slices.
    pub fn reassemble(&self) -> Vec<u64> {
        (0..self.rows())
            .map(|i| {
                self.slices
                    .iter()
                    .fold(0u64, |acc, s| acc << 1 | u64::from(s.get(i)))
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanResult {
    pub count: u64,
    pub bbops: u64,
    pub sim_ns: f64,
    pub baseline_ns: f64,
}

/// Slices loaded into the runtime, all in one affinity group.
pub struct LoadedTable {
    group: AffinityGroup,
    rows: usize,
    bits: u32,
    slices: Vec<BitvectorHandle>,
    spare: Vec<BitvectorHandle>,
}

impl LoadedTable {
    pub fn load(rt: &mut Runtime, table: &BitWeavingTable) -> Result<Self, RuntimeError> {
        let group = rt.new_group();
        let mut slices = Vec::with_capacity(table.slices.len());
        for s in &table.slices {
            let h = rt.alloc(table.rows(), group)?;
            rt.write(&h, s)?;
            slices.push(h);
        }
        Ok(Self {
            group,
            rows: table.rows(),
            bits: table.bits,
            slices,
            spare: Vec::new(),
        })
    }

    pub fn free(self, rt: &mut Runtime) {
        for h in self.slices.iter().chain(&self.spare) {
            rt.free(h);
        }
    }

    fn scratch(&mut self, rt: &mut Runtime) -> Result<BitvectorHandle, RuntimeError> {
        match self.spare.pop() {
            Some(h) => Ok(h),
            None => rt.alloc(self.rows, self.group),
        }
    }

    fn release(&mut self, m: Mask) {
        if let Mask::Owned(h) = m {
            self.spare.push(h);
        }
    }
}

/// A row mask, folded symbolically while it is a constant or a slice.
#[derive(Clone, Debug)]
enum Mask {
    AllTrue,
    AllFalse,
    Slice(usize),
    Owned(BitvectorHandle),
}

struct Eval<'a> {
    rt: &'a mut Runtime,
    t: &'a mut LoadedTable,
}

impl Eval<'_> {
    fn handle<'m>(&'m self, m: &'m Mask) -> &'m BitvectorHandle {
        match m {
            Mask::Slice(j) => &self.t.slices[*j],
            Mask::Owned(h) => h,
            _ => unreachable!("constant masks have no storage"),
        }
    }

    /// Destination for an op consuming `a` (and `b`): reuse an owned
    /// operand, otherwise take a scratch vector.
    fn binary(&mut self, kind: BbopKind, a: Mask, b: Mask) -> Result<Mask, RuntimeError> {
        let dst = match (&a, &b) {
            (Mask::Owned(h), _) | (_, Mask::Owned(h)) => h.clone(),
            _ => self.t.scratch(self.rt)?,
        };
        let (ha, hb) = (self.handle(&a).clone(), self.handle(&b).clone());
        self.rt.bbop(kind, &dst, &ha, Some(&hb))?;
        for m in [a, b] {
            if let Mask::Owned(h) = &m {
                if h.id != dst.id {
                    self.t.release(m);
                }
            }
        }
        Ok(Mask::Owned(dst))
    }

    fn and(&mut self, a: Mask, b: Mask) -> Result<Mask, RuntimeError> {
        Ok(match (a, b) {
            (Mask::AllFalse, o) | (o, Mask::AllFalse) => {
                self.t.release(o);
                Mask::AllFalse
            }
            (Mask::AllTrue, o) | (o, Mask::AllTrue) => o,
            (a, b) => self.binary(BbopKind::And, a, b)?,
        })
    }

    fn or(&mut self, a: Mask, b: Mask) -> Result<Mask, RuntimeError> {
        Ok(match (a, b) {
            (Mask::AllTrue, o) | (o, Mask::AllTrue) => {
                self.t.release(o);
                Mask::AllTrue
            }
            (Mask::AllFalse, o) | (o, Mask::AllFalse) => o,
            (a, b) => self.binary(BbopKind::Or, a, b)?,
        })
    }

    fn not(&mut self, a: Mask) -> Result<Mask, RuntimeError> {
        Ok(match a {
            Mask::AllTrue => Mask::AllFalse,
            Mask::AllFalse => Mask::AllTrue,
            m => {
                let dst = match &m {
                    Mask::Owned(h) => h.clone(),
                    _ => self.t.scratch(self.rt)?,
                };
                let src = self.handle(&m).clone();
                self.rt.bbop(BbopKind::Not, &dst, &src, None)?;
                Mask::Owned(dst)
            }
        })
    }

    /// `a AND b` leaving `a` intact.
    fn and_keep(&mut self, a: &Mask, b: Mask) -> Result<Mask, RuntimeError> {
        Ok(match (a, b) {
            (Mask::AllFalse, o) | (_, o @ Mask::AllFalse) => {
                self.t.release(o);
                Mask::AllFalse
            }
            (Mask::AllTrue, o) => o,
            (a, Mask::AllTrue) => match a {
                Mask::Slice(j) => Mask::Slice(*j),
                _ => {
                    let dst = self.t.scratch(self.rt)?;
                    let src = self.handle(a).clone();
                    self.rt.bbop(BbopKind::Or, &dst, &src, Some(&src))?;
                    Mask::Owned(dst)
                }
            },
            (a, b) => {
                let dst = match &b {
                    Mask::Owned(h) => h.clone(),
                    _ => self.t.scratch(self.rt)?,
                };
                let (ha, hb) = (self.handle(a).clone(), self.handle(&b).clone());
                self.rt.bbop(BbopKind::And, &dst, &ha, Some(&hb))?;
                Mask::Owned(dst)
            }
        })
    }

    /// `val <= c` when `upper`, else `val >= c`.
    fn compare(&mut self, c: u64, upper: bool) -> Result<Mask, RuntimeError> {
        let bits = self.t.bits;
        let mut strict = Mask::AllFalse;
        let mut eq = Mask::AllTrue;
        for j in 0..bits as usize {
            let cj = c >> (bits as usize - 1 - j) & 1 == 1;
            let s = Mask::Slice(j);
            // a strict decision happens where the slice bit is below (for
            // <=) or above (for >=) the constant bit
            if cj == upper {
                let differs = if upper { self.not(s.clone())? } else { s.clone() };
                let hit = self.and_keep(&eq, differs)?;
                strict = self.or(strict, hit)?;
            }
            let matches = if cj { s } else { self.not(s)? };
            eq = self.and(eq, matches)?;
        }
        self.or(strict, eq)
    }
}

/// Counts rows with `c1 <= val <= c2`.
pub fn bitweaving_scan(rt: &mut Runtime, table: &mut LoadedTable, c1: u64, c2: u64) -> Result<ScanResult, ScanError> {
    let bits = table.bits;
    if c1 > c2 || c2 >= 1u64 << bits {
        return Err(ScanError::ConstantOutOfRange { c1, c2, bits });
    }
    rt.reset_costs();
    let mut ev = Eval { rt, t: table };
    let le = ev.compare(c2, true)?;
    let ge = ev.compare(c1, false)?;
    let result = ev.and(le, ge)?;
    let count = match &result {
        Mask::AllTrue => ev.t.rows as u64,
        Mask::AllFalse => 0,
        m => {
            let h = ev.handle(m).clone();
            ev.rt.host_bitcount(&h)?
        }
    };
    ev.t.release(result);
    let bbops = ev.rt.tally().ops.values().sum();
    Ok(ScanResult {
        count,
        bbops,
        sim_ns: rt.ledger().sim_ns(),
        baseline_ns: rt.ledger().baseline_ns,
    })
}

/// Loads `table`, scans once and releases it.
pub fn scan_once(rt: &mut Runtime, table: &BitWeavingTable, c1: u64, c2: u64) -> Result<ScanResult, ScanError> {
    let mut loaded = LoadedTable::load(rt, table)?;
    let out = bitweaving_scan(rt, &mut loaded, c1, c2);
    loaded.free(rt);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SimConfig;
    use crate::dram::ChipConfig;

    fn rt() -> Runtime {
        Runtime::new(SimConfig {
            chip: ChipConfig::default().with_row_bits(1024),
            ..SimConfig::default()
        })
        .unwrap()
    }

    fn oracle(t: &BitWeavingTable, c1: u64, c2: u64) -> u64 {
        t.values.iter().filter(|&&v| c1 <= v && v <= c2).count() as u64
    }

    #[test]
    fn reassembles() {
        let t = BitWeavingTable::random(300, 7, 1);
        assert_eq!(t.reassemble(), t.values);
    }

    #[test]
    fn degenerate_single_bit() {
        let mut r = rt();
        let t = BitWeavingTable::random(500, 1, 2);
        let res = scan_once(&mut r, &t, 1, 1).unwrap();
        assert_eq!(res.count, t.slices[0].count_ones());
    }

    #[test]
    fn full_range_is_all_rows() {
        let mut r = rt();
        let t = BitWeavingTable::random(700, 6, 3);
        assert_eq!(scan_once(&mut r, &t, 0, 63).unwrap().count, 700);
    }

    #[test]
    fn random_predicates_match_oracle() {
        let mut r = rt();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for bits in [1, 3, 5, 8] {
            let t = BitWeavingTable::random(2000, bits, u64::from(bits));
            let mut loaded = LoadedTable::load(&mut r, &t).unwrap();
            for _ in 0..30 {
                let a = rng.random_range(0..1u64 << bits);
                let b = rng.random_range(0..1u64 << bits);
                let (c1, c2) = (a.min(b), a.max(b));
                let res = bitweaving_scan(&mut r, &mut loaded, c1, c2).unwrap();
                assert_eq!(res.count, oracle(&t, c1, c2), "bits={bits} {c1}..={c2}");
            }
            loaded.free(&mut r);
        }
    }

    #[test]
    fn bad_constants() {
        let mut r = rt();
        let t = BitWeavingTable::random(10, 4, 5);
        assert!(matches!(scan_once(&mut r, &t, 3, 16), Err(ScanError::ConstantOutOfRange { .. })));
        assert!(matches!(scan_once(&mut r, &t, 5, 4), Err(ScanError::ConstantOutOfRange { .. })));
    }
}
