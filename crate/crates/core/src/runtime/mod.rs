//! Host-side integration: the `bbop` instruction, a subarray-aware
//! bitvector allocator, coherence accounting and duplication ECC.
//!
//! Physical memory is the chip's data rows laid end to end in
//! [`interleave`] order, `row_bytes` per row.

mod alloc;
mod coherence;
pub mod tmr;

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

pub use alloc::{AffinityGroup, Allocator, BitvectorHandle};
pub use coherence::{CoherenceCost, DirtyMap, LINE_BYTES};

use crate::bits::BitRow;
use crate::config::SimConfig;
use crate::controller::{
    interleave, linear_index, row_loc, AmbitController, BbopKind, ControllerError, RowAddress,
};
use crate::dram::{Chip, DramError};
use crate::timing::{energy_of, primitive_latency};
use crate::trace::{Command, CommandTrace};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RuntimeError {
    #[error("no free data row in bank {bank} subarray {subarray}")]
    CapacityExhausted { bank: usize, subarray: usize },
    #[error("address range {addr:#x}+{size} is outside simulated memory")]
    OutOfRange { addr: u64, size: u64 },
    #[error("invalid instruction: {0}")]
    InvalidInstruction(String),
    #[error("bitvector lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error(transparent)]
    Controller(#[from] ControllerError),
    #[error(transparent)]
    Dram(#[from] DramError),
    #[error("{0}")]
    Config(String),
}

/// `bbop dst, src1, [src2], size` over byte addresses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BbopInstruction {
    pub op: BbopKind,
    pub dst: u64,
    pub src1: u64,
    pub src2: Option<u64>,
    pub size: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FallbackReason {
    /// An address or the size is not a multiple of the row size.
    Misaligned,
    /// The destination partially overlaps a source.
    Overlap,
}

#[derive(Clone, Debug, PartialEq)]
pub enum BbopOutcome {
    InMemory {
        trace: CommandTrace,
        coherence: CoherenceCost,
        /// Source rows copied into the destination subarray first.
        staged_rows: usize,
        /// Rows computed by the host because no staging row was free.
        host_rows: usize,
    },
    HostFallback {
        reason: FallbackReason,
        host_ns: f64,
    },
}

impl BbopOutcome {
    pub fn trace(&self) -> Option<&CommandTrace> {
        match self {
            BbopOutcome::InMemory { trace, .. } => Some(trace),
            BbopOutcome::HostFallback { .. } => None,
        }
    }

    pub fn is_fallback(&self) -> bool {
        matches!(self, BbopOutcome::HostFallback { .. })
    }
}

/// Running cost totals for everything issued through a [`Runtime`].
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CostLedger {
    /// Busy time per bank; banks work in parallel.
    pub bank_busy_ns: Vec<f64>,
    pub host_ns: f64,
    pub coherence_ns: f64,
    pub energy_nj: f64,
    /// Same work on the host over the memory channel.
    pub baseline_ns: f64,
    pub baseline_energy_nj: f64,
    pub staged_rows: u64,
    pub host_rows: u64,
    pub transfers: u64,
}

impl CostLedger {
    /// Simulated wall time.
    pub fn sim_ns(&self) -> f64 {
        let dram = self.bank_busy_ns.iter().copied().fold(0.0, f64::max);
        dram + self.host_ns + self.coherence_ns
    }

    pub fn speedup(&self) -> f64 {
        self.baseline_ns / self.sim_ns()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct OpTally {
    pub ops: BTreeMap<BbopKind, u64>,
    pub bitcounts: u64,
}

impl OpTally {
    pub fn get(&self, kind: BbopKind) -> u64 {
        self.ops.get(&kind).copied().unwrap_or(0)
    }
}

/// Population count.
pub fn host_bitcount(bits: &BitRow) -> u64 {
    bits.count_ones()
}

pub struct Runtime {
    ctl: AmbitController,
    alloc: Allocator,
    dirty: DirtyMap,
    cfg: SimConfig,
    ledger: CostLedger,
    tally: OpTally,
}

impl Runtime {
    pub fn new(cfg: SimConfig) -> Result<Self, RuntimeError> {
        cfg.validate().map_err(RuntimeError::Config)?;
        let chip = Chip::new(cfg.chip.clone())?;
        Ok(Self {
            alloc: Allocator::new(&cfg.chip),
            ctl: AmbitController::new(chip),
            dirty: DirtyMap::new(),
            ledger: CostLedger {
                bank_busy_ns: vec![0.0; cfg.chip.banks],
                ..CostLedger::default()
            },
            tally: OpTally::default(),
            cfg,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn controller(&self) -> &AmbitController {
        &self.ctl
    }

    pub fn row_bits(&self) -> usize {
        self.cfg.chip.row_bits
    }

    pub fn row_bytes(&self) -> usize {
        self.cfg.chip.row_bytes()
    }

    /// Bytes of simulated physical memory.
    pub fn memory_bytes(&self) -> u64 {
        (self.cfg.chip.total_subarrays() * crate::dram::DATA_ROWS * self.row_bytes()) as u64
    }

    pub fn ledger(&self) -> &CostLedger {
        &self.ledger
    }

    pub fn tally(&self) -> &OpTally {
        &self.tally
    }

    pub fn reset_costs(&mut self) {
        self.ledger = CostLedger {
            bank_busy_ns: vec![0.0; self.cfg.chip.banks],
            ..CostLedger::default()
        };
        self.tally = OpTally::default();
    }

    pub fn dirty_map_mut(&mut self) -> &mut DirtyMap {
        &mut self.dirty
    }

    pub fn new_group(&mut self) -> AffinityGroup {
        self.alloc.new_group()
    }

    /// Allocates zeroed rows for `nbits` bits.
    pub fn alloc(&mut self, nbits: usize, group: AffinityGroup) -> Result<BitvectorHandle, RuntimeError> {
        let h = self.alloc.alloc(nbits, group)?;
        let zeros = BitRow::zeros(self.row_bits());
        for s in &h.segments {
            self.ctl.write(*s, &zeros)?;
        }
        Ok(h)
    }

    pub fn free(&mut self, handle: &BitvectorHandle) {
        self.alloc.free(handle);
    }

    pub fn allocator(&self) -> &Allocator {
        &self.alloc
    }

    /// Byte address of a data row.
    pub fn address_of(&self, row: RowAddress) -> u64 {
        let idx = linear_index(&self.cfg.chip, row).expect("data row address");
        (idx * self.row_bytes()) as u64
    }

    fn row_at(&self, index: usize) -> Result<RowAddress, RuntimeError> {
        Ok(interleave(&self.cfg.chip, index)?)
    }

    pub fn write(&mut self, handle: &BitvectorHandle, bits: &BitRow) -> Result<(), RuntimeError> {
        if bits.len() != handle.len_bits {
            return Err(RuntimeError::LengthMismatch(handle.len_bits, bits.len()));
        }
        let w = self.row_bits();
        for (i, s) in handle.segments.iter().enumerate() {
            let start = i * w;
            let n = w.min(bits.len() - start);
            self.ctl.write(*s, &bits.slice(start, n).resized(w))?;
        }
        Ok(())
    }

    pub fn read(&self, handle: &BitvectorHandle) -> Result<BitRow, RuntimeError> {
        let w = self.row_bits();
        let mut out = BitRow::zeros(handle.len_bits);
        for (i, s) in handle.segments.iter().enumerate() {
            let row = self.ctl.read(*s)?;
            let start = i * w;
            let n = w.min(handle.len_bits - start);
            out.splice(start, &row.slice(0, n));
        }
        Ok(out)
    }

    fn check_range(&self, addr: u64, size: u64) -> Result<(), RuntimeError> {
        if addr.checked_add(size).is_none_or(|end| end > self.memory_bytes()) {
            return Err(RuntimeError::OutOfRange { addr, size });
        }
        Ok(())
    }

    /// Host read of raw bytes.
    pub fn read_bytes(&self, addr: u64, len: u64) -> Result<Vec<u8>, RuntimeError> {
        self.check_range(addr, len)?;
        let rb = self.row_bytes() as u64;
        let mut out = Vec::with_capacity(len as usize);
        let mut a = addr;
        while a < addr + len {
            let row = self.ctl.read(self.row_at((a / rb) as usize)?)?.to_bytes();
            let off = (a % rb) as usize;
            let n = (rb - a % rb).min(addr + len - a) as usize;
            out.extend_from_slice(&row[off..off + n]);
            a += n as u64;
        }
        Ok(out)
    }

    /// Host write of raw bytes. Touched rows are withdrawn from the
    /// allocator so they are never used as scratch space.
    pub fn write_bytes(&mut self, addr: u64, data: &[u8]) -> Result<(), RuntimeError> {
        self.check_range(addr, data.len() as u64)?;
        let rb = self.row_bytes() as u64;
        let end = addr + data.len() as u64;
        let mut a = addr;
        while a < end {
            let ra = self.row_at((a / rb) as usize)?;
            let mut row = self.ctl.read(ra)?.to_bytes();
            let off = (a % rb) as usize;
            let n = (rb - a % rb).min(end - a) as usize;
            let from = (a - addr) as usize;
            row[off..off + n].copy_from_slice(&data[from..from + n]);
            self.ctl.write(ra, &BitRow::from_bytes(&row))?;
            self.alloc.reserve(ra);
            a += n as u64;
        }
        Ok(())
    }

    /// A CPU store that is still sitting in the cache: memory is updated and
    /// the touched lines are marked dirty, so the next `bbop` reading them
    /// pays for the write-back.
    pub fn host_store(&mut self, addr: u64, data: &[u8]) -> Result<(), RuntimeError> {
        self.write_bytes(addr, data)?;
        let rb = self.row_bytes() as u64;
        let line = LINE_BYTES as u64;
        let end = addr + data.len() as u64;
        for l in addr / line..end.div_ceil(line) {
            let byte = l * line;
            self.dirty.mark((byte / rb) as usize, ((byte % rb) / line) as usize);
        }
        Ok(())
    }

    fn charge_trace(&mut self, trace: &CommandTrace) {
        for p in trace.primitives() {
            let ns = primitive_latency(p, &self.cfg.timing);
            let mut banks: Vec<usize> = p.iter().map(|e| e.bank).collect();
            banks.sort_unstable();
            banks.dedup();
            for b in banks {
                self.ledger.bank_busy_ns[b] += ns;
            }
        }
        self.ledger.transfers += trace.count_command(Command::Transfer) as u64;
        self.ledger.energy_nj += energy_of(trace, &self.cfg.energy);
    }

    fn host_stream_ns(&self, kind: BbopKind, bytes: u64) -> f64 {
        self.cfg.baseline.transfer_ns((kind.streams() as u64 * bytes) as f64)
    }

    fn charge_baseline(&mut self, kind: BbopKind, bytes: u64) {
        self.ledger.baseline_ns += self.host_stream_ns(kind, bytes);
        self.ledger.baseline_energy_nj += self.cfg.energy.baseline_nj_per_kb(kind) * bytes as f64 / 1024.0;
    }

    fn charge_host(&mut self, kind: BbopKind, bytes: u64) -> f64 {
        let ns = self.host_stream_ns(kind, bytes);
        self.ledger.host_ns += ns;
        self.ledger.energy_nj += self.cfg.energy.baseline_nj_per_kb(kind) * bytes as f64 / 1024.0;
        ns
    }

    /// Executes one `bbop`. Row-aligned instructions run in DRAM; anything
    /// else is computed by the host with the same result.
    pub fn bbop_execute(&mut self, instr: BbopInstruction) -> Result<BbopOutcome, RuntimeError> {
        let out = self.execute(instr)?;
        *self.tally.ops.entry(instr.op).or_default() += 1;
        Ok(out)
    }

    fn execute(&mut self, instr: BbopInstruction) -> Result<BbopOutcome, RuntimeError> {
        let kind = instr.op;
        if instr.size == 0 {
            return Err(RuntimeError::InvalidInstruction("size must be positive".into()));
        }
        if instr.src2.is_some() != (kind.arity() == 2) {
            return Err(RuntimeError::InvalidInstruction(format!(
                "{kind} takes {} source operand(s)",
                kind.arity()
            )));
        }
        let srcs: Vec<u64> = std::iter::once(instr.src1).chain(instr.src2).collect();
        for &a in srcs.iter().chain([&instr.dst]) {
            self.check_range(a, instr.size)?;
        }
        self.charge_baseline(kind, instr.size);

        let rb = self.row_bytes() as u64;
        let aligned = instr.size.is_multiple_of(rb) && srcs.iter().chain([&instr.dst]).all(|a| a.is_multiple_of(rb));
        let overlaps = srcs
            .iter()
            .any(|&s| s != instr.dst && s < instr.dst + instr.size && instr.dst < s + instr.size);
        if !aligned || overlaps {
            let reason = if aligned {
                FallbackReason::Overlap
            } else {
                FallbackReason::Misaligned
            };
            let a = self.read_bytes(instr.src1, instr.size)?;
            let b = instr.src2.map(|s| self.read_bytes(s, instr.size)).transpose()?;
            let result = kind.apply(&BitRow::from_bytes(&a), b.map(|b| BitRow::from_bytes(&b)).as_ref());
            self.write_bytes(instr.dst, &result.to_bytes())?;
            let host_ns = self.charge_host(kind, instr.size);
            return Ok(BbopOutcome::HostFallback { reason, host_ns });
        }

        let rows = (instr.size / rb) as usize;
        let first = |a: u64| (a / rb) as usize;
        let src_rows: Vec<usize> = srcs.iter().flat_map(|&s| first(s)..first(s) + rows).collect();
        let dst_rows: Vec<usize> = (first(instr.dst)..first(instr.dst) + rows).collect();
        let coherence = self
            .dirty
            .prepare(&src_rows, &dst_rows, rb as usize, self.cfg.flush_ns_per_line);
        self.ledger.coherence_ns += coherence.added_ns;

        let mut trace = CommandTrace::new();
        let (mut staged_rows, mut host_rows) = (0, 0);
        for r in 0..rows {
            let d = self.row_at(first(instr.dst) + r)?;
            let s1 = self.row_at(first(instr.src1) + r)?;
            let s2 = instr.src2.map(|s| self.row_at(first(s) + r)).transpose()?;
            self.alloc.reserve(d);
            let (t, staged, on_host) = self.exec_row(kind, d, s1, s2)?;
            trace.append(t);
            staged_rows += staged;
            host_rows += usize::from(on_host);
        }
        self.charge_trace(&trace);
        self.ledger.staged_rows += staged_rows as u64;
        self.ledger.host_rows += host_rows as u64;
        Ok(BbopOutcome::InMemory {
            trace,
            coherence,
            staged_rows,
            host_rows,
        })
    }

    /// Copies `src` into a free row of `dst`'s subarray.
    fn stage(
        &mut self,
        src: RowAddress,
        dst: RowAddress,
        avoid: &[RowAddress],
        trace: &mut CommandTrace,
    ) -> Result<Option<RowAddress>, RuntimeError> {
        let Some(tmp) = self.alloc.borrow_in(dst.bank, dst.subarray, avoid) else {
            return Ok(None);
        };
        let chip = self.ctl.chip_mut();
        if src.bank != dst.bank {
            trace.append(chip.transfer_psm(row_loc(src)?, row_loc(tmp)?)?);
            return Ok(Some(tmp));
        }
        // same bank, other subarray: bounce through another bank
        let mut avoid2 = avoid.to_vec();
        avoid2.push(tmp);
        let Some(via) = self.alloc.borrow_outside(dst.bank, &avoid2) else {
            self.alloc.release(tmp);
            return Ok(None);
        };
        let chip = self.ctl.chip_mut();
        trace.append(chip.transfer_psm(row_loc(src)?, row_loc(via)?)?);
        trace.append(chip.transfer_psm(row_loc(via)?, row_loc(tmp)?)?);
        self.alloc.release(via);
        Ok(Some(tmp))
    }

    fn exec_row(
        &mut self,
        kind: BbopKind,
        d: RowAddress,
        s1: RowAddress,
        s2: Option<RowAddress>,
    ) -> Result<(CommandTrace, usize, bool), RuntimeError> {
        let avoid: Vec<RowAddress> = [Some(d), Some(s1), s2].into_iter().flatten().collect();
        let mut trace = CommandTrace::new();
        let mut borrowed = Vec::new();
        let mut placed = Vec::new();
        let mut ok = true;
        for s in [Some(s1), s2].into_iter().flatten() {
            if s.same_subarray(&d) {
                placed.push(s);
                continue;
            }
            match self.stage(s, d, &avoid, &mut trace)? {
                Some(tmp) => {
                    borrowed.push(tmp);
                    placed.push(tmp);
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        let staged = borrowed.len();
        if ok {
            trace.append(self.ctl.exec_bbop(kind, d, placed[0], placed.get(1).copied())?);
        } else {
            let a = self.ctl.read(s1)?;
            let b = s2.map(|s| self.ctl.read(s)).transpose()?;
            self.ctl.write(d, &kind.apply(&a, b.as_ref()))?;
            self.charge_host(kind, self.row_bytes() as u64);
        }
        for t in borrowed {
            self.alloc.release(t);
        }
        Ok((trace, staged, !ok))
    }

    /// `dst = kind(src1, src2)` over whole bitvectors, one row-sized
    /// instruction per segment.
    pub fn bbop(
        &mut self,
        kind: BbopKind,
        dst: &BitvectorHandle,
        src1: &BitvectorHandle,
        src2: Option<&BitvectorHandle>,
    ) -> Result<BbopOutcome, RuntimeError> {
        for s in [Some(src1), src2].into_iter().flatten() {
            if s.len_bits != dst.len_bits {
                return Err(RuntimeError::LengthMismatch(dst.len_bits, s.len_bits));
            }
        }
        let rb = self.row_bytes() as u64;
        let mut trace = CommandTrace::new();
        let mut coherence = CoherenceCost::default();
        let (mut staged_rows, mut host_rows) = (0, 0);
        for i in 0..dst.rows() {
            let instr = BbopInstruction {
                op: kind,
                dst: self.address_of(dst.segments[i]),
                src1: self.address_of(src1.segments[i]),
                src2: src2.map(|s| self.address_of(s.segments[i])),
                size: rb,
            };
            match self.execute(instr)? {
                BbopOutcome::InMemory {
                    trace: t,
                    coherence: c,
                    staged_rows: s,
                    host_rows: h,
                } => {
                    trace.append(t);
                    coherence.merge(&c);
                    staged_rows += s;
                    host_rows += h;
                }
                BbopOutcome::HostFallback { .. } => host_rows += 1,
            }
        }
        *self.tally.ops.entry(kind).or_default() += 1;
        Ok(BbopOutcome::InMemory {
            trace,
            coherence,
            staged_rows,
            host_rows,
        })
    }

    /// Counts set bits of a bitvector on the host.
    pub fn host_bitcount(&mut self, handle: &BitvectorHandle) -> Result<u64, RuntimeError> {
        let bits = self.read(handle)?;
        let ns = self.cfg.baseline.transfer_ns(handle.len_bits.div_ceil(8) as f64);
        self.ledger.host_ns += ns;
        self.ledger.baseline_ns += ns;
        self.tally.bitcounts += 1;
        Ok(host_bitcount(&bits))
    }
}
