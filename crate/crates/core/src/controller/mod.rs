//! The Ambit memory controller: B/C/D row-address groups, the AAP and AP
//! primitives, and the command sequences behind each bulk bitwise operation.

mod address;
mod sequence;

use thiserror::Error;

pub use address::{decode, AddressGroup, RowAddress, B_GROUP_MAP};
pub use sequence::{sequence_for, BbopKind, Operand, Step};

use crate::dram::{Chip, ChipConfig, DramError, Row, RowLoc, DATA_ROWS};
use crate::trace::{Command, CommandTrace, Decoder, Primitive, Target, TraceEntry};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControllerError {
    #[error("unknown row address {0}")]
    UnknownAddress(String),
    #[error("operands of a bulk bitwise operation must be data rows of one subarray")]
    OperandPlacement,
    #[error("{0} expects {1} source operand(s)")]
    Arity(BbopKind, usize),
    #[error("AAP addresses must be in the same subarray")]
    CrossSubarray,
    #[error("data row index {index} out of range (chip has {total})")]
    OutOfRange { index: usize, total: usize },
    #[error("bank {0} is not precharged")]
    BankNotPrecharged(usize),
    #[error(transparent)]
    Dram(#[from] DramError),
}

fn activate_entry(bank: usize, subarray: usize, group: AddressGroup, first: bool, primitive: Primitive) -> TraceEntry {
    let raised = decode(group).map_or(0, |w| w.len() as u8);
    TraceEntry {
        command: Command::Activate,
        bank,
        subarray,
        target: Target::Row(group),
        wordlines_raised: raised,
        decoder: Some(Decoder::for_group(group)),
        aap_boundary: first,
        primitive,
    }
}

fn aap_entries(bank: usize, subarray: usize, a1: AddressGroup, a2: AddressGroup) -> [TraceEntry; 3] {
    [
        activate_entry(bank, subarray, a1, true, Primitive::Aap),
        activate_entry(bank, subarray, a2, false, Primitive::Aap),
        TraceEntry::precharge(bank, subarray, Primitive::Aap),
    ]
}

fn ap_entries(bank: usize, subarray: usize, a: AddressGroup) -> [TraceEntry; 2] {
    [
        activate_entry(bank, subarray, a, true, Primitive::Ap),
        TraceEntry::precharge(bank, subarray, Primitive::Ap),
    ]
}

fn resolve(op: Operand, dst: AddressGroup, src1: AddressGroup, src2: Option<AddressGroup>) -> AddressGroup {
    match op {
        Operand::Src1 => src1,
        Operand::Src2 => src2.expect("arity checked"),
        Operand::Dst => dst,
        Operand::B(i) => AddressGroup::B(i),
        Operand::C0 => AddressGroup::C(0),
        Operand::C1 => AddressGroup::C(1),
    }
}

/// Trace of `kind` with sources D0, D1 and destination D2 in bank 0,
/// subarray 0. Timing and energy depend only on its shape.
pub fn symbolic_trace(kind: BbopKind) -> CommandTrace {
    let (src1, src2, dst) = (AddressGroup::D(0), AddressGroup::D(1), AddressGroup::D(2));
    let src2 = (kind.arity() == 2).then_some(src2);
    let mut trace = CommandTrace::new();
    for &step in sequence_for(kind) {
        match step {
            Step::Aap(a, b) => {
                let [x, y, z] = aap_entries(0, 0, resolve(a, dst, src1, src2), resolve(b, dst, src1, src2));
                trace.push(x);
                trace.push(y);
                trace.push(z);
            }
            Step::Ap(a) => {
                let [x, y] = ap_entries(0, 0, resolve(a, dst, src1, src2));
                trace.push(x);
                trace.push(y);
            }
        }
    }
    trace
}

/// Maps a linear data-row index to its row address: a subarray's data rows
/// fill first, then the next subarray, then the next bank.
pub fn interleave(config: &ChipConfig, index: usize) -> Result<RowAddress, ControllerError> {
    let total = config.total_subarrays() * DATA_ROWS;
    if index >= total {
        return Err(ControllerError::OutOfRange { index, total });
    }
    let sa_linear = index / DATA_ROWS;
    Ok(RowAddress::data(
        sa_linear / config.subarrays_per_bank,
        sa_linear % config.subarrays_per_bank,
        (index % DATA_ROWS) as u16,
    ))
}

/// Inverse of [`interleave`] for data-row addresses.
pub fn linear_index(config: &ChipConfig, addr: RowAddress) -> Option<usize> {
    let AddressGroup::D(row) = addr.group else {
        return None;
    };
    if !addr.group.is_valid() || addr.bank >= config.banks || addr.subarray >= config.subarrays_per_bank {
        return None;
    }
    Some((addr.bank * config.subarrays_per_bank + addr.subarray) * DATA_ROWS + usize::from(row))
}

/// Issues Ambit command sequences to a [`Chip`].
#[derive(Clone, Debug)]
pub struct AmbitController {
    chip: Chip,
}

impl AmbitController {
    pub fn new(chip: Chip) -> Self {
        Self { chip }
    }

    pub fn with_config(config: ChipConfig) -> Result<Self, ControllerError> {
        Ok(Self::new(Chip::new(config)?))
    }

    pub fn chip(&self) -> &Chip {
        &self.chip
    }

    pub fn chip_mut(&mut self) -> &mut Chip {
        &mut self.chip
    }

    pub fn into_chip(self) -> Chip {
        self.chip
    }

    pub fn config(&self) -> &ChipConfig {
        self.chip.config()
    }

    fn raise(&mut self, bank: usize, subarray: usize, group: AddressGroup) -> Result<(), ControllerError> {
        let wordlines = decode(group)?;
        if let Err(e) = self.chip.activate(bank, subarray, &wordlines) {
            // leave the bank usable; a failed sense is still reported
            self.chip.precharge(bank);
            return Err(e.into());
        }
        Ok(())
    }

    fn check_precharged(&self, bank: usize, subarray: usize) -> Result<(), ControllerError> {
        let cfg = self.chip.config();
        if bank >= cfg.banks || subarray >= cfg.subarrays_per_bank {
            return Err(ControllerError::UnknownAddress(format!("bank{bank}/sa{subarray}")));
        }
        if !self.chip.is_precharged(bank) {
            return Err(ControllerError::BankNotPrecharged(bank));
        }
        Ok(())
    }

    /// ACTIVATE `a1`; ACTIVATE `a2`; PRECHARGE. Copies the result of the
    /// first activation into the rows of the second.
    pub fn aap(&mut self, a1: RowAddress, a2: RowAddress) -> Result<CommandTrace, ControllerError> {
        if !a1.same_subarray(&a2) {
            return Err(ControllerError::CrossSubarray);
        }
        self.check_precharged(a1.bank, a1.subarray)?;
        self.raise(a1.bank, a1.subarray, a1.group)?;
        self.raise(a2.bank, a2.subarray, a2.group)?;
        self.chip.precharge(a1.bank);
        let mut trace = CommandTrace::new();
        for e in aap_entries(a1.bank, a1.subarray, a1.group, a2.group) {
            trace.push(e);
        }
        Ok(trace)
    }

    /// ACTIVATE `a`; PRECHARGE.
    pub fn ap(&mut self, a: RowAddress) -> Result<CommandTrace, ControllerError> {
        self.check_precharged(a.bank, a.subarray)?;
        self.raise(a.bank, a.subarray, a.group)?;
        self.chip.precharge(a.bank);
        let mut trace = CommandTrace::new();
        for e in ap_entries(a.bank, a.subarray, a.group) {
            trace.push(e);
        }
        Ok(trace)
    }

    /// Runs `dst = kind(src1, src2)` on data rows of one subarray.
    pub fn exec_bbop(
        &mut self,
        kind: BbopKind,
        dst: RowAddress,
        src1: RowAddress,
        src2: Option<RowAddress>,
    ) -> Result<CommandTrace, ControllerError> {
        if src2.is_some() != (kind.arity() == 2) {
            return Err(ControllerError::Arity(kind, kind.arity()));
        }
        let operands = [Some(dst), Some(src1), src2];
        for op in operands.iter().flatten() {
            if !matches!(op.group, AddressGroup::D(_)) || !op.same_subarray(&dst) {
                return Err(ControllerError::OperandPlacement);
            }
            if !op.group.is_valid() {
                return Err(ControllerError::UnknownAddress(op.to_string()));
            }
        }
        let (bank, subarray) = (dst.bank, dst.subarray);
        let at = |group| RowAddress::new(bank, subarray, group);
        let g2 = src2.map(|s| s.group);
        let mut trace = CommandTrace::new();
        for &step in sequence_for(kind) {
            let t = match step {
                Step::Aap(a, b) => self.aap(
                    at(resolve(a, dst.group, src1.group, g2)),
                    at(resolve(b, dst.group, src1.group, g2)),
                )?,
                Step::Ap(a) => self.ap(at(resolve(a, dst.group, src1.group, g2)))?,
            };
            trace.append(t);
        }
        Ok(trace)
    }

    pub fn interleave(&self, index: usize) -> Result<RowAddress, ControllerError> {
        interleave(self.chip.config(), index)
    }

    pub fn linear_index(&self, addr: RowAddress) -> Option<usize> {
        linear_index(self.chip.config(), addr)
    }

    /// Host write of a data row.
    pub fn write(&mut self, addr: RowAddress, bits: &crate::bits::BitRow) -> Result<(), ControllerError> {
        self.chip.write_row(row_loc(addr)?, bits)?;
        Ok(())
    }

    /// Host read of a data row.
    pub fn read(&self, addr: RowAddress) -> Result<crate::bits::BitRow, ControllerError> {
        Ok(self.chip.read_row(row_loc(addr)?)?)
    }
}

/// Physical row behind a single-wordline address.
pub fn row_loc(addr: RowAddress) -> Result<RowLoc, ControllerError> {
    let row = match addr.group {
        AddressGroup::D(i) if addr.group.is_valid() => Row::Data(i),
        AddressGroup::C(i) if addr.group.is_valid() => Row::Control(i),
        AddressGroup::B(i) if i < 4 => Row::Designated(i),
        AddressGroup::B(i) if i == 4 || i == 6 => Row::Dcc((i - 4) / 2),
        _ => return Err(ControllerError::UnknownAddress(addr.to_string())),
    };
    Ok(RowLoc::new(addr.bank, addr.subarray, row))
}
