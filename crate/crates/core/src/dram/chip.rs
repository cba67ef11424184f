use std::collections::BTreeMap;
use std::fmt;

use arrayvec::ArrayVec;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::charge::{DeviceParams, SenseAmp, SenseAmpState};
use super::{COLUMN_BYTES, CONTROL_ROWS, DATA_ROWS, DCC_ROWS, DESIGNATED_ROWS, PHYSICAL_ROWS};
use crate::bits::{tail_mask, words_for, BitRow};
use crate::controller::{AddressGroup, RowAddress};
use crate::trace::{Command, CommandTrace, Decoder, Primitive, Target, TraceEntry};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DramError {
    #[error("sense failure in bank {bank} subarray {subarray} at bitline {bitline}: deviation {deviation:.5} V_DD")]
    SenseFailure {
        bank: usize,
        subarray: usize,
        bitline: usize,
        deviation: f64,
    },
    #[error("invalid activate: {0}")]
    InvalidActivate(String),
    #[error("subarray {subarray} of bank {bank} holds an unresolved activation; precharge first")]
    Poisoned { bank: usize, subarray: usize },
    #[error("row width mismatch: expected {expected} bits, got {actual}")]
    WidthMismatch { expected: usize, actual: usize },
    #[error("rows are in different subarrays")]
    CrossSubarray,
    #[error("PSM transfer needs two distinct banks (both are bank {0})")]
    SameBank(usize),
    #[error("bank {0} is not precharged")]
    BankBusy(usize),
    #[error("no such row: {0}")]
    NoSuchRow(String),
    #[error("cell charge in {0} is undefined after a failed activation")]
    UndefinedCharge(String),
    #[error("invalid chip configuration: {0}")]
    Config(String),
}

/// A physical row of a subarray.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Row {
    Designated(u8),
    Dcc(u8),
    Control(u8),
    Data(u16),
}

impl Row {
    pub const T0: Row = Row::Designated(0);
    pub const T1: Row = Row::Designated(1);
    pub const T2: Row = Row::Designated(2);
    pub const T3: Row = Row::Designated(3);
    pub const DCC0: Row = Row::Dcc(0);
    pub const DCC1: Row = Row::Dcc(1);
    pub const C0: Row = Row::Control(0);
    pub const C1: Row = Row::Control(1);

    fn index(self) -> Option<usize> {
        let (base, i, limit) = match self {
            Row::Designated(i) => (0, usize::from(i), DESIGNATED_ROWS),
            Row::Dcc(i) => (DESIGNATED_ROWS, usize::from(i), DCC_ROWS),
            Row::Control(i) => (DESIGNATED_ROWS + DCC_ROWS, usize::from(i), CONTROL_ROWS),
            Row::Data(i) => (DESIGNATED_ROWS + DCC_ROWS + CONTROL_ROWS, usize::from(i), DATA_ROWS),
        };
        (i < limit).then_some(base + i)
    }

    fn checked_index(self) -> Result<usize, DramError> {
        self.index().ok_or_else(|| DramError::NoSuchRow(self.to_string()))
    }

    /// The address that raises this row's d-wordline alone.
    pub fn address_group(self) -> AddressGroup {
        match self {
            Row::Designated(i) => AddressGroup::B(i),
            Row::Dcc(i) => AddressGroup::B(4 + 2 * i),
            Row::Control(i) => AddressGroup::C(i),
            Row::Data(i) => AddressGroup::D(i),
        }
    }
}

impl fmt::Display for Row {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Row::Designated(i) => write!(f, "T{i}"),
            Row::Dcc(i) => write!(f, "DCC{i}"),
            Row::Control(i) => write!(f, "C{i}"),
            Row::Data(i) => write!(f, "data{i}"),
        }
    }
}

/// Which side of the sense amplifier a wordline connects its cell to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Port {
    /// Ordinary wordline (d-wordline for a DCC).
    Bitline,
    /// n-wordline of a dual-contact cell.
    BitlineBar,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Wordline {
    pub row: Row,
    pub port: Port,
}

impl Wordline {
    pub const fn d(row: Row) -> Self {
        Self {
            row,
            port: Port::Bitline,
        }
    }

    pub const fn n(row: Row) -> Self {
        Self {
            row,
            port: Port::BitlineBar,
        }
    }
}

impl fmt::Display for Wordline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.port {
            Port::Bitline => write!(f, "{}", self.row),
            Port::BitlineBar => write!(f, "!{}", self.row),
        }
    }
}

/// One to three wordlines of a single subarray raised by one `ACTIVATE`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WordlineSet(ArrayVec<Wordline, 3>);

impl WordlineSet {
    pub fn new(wordlines: &[Wordline]) -> Result<Self, DramError> {
        if wordlines.is_empty() || wordlines.len() > 3 {
            return Err(DramError::InvalidActivate(format!(
                "{} wordlines requested; 1 to 3 allowed",
                wordlines.len()
            )));
        }
        for (i, a) in wordlines.iter().enumerate() {
            if a.port == Port::BitlineBar && !matches!(a.row, Row::Dcc(_)) {
                return Err(DramError::InvalidActivate(format!(
                    "{} has no n-wordline",
                    a.row
                )));
            }
            a.row.checked_index()?;
            if wordlines[..i].iter().any(|b| b.row == a.row) {
                return Err(DramError::InvalidActivate(format!(
                    "{} connected twice",
                    a.row
                )));
            }
        }
        Ok(Self(wordlines.iter().copied().collect()))
    }

    pub fn single(row: Row) -> Self {
        Self::new(&[Wordline::d(row)]).expect("single d-wordline")
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Wordline> {
        self.0.iter()
    }

    pub fn contains(&self, wordline: Wordline) -> bool {
        self.0.contains(&wordline)
    }
}

/// A row in a particular bank and subarray.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RowLoc {
    pub bank: usize,
    pub subarray: usize,
    pub row: Row,
}

impl RowLoc {
    pub fn new(bank: usize, subarray: usize, row: Row) -> Self {
        Self { bank, subarray, row }
    }
}

impl fmt::Display for RowLoc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "bank{}/sa{}/{}", self.bank, self.subarray, self.row)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChipConfig {
    pub banks: usize,
    pub subarrays_per_bank: usize,
    /// Bits per row; a power of two, at least 64.
    pub row_bits: usize,
    pub device: DeviceParams,
}

impl Default for ChipConfig {
    fn default() -> Self {
        Self {
            banks: 8,
            subarrays_per_bank: 64,
            row_bits: 8192 * 8,
            device: DeviceParams::default(),
        }
    }
}

impl ChipConfig {
    /// 16-bank DDR4 part.
    pub fn ddr4_16_bank() -> Self {
        Self {
            banks: 16,
            ..Self::default()
        }
    }

    /// 3D-stacked part with 256 banks.
    pub fn ambit_3d() -> Self {
        Self {
            banks: 256,
            subarrays_per_bank: 16,
            ..Self::default()
        }
    }

    pub fn with_row_bits(mut self, row_bits: usize) -> Self {
        self.row_bits = row_bits;
        self
    }

    pub fn row_bytes(&self) -> usize {
        self.row_bits / 8
    }

    pub fn columns_per_row(&self) -> usize {
        self.row_bytes().div_ceil(COLUMN_BYTES)
    }

    pub fn total_subarrays(&self) -> usize {
        self.banks * self.subarrays_per_bank
    }

    pub fn validate(&self) -> Result<(), DramError> {
        if self.row_bits < 64 || !self.row_bits.is_power_of_two() {
            return Err(DramError::Config(format!(
                "row_bits must be a power of two >= 64, got {}",
                self.row_bits
            )));
        }
        if self.banks == 0 || self.subarrays_per_bank == 0 {
            return Err(DramError::Config("need at least one bank and subarray".into()));
        }
        let d = &self.device;
        if !(d.cell_capacitance > 0.0 && d.bitline_capacitance > 0.0 && d.vdd > 0.0) {
            return Err(DramError::Config("capacitances and vdd must be positive".into()));
        }
        if !(d.offset_threshold >= 0.0) {
            return Err(DramError::Config("offset_threshold must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
enum SenseRow {
    Precharged,
    /// Latched row value; bitlines at 0 or V_DD.
    Stable,
    /// Bitline voltages (fraction of V_DD) after a failed sense.
    Unresolved(Vec<f64>),
}

#[derive(Clone, Debug)]
struct Subarray {
    width: usize,
    /// `None` reads as all zeros.
    rows: Vec<Option<Box<[u64]>>>,
    /// Rows left at fractional charge by a failed sense, until precharge.
    analog: BTreeMap<usize, Vec<f64>>,
    sense: SenseRow,
    latched: Vec<u64>,
}

impl Subarray {
    fn new(width: usize) -> Self {
        let mut sa = Self {
            width,
            rows: vec![None; PHYSICAL_ROWS],
            analog: BTreeMap::new(),
            sense: SenseRow::Precharged,
            latched: vec![0; words_for(width)],
        };
        let ones = BitRow::ones(width);
        sa.rows[Row::C1.index().expect("C1")] = Some(ones.words().into());
        sa
    }

    fn words(&self) -> usize {
        words_for(self.width)
    }

    fn word(&self, row: usize, w: usize) -> u64 {
        self.rows[row].as_ref().map_or(0, |r| r[w])
    }

    fn row_mut(&mut self, row: usize) -> &mut [u64] {
        let words = self.words();
        self.rows[row].get_or_insert_with(|| vec![0; words].into_boxed_slice())
    }

    fn store_latched(&mut self, wordline: &Wordline) {
        let idx = wordline.row.index().expect("validated row");
        let latched = std::mem::take(&mut self.latched);
        let invert = wordline.port == Port::BitlineBar;
        let tail = tail_mask(self.width);
        let last = latched.len() - 1;
        let row = self.row_mut(idx);
        for (w, (dst, &src)) in row.iter_mut().zip(&latched).enumerate() {
            let v = if invert { !src } else { src };
            *dst = if w == last { v & tail } else { v };
        }
        self.latched = latched;
        self.analog.remove(&idx);
    }
}

#[derive(Clone, Debug)]
struct OpenRows {
    subarray: usize,
    wordlines: Vec<Wordline>,
}

#[derive(Clone, Debug, Default)]
struct Bank {
    subarrays: Vec<Option<Box<Subarray>>>,
    open: Option<OpenRows>,
}

/// A DRAM chip: banks of subarrays, created lazily on first touch.
#[derive(Clone, Debug)]
pub struct Chip {
    config: ChipConfig,
    banks: Vec<Bank>,
}

impl Chip {
    pub fn new(config: ChipConfig) -> Result<Self, DramError> {
        config.validate()?;
        let banks = (0..config.banks)
            .map(|_| Bank {
                subarrays: vec![None; config.subarrays_per_bank],
                open: None,
            })
            .collect();
        Ok(Self { config, banks })
    }

    pub fn config(&self) -> &ChipConfig {
        &self.config
    }

    pub fn row_bits(&self) -> usize {
        self.config.row_bits
    }

    fn check_location(&self, bank: usize, subarray: usize) -> Result<(), DramError> {
        if bank >= self.config.banks || subarray >= self.config.subarrays_per_bank {
            return Err(DramError::NoSuchRow(format!("bank{bank}/sa{subarray}")));
        }
        Ok(())
    }

    fn subarray(&self, bank: usize, subarray: usize) -> Option<&Subarray> {
        self.banks[bank].subarrays[subarray].as_deref()
    }

    fn subarray_mut(&mut self, bank: usize, subarray: usize) -> &mut Subarray {
        let width = self.config.row_bits;
        self.banks[bank].subarrays[subarray].get_or_insert_with(|| Box::new(Subarray::new(width)))
    }

    /// Whether the bank has no raised wordlines.
    pub fn is_precharged(&self, bank: usize) -> bool {
        self.banks[bank].open.is_none()
    }

    /// Subarray currently holding raised wordlines in `bank`, if any.
    pub fn open_subarray(&self, bank: usize) -> Option<usize> {
        self.banks[bank].open.as_ref().map(|o| o.subarray)
    }

    /// Wordlines raised in `bank` since its last precharge.
    pub fn raised_wordlines(&self, bank: usize) -> &[Wordline] {
        self.banks[bank]
            .open
            .as_ref()
            .map_or(&[], |o| o.wordlines.as_slice())
    }

    /// Raises `wordlines` in one subarray.
    ///
    /// From a precharged bank this performs charge sharing and sensing. If
    /// the same subarray is already active, the sense amplifiers are stable
    /// and simply overwrite the newly connected cells (RowClone-FPM).
    pub fn activate(
        &mut self,
        bank: usize,
        subarray: usize,
        wordlines: &WordlineSet,
    ) -> Result<(), DramError> {
        self.check_location(bank, subarray)?;
        match &self.banks[bank].open {
            Some(open) if open.subarray != subarray => {
                return Err(DramError::InvalidActivate(format!(
                    "bank {bank} has subarray {} active; cannot activate subarray {subarray}",
                    open.subarray
                )));
            }
            Some(_) => self.activate_overwrite(bank, subarray, wordlines)?,
            None => self.activate_sense(bank, subarray, wordlines)?,
        }
        Ok(())
    }

    fn activate_overwrite(
        &mut self,
        bank: usize,
        subarray: usize,
        wordlines: &WordlineSet,
    ) -> Result<(), DramError> {
        let sa = self.subarray_mut(bank, subarray);
        if !matches!(sa.sense, SenseRow::Stable) {
            return Err(DramError::Poisoned { bank, subarray });
        }
        for wl in wordlines.iter() {
            sa.store_latched(wl);
        }
        let open = self.banks[bank].open.as_mut().expect("bank is open");
        open.wordlines.extend(wordlines.iter().copied());
        Ok(())
    }

    fn activate_sense(
        &mut self,
        bank: usize,
        subarray: usize,
        wordlines: &WordlineSet,
    ) -> Result<(), DramError> {
        let device = self.config.device;
        let n = wordlines.len();
        let deviations: ArrayVec<f64, 4> = (0..=n).map(|k| device.nominal_deviation(n, k)).collect();
        let resolvable: ArrayVec<bool, 4> = deviations.iter().map(|&d| device.resolves(d)).collect();

        let sa = self.subarray_mut(bank, subarray);
        let indices: ArrayVec<usize, 3> = wordlines
            .iter()
            .map(|wl| wl.row.index().expect("validated row"))
            .collect();
        let inverts: ArrayVec<u64, 3> = wordlines
            .iter()
            .map(|wl| if wl.port == Port::BitlineBar { !0 } else { 0 })
            .collect();
        let words = sa.words();
        let tail = tail_mask(sa.width);
        let mut latched = std::mem::take(&mut sa.latched);
        let mut failed: Option<(usize, usize)> = None;

        for w in 0..words {
            let valid = if w + 1 == words { tail } else { !0 };
            let mut vals = [0u64; 3];
            for i in 0..n {
                vals[i] = sa.word(indices[i], w) ^ inverts[i];
            }
            let counts = charged_count_masks(n, &vals, valid);
            let mut out = 0;
            for (k, &mask) in counts.iter().enumerate() {
                if mask == 0 {
                    continue;
                }
                if !resolvable[k] && failed.is_none() {
                    failed = Some((w * 64 + mask.trailing_zeros() as usize, k));
                }
                if deviations[k] > 0.0 {
                    out |= mask;
                }
            }
            latched[w] = out;
        }
        sa.latched = latched;

        if let Some((bitline, k)) = failed {
            sa.fail_sense(&indices, &inverts, &deviations, &resolvable);
            self.banks[bank].open = Some(OpenRows {
                subarray,
                wordlines: wordlines.iter().copied().collect(),
            });
            return Err(DramError::SenseFailure {
                bank,
                subarray,
                bitline,
                deviation: deviations[k],
            });
        }

        sa.sense = SenseRow::Stable;
        for wl in wordlines.iter() {
            sa.store_latched(wl);
        }
        self.banks[bank].open = Some(OpenRows {
            subarray,
            wordlines: wordlines.iter().copied().collect(),
        });
        Ok(())
    }

    /// Lowers all wordlines of `bank`. Cells left mid-rail by a failed sense
    /// settle to the nearer rail.
    pub fn precharge(&mut self, bank: usize) {
        let Some(open) = self.banks[bank].open.take() else {
            return;
        };
        let sa = self.subarray_mut(bank, open.subarray);
        sa.sense = SenseRow::Precharged;
        let analog = std::mem::take(&mut sa.analog);
        let width = sa.width;
        for (idx, charges) in analog {
            let settled = BitRow::from_fn(width, |i| charges[i] > 0.5);
            sa.row_mut(idx).copy_from_slice(settled.words());
        }
    }

    pub fn read_row(&self, loc: RowLoc) -> Result<BitRow, DramError> {
        self.check_location(loc.bank, loc.subarray)?;
        let idx = loc.row.checked_index()?;
        let width = self.config.row_bits;
        let Some(sa) = self.subarray(loc.bank, loc.subarray) else {
            return Ok(if loc.row == Row::C1 {
                BitRow::ones(width)
            } else {
                BitRow::zeros(width)
            });
        };
        if sa.analog.contains_key(&idx) {
            return Err(DramError::UndefinedCharge(loc.to_string()));
        }
        Ok(match &sa.rows[idx] {
            Some(words) => BitRow::from_words(width, words.to_vec()),
            None => BitRow::zeros(width),
        })
    }

    /// Host write path; the subarray must not be mid-activation.
    pub fn write_row(&mut self, loc: RowLoc, bits: &BitRow) -> Result<(), DramError> {
        self.check_location(loc.bank, loc.subarray)?;
        let idx = loc.row.checked_index()?;
        if bits.len() != self.config.row_bits {
            return Err(DramError::WidthMismatch {
                expected: self.config.row_bits,
                actual: bits.len(),
            });
        }
        if self.open_subarray(loc.bank) == Some(loc.subarray) {
            return Err(DramError::BankBusy(loc.bank));
        }
        self.subarray_mut(loc.bank, loc.subarray)
            .row_mut(idx)
            .copy_from_slice(bits.words());
        Ok(())
    }

    /// Stored charge of one cell, as a fraction of V_DD.
    pub fn cell_charge(&self, loc: RowLoc, bitline: usize) -> Result<f64, DramError> {
        self.check_location(loc.bank, loc.subarray)?;
        let idx = loc.row.checked_index()?;
        if bitline >= self.config.row_bits {
            return Err(DramError::NoSuchRow(format!("bitline {bitline}")));
        }
        let Some(sa) = self.subarray(loc.bank, loc.subarray) else {
            return Ok(if loc.row == Row::C1 { 1.0 } else { 0.0 });
        };
        if let Some(charges) = sa.analog.get(&idx) {
            return Ok(charges[bitline]);
        }
        let bit = (sa.word(idx, bitline / 64) >> (bitline % 64)) & 1;
        Ok(bit as f64)
    }

    pub fn sense_amp(&self, bank: usize, subarray: usize, bitline: usize) -> SenseAmp {
        let offset_threshold = self.config.device.offset_threshold;
        let (state, bitline_voltage) = match self.subarray(bank, subarray).map(|sa| (&sa.sense, sa)) {
            None | Some((SenseRow::Precharged, _)) => (SenseAmpState::Precharged, 0.5),
            Some((SenseRow::Stable, sa)) => {
                if (sa.latched[bitline / 64] >> (bitline % 64)) & 1 == 1 {
                    (SenseAmpState::StableHigh, 1.0)
                } else {
                    (SenseAmpState::StableLow, 0.0)
                }
            }
            Some((SenseRow::Unresolved(volts), _)) => {
                let v = volts[bitline];
                let state = if v == 1.0 {
                    SenseAmpState::StableHigh
                } else if v == 0.0 {
                    SenseAmpState::StableLow
                } else {
                    SenseAmpState::Amplifying
                };
                (state, v)
            }
        };
        SenseAmp {
            state,
            bitline_voltage,
            offset_threshold,
        }
    }

    /// Copies `src` to `dst` within one subarray with two back-to-back
    /// activations and a precharge.
    pub fn rowclone_fpm(&mut self, src: RowLoc, dst: RowLoc) -> Result<(), DramError> {
        if (src.bank, src.subarray) != (dst.bank, dst.subarray) {
            return Err(DramError::CrossSubarray);
        }
        if !self.is_precharged(src.bank) {
            return Err(DramError::BankBusy(src.bank));
        }
        self.activate(src.bank, src.subarray, &WordlineSet::single(src.row))?;
        self.activate(dst.bank, dst.subarray, &WordlineSet::single(dst.row))?;
        self.precharge(src.bank);
        Ok(())
    }

    /// Captures the complement of `src` in dual-contact row `dcc` through its
    /// n-wordline. The result reads back through the d-wordline.
    pub fn dcc_not_capture(
        &mut self,
        bank: usize,
        subarray: usize,
        src: Row,
        dcc: u8,
    ) -> Result<(), DramError> {
        if !self.is_precharged(bank) {
            return Err(DramError::BankBusy(bank));
        }
        self.activate(bank, subarray, &WordlineSet::single(src))?;
        self.activate(bank, subarray, &WordlineSet::new(&[Wordline::n(Row::Dcc(dcc))])?)?;
        self.precharge(bank);
        Ok(())
    }

    /// Pipelined serial copy between banks, one `TRANSFER` per column.
    pub fn transfer_psm(&mut self, src: RowLoc, dst: RowLoc) -> Result<CommandTrace, DramError> {
        if src.bank == dst.bank {
            return Err(DramError::SameBank(src.bank));
        }
        for bank in [src.bank, dst.bank] {
            if !self.is_precharged(bank) {
                return Err(DramError::BankBusy(bank));
            }
        }
        self.activate(src.bank, src.subarray, &WordlineSet::single(src.row))?;
        if let Err(e) = self.activate(dst.bank, dst.subarray, &WordlineSet::single(dst.row)) {
            self.precharge(src.bank);
            return Err(e);
        }
        let data = self.subarray_mut(src.bank, src.subarray).latched.clone();
        {
            let sa = self.subarray_mut(dst.bank, dst.subarray);
            sa.latched.copy_from_slice(&data);
            sa.store_latched(&Wordline::d(dst.row));
        }
        self.precharge(src.bank);
        self.precharge(dst.bank);

        let mut trace = CommandTrace::new();
        let activate = |loc: RowLoc, first: bool| TraceEntry {
            command: Command::Activate,
            bank: loc.bank,
            subarray: loc.subarray,
            target: Target::Row(loc.row.address_group()),
            wordlines_raised: 1,
            decoder: Some(Decoder::for_group(loc.row.address_group())),
            aap_boundary: first,
            primitive: Primitive::Psm,
        };
        trace.push(activate(src, true));
        trace.push(activate(dst, false));
        for col in 0..self.config.columns_per_row() {
            trace.push(TraceEntry {
                command: Command::Transfer,
                bank: src.bank,
                subarray: src.subarray,
                target: Target::Column(col),
                wordlines_raised: 0,
                decoder: None,
                aap_boundary: false,
                primitive: Primitive::Psm,
            });
        }
        for loc in [src, dst] {
            trace.push(TraceEntry::precharge(loc.bank, loc.subarray, Primitive::Psm));
        }
        Ok(trace)
    }

    /// Row address label for a row of this chip.
    pub fn address_of(loc: RowLoc) -> RowAddress {
        RowAddress::new(loc.bank, loc.subarray, loc.row.address_group())
    }
}

impl Subarray {
    fn fail_sense(
        &mut self,
        indices: &[usize],
        inverts: &[u64],
        deviations: &[f64],
        resolvable: &[bool],
    ) {
        let width = self.width;
        let mut volts = vec![0.0; width];
        let mut counts = vec![0usize; width];
        for (i, &idx) in indices.iter().enumerate() {
            for (b, count) in counts.iter_mut().enumerate() {
                let bit = (self.word(idx, b / 64) >> (b % 64)) & 1;
                let effective = bit ^ (inverts[i] & 1);
                *count += effective as usize;
            }
        }
        for (b, v) in volts.iter_mut().enumerate() {
            let k = counts[b];
            *v = if resolvable[k] {
                if deviations[k] > 0.0 { 1.0 } else { 0.0 }
            } else {
                0.5 + deviations[k]
            };
        }
        for (i, &idx) in indices.iter().enumerate() {
            let charges = volts
                .iter()
                .map(|&v| if inverts[i] != 0 { 1.0 - v } else { v })
                .collect();
            self.analog.insert(idx, charges);
        }
        self.sense = SenseRow::Unresolved(volts);
    }
}

/// For each word, masks of the bitlines with exactly k effective ones among
/// the `n` connected cells, k = 0..=n.
fn charged_count_masks(n: usize, v: &[u64; 3], valid: u64) -> ArrayVec<u64, 4> {
    let mut out = ArrayVec::new();
    match n {
        1 => {
            out.push(!v[0] & valid);
            out.push(v[0] & valid);
        }
        2 => {
            out.push(!(v[0] | v[1]) & valid);
            out.push((v[0] ^ v[1]) & valid);
            out.push(v[0] & v[1] & valid);
        }
        3 => {
            let odd = v[0] ^ v[1] ^ v[2];
            let maj = (v[0] & v[1]) | (v[1] & v[2]) | (v[0] & v[2]);
            out.push(!maj & !odd & valid);
            out.push(!maj & odd & valid);
            out.push(maj & !odd & valid);
            out.push(maj & odd & valid);
        }
        _ => unreachable!("wordline sets hold 1..=3 entries"),
    }
    out
}
