use std::fmt;

use serde::Serialize;

use crate::dram::{Row, Wordline, WordlineSet, DATA_ROWS};

use super::ControllerError;

/// The three row-address groups of a subarray.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum AddressGroup {
    /// Bitwise group, B0..B15.
    B(u8),
    /// Control group: C0 (zeros) and C1 (ones).
    C(u8),
    /// Data group, D0..D1005.
    D(u16),
}

impl AddressGroup {
    pub fn is_valid(self) -> bool {
        match self {
            AddressGroup::B(i) => i < 16,
            AddressGroup::C(i) => i < 2,
            AddressGroup::D(i) => usize::from(i) < DATA_ROWS,
        }
    }
}

impl fmt::Display for AddressGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AddressGroup::B(i) => write!(f, "B{i}"),
            AddressGroup::C(i) => write!(f, "C{i}"),
            AddressGroup::D(i) => write!(f, "D{i}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct RowAddress {
    pub bank: usize,
    pub subarray: usize,
    pub group: AddressGroup,
}

impl RowAddress {
    pub fn new(bank: usize, subarray: usize, group: AddressGroup) -> Self {
        Self {
            bank,
            subarray,
            group,
        }
    }

    pub fn data(bank: usize, subarray: usize, row: u16) -> Self {
        Self::new(bank, subarray, AddressGroup::D(row))
    }

    pub fn same_subarray(&self, other: &RowAddress) -> bool {
        (self.bank, self.subarray) == (other.bank, other.subarray)
    }
}

impl fmt::Display for RowAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "bank{}/sa{}/{}", self.bank, self.subarray, self.group)
    }
}

const T0: Wordline = Wordline::d(Row::T0);
const T1: Wordline = Wordline::d(Row::T1);
const T2: Wordline = Wordline::d(Row::T2);
const T3: Wordline = Wordline::d(Row::T3);
const DCC0: Wordline = Wordline::d(Row::DCC0);
const DCC0_N: Wordline = Wordline::n(Row::DCC0);
const DCC1: Wordline = Wordline::d(Row::DCC1);
const DCC1_N: Wordline = Wordline::n(Row::DCC1);

/// Wordlines raised by each B-group address.
pub const B_GROUP_MAP: [&[Wordline]; 16] = [
    &[T0],
    &[T1],
    &[T2],
    &[T3],
    &[DCC0],
    &[DCC0_N],
    &[DCC1],
    &[DCC1_N],
    &[DCC0_N, T0],
    &[DCC1_N, T1],
    &[T2, T3],
    &[T0, T3],
    &[T0, T1, T2],
    &[T1, T2, T3],
    &[DCC0, T1, T2],
    &[DCC1, T0, T3],
];

/// Wordlines raised by an `ACTIVATE` to `group`.
pub fn decode(group: AddressGroup) -> Result<WordlineSet, ControllerError> {
    if !group.is_valid() {
        return Err(ControllerError::UnknownAddress(group.to_string()));
    }
    let set = match group {
        AddressGroup::B(i) => WordlineSet::new(B_GROUP_MAP[usize::from(i)]),
        AddressGroup::C(i) => Ok(WordlineSet::single(Row::Control(i))),
        AddressGroup::D(i) => Ok(WordlineSet::single(Row::Data(i))),
    };
    Ok(set.expect("decoder table holds valid wordline sets"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let b12 = decode(AddressGroup::B(12)).unwrap();
        assert_eq!(b12.iter().copied().collect::<Vec<_>>(), vec![T0, T1, T2]);
        let b5 = decode(AddressGroup::B(5)).unwrap();
        assert_eq!(b5.iter().copied().collect::<Vec<_>>(), vec![DCC0_N]);
        let d17 = decode(AddressGroup::D(17)).unwrap();
        assert_eq!(d17.iter().copied().collect::<Vec<_>>(), vec![Wordline::d(Row::Data(17))]);
    }

    #[test]
    fn unknown_addresses() {
        for g in [AddressGroup::B(16), AddressGroup::C(2), AddressGroup::D(1006)] {
            assert!(matches!(decode(g), Err(ControllerError::UnknownAddress(_))));
        }
    }

    #[test]
    fn single_wordline_addresses_cover_all_eight() {
        let mut seen: Vec<Wordline> = B_GROUP_MAP[..8].iter().map(|w| w[0]).collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 8);
    }
}
