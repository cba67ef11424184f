use std::collections::BTreeSet;

use serde::Serialize;

use crate::controller::RowAddress;
use crate::dram::{ChipConfig, DATA_ROWS};

use super::RuntimeError;

/// Handles allocated in one group have their i-th rows in a common subarray.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct AffinityGroup {
    pub id: u64,
    base: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct BitvectorHandle {
    pub id: u64,
    pub len_bits: usize,
    /// One data row per segment, in order.
    pub segments: Vec<RowAddress>,
    pub group: AffinityGroup,
}

impl BitvectorHandle {
    pub fn rows(&self) -> usize {
        self.segments.len()
    }
}

#[derive(Clone, Debug, Default)]
struct RowPool {
    next: u16,
    free: BTreeSet<u16>,
}

impl RowPool {
    fn take(&mut self) -> Option<u16> {
        if let Some(r) = self.free.pop_first() {
            return Some(r);
        }
        if usize::from(self.next) < DATA_ROWS {
            self.next += 1;
            return Some(self.next - 1);
        }
        None
    }

    fn release(&mut self, row: u16) {
        debug_assert!(row < self.next && !self.free.contains(&row));
        self.free.insert(row);
    }

    fn reserve(&mut self, row: u16) {
        if row >= self.next {
            self.free.extend(self.next..row);
            self.next = row + 1;
        } else {
            self.free.remove(&row);
        }
    }

    fn is_free(&self, row: u16) -> bool {
        row >= self.next || self.free.contains(&row)
    }

    fn available(&self) -> usize {
        DATA_ROWS - usize::from(self.next) + self.free.len()
    }
}

/// Row allocator. Subarray number `g` is bank `g % banks`, subarray
/// `g / banks`, so consecutive groups and segments spread across banks.
#[derive(Clone, Debug)]
pub struct Allocator {
    banks: usize,
    subarrays_per_bank: usize,
    row_bits: usize,
    pools: Vec<RowPool>,
    next_group: u64,
    next_handle: u64,
}

impl Allocator {
    pub fn new(config: &ChipConfig) -> Self {
        Self {
            banks: config.banks,
            subarrays_per_bank: config.subarrays_per_bank,
            row_bits: config.row_bits,
            pools: vec![RowPool::default(); config.total_subarrays()],
            next_group: 0,
            next_handle: 0,
        }
    }

    fn subarrays(&self) -> usize {
        self.pools.len()
    }

    fn locate(&self, g: usize) -> (usize, usize) {
        (g % self.banks, g / self.banks)
    }

    fn index(&self, bank: usize, subarray: usize) -> usize {
        subarray * self.banks + bank
    }

    pub fn new_group(&mut self) -> AffinityGroup {
        let id = self.next_group;
        self.next_group += 1;
        AffinityGroup {
            id,
            base: (id as usize) % self.subarrays(),
        }
    }

    /// Whole rows for `nbits` bits, segment i in subarray `base + i`.
    pub fn alloc(&mut self, nbits: usize, group: AffinityGroup) -> Result<BitvectorHandle, RuntimeError> {
        let rows = nbits.div_ceil(self.row_bits).max(1);
        let mut segments = Vec::with_capacity(rows);
        for i in 0..rows {
            let g = (group.base + i) % self.subarrays();
            let (bank, subarray) = self.locate(g);
            match self.pools[g].take() {
                Some(row) => segments.push(RowAddress::data(bank, subarray, row)),
                None => {
                    for s in &segments {
                        self.release(*s);
                    }
                    return Err(RuntimeError::CapacityExhausted { bank, subarray });
                }
            }
        }
        let id = self.next_handle;
        self.next_handle += 1;
        Ok(BitvectorHandle {
            id,
            len_bits: nbits,
            segments,
            group,
        })
    }

    pub fn free(&mut self, handle: &BitvectorHandle) {
        for s in &handle.segments {
            self.release(*s);
        }
    }

    fn row_of(addr: RowAddress) -> u16 {
        match addr.group {
            crate::controller::AddressGroup::D(r) => r,
            other => panic!("allocator holds data rows only, got {other}"),
        }
    }

    pub(crate) fn release(&mut self, addr: RowAddress) {
        let g = self.index(addr.bank, addr.subarray);
        self.pools[g].release(Self::row_of(addr));
    }

    /// Marks a specific row as in use, e.g. after a raw write to it.
    pub fn reserve(&mut self, addr: RowAddress) {
        let g = self.index(addr.bank, addr.subarray);
        self.pools[g].reserve(Self::row_of(addr));
    }

    pub fn is_free(&self, addr: RowAddress) -> bool {
        self.pools[self.index(addr.bank, addr.subarray)].is_free(Self::row_of(addr))
    }

    /// Free data rows left in one subarray.
    pub fn available(&self, bank: usize, subarray: usize) -> usize {
        self.pools[self.index(bank, subarray)].available()
    }

    /// Borrows a free row in the given subarray, skipping `avoid`.
    pub(crate) fn borrow_in(&mut self, bank: usize, subarray: usize, avoid: &[RowAddress]) -> Option<RowAddress> {
        let g = self.index(bank, subarray);
        let mut skipped = Vec::new();
        let found = loop {
            let Some(row) = self.pools[g].take() else {
                break None;
            };
            let addr = RowAddress::data(bank, subarray, row);
            if avoid.contains(&addr) {
                skipped.push(row);
            } else {
                break Some(addr);
            }
        };
        for row in skipped {
            self.pools[g].release(row);
        }
        found
    }

    /// Borrows a free row in any bank other than `bank`.
    pub(crate) fn borrow_outside(&mut self, bank: usize, avoid: &[RowAddress]) -> Option<RowAddress> {
        for b in (0..self.banks).filter(|&b| b != bank) {
            for sa in 0..self.subarrays_per_bank {
                if let Some(addr) = self.borrow_in(b, sa, avoid) {
                    return Some(addr);
                }
            }
        }
        None
    }
}
