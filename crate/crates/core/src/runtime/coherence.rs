use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

/// Cache line size used for coherence accounting.
pub const LINE_BYTES: usize = 64;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CoherenceCost {
    pub dirty_lines_flushed: u64,
    pub lines_invalidated: u64,
    /// Time on the critical path; invalidations overlap the operation.
    pub added_ns: f64,
}

impl CoherenceCost {
    pub fn merge(&mut self, other: &CoherenceCost) {
        self.dirty_lines_flushed += other.dirty_lines_flushed;
        self.lines_invalidated += other.lines_invalidated;
        self.added_ns += other.added_ns;
    }
}

/// Injected set of dirty cache lines, keyed by (linear data row, line).
#[derive(Clone, Debug, Default)]
pub struct DirtyMap {
    lines: BTreeSet<(usize, usize)>,
}

impl DirtyMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn mark(&mut self, row: usize, line: usize) {
        self.lines.insert((row, line));
    }

    pub fn mark_row(&mut self, row: usize, row_bytes: usize) {
        for line in 0..row_bytes.div_ceil(LINE_BYTES) {
            self.mark(row, line);
        }
    }

    pub fn is_dirty(&self, row: usize, line: usize) -> bool {
        self.lines.contains(&(row, line))
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    fn take_row(&mut self, row: usize) -> u64 {
        let keys: Vec<_> = self.lines.range((row, 0)..=(row, usize::MAX)).copied().collect();
        for k in &keys {
            self.lines.remove(k);
        }
        keys.len() as u64
    }

    /// Flushes dirty source lines and invalidates every destination line.
    pub fn prepare(
        &mut self,
        src_rows: &[usize],
        dst_rows: &[usize],
        row_bytes: usize,
        flush_ns_per_line: f64,
    ) -> CoherenceCost {
        let mut srcs = src_rows.to_vec();
        srcs.sort_unstable();
        srcs.dedup();
        let flushed: u64 = srcs.iter().map(|&r| self.take_row(r)).sum();
        let mut dsts = dst_rows.to_vec();
        dsts.sort_unstable();
        dsts.dedup();
        for &r in &dsts {
            // overwritten in DRAM; any cached copy is stale
            self.take_row(r);
        }
        let per_row = row_bytes.div_ceil(LINE_BYTES) as u64;
        CoherenceCost {
            dirty_lines_flushed: flushed,
            lines_invalidated: per_row * dsts.len() as u64,
            added_ns: flushed as f64 * flush_ns_per_line,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_sources_need_no_flush() {
        let mut d = DirtyMap::new();
        let c = d.prepare(&[1, 2], &[3], 8192, 5.0);
        assert_eq!(c.dirty_lines_flushed, 0);
        assert_eq!(c.lines_invalidated, 128);
        assert_eq!(c.added_ns, 0.0);
    }

    #[test]
    fn dirty_row_flushes_every_line() {
        let mut d = DirtyMap::new();
        d.mark_row(7, 8192);
        let c = d.prepare(&[7], &[8], 8192, 2.0);
        assert_eq!(c.dirty_lines_flushed, 128);
        assert_eq!(c.added_ns, 256.0);
        assert!(d.is_empty());
    }

    #[test]
    fn destination_dirt_is_dropped() {
        let mut d = DirtyMap::new();
        d.mark(8, 3);
        let c = d.prepare(&[7], &[8], 8192, 2.0);
        assert_eq!(c.dirty_lines_flushed, 0);
        assert_eq!(c.added_ns, 0.0);
        assert!(!d.is_dirty(8, 3));
    }
}
