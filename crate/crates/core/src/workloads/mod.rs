//! Application workloads built on the runtime, each checked against a
//! scalar recomputation in tests.

pub mod bitmap;
pub mod bitweaving;
pub mod sets;

pub use bitmap::{bitmap_query, BitmapResult, BitmapTally, BitmapWorkload};
pub use bitweaving::{bitweaving_scan, scan_once, BitWeavingTable, LoadedTable, ScanError, ScanResult};
pub use sets::{set_op, SetInstance, SetOpKind, SetResult};
