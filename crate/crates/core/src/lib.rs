//! Functional, timing and energy simulator for bulk bitwise operations
//! executed inside DRAM.
//!
//! The model is layered:
//!
//! - [`dram`]: cells, sense amplifiers, subarrays and banks, with charge
//!   sharing driving the result of every activation.
//! - [`controller`]: expands `and`, `or`, `not`, `nand`, `nor`, `xor` and
//!   `xnor` into ACTIVATE/PRECHARGE command sequences over reserved rows.
//! - [`timing`]: latency, energy and throughput of command traces, and a
//!   bandwidth-bound baseline to compare against.
//! - [`reliability`]: Monte-Carlo and worst-case analysis of triple-row
//!   activation under process variation.
//! - [`runtime`]: host-side bitvectors, allocation, coherence and fallback.
//! - [`workloads`]: bitmap indices, bit-sliced scans and set operations.
//!
//! ```
//! use ambit::bits::BitRow;
//! use ambit::controller::{AmbitController, BbopKind, RowAddress};
//! use ambit::dram::ChipConfig;
//!
//! let mut ctl = AmbitController::with_config(ChipConfig::default().with_row_bits(256)).unwrap();
//! let (a, b, out) = (RowAddress::data(0, 0, 0), RowAddress::data(0, 0, 1), RowAddress::data(0, 0, 2));
//! ctl.write(a, &BitRow::from_fn(256, |i| i % 2 == 0)).unwrap();
//! ctl.write(b, &BitRow::from_fn(256, |i| i % 3 == 0)).unwrap();
//! let trace = ctl.exec_bbop(BbopKind::And, out, a, Some(b)).unwrap();
//! assert_eq!(trace.len(), 12);
//! assert_eq!(ctl.read(out).unwrap(), BitRow::from_fn(256, |i| i % 6 == 0));
//! ```
//!
//! The `examples/` directory has one runnable program per capability.

pub mod bits;
pub mod cli;
pub mod config;
pub mod controller;
pub mod dram;
pub mod reliability;
pub mod runtime;
pub mod timing;
pub mod trace;
pub mod workloads;
