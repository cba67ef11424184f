//! Charge-level functional model of an Ambit-capable DRAM chip.
//!
//! Rows hold binary charge between commands. During an `ACTIVATE` the cells
//! on each bitline share charge with it, the deviation from V_DD/2 decides the
//! sensed value, and every connected cell is then driven to that value (or
//! its complement, for a dual-contact cell reached through its n-wordline).

mod charge;
mod chip;

pub use charge::{
    cell_deviation, charge_share_deviation, Cell, DeviceParams, SenseAmp, SenseAmpState,
};
pub use chip::{Chip, ChipConfig, DramError, Port, Row, RowLoc, Wordline, WordlineSet};

/// Designated compute rows T0..T3.
pub const DESIGNATED_ROWS: usize = 4;
/// Dual-contact cell rows, each with a d-wordline and an n-wordline.
pub const DCC_ROWS: usize = 2;
/// C0 (all zeros) and C1 (all ones).
pub const CONTROL_ROWS: usize = 2;
/// Rows visible to software in each subarray.
pub const DATA_ROWS: usize = 1006;
/// Row addresses decoded per subarray: 16 B-group + 2 C-group + 1006 D-group.
pub const ROW_ADDRESSES: usize = 1024;
/// Storage rows per subarray.
pub const PHYSICAL_ROWS: usize = DESIGNATED_ROWS + DCC_ROWS + CONTROL_ROWS + DATA_ROWS;
/// Wordlines reachable through the B-group decoder.
pub const B_GROUP_WORDLINES: usize = DESIGNATED_ROWS + 2 * DCC_ROWS;
/// Bytes moved per column command.
pub const COLUMN_BYTES: usize = 64;
