use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bits::BitRow;

/// Bulk bitwise operations exposed through `bbop`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BbopKind {
    Not,
    And,
    Or,
    Nand,
    Nor,
    Xor,
    Xnor,
}

impl BbopKind {
    pub const ALL: [BbopKind; 7] = [
        BbopKind::Not,
        BbopKind::And,
        BbopKind::Or,
        BbopKind::Nand,
        BbopKind::Nor,
        BbopKind::Xor,
        BbopKind::Xnor,
    ];

    pub fn arity(self) -> usize {
        match self {
            BbopKind::Not => 1,
            _ => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BbopKind::Not => "not",
            BbopKind::And => "and",
            BbopKind::Or => "or",
            BbopKind::Nand => "nand",
            BbopKind::Nor => "nor",
            BbopKind::Xor => "xor",
            BbopKind::Xnor => "xnor",
        }
    }

    /// Operand reads plus the result write when run over a memory channel.
    pub fn streams(self) -> usize {
        self.arity() + 1
    }

    /// Host-side evaluation, used for fallbacks.
    pub fn apply(self, a: &BitRow, b: Option<&BitRow>) -> BitRow {
        let b = || b.expect("two-input operation needs a second operand");
        match self {
            BbopKind::Not => !a,
            BbopKind::And => a & b(),
            BbopKind::Or => a | b(),
            BbopKind::Nand => !&(a & b()),
            BbopKind::Nor => !&(a | b()),
            BbopKind::Xor => a ^ b(),
            BbopKind::Xnor => !&(a ^ b()),
        }
    }
}

impl fmt::Display for BbopKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BbopKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        BbopKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown bulk bitwise operation `{s}`"))
    }
}

/// Symbolic row operand of a command sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Operand {
    Src1,
    Src2,
    Dst,
    B(u8),
    C0,
    C1,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Step {
    Aap(Operand, Operand),
    Ap(Operand),
}

impl Step {
    /// Both activations go through the B-group decoder, so the split decoder
    /// cannot overlap them.
    pub fn is_b_to_b(self) -> bool {
        matches!(self, Step::Aap(Operand::B(_), Operand::B(_)))
    }
}

use Operand::{Dst, Src1, Src2, B, C0, C1};
use Step::{Aap, Ap};

const NOT: &[Step] = &[Aap(Src1, B(5)), Aap(B(4), Dst)];

const AND: &[Step] = &[
    Aap(Src1, B(0)),
    Aap(Src2, B(1)),
    Aap(C0, B(2)),
    Aap(B(12), Dst),
];

const OR: &[Step] = &[
    Aap(Src1, B(0)),
    Aap(Src2, B(1)),
    Aap(C1, B(2)),
    Aap(B(12), Dst),
];

const NAND: &[Step] = &[
    Aap(Src1, B(0)),
    Aap(Src2, B(1)),
    Aap(C0, B(2)),
    Aap(B(12), B(5)),
    Aap(B(4), Dst),
];

const NOR: &[Step] = &[
    Aap(Src1, B(0)),
    Aap(Src2, B(1)),
    Aap(C1, B(2)),
    Aap(B(12), B(5)),
    Aap(B(4), Dst),
];

// T0 = i, !DCC0 = !i, T1 = j, !DCC1 = !j; then (!i & j) and (i & !j) by
// two TRAs, OR-ed by a third.
const XOR: &[Step] = &[
    Aap(Src1, B(8)),
    Aap(Src2, B(9)),
    Aap(C0, B(10)),
    Ap(B(14)),
    Ap(B(15)),
    Aap(C1, B(2)),
    Aap(B(12), Dst),
];

// Dual of XOR: (!i | j) and (i | !j), AND-ed.
const XNOR: &[Step] = &[
    Aap(Src1, B(8)),
    Aap(Src2, B(9)),
    Aap(C1, B(10)),
    Ap(B(14)),
    Ap(B(15)),
    Aap(C0, B(2)),
    Aap(B(12), Dst),
];

/// AAP/AP steps computing `dst = kind(src1, src2)` inside one subarray.
pub fn sequence_for(kind: BbopKind) -> &'static [Step] {
    match kind {
        BbopKind::Not => NOT,
        BbopKind::And => AND,
        BbopKind::Or => OR,
        BbopKind::Nand => NAND,
        BbopKind::Nor => NOR,
        BbopKind::Xor => XOR,
        BbopKind::Xnor => XNOR,
    }
}
