//! Duplication code `ECC(A) = AA`. Any bitwise operation applied to both
//! halves of the codewords yields the codeword of the result.

use thiserror::Error;

use crate::bits::BitRow;
use crate::controller::BbopKind;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TmrError {
    #[error("codeword corrupt: payload and replica differ at bit {bit}")]
    CorruptInput { bit: usize },
    #[error("codeword lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("{0} expects {1} operand(s)")]
    Arity(BbopKind, usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TmrCodeword {
    pub payload: BitRow,
    pub replica: BitRow,
}

impl TmrCodeword {
    pub fn len(&self) -> usize {
        self.payload.len()
    }

    pub fn is_empty(&self) -> bool {
        self.payload.is_empty()
    }

    pub fn is_valid(&self) -> bool {
        self.payload == self.replica
    }
}

pub fn tmr_encode(bits: &BitRow) -> TmrCodeword {
    TmrCodeword {
        payload: bits.clone(),
        replica: bits.clone(),
    }
}

pub fn tmr_check(cw: &TmrCodeword) -> Result<(), TmrError> {
    if cw.payload.len() != cw.replica.len() {
        return Err(TmrError::LengthMismatch(cw.payload.len(), cw.replica.len()));
    }
    match (&cw.payload ^ &cw.replica).iter_ones().next() {
        Some(bit) => Err(TmrError::CorruptInput { bit }),
        None => Ok(()),
    }
}

/// Applies `kind` to payloads and replicas independently, after checking
/// the inputs.
pub fn tmr_op(kind: BbopKind, a: &TmrCodeword, b: Option<&TmrCodeword>) -> Result<TmrCodeword, TmrError> {
    if b.is_some() != (kind.arity() == 2) {
        return Err(TmrError::Arity(kind, kind.arity()));
    }
    tmr_check(a)?;
    if let Some(b) = b {
        tmr_check(b)?;
        if b.len() != a.len() {
            return Err(TmrError::LengthMismatch(a.len(), b.len()));
        }
    }
    Ok(TmrCodeword {
        payload: kind.apply(&a.payload, b.map(|b| &b.payload)),
        replica: kind.apply(&a.replica, b.map(|b| &b.replica)),
    })
}
