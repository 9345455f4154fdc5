//! Error-correction layer: the 16-bit payload, its shortened Reed-Solomon
//! codeword, the symbol alphabet, and the grid interleaver.

pub mod gf;
mod interleave;
mod rs;
mod symbol;

pub use interleave::{
    bits_to_bytes, byte_cells, deinterleave, grid_to_bits, interleave, ShapeGrid, BITSTREAM_LEN,
    GRID_CELLS, GRID_COLS, GRID_ROWS,
};
pub use rs::{rs_decode, rs_encode, RsDecodeError};
pub use symbol::{shapes_to_bits, SoftBit, SymbolShape, ALL_SHAPES};

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Codeword length in GF(256) symbols: 2 payload bytes + 34 parity bytes.
pub const CODEWORD_LEN: usize = 36;
pub const PAYLOAD_LEN: usize = 2;
pub const PARITY_LEN: usize = CODEWORD_LEN - PAYLOAD_LEN;

/// The 16-bit payload embedded in a video scene.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RevelioCode(pub u16);

impl fmt::Display for RevelioCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{:04X}", self.0)
    }
}

impl FromStr for RevelioCode {
    type Err = String;

    /// Parses `0xABCD` or bare hex `ABCD`; anything above 16 bits is
    /// rejected.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let hex = s
            .strip_prefix("0x")
            .or_else(|| s.strip_prefix("0X"))
            .unwrap_or(s);
        if hex.is_empty() || hex.len() > 4 {
            return Err(format!("`{s}` is not a 16-bit hex code"));
        }
        u16::from_str_radix(hex, 16)
            .map(RevelioCode)
            .map_err(|_| format!("`{s}` is not a 16-bit hex code"))
    }
}

/// A 36-byte systematic Reed-Solomon codeword.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Codeword(pub [u8; CODEWORD_LEN]);

impl Codeword {
    pub fn bytes(&self) -> &[u8; CODEWORD_LEN] {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn code_parses_hex_forms() {
        assert_eq!("0xABCD".parse::<RevelioCode>(), Ok(RevelioCode(0xABCD)));
        assert_eq!("00ff".parse::<RevelioCode>(), Ok(RevelioCode(0x00FF)));
        assert!("0x1FFFF".parse::<RevelioCode>().is_err());
        assert!("xyz".parse::<RevelioCode>().is_err());
        assert_eq!(RevelioCode(0xABCD).to_string(), "0xABCD");
    }
}
