//! Symbol shapes and the soft bit alphabet.
//!
//! Each grid symbol is an ellipse whose orientation carries two bits; a
//! symbol the decoder cannot identify becomes an erasure, which propagates
//! to both of its bits.

use serde::{Deserialize, Serialize};

/// The four ellipse orientations. Each maps to a two-bit value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SymbolShape {
    /// Horizontal, 0 degrees, bits 00.
    E0,
    /// Diagonal, 45 degrees, bits 01.
    E45,
    /// Vertical, 90 degrees, bits 10.
    E90,
    /// Anti-diagonal, 135 degrees, bits 11.
    E135,
}

pub const ALL_SHAPES: [SymbolShape; 4] = [
    SymbolShape::E0,
    SymbolShape::E45,
    SymbolShape::E90,
    SymbolShape::E135,
];

impl SymbolShape {
    /// Two-bit value of the shape.
    pub const fn value(self) -> u8 {
        match self {
            SymbolShape::E0 => 0b00,
            SymbolShape::E45 => 0b01,
            SymbolShape::E90 => 0b10,
            SymbolShape::E135 => 0b11,
        }
    }

    pub const fn from_value(v: u8) -> Self {
        match v & 0b11 {
            0b00 => SymbolShape::E0,
            0b01 => SymbolShape::E45,
            0b10 => SymbolShape::E90,
            _ => SymbolShape::E135,
        }
    }

    /// Orientation in radians.
    pub fn angle(self) -> f64 {
        match self {
            SymbolShape::E0 => 0.0,
            SymbolShape::E45 => std::f64::consts::FRAC_PI_4,
            SymbolShape::E90 => std::f64::consts::FRAC_PI_2,
            SymbolShape::E135 => 3.0 * std::f64::consts::FRAC_PI_4,
        }
    }
}

/// A bit that may be erased.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SoftBit {
    Zero,
    One,
    Erased,
}

impl SoftBit {
    pub fn from_bit(b: bool) -> Self {
        if b {
            SoftBit::One
        } else {
            SoftBit::Zero
        }
    }
}

/// Maps a (possibly erased) symbol to its two bits, most significant first.
pub fn shapes_to_bits(shape: Option<SymbolShape>) -> [SoftBit; 2] {
    match shape {
        Some(s) => {
            let v = s.value();
            [
                SoftBit::from_bit(v & 0b10 != 0),
                SoftBit::from_bit(v & 0b01 != 0),
            ]
        }
        None => [SoftBit::Erased, SoftBit::Erased],
    }
}
