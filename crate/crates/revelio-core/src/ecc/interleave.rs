//! Codeword-to-grid interleaving.
//!
//! The 16x9 symbol grid carries 36 codeword bytes. Bytes 0..32 are packed as
//! 2x2 symbol blocks tiling rows 0-7 in block-row-major order, so each byte
//! survives or dies with a compact pixel neighborhood. Row 8 carries the last
//! four bytes as 1x4 runs.

use super::symbol::{shapes_to_bits, SoftBit, SymbolShape};
use crate::ecc::{Codeword, CODEWORD_LEN};

pub const GRID_ROWS: usize = 9;
pub const GRID_COLS: usize = 16;
pub const GRID_CELLS: usize = GRID_ROWS * GRID_COLS;
pub const BITSTREAM_LEN: usize = 2 * GRID_CELLS;

/// The 9x16 grid of decoded (or erased) symbols, row-major with row 0 at the
/// top of the frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShapeGrid {
    cells: [Option<SymbolShape>; GRID_CELLS],
}

impl ShapeGrid {
    pub fn new(cells: [Option<SymbolShape>; GRID_CELLS]) -> Self {
        Self { cells }
    }

    pub fn empty() -> Self {
        Self {
            cells: [None; GRID_CELLS],
        }
    }

    pub fn get(&self, row: usize, col: usize) -> Option<SymbolShape> {
        self.cells[row * GRID_COLS + col]
    }

    pub fn set(&mut self, row: usize, col: usize, shape: Option<SymbolShape>) {
        self.cells[row * GRID_COLS + col] = shape;
    }

    pub fn cells(&self) -> &[Option<SymbolShape>; GRID_CELLS] {
        &self.cells
    }
}

/// Grid cells covered by codeword byte `index`, in bit order (most
/// significant pair first).
pub fn byte_cells(index: usize) -> [(usize, usize); 4] {
    debug_assert!(index < CODEWORD_LEN);
    if index < 32 {
        let block_row = index / 8;
        let block_col = index % 8;
        let r = 2 * block_row;
        let c = 2 * block_col;
        [(r, c), (r, c + 1), (r + 1, c), (r + 1, c + 1)]
    } else {
        let c = 4 * (index - 32);
        [(8, c), (8, c + 1), (8, c + 2), (8, c + 3)]
    }
}

/// Spreads a codeword over the symbol grid.
pub fn interleave(cw: &Codeword) -> ShapeGrid {
    let mut grid = ShapeGrid::empty();
    for (index, &byte) in cw.0.iter().enumerate() {
        for (k, (r, c)) in byte_cells(index).into_iter().enumerate() {
            let two_bits = (byte >> (6 - 2 * k)) & 0b11;
            grid.set(r, c, Some(SymbolShape::from_value(two_bits)));
        }
    }
    grid
}

/// Inverse of [`interleave`]. A byte is erased when any of its four symbols
/// is erased, because Reed-Solomon corrects whole alphabets.
pub fn deinterleave(grid: &ShapeGrid) -> [Option<u8>; CODEWORD_LEN] {
    let mut out = [None; CODEWORD_LEN];
    for (index, slot) in out.iter_mut().enumerate() {
        let mut byte = 0u8;
        let mut ok = true;
        for (k, (r, c)) in byte_cells(index).into_iter().enumerate() {
            match grid.get(r, c) {
                Some(shape) => byte |= shape.value() << (6 - 2 * k),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            *slot = Some(byte);
        }
    }
    out
}

/// Flattens a grid to its 288-entry soft bit stream, row-major cells with
/// the high bit of each symbol first. This is the representation the
/// time-diversity combiner works on.
pub fn grid_to_bits(grid: &ShapeGrid) -> Vec<SoftBit> {
    let mut out = Vec::with_capacity(BITSTREAM_LEN);
    for cell in grid.cells() {
        out.extend_from_slice(&shapes_to_bits(*cell));
    }
    out
}

/// Rebuilds byte-level (possibly erased) codeword values from a soft bit
/// stream laid out as in [`grid_to_bits`].
pub fn bits_to_bytes(bits: &[SoftBit]) -> [Option<u8>; CODEWORD_LEN] {
    debug_assert_eq!(bits.len(), BITSTREAM_LEN);
    let mut out = [None; CODEWORD_LEN];
    for (index, slot) in out.iter_mut().enumerate() {
        let mut byte = 0u8;
        let mut ok = true;
        for (k, (r, c)) in byte_cells(index).into_iter().enumerate() {
            let cell = r * GRID_COLS + c;
            for (bi, &bit) in bits[2 * cell..2 * cell + 2].iter().enumerate() {
                match bit {
                    SoftBit::Zero => {}
                    SoftBit::One => byte |= 1 << (7 - 2 * k - bi),
                    SoftBit::Erased => {
                        ok = false;
                    }
                }
            }
        }
        if ok {
            *slot = Some(byte);
        }
    }
    out
}
