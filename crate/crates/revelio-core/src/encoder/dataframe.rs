//! Data-frame construction: where the flicker goes.
//!
//! A data frame is a 1920x1080 binary mask. It is 1 on the union of the 144
//! rasterized symbol ellipses (16 columns x 9 rows on a 120-pixel lattice, 60
//! pixels in from the boundary) and on a 13-pixel border along all four frame
//! edges. The border is what the decoder locks onto for frame detection; the
//! two regions never touch.

use crate::ecc::{interleave, Codeword, ShapeGrid, SymbolShape, GRID_COLS, GRID_ROWS};
use crate::frame::{FRAME_HEIGHT, FRAME_WIDTH};

/// Width of the flickered frame border in pixels.
pub const BORDER_WIDTH: usize = 13;
/// Spacing of the symbol lattice.
pub const LATTICE_STEP: usize = 120;
/// Offset of the first symbol center from the frame edge.
pub const LATTICE_MARGIN: usize = 60;
/// Semi-minor axis of every symbol ellipse.
pub const SEMI_MINOR: f64 = 10.0;
/// Semi-major axis of the diagonal ellipses (major axis 100 px).
pub const SEMI_MAJOR_DIAGONAL: f64 = 50.0;
/// Semi-major axis of the axis-aligned ellipses (major axis 74 px).
pub const SEMI_MAJOR_ALIGNED: f64 = 37.0;

/// Placement and shape of one symbol ellipse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolGeometry {
    /// Ellipse center in pixel coordinates.
    pub center: (usize, usize),
    pub shape: SymbolShape,
}

impl SymbolGeometry {
    /// Center of the grid cell at (row, col).
    pub fn cell_center(row: usize, col: usize) -> (usize, usize) {
        (
            LATTICE_MARGIN + LATTICE_STEP * col,
            LATTICE_MARGIN + LATTICE_STEP * row,
        )
    }

    pub fn for_cell(row: usize, col: usize, shape: SymbolShape) -> Self {
        Self {
            center: Self::cell_center(row, col),
            shape,
        }
    }

    pub fn semi_major(&self) -> f64 {
        match self.shape {
            SymbolShape::E45 | SymbolShape::E135 => SEMI_MAJOR_DIAGONAL,
            SymbolShape::E0 | SymbolShape::E90 => SEMI_MAJOR_ALIGNED,
        }
    }

    /// Exact direction cosines of the major axis; the diagonals use
    /// sqrt(2)/2 so mirrored shapes rasterize to mirrored pixel sets.
    fn axis(&self) -> (f64, f64) {
        const D: f64 = std::f64::consts::FRAC_1_SQRT_2;
        match self.shape {
            SymbolShape::E0 => (1.0, 0.0),
            SymbolShape::E45 => (D, D),
            SymbolShape::E90 => (0.0, 1.0),
            SymbolShape::E135 => (-D, D),
        }
    }
}

/// Pixels covered by a symbol ellipse: (x,y) is inside when
/// ((dx cos + dy sin)/a)^2 + ((-dx sin + dy cos)/b)^2 <= 1.
pub fn rasterize_symbol(geom: &SymbolGeometry) -> Vec<(usize, usize)> {
    let (cx, cy) = (geom.center.0 as f64, geom.center.1 as f64);
    let a = geom.semi_major();
    let b = SEMI_MINOR;
    let (cos, sin) = geom.axis();
    let reach = a.ceil() as isize;

    let mut pixels = Vec::new();
    for dy in -reach..=reach {
        for dx in -reach..=reach {
            let fx = dx as f64;
            let fy = dy as f64;
            let major = (fx * cos + fy * sin) / a;
            let minor = (-fx * sin + fy * cos) / b;
            if major * major + minor * minor <= 1.0 {
                let x = cx + fx;
                let y = cy + fy;
                if x >= 0.0 && y >= 0.0 && (x as usize) < FRAME_WIDTH && (y as usize) < FRAME_HEIGHT
                {
                    pixels.push((x as usize, y as usize));
                }
            }
        }
    }
    pixels
}

/// Per-pixel flicker mask. Frames at even display index apply +delta over
/// mask pixels, odd frames apply -delta.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataFrame {
    mask: Vec<u8>,
}

impl DataFrame {
    #[inline]
    pub fn is_set(&self, x: usize, y: usize) -> bool {
        self.mask[y * FRAME_WIDTH + x] != 0
    }

    pub fn mask(&self) -> &[u8] {
        &self.mask
    }

    pub fn set_pixel_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m != 0).count()
    }
}

/// Builds the data frame for a codeword: interleaves it onto the symbol
/// grid, rasterizes every symbol, and adds the border.
pub fn build_data_frame(cw: &Codeword) -> (DataFrame, ShapeGrid) {
    let grid = interleave(cw);
    let mut mask = vec![0u8; FRAME_WIDTH * FRAME_HEIGHT];

    for y in 0..FRAME_HEIGHT {
        let edge_row = y < BORDER_WIDTH || y >= FRAME_HEIGHT - BORDER_WIDTH;
        let row = &mut mask[y * FRAME_WIDTH..(y + 1) * FRAME_WIDTH];
        if edge_row {
            row.fill(1);
        } else {
            row[..BORDER_WIDTH].fill(1);
            row[FRAME_WIDTH - BORDER_WIDTH..].fill(1);
        }
    }

    for row in 0..GRID_ROWS {
        for col in 0..GRID_COLS {
            let shape = grid.get(row, col).expect("interleave fills every cell");
            let geom = SymbolGeometry::for_cell(row, col, shape);
            for (x, y) in rasterize_symbol(&geom) {
                mask[y * FRAME_WIDTH + x] = 1;
            }
        }
    }

    (DataFrame { mask }, grid)
}
