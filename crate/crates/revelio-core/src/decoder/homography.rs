//! Homographies from 4-point correspondences (direct linear transform) and
//! perspective resampling back to the canonical 1920x1080 frame.

use super::accumulate::AccumulatorImage;
use super::quad::Quad;
use crate::frame::{Plane, FRAME_HEIGHT, FRAME_WIDTH};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("correspondences are degenerate (collinear or coincident points)")]
pub struct SingularHomography;

/// A 3x3 projective map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography {
    pub h: [[f64; 3]; 3],
}

impl Homography {
    /// DLT from four point pairs; h22 is fixed to 1 and the 8x8 system is
    /// solved by Gaussian elimination with partial pivoting.
    pub fn from_pairs(
        src: &[[f64; 2]; 4],
        dst: &[[f64; 2]; 4],
    ) -> Result<Self, SingularHomography> {
        let mut m = [[0.0f64; 9]; 8];
        for i in 0..4 {
            let [sx, sy] = src[i];
            let [dx, dy] = dst[i];
            m[2 * i] = [sx, sy, 1.0, 0.0, 0.0, 0.0, -sx * dx, -sy * dx, dx];
            m[2 * i + 1] = [0.0, 0.0, 0.0, sx, sy, 1.0, -sx * dy, -sy * dy, dy];
        }

        // Forward elimination with partial pivoting on the augmented system.
        for col in 0..8 {
            let (pivot_row, pivot_val) = (col..8)
                .map(|r| (r, m[r][col].abs()))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            if pivot_val < 1e-10 {
                return Err(SingularHomography);
            }
            m.swap(col, pivot_row);
            for r in col + 1..8 {
                let f = m[r][col] / m[col][col];
                if f != 0.0 {
                    for c in col..9 {
                        m[r][c] -= f * m[col][c];
                    }
                }
            }
        }
        let mut x = [0.0f64; 8];
        for row in (0..8).rev() {
            let mut acc = m[row][8];
            for c in row + 1..8 {
                acc -= m[row][c] * x[c];
            }
            x[row] = acc / m[row][row];
        }

        let h = Homography {
            h: [
                [x[0], x[1], x[2]],
                [x[3], x[4], x[5]],
                [x[6], x[7], 1.0],
            ],
        };
        if !h.h.iter().flatten().all(|v| v.is_finite()) {
            return Err(SingularHomography);
        }
        Ok(h)
    }

    /// Maps the canonical 1920x1080 frame corners onto a quad.
    pub fn frame_to_quad(quad: &Quad) -> Result<Self, SingularHomography> {
        Self::from_pairs(&canonical_corners(), &quad.corners)
    }

    #[inline]
    pub fn project(&self, x: f64, y: f64) -> (f64, f64) {
        let w = self.h[2][0] * x + self.h[2][1] * y + self.h[2][2];
        (
            (self.h[0][0] * x + self.h[0][1] * y + self.h[0][2]) / w,
            (self.h[1][0] * x + self.h[1][1] * y + self.h[1][2]) / w,
        )
    }

    /// Matrix inverse via the adjugate; fails when the determinant vanishes.
    pub fn inverse(&self) -> Result<Self, SingularHomography> {
        let h = &self.h;
        let det = h[0][0] * (h[1][1] * h[2][2] - h[1][2] * h[2][1])
            - h[0][1] * (h[1][0] * h[2][2] - h[1][2] * h[2][0])
            + h[0][2] * (h[1][0] * h[2][1] - h[1][1] * h[2][0]);
        if det.abs() < 1e-12 || !det.is_finite() {
            return Err(SingularHomography);
        }
        let adj = [
            [
                h[1][1] * h[2][2] - h[1][2] * h[2][1],
                h[0][2] * h[2][1] - h[0][1] * h[2][2],
                h[0][1] * h[1][2] - h[0][2] * h[1][1],
            ],
            [
                h[1][2] * h[2][0] - h[1][0] * h[2][2],
                h[0][0] * h[2][2] - h[0][2] * h[2][0],
                h[0][2] * h[1][0] - h[0][0] * h[1][2],
            ],
            [
                h[1][0] * h[2][1] - h[1][1] * h[2][0],
                h[0][1] * h[2][0] - h[0][0] * h[2][1],
                h[0][0] * h[1][1] - h[0][1] * h[1][0],
            ],
        ];
        let mut out = [[0.0; 3]; 3];
        for r in 0..3 {
            for c in 0..3 {
                out[r][c] = adj[r][c] / det;
            }
        }
        Ok(Homography { h: out })
    }
}

/// Canonical display-frame corners (pixel centers), TL TR BR BL.
pub fn canonical_corners() -> [[f64; 2]; 4] {
    let w = (FRAME_WIDTH - 1) as f64;
    let h = (FRAME_HEIGHT - 1) as f64;
    [[0.0, 0.0], [w, 0.0], [w, h], [0.0, h]]
}

/// Resamples one plane from the quad back to 1920x1080 with bilinear
/// interpolation.
pub fn warp_plane_to_frame(plane: &Plane, quad: &Quad) -> Result<Plane, SingularHomography> {
    let h = Homography::frame_to_quad(quad)?;
    let mut out = Plane::new(FRAME_WIDTH, FRAME_HEIGHT);
    out.data_mut()
        .par_chunks_mut(FRAME_WIDTH)
        .enumerate()
        .for_each(|(y, row)| {
            for (x, o) in row.iter_mut().enumerate() {
                let (sx, sy) = h.project(x as f64, y as f64);
                *o = plane.sample_bilinear(sx, sy);
            }
        });
    Ok(out)
}

/// Perspective-corrects all accumulator planes to 1920x1080.
pub fn correct_perspective(
    acc: &AccumulatorImage,
    quad: &Quad,
) -> Result<AccumulatorImage, SingularHomography> {
    Ok(AccumulatorImage {
        l: warp_plane_to_frame(&acc.l, quad)?,
        a: warp_plane_to_frame(&acc.a, quad)?,
        b: warp_plane_to_frame(&acc.b, quad)?,
        combined: warp_plane_to_frame(&acc.combined, quad)?,
    })
}
