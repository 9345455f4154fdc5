//! Symbol classification on the perspective-corrected accumulator.
//!
//! Every grid cell yields nine 86x86 patches (one centered, eight jittered in
//! the compass directions to absorb residual frame-detection error). Each
//! patch is scored by normalized cross-correlation against the four ellipse
//! templates rendered by the encoder's own rasterizer, the scores go through
//! a softmax, and a confident top-1 wins; otherwise the patch is an erasure.
//! Cells are then settled by majority vote over their nine verdicts.

use crate::ecc::{SymbolShape, ALL_SHAPES};
use crate::encoder::{rasterize_symbol, SymbolGeometry};
use crate::frame::Plane;
use std::sync::LazyLock;

/// Patch side: the largest symbol bounding box is 74 px, padded by 15%.
pub const PATCH_SIZE: usize = 86;
/// Default jitter offset in pixels.
pub const DEFAULT_JITTER: isize = 6;
/// Default margin the top softmax probability must win by.
pub const DEFAULT_MARGIN_THRESHOLD: f64 = 0.35;
/// Default softmax temperature over the correlation scores. Correlations
/// live in [-1,1], much tighter than classifier logits, so they are
/// sharpened before the margin test.
pub const DEFAULT_SOFTMAX_TEMPERATURE: f64 = 0.1;

const PATCH_LEN: usize = PATCH_SIZE * PATCH_SIZE;

/// Zero-mean, unit-variance ellipse templates, one per shape.
static TEMPLATES: LazyLock<[Vec<f32>; 4]> = LazyLock::new(|| {
    let make = |shape: SymbolShape| -> Vec<f32> {
        // Rasterize with the encoder's geometry at a center far from frame
        // edges, then translate into the patch canvas.
        let center = (960usize, 540usize);
        let geom = SymbolGeometry { center, shape };
        let mut canvas = vec![0.0f32; PATCH_LEN];
        let half = (PATCH_SIZE / 2) as isize;
        for (x, y) in rasterize_symbol(&geom) {
            let dx = x as isize - center.0 as isize + half;
            let dy = y as isize - center.1 as isize + half;
            if (0..PATCH_SIZE as isize).contains(&dx) && (0..PATCH_SIZE as isize).contains(&dy) {
                canvas[dy as usize * PATCH_SIZE + dx as usize] = 1.0;
            }
        }
        let n = PATCH_LEN as f64;
        let mean = canvas.iter().map(|&v| v as f64).sum::<f64>() / n;
        let var = canvas
            .iter()
            .map(|&v| (v as f64 - mean) * (v as f64 - mean))
            .sum::<f64>()
            / n;
        let inv_std = 1.0 / var.sqrt();
        canvas
            .iter()
            .map(|&v| ((v as f64 - mean) * inv_std) as f32)
            .collect()
    };
    [
        make(SymbolShape::E0),
        make(SymbolShape::E45),
        make(SymbolShape::E90),
        make(SymbolShape::E135),
    ]
});

/// Verdict for one patch: a shape with its softmax margin, or an erasure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchVerdict {
    pub shape: Option<SymbolShape>,
    /// Difference between the top two softmax probabilities.
    pub margin: f64,
}

/// Copies a patch centered at `(cx, cy)`; out-of-bounds reads clamp to the
/// plane edge.
pub fn extract_patch(plane: &Plane, cx: isize, cy: isize) -> Vec<f32> {
    let half = (PATCH_SIZE / 2) as isize;
    let mut out = vec![0.0f32; PATCH_LEN];
    for dy in 0..PATCH_SIZE as isize {
        for dx in 0..PATCH_SIZE as isize {
            out[(dy as usize) * PATCH_SIZE + dx as usize] =
                plane.get_clamped(cx - half + dx, cy - half + dy);
        }
    }
    out
}

/// The nine patch centers for a grid cell: original plus eight compass
/// jitters.
pub fn patch_centers(row: usize, col: usize, jitter: isize) -> [(isize, isize); 9] {
    let (cx, cy) = SymbolGeometry::cell_center(row, col);
    let (cx, cy) = (cx as isize, cy as isize);
    let j = jitter;
    [
        (cx, cy),
        (cx, cy - j),     // N
        (cx, cy + j),     // S
        (cx + j, cy),     // E
        (cx - j, cy),     // W
        (cx + j, cy - j), // NE
        (cx - j, cy - j), // NW
        (cx + j, cy + j), // SE
        (cx - j, cy + j), // SW
    ]
}

/// Extracts the nine patches of a cell from the corrected plane.
pub fn extract_patches(plane: &Plane, row: usize, col: usize, jitter: isize) -> Vec<Vec<f32>> {
    patch_centers(row, col, jitter)
        .into_iter()
        .map(|(cx, cy)| extract_patch(plane, cx, cy))
        .collect()
}

/// Classifies one patch against the four templates.
pub fn classify_patch(patch: &[f32], margin_threshold: f64, temperature: f64) -> PatchVerdict {
    debug_assert_eq!(patch.len(), PATCH_LEN);
    let n = PATCH_LEN as f64;
    let mut sum = 0.0f64;
    let mut sum_sq = 0.0f64;
    for &v in patch {
        sum += v as f64;
        sum_sq += v as f64 * v as f64;
    }
    let mean = sum / n;
    let var = sum_sq / n - mean * mean;
    if var <= 1e-12 {
        // Constant patch carries no shape information.
        return PatchVerdict {
            shape: None,
            margin: 0.0,
        };
    }
    let inv = 1.0 / (n * var.sqrt());

    // Templates are zero-mean, so the patch mean drops out of the dot
    // product and NCC_k = <patch, t_k> / (n * sigma_patch).
    let mut scores = [0.0f64; 4];
    for (k, tmpl) in TEMPLATES.iter().enumerate() {
        let mut dot = 0.0f64;
        for (p, t) in patch.iter().zip(tmpl.iter()) {
            dot += (*p as f64) * (*t as f64);
        }
        scores[k] = dot * inv;
    }

    let maxs = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores
        .iter()
        .map(|s| ((s - maxs) / temperature).exp())
        .collect();
    let total: f64 = exps.iter().sum();
    let mut probs: Vec<(usize, f64)> = exps
        .iter()
        .enumerate()
        .map(|(k, e)| (k, e / total))
        .collect();
    probs.sort_by(|a, b| b.1.total_cmp(&a.1));

    let margin = probs[0].1 - probs[1].1;
    if margin > margin_threshold {
        PatchVerdict {
            shape: Some(ALL_SHAPES[probs[0].0]),
            margin,
        }
    } else {
        PatchVerdict {
            shape: None,
            margin,
        }
    }
}

/// Majority vote over the nine patch verdicts. The winner needs at least
/// three votes and must strictly beat the runner-up; anything else is an
/// erasure.
pub fn vote_symbol(verdicts: &[PatchVerdict]) -> Option<SymbolShape> {
    let mut counts = [0usize; 4];
    for v in verdicts {
        if let Some(s) = v.shape {
            counts[s.value() as usize] += 1;
        }
    }
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by_key(|&k| std::cmp::Reverse(counts[k]));
    let top = counts[order[0]];
    let runner_up = counts[order[1]];
    if top >= 3 && top > runner_up {
        Some(SymbolShape::from_value(order[0] as u8))
    } else {
        None
    }
}

/// Renders a clean binary patch for a shape (used by tests and fixtures):
/// `amplitude` inside the ellipse, 0 outside.
pub fn render_shape_patch(shape: SymbolShape, amplitude: f32) -> Vec<f32> {
    let tmpl = &TEMPLATES[ALL_SHAPES.iter().position(|&s| s == shape).unwrap()];
    // The normalized template is positive exactly on the ellipse interior.
    tmpl.iter()
        .map(|&v| if v > 0.0 { amplitude } else { 0.0 })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn classify_default(patch: &[f32]) -> PatchVerdict {
        classify_patch(patch, DEFAULT_MARGIN_THRESHOLD, DEFAULT_SOFTMAX_TEMPERATURE)
    }

    #[test]
    fn clean_rendered_shapes_classify_confidently() {
        for shape in ALL_SHAPES {
            let patch = render_shape_patch(shape, 200.0);
            let verdict = classify_default(&patch);
            assert_eq!(verdict.shape, Some(shape));
            assert!(
                verdict.margin > DEFAULT_MARGIN_THRESHOLD,
                "{shape:?} margin {}",
                verdict.margin
            );
        }
    }

    #[test]
    fn constant_patch_is_erased() {
        let patch = vec![42.0f32; PATCH_LEN];
        assert_eq!(classify_default(&patch).shape, None);
    }

    #[test]
    fn noise_patches_are_erased() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut erased = 0u32;
        const TRIALS: u32 = 1000;
        for _ in 0..TRIALS {
            let patch: Vec<f32> = (0..PATCH_LEN)
                .map(|_| {
                    let n: f64 = rng.sample(StandardNormal);
                    (n * 40.0) as f32
                })
                .collect();
            if classify_default(&patch).shape.is_none() {
                erased += 1;
            }
        }
        assert!(
            erased as f64 / TRIALS as f64 >= 0.99,
            "only {erased}/{TRIALS} noise patches erased"
        );
    }

    #[test]
    fn patch_geometry() {
        // Cell (0,0) center patch spans [17, 103) in both axes.
        let centers = patch_centers(0, 0, DEFAULT_JITTER);
        assert_eq!(centers[0], (60, 60));
        assert_eq!(centers[1], (60, 54)); // N
        let half = (PATCH_SIZE / 2) as isize;
        assert_eq!(60 - half, 17);
        assert_eq!(60 - half + PATCH_SIZE as isize, 103);
        assert_eq!(centers.len(), 9);
    }

    #[test]
    fn voting_rules() {
        let v = |shape| PatchVerdict {
            shape,
            margin: 0.9,
        };
        // Unanimity.
        let all_e90: Vec<_> = (0..9).map(|_| v(Some(SymbolShape::E90))).collect();
        assert_eq!(vote_symbol(&all_e90), Some(SymbolShape::E90));

        // 4-4 tie with one erasure.
        let mut tie: Vec<_> = (0..4).map(|_| v(Some(SymbolShape::E0))).collect();
        tie.extend((0..4).map(|_| v(Some(SymbolShape::E45))));
        tie.push(v(None));
        assert_eq!(vote_symbol(&tie), None);

        // Plurality of 3 with 2 opposing and 4 erasures.
        let mut plur: Vec<_> = (0..3).map(|_| v(Some(SymbolShape::E135))).collect();
        plur.extend((0..2).map(|_| v(Some(SymbolShape::E0))));
        plur.extend((0..4).map(|_| v(None)));
        assert_eq!(vote_symbol(&plur), Some(SymbolShape::E135));

        // Two votes are never enough.
        let mut two: Vec<_> = (0..2).map(|_| v(Some(SymbolShape::E45))).collect();
        two.extend((0..7).map(|_| v(None)));
        assert_eq!(vote_symbol(&two), None);
    }
}
