//! Symmetric flicker application and the full encode pipeline.

use super::dataframe::{build_data_frame, DataFrame};
use super::split::{FlickerSplit, SplitSelector};
use crate::color::{self, OklabPixel, SrgbPixel};
use crate::ecc::{rs_encode, RevelioCode, ShapeGrid};
use crate::frame::{FrameBuffer, FrameError, FRAME_WIDTH};
use rayon::prelude::*;

/// Which sign of the flicker delta a frame carries. Display frame 0 is even.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of_index(index: usize) -> Self {
        if index % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

/// The pre-clamp OKLAB delta applied to a pixel with the given split. The
/// odd-parity delta is the exact IEEE negation of the even-parity one.
#[inline]
pub fn flicker_delta(split: FlickerSplit, d: f64, parity: Parity) -> (f64, f64, f64) {
    let base = (split.lambda * d, split.alpha * d, split.beta * d);
    match parity {
        Parity::Even => base,
        Parity::Odd => (-base.0, -base.1, -base.2),
    }
}

/// Applies one parity of flicker over the data-frame mask. Mask-0 pixels are
/// byte-identical to the input; mask-1 pixels move by the selected split's
/// delta in OKLAB and come back through the gamut clamp.
pub fn apply_flicker(
    frame: &FrameBuffer,
    df: &DataFrame,
    parity: Parity,
    selector: &mut SplitSelector,
) -> Result<FrameBuffer, FrameError> {
    frame.expect_hd()?;

    // Memoize every distinct mask-pixel color first so the parallel pass
    // below only reads the cache.
    let mask = df.mask();
    let data = frame.data();
    let mut colors: Vec<u32> = mask
        .iter()
        .enumerate()
        .filter(|&(_, &m)| m != 0)
        .map(|(i, _)| {
            SrgbPixel::new(data[3 * i], data[3 * i + 1], data[3 * i + 2]).packed()
        })
        .collect();
    colors.sort_unstable();
    colors.dedup();
    selector.warm_cache(&colors);

    let d = selector.strength();
    let sign = parity.sign();
    let mut out = frame.clone();
    let sel: &SplitSelector = selector;
    out.data_mut()
        .par_chunks_mut(FRAME_WIDTH * 3)
        .zip(mask.par_chunks(FRAME_WIDTH))
        .for_each(|(row, mask_row)| {
            for (x, &m) in mask_row.iter().enumerate() {
                if m == 0 {
                    continue;
                }
                let p = SrgbPixel::new(row[3 * x], row[3 * x + 1], row[3 * x + 2]);
                let split = sel.split_at(sel.cached_index(p));
                let lab = color::srgb_to_oklab(p);
                let shifted = OklabPixel::new(
                    lab.l + sign * (split.lambda * d),
                    lab.a + sign * (split.alpha * d),
                    lab.b + sign * (split.beta * d),
                );
                let (q, _clamped) = color::oklab_to_srgb(shifted);
                row[3 * x] = q.r;
                row[3 * x + 1] = q.g;
                row[3 * x + 2] = q.b;
            }
        });
    Ok(out)
}

/// Summary statistics of an encode run.
#[derive(Debug, Clone, serde::Serialize)]
pub struct EncodeStats {
    /// Number of flickered pixels per frame.
    pub mask_pixels: usize,
    /// How many times each candidate split was chosen (over distinct colors).
    pub split_histogram: Vec<SplitCount>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct SplitCount {
    pub split: FlickerSplit,
    pub colors: u64,
}

/// Encodes a payload into a 60 FPS frame sequence: RS encode, interleave,
/// build the data frame, then flicker every frame with alternating parity.
/// Deterministic in all inputs.
pub fn encode_video(
    frames: &[FrameBuffer],
    code: RevelioCode,
    selector: &mut SplitSelector,
) -> Result<(Vec<FrameBuffer>, ShapeGrid, EncodeStats), FrameError> {
    let cw = rs_encode(code);
    let (df, grid) = build_data_frame(&cw);
    let mut out = Vec::with_capacity(frames.len());
    for (i, frame) in frames.iter().enumerate() {
        out.push(apply_flicker(frame, &df, Parity::of_index(i), selector)?);
    }

    let mut hist = vec![0u64; selector.candidates().len()];
    for (&_, &idx) in selector.cache_entries() {
        hist[idx as usize] += 1;
    }
    let split_histogram = hist
        .into_iter()
        .enumerate()
        .filter(|&(_, n)| n > 0)
        .map(|(i, colors)| SplitCount {
            split: selector.candidates()[i],
            colors,
        })
        .collect();

    Ok((
        out,
        grid,
        EncodeStats {
            mask_pixels: df.set_pixel_count(),
            split_histogram,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ecc::rs_encode;

    fn gray_frame(v: u8) -> FrameBuffer {
        FrameBuffer::filled(FRAME_WIDTH, crate::frame::FRAME_HEIGHT, SrgbPixel::new(v, v, v))
    }

    #[test]
    fn untouched_outside_mask() {
        let frame = gray_frame(128);
        let (df, _) = build_data_frame(&rs_encode(RevelioCode(0xBEEF)));
        let mut selector = SplitSelector::with_default_candidates(0.0425);
        let out = apply_flicker(&frame, &df, Parity::Even, &mut selector).unwrap();
        for y in (0..crate::frame::FRAME_HEIGHT).step_by(17) {
            for x in (0..FRAME_WIDTH).step_by(13) {
                if !df.is_set(x, y) {
                    assert_eq!(out.pixel(x, y), frame.pixel(x, y), "({x},{y}) changed");
                }
            }
        }
    }

    #[test]
    fn deltas_are_exact_negations() {
        let mut selector = SplitSelector::with_default_candidates(0.0425);
        for p in [
            SrgbPixel::new(128, 128, 128),
            SrgbPixel::new(3, 250, 77),
            SrgbPixel::new(255, 255, 255),
        ] {
            let split = selector.select(p);
            let even = flicker_delta(split, 0.0425, Parity::Even);
            let odd = flicker_delta(split, 0.0425, Parity::Odd);
            assert_eq!(even.0.to_bits(), (-odd.0).to_bits());
            assert_eq!(even.1.to_bits(), (-odd.1).to_bits());
            assert_eq!(even.2.to_bits(), (-odd.2).to_bits());
        }
    }

    #[test]
    fn encode_is_deterministic_and_alternating() {
        let frames = vec![gray_frame(100), gray_frame(100)];
        let mut s1 = SplitSelector::with_default_candidates(0.0425);
        let (out1, _, _) = encode_video(&frames, RevelioCode(0x1234), &mut s1).unwrap();
        let mut s2 = SplitSelector::with_default_candidates(0.0425);
        let (out2, _, _) = encode_video(&frames, RevelioCode(0x1234), &mut s2).unwrap();
        assert_eq!(out1, out2);
        // Same content, opposite parity: frames differ on the mask.
        assert_ne!(out1[0], out1[1]);
    }

    #[test]
    fn empty_input_gives_empty_output() {
        let mut s = SplitSelector::with_default_candidates(0.0425);
        let (out, _, _) = encode_video(&[], RevelioCode(1), &mut s).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn fused_pair_stays_close_to_original_midtones() {
        // Mid-gray fuses back to within 3/255 per channel.
        let frame = gray_frame(128);
        let (df, _) = build_data_frame(&rs_encode(RevelioCode(0xA5A5)));
        let mut selector = SplitSelector::with_default_candidates(0.0425);
        let even = apply_flicker(&frame, &df, Parity::Even, &mut selector).unwrap();
        let odd = apply_flicker(&frame, &df, Parity::Odd, &mut selector).unwrap();
        for y in (0..crate::frame::FRAME_HEIGHT).step_by(7) {
            for x in (0..FRAME_WIDTH).step_by(11) {
                if df.is_set(x, y) {
                    let o = frame.pixel(x, y);
                    let a = even.pixel(x, y);
                    let b = odd.pixel(x, y);
                    for (ov, av, bv) in [(o.r, a.r, b.r), (o.g, a.g, b.g), (o.b, a.b, b.b)] {
                        let fused = (av as f64 + bv as f64) / 2.0;
                        assert!(
                            (ov as f64 - fused).abs() <= 3.0,
                            "({x},{y}) fused residual too large: {ov} vs {fused}"
                        );
                    }
                }
            }
        }
    }
}
