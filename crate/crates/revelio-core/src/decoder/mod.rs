//! Decoder: recovers the embedded payload from a 120 FPS recording.
//!
//! A decoding epoch takes N consecutive frames, accumulates weighted absolute
//! frame differences per OKLAB channel, detects the flickered border, warps
//! the combined plane back to 1920x1080, classifies all 144 symbols from nine
//! jittered patches each, and runs the de-interleaved bit stream through the
//! Reed-Solomon decoder. Up to three disjoint epochs are tried sequentially;
//! when two or more fail, their bit streams are combined (erasures resolved,
//! conflicts erased) for one more RS attempt.

mod accumulate;
mod homography;
mod patch;
mod quad;

pub use accumulate::{
    accumulate_differential, accumulate_epoch, accumulate_raw, decay_weights, gaussian_blur,
    AccumulateError, AccumulatorImage, Epoch, GaussianParams,
};
pub use homography::{
    canonical_corners, correct_perspective, warp_plane_to_frame, Homography, SingularHomography,
};
pub use patch::{
    classify_patch, extract_patch, extract_patches, patch_centers, render_shape_patch,
    vote_symbol, PatchVerdict, DEFAULT_JITTER, DEFAULT_MARGIN_THRESHOLD,
    DEFAULT_SOFTMAX_TEMPERATURE, PATCH_SIZE,
};
pub use quad::{detect_frame_quad, detect_quad_in_plane, otsu_threshold, Quad, QuadError};

use crate::ecc::{
    bits_to_bytes, grid_to_bits, rs_decode, RevelioCode, ShapeGrid, SoftBit, BITSTREAM_LEN,
    GRID_COLS, GRID_ROWS,
};
use crate::frame::FrameBuffer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

/// Everything the decoder can be tuned with; the defaults are what the
/// acceptance runs use.
#[derive(Debug, Clone, PartialEq, serde::Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecoderParams {
    /// Epoch length N in camera frames.
    pub epoch_len: usize,
    /// Decay base for the difference weights w_i = decay^(i-1).
    pub decay: f64,
    /// Weight c of the L plane in the combined detection image.
    pub lightness_gain: f64,
    /// Gaussian sigma applied to L before accumulation.
    pub blur_sigma: f64,
    /// Gaussian kernel radius (9x9 kernel at the default 4).
    pub blur_radius: usize,
    /// Patch jitter in pixels.
    pub jitter: isize,
    /// Softmax margin a patch classification must clear.
    pub margin_threshold: f64,
    /// Softmax temperature over the correlation scores.
    pub softmax_temperature: f64,
}

impl Default for DecoderParams {
    fn default() -> Self {
        Self {
            epoch_len: 12,
            decay: 0.9,
            lightness_gain: 0.25,
            blur_sigma: 2.0,
            blur_radius: 4,
            jitter: DEFAULT_JITTER,
            margin_threshold: DEFAULT_MARGIN_THRESHOLD,
            softmax_temperature: DEFAULT_SOFTMAX_TEMPERATURE,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecodeError {
    #[error("recording too short: {got} frames, need at least {min}")]
    RecordingTooShort { got: usize, min: usize },
    #[error("bit streams have mismatched lengths")]
    LengthMismatch,
    #[error("all decoding paths failed")]
    DecodeFailure,
}

/// Per-epoch diagnostics carried into the decode report.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct EpochDiagnostics {
    pub start: usize,
    pub len: usize,
    /// Detected border corners (TL,TR,BR,BL) or None when detection failed.
    pub quad: Option<[[f64; 2]; 4]>,
    pub erased_symbols: usize,
    pub erased_bits: usize,
    /// Histogram of classification margins in 10 bins over [0,1].
    pub margin_histogram: [u32; 10],
    pub rs_ok: bool,
    pub payload: Option<u16>,
}

/// Outcome of one epoch: its soft bit stream plus diagnostics.
#[derive(Debug, Clone)]
pub struct EpochResult {
    pub bits: Vec<SoftBit>,
    pub payload: Option<RevelioCode>,
    pub diagnostics: EpochDiagnostics,
}

/// Classifies all 144 cells of a corrected combined plane into a grid.
fn classify_grid(
    corrected: &crate::frame::Plane,
    params: &DecoderParams,
) -> (ShapeGrid, usize, [u32; 10]) {
    let verdicts: Vec<(usize, usize, Vec<PatchVerdict>)> = (0..GRID_ROWS * GRID_COLS)
        .into_par_iter()
        .map(|cell| {
            let row = cell / GRID_COLS;
            let col = cell % GRID_COLS;
            let patches = extract_patches(corrected, row, col, params.jitter);
            let verdicts: Vec<PatchVerdict> = patches
                .iter()
                .map(|p| classify_patch(p, params.margin_threshold, params.softmax_temperature))
                .collect();
            (row, col, verdicts)
        })
        .collect();

    let mut grid = ShapeGrid::empty();
    let mut erased_patches = 0usize;
    let mut histogram = [0u32; 10];
    for (row, col, vs) in verdicts {
        for v in &vs {
            let bin = ((v.margin * 10.0) as usize).min(9);
            histogram[bin] += 1;
            if v.shape.is_none() {
                erased_patches += 1;
            }
        }
        grid.set(row, col, vote_symbol(&vs));
    }
    (grid, erased_patches, histogram)
}

/// Runs the full pipeline on one epoch. A failed border detection yields an
/// all-erased bit stream rather than an error so time diversity can still
/// use the other epochs.
pub fn decode_epoch(epoch: &Epoch, params: &DecoderParams) -> Result<EpochResult, AccumulateError> {
    let weights = decay_weights(params.decay, epoch.len().saturating_sub(1));
    let blur = GaussianParams {
        sigma: params.blur_sigma,
        radius: params.blur_radius,
    };
    // Detection and classification run on the differential accumulator:
    // static content cancels, so the border and symbols stay dominant no
    // matter what the scene looks like.
    let acc = accumulate_differential(epoch, &weights, params.lightness_gain, blur)?;

    let quad = match detect_frame_quad(&acc) {
        Ok(q) => q,
        Err(_) => {
            return Ok(EpochResult {
                bits: vec![SoftBit::Erased; BITSTREAM_LEN],
                payload: None,
                diagnostics: EpochDiagnostics {
                    start: epoch.start,
                    len: epoch.len(),
                    quad: None,
                    erased_symbols: GRID_ROWS * GRID_COLS,
                    erased_bits: BITSTREAM_LEN,
                    margin_histogram: [0; 10],
                    rs_ok: false,
                    payload: None,
                },
            });
        }
    };

    let corrected = warp_plane_to_frame(&acc.combined, &quad)
        .expect("convex quad cannot be singular");
    let (grid, _erased_patches, margin_histogram) = classify_grid(&corrected, params);

    let bits = grid_to_bits(&grid);
    let erased_symbols = grid.cells().iter().filter(|c| c.is_none()).count();
    let erased_bits = bits.iter().filter(|b| **b == SoftBit::Erased).count();
    let payload = rs_decode(&bits_to_bytes(&bits)).ok();

    Ok(EpochResult {
        bits,
        payload,
        diagnostics: EpochDiagnostics {
            start: epoch.start,
            len: epoch.len(),
            quad: Some(quad.corners),
            erased_symbols,
            erased_bits,
            margin_histogram,
            rs_ok: payload.is_some(),
            payload: payload.map(|c| c.0),
        },
    })
}

/// Combines two or three epoch bit streams: positions where all non-erased
/// bits agree resolve to that bit; conflicts and all-erased positions stay
/// erased.
pub fn combine_epochs(streams: &[&[SoftBit]]) -> Result<Vec<SoftBit>, DecodeError> {
    let len = streams.first().map(|s| s.len()).unwrap_or(0);
    if streams.iter().any(|s| s.len() != len) {
        return Err(DecodeError::LengthMismatch);
    }
    let mut out = Vec::with_capacity(len);
    for i in 0..len {
        let mut value: Option<SoftBit> = None;
        let mut conflict = false;
        for s in streams {
            match s[i] {
                SoftBit::Erased => {}
                bit => match value {
                    None => value = Some(bit),
                    Some(prev) if prev == bit => {}
                    Some(_) => conflict = true,
                },
            }
        }
        out.push(if conflict {
            SoftBit::Erased
        } else {
            value.unwrap_or(SoftBit::Erased)
        });
    }
    Ok(out)
}

/// Full decode report for a recording.
#[derive(Debug, Clone, Serialize)]
pub struct RecordingReport {
    pub payload: Option<u16>,
    pub seed: u64,
    pub epochs: Vec<EpochDiagnostics>,
    /// Payload recovered by the time-diversity combine, if that is what
    /// succeeded.
    pub combined_payload: Option<u16>,
}

/// Decodes a 120 FPS recording with up to three disjoint epochs drawn at
/// seeded random offsets. Epochs run sequentially: the first success
/// returns immediately; once two or more have failed, their combined bit
/// stream gets an RS attempt after each failure.
pub fn decode_recording(
    recording: &[FrameBuffer],
    seed: u64,
    params: &DecoderParams,
) -> (Option<RevelioCode>, RecordingReport) {
    let mut report = RecordingReport {
        payload: None,
        seed,
        epochs: Vec::new(),
        combined_payload: None,
    };
    if recording.len() < 2 {
        return (None, report);
    }
    let n = params.epoch_len.min(recording.len()).max(2);
    let max_epochs = (recording.len() / n).min(3).max(1);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut taken: Vec<(usize, usize)> = Vec::new();
    let mut results: Vec<EpochResult> = Vec::new();

    for _ in 0..max_epochs {
        // Rejection-sample a start disjoint from the epochs already used;
        // fall back to a deterministic scan when the draw keeps colliding.
        let limit = recording.len() - n;
        let mut start = None;
        for _ in 0..64 {
            let s = rng.gen_range(0..=limit);
            if taken.iter().all(|&(ts, te)| s + n <= ts || s >= te) {
                start = Some(s);
                break;
            }
        }
        let start = start.or_else(|| {
            (0..=limit).find(|&s| taken.iter().all(|&(ts, te)| s + n <= ts || s >= te))
        });
        let Some(start) = start else { break };
        taken.push((start, start + n));

        let epoch = Epoch::from_srgb(&recording[start..start + n], start);
        let result = decode_epoch(&epoch, params).expect("epoch length validated");
        report.epochs.push(result.diagnostics.clone());

        if let Some(code) = result.payload {
            report.payload = Some(code.0);
            return (Some(code), report);
        }
        results.push(result);

        if results.len() >= 2 {
            let streams: Vec<&[SoftBit]> = results.iter().map(|r| r.bits.as_slice()).collect();
            let combined = combine_epochs(&streams).expect("streams share one length");
            if let Ok(code) = rs_decode(&bits_to_bytes(&combined)) {
                report.payload = Some(code.0);
                report.combined_payload = Some(code.0);
                return (Some(code), report);
            }
        }
    }
    (None, report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ecc::SoftBit::{Erased, One, Zero};

    #[test]
    fn combine_resolves_erasures_and_marks_conflicts() {
        let a = [One, Zero, Erased, Erased];
        let b = [Erased, One, One, Erased];
        let c = [One, Erased, One, Erased];
        let out = combine_epochs(&[&a, &b, &c]).unwrap();
        // Position 0: 1 with erasure support -> 1.
        // Position 1: 0 vs 1 conflict -> erased.
        // Position 2: erasure resolved by two agreeing 1s.
        // Position 3: nothing known.
        assert_eq!(out, vec![One, Erased, One, Erased]);
    }

    #[test]
    fn combine_rejects_mismatched_lengths() {
        let a = [One, Zero];
        let b = [One];
        assert_eq!(
            combine_epochs(&[&a, &b]).unwrap_err(),
            DecodeError::LengthMismatch
        );
    }

    #[test]
    fn diversity_resolves_disjoint_erasures() {
        use crate::ecc::{grid_to_bits, interleave, rs_encode, RevelioCode};
        // Two streams from the same codeword, each with erasures heavy
        // enough to sink RS alone (one erased bit in each of 35 bytes), but
        // placed on different bits so together they cancel.
        let code = RevelioCode(0xC0DE);
        let truth = grid_to_bits(&interleave(&rs_encode(code)));

        let mut s1 = truth.clone();
        let mut s2 = truth.clone();
        for byte in 0..35usize {
            let cells = crate::ecc::byte_cells(byte);
            let (r1, c1) = cells[0];
            let (r2, c2) = cells[2];
            s1[2 * (r1 * GRID_COLS + c1)] = Erased;
            s2[2 * (r2 * GRID_COLS + c2)] = Erased;
        }
        assert!(rs_decode(&bits_to_bytes(&s1)).is_err());
        assert!(rs_decode(&bits_to_bytes(&s2)).is_err());

        let combined = combine_epochs(&[&s1, &s2]).unwrap();
        assert_eq!(rs_decode(&bits_to_bytes(&combined)), Ok(code));
    }
}
