//! Asynchronous 60 -> 120 FPS resampling with exposure blending.
//!
//! Camera frame k integrates the display over the window
//! [k/120 + phase/60, k/120 + phase/60 + exposure/120]. The window is at
//! most one camera period long, so it overlaps one or two display frames;
//! the output is their convex blend weighted by overlap duration. An
//! exposure of 0 is the instantaneous-shutter limit (sample at the window
//! start).

use crate::frame::FrameBuffer;

/// Which display frames a camera frame sees, with convex weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlendSpec {
    pub first: usize,
    pub second: Option<usize>,
    /// Weight of `first`; `second` carries `1 - weight`.
    pub weight: f64,
}

/// Blend arithmetic for camera frame `k`, in units of the camera period
/// (display frames span two units). `display_len` clamps indices at the end
/// of the sequence (the display holds its last frame).
pub fn blend_spec(k: usize, phase: f64, exposure: f64, display_len: usize) -> BlendSpec {
    debug_assert!(display_len > 0);
    let clamp = |j: f64| -> usize { (j.max(0.0) as usize).min(display_len - 1) };
    let start = k as f64 + 2.0 * phase;
    let first = clamp((start / 2.0).floor());
    if exposure <= 0.0 {
        return BlendSpec {
            first,
            second: None,
            weight: 1.0,
        };
    }
    let end = start + exposure;
    let boundary = 2.0 * ((start / 2.0).floor() + 1.0);
    if end > boundary {
        let w = (boundary - start) / exposure;
        let second = clamp(boundary / 2.0);
        if second == first {
            BlendSpec {
                first,
                second: None,
                weight: 1.0,
            }
        } else {
            BlendSpec {
                first,
                second: Some(second),
                weight: w,
            }
        }
    } else {
        BlendSpec {
            first,
            second: None,
            weight: 1.0,
        }
    }
}

/// Blends one camera frame out of the display frames per `spec`.
pub fn blend_frames(display: &[FrameBuffer], spec: BlendSpec) -> FrameBuffer {
    let first = &display[spec.first];
    match spec.second {
        None => first.clone(),
        Some(second_idx) => {
            let second = &display[second_idx];
            let w0 = spec.weight;
            let w1 = 1.0 - w0;
            let mut out = FrameBuffer::new(first.width(), first.height());
            for ((o, &a), &b) in out
                .data_mut()
                .iter_mut()
                .zip(first.data().iter())
                .zip(second.data().iter())
            {
                *o = (w0 * a as f64 + w1 * b as f64).round() as u8;
            }
            out
        }
    }
}

/// Resamples a 60 FPS display sequence into 120 FPS camera frames.
pub fn temporal_resample(display: &[FrameBuffer], phase: f64, exposure: f64) -> Vec<FrameBuffer> {
    assert!(!display.is_empty(), "display sequence must be nonempty");
    (0..display.len() * 2)
        .map(|k| blend_frames(display, blend_spec(k, phase, exposure, display.len())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::color::SrgbPixel;

    fn flat(v: u8) -> FrameBuffer {
        FrameBuffer::filled(4, 2, SrgbPixel::new(v, v, v))
    }

    #[test]
    fn aligned_instantaneous_shutter_duplicates_frames() {
        let display = vec![flat(10), flat(20), flat(30)];
        let out = temporal_resample(&display, 0.0, 0.0);
        assert_eq!(out.len(), 6);
        let values: Vec<u8> = out.iter().map(|f| f.data()[0]).collect();
        assert_eq!(values, vec![10, 10, 20, 20, 30, 30]);
    }

    /// Oracle: direct overlap arithmetic on the window definition.
    /// With phase 0.5 and full exposure the window [k+1, k+2] (camera
    /// periods) always lies inside a single display frame, alternating
    /// between the second half of frame k/2 and the first half of frame
    /// (k+1)/2 — so the output is a phase-shifted hold pattern, and no
    /// blending happens at all.
    #[test]
    fn phase_half_full_exposure_is_shifted_hold() {
        let display = vec![flat(10), flat(20), flat(30)];
        let out = temporal_resample(&display, 0.5, 1.0);
        let values: Vec<u8> = out.iter().map(|f| f.data()[0]).collect();
        assert_eq!(values, vec![10, 20, 20, 30, 30, 30]);
    }

    /// Phase 0.25 with full exposure straddles a display boundary on odd
    /// camera frames: window [k+0.5, k+1.5] crosses k+1 when k is odd,
    /// giving an exact 50/50 blend there.
    #[test]
    fn phase_quarter_blends_alternate_frames() {
        let display = vec![flat(10), flat(20), flat(30), flat(40)];
        let out = temporal_resample(&display, 0.25, 1.0);
        let values: Vec<u8> = out.iter().map(|f| f.data()[0]).collect();
        assert_eq!(values, vec![10, 15, 20, 25, 30, 35, 40, 40]);
    }

    #[test]
    fn blend_weights_are_convex() {
        for k in 0..40 {
            for &(phase, exposure) in &[(0.0, 1.0), (0.3, 0.8), (0.5, 1.0), (0.9, 0.5)] {
                let spec = blend_spec(k, phase, exposure, 20);
                assert!(spec.weight > 0.0 && spec.weight <= 1.0);
                if spec.second.is_none() {
                    assert_eq!(spec.weight, 1.0);
                }
            }
        }
    }

    #[test]
    fn output_is_bounded_by_contributors() {
        let display = vec![flat(17), flat(203)];
        let out = temporal_resample(&display, 0.3, 0.8);
        for f in &out {
            for &v in f.data() {
                assert!((17..=203).contains(&v));
            }
        }
    }

    #[test]
    fn rate_doubles() {
        let display: Vec<FrameBuffer> = (0..60).map(|i| flat(i as u8)).collect();
        assert_eq!(temporal_resample(&display, 0.3, 0.8).len(), 120);
    }
}
