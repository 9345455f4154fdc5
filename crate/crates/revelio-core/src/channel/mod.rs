//! Parametric screen-to-camera channel simulation.
//!
//! The pipeline mirrors what a hand-held phone pointed at a screen does to
//! the video: the display frame is placed in the camera frame by a
//! perspective warp, the 120 FPS shutter integrates over one or two display
//! frames depending on its phase and exposure, and the sensor adds tone
//! distortion plus Gaussian noise. Everything is seeded and deterministic.

mod degrade;
mod profile;
mod temporal;
mod warp;

pub use degrade::{degrade, derive_seed};
pub use profile::{full_frame_quad, ChannelProfile, ViewPointPreset};
pub use temporal::{blend_frames, blend_spec, temporal_resample, BlendSpec};
pub use warp::warp_to_camera;

use crate::decoder::SingularHomography;
use crate::frame::FrameBuffer;

/// Simulates a full recording: warp each display frame into camera space,
/// resample 60 -> 120 FPS with exposure blending, then degrade each camera
/// frame. Warped display frames are computed on demand and cached pairwise,
/// so memory stays at two display frames plus the output.
pub fn simulate(
    display: &[FrameBuffer],
    profile: &ChannelProfile,
) -> Result<Vec<FrameBuffer>, SingularHomography> {
    if display.is_empty() {
        return Ok(Vec::new());
    }
    // A full-frame quad at matching resolution renders pixel-for-pixel, so
    // the bilinear warp can be skipped entirely.
    let identity_placement = profile.camera_width == display[0].width()
        && profile.camera_height == display[0].height()
        && profile
            .quad
            .iter()
            .zip(crate::decoder::canonical_corners().iter())
            .all(|(a, b)| (a[0] - b[0]).abs() < 1e-9 && (a[1] - b[1]).abs() < 1e-9);

    let mut cache: Vec<(usize, FrameBuffer)> = Vec::with_capacity(2);
    let warped = |idx: usize, cache: &mut Vec<(usize, FrameBuffer)>| -> Result<usize, SingularHomography> {
        if let Some(pos) = cache.iter().position(|(i, _)| *i == idx) {
            return Ok(pos);
        }
        let frame = if identity_placement {
            display[idx].clone()
        } else {
            warp_to_camera(&display[idx], profile)?
        };
        if cache.len() == 2 {
            // Evict the older (smaller index) entry; playback advances.
            let evict = if cache[0].0 < cache[1].0 { 0 } else { 1 };
            cache.remove(evict);
        }
        cache.push((idx, frame));
        Ok(cache.len() - 1)
    };

    let mut recording = Vec::with_capacity(display.len() * 2);
    for k in 0..display.len() * 2 {
        let spec = blend_spec(k, profile.phase, profile.exposure, display.len());
        let camera = match spec.second {
            None => {
                let pos = warped(spec.first, &mut cache)?;
                cache[pos].1.clone()
            }
            Some(second) => {
                let pos_a = warped(spec.first, &mut cache)?;
                let a = cache[pos_a].1.clone();
                let pos_b = warped(second, &mut cache)?;
                let b = &cache[pos_b].1;
                let w0 = spec.weight;
                let w1 = 1.0 - w0;
                let mut out = FrameBuffer::new(a.width(), a.height());
                for ((o, &x), &y) in out
                    .data_mut()
                    .iter_mut()
                    .zip(a.data().iter())
                    .zip(b.data().iter())
                {
                    *o = (w0 * x as f64 + w1 * y as f64).round() as u8;
                }
                out
            }
        };
        recording.push(degrade(&camera, profile, k));
    }
    Ok(recording)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::color::SrgbPixel;
    use crate::frame::{FRAME_HEIGHT, FRAME_WIDTH};

    #[test]
    fn transparent_channel_duplicates_frames() {
        let display: Vec<FrameBuffer> = (0..4)
            .map(|i| {
                FrameBuffer::filled(
                    FRAME_WIDTH,
                    FRAME_HEIGHT,
                    SrgbPixel::new(40 + 10 * i, 0, 0),
                )
            })
            .collect();
        let profile = ChannelProfile::default();
        let recording = simulate(&display, &profile).unwrap();
        assert_eq!(recording.len(), 8);
        for (k, frame) in recording.iter().enumerate() {
            assert_eq!(frame, &display[k / 2], "camera frame {k}");
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let display: Vec<FrameBuffer> = (0..2)
            .map(|i| FrameBuffer::filled(64, 36, SrgbPixel::new(100 + i, 50, 200)))
            .collect();
        let profile = ChannelProfile {
            noise_sigma: 3.0,
            seed: 1234,
            camera_width: 64,
            camera_height: 36,
            ..ChannelProfile::default()
        };
        let a = simulate(&display, &profile).unwrap();
        let b = simulate(&display, &profile).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_display_is_empty_recording() {
        assert!(simulate(&[], &ChannelProfile::default()).unwrap().is_empty());
    }
}
