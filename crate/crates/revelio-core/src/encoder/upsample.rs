//! Sample-and-hold frame-rate conversion to the 60 FPS display rate.

use crate::frame::FrameBuffer;
use thiserror::Error;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("unsupported source frame rate {0}; expected 24, 30, or 60")]
pub struct UnsupportedRate(pub u32);

/// Upsamples a 24/30/60 FPS sequence to 60 FPS by holding frames: 30 FPS
/// duplicates every frame, 24 FPS holds frames in a 3-2 cadence (so 24k
/// input frames become 60k), and 60 FPS passes through.
pub fn upsample_sample_and_hold(
    frames: &[FrameBuffer],
    src_fps: u32,
) -> Result<Vec<FrameBuffer>, UnsupportedRate> {
    let holds: &dyn Fn(usize) -> usize = match src_fps {
        60 => &|_| 1,
        30 => &|_| 2,
        24 => &|i| if i % 2 == 0 { 3 } else { 2 },
        other => return Err(UnsupportedRate(other)),
    };
    let mut out = Vec::new();
    for (i, f) in frames.iter().enumerate() {
        for _ in 0..holds(i) {
            out.push(f.clone());
        }
    }
    Ok(out)
}
