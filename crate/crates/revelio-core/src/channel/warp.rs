//! Perspective placement of the screen inside the camera frame.

use super::profile::ChannelProfile;
use crate::decoder::{canonical_corners, Homography, SingularHomography};
use crate::frame::FrameBuffer;
use rayon::prelude::*;

/// Renders a display frame into camera space at the profile's quad. Camera
/// pixels outside the screen get the profile background color. Sampling is
/// bilinear through the inverse homography.
pub fn warp_to_camera(
    frame: &FrameBuffer,
    profile: &ChannelProfile,
) -> Result<FrameBuffer, SingularHomography> {
    let forward = Homography::from_pairs(&canonical_corners(), &profile.quad)?;
    let inverse = forward.inverse()?;

    let (w, h) = (profile.camera_width, profile.camera_height);
    let (fw, fh) = (frame.width() as f64, frame.height() as f64);
    let src = frame.data();
    let src_w = frame.width();
    let bg = profile.background;

    let mut out = FrameBuffer::new(w, h);
    out.data_mut()
        .par_chunks_mut(w * 3)
        .enumerate()
        .for_each(|(y, row)| {
            for x in 0..w {
                let (sx, sy) = inverse.project(x as f64, y as f64);
                let px = &mut row[3 * x..3 * x + 3];
                // Half a pixel of slack keeps the outermost border row
                // renderable; beyond that is background.
                if sx < -0.5 || sy < -0.5 || sx > fw - 0.5 || sy > fh - 0.5 {
                    px.copy_from_slice(&bg);
                    continue;
                }
                let x0 = sx.floor();
                let y0 = sy.floor();
                let fx = sx - x0;
                let fy = sy - y0;
                let xi = x0 as isize;
                let yi = y0 as isize;
                let clamp_x = |v: isize| v.clamp(0, src_w as isize - 1) as usize;
                let clamp_y = |v: isize| v.clamp(0, frame.height() as isize - 1) as usize;
                let (x0c, x1c) = (clamp_x(xi), clamp_x(xi + 1));
                let (y0c, y1c) = (clamp_y(yi), clamp_y(yi + 1));
                for ch in 0..3 {
                    let p00 = src[(y0c * src_w + x0c) * 3 + ch] as f64;
                    let p10 = src[(y0c * src_w + x1c) * 3 + ch] as f64;
                    let p01 = src[(y1c * src_w + x0c) * 3 + ch] as f64;
                    let p11 = src[(y1c * src_w + x1c) * 3 + ch] as f64;
                    let top = p00 + (p10 - p00) * fx;
                    let bot = p01 + (p11 - p01) * fx;
                    px[ch] = (top + (bot - top) * fy).round() as u8;
                }
            }
        });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::color::SrgbPixel;
    use crate::frame::{FRAME_HEIGHT, FRAME_WIDTH};

    #[test]
    fn full_frame_quad_is_identity_within_rounding() {
        let mut frame = FrameBuffer::new(FRAME_WIDTH, FRAME_HEIGHT);
        for y in 0..FRAME_HEIGHT {
            for x in 0..FRAME_WIDTH {
                let v = ((x * 3 + y * 7) % 251) as u8;
                frame.set_pixel(x, y, SrgbPixel::new(v, v.wrapping_add(40), v / 2));
            }
        }
        let profile = ChannelProfile::default();
        let out = warp_to_camera(&frame, &profile).unwrap();
        let mut max_diff = 0i32;
        for (a, b) in out.data().iter().zip(frame.data().iter()) {
            max_diff = max_diff.max((*a as i32 - *b as i32).abs());
        }
        assert!(max_diff <= 1, "identity warp deviates by {max_diff}");
    }

    #[test]
    fn quarter_occupancy_confines_content() {
        let frame = FrameBuffer::filled(
            FRAME_WIDTH,
            FRAME_HEIGHT,
            SrgbPixel::new(200, 200, 200),
        );
        let profile: ChannelProfile = "occ25_yaw0".parse().unwrap();
        let out = warp_to_camera(&frame, &profile).unwrap();
        // Outside the central half-width/half-height region: background.
        assert_eq!(out.pixel(100, 100), SrgbPixel::new(32, 32, 32));
        assert_eq!(out.pixel(1800, 900), SrgbPixel::new(32, 32, 32));
        // Center shows the screen.
        assert_eq!(out.pixel(960, 540), SrgbPixel::new(200, 200, 200));
    }
}
