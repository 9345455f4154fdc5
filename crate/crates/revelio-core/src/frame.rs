//! Video frame storage: interleaved 8-bit sRGB buffers plus the float planes
//! the decoder accumulates into.

use crate::color::{self, OklabPixel, SrgbPixel};
use std::sync::LazyLock;
use rayon::prelude::*;
use thiserror::Error;

pub const FRAME_WIDTH: usize = 1920;
pub const FRAME_HEIGHT: usize = 1080;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FrameError {
    #[error("expected {expected_w}x{expected_h} frame, got {got_w}x{got_h}")]
    DimensionMismatch {
        expected_w: usize,
        expected_h: usize,
        got_w: usize,
        got_h: usize,
    },
}

/// One video frame: interleaved RGB bytes in sRGB.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameBuffer {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl FrameBuffer {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![0; width * height * 3],
        }
    }

    pub fn from_raw(width: usize, height: usize, data: Vec<u8>) -> Self {
        assert_eq!(data.len(), width * height * 3, "raw buffer size mismatch");
        Self {
            width,
            height,
            data,
        }
    }

    /// A frame filled with a single color.
    pub fn filled(width: usize, height: usize, p: SrgbPixel) -> Self {
        let mut data = Vec::with_capacity(width * height * 3);
        for _ in 0..width * height {
            data.extend_from_slice(&[p.r, p.g, p.b]);
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> SrgbPixel {
        let i = (y * self.width + x) * 3;
        SrgbPixel::new(self.data[i], self.data[i + 1], self.data[i + 2])
    }

    #[inline]
    pub fn set_pixel(&mut self, x: usize, y: usize, p: SrgbPixel) {
        let i = (y * self.width + x) * 3;
        self.data[i] = p.r;
        self.data[i + 1] = p.g;
        self.data[i + 2] = p.b;
    }

    pub fn expect_hd(&self) -> Result<(), FrameError> {
        if self.width != FRAME_WIDTH || self.height != FRAME_HEIGHT {
            return Err(FrameError::DimensionMismatch {
                expected_w: FRAME_WIDTH,
                expected_h: FRAME_HEIGHT,
                got_w: self.width,
                got_h: self.height,
            });
        }
        Ok(())
    }

    /// Converts to OKLAB planes. Row-parallel; per-pixel results do not
    /// depend on scheduling.
    ///
    /// This is the decoder's bulk path, so it runs the OKLAB matrices in
    /// f32 with a Newton-refined cube root instead of going through
    /// [`color::srgb_to_oklab`]. The mapping stays a pure function of the
    /// 24-bit color (within ~1e-5 of the exact one), which is what the
    /// differential accumulator needs: identical pixels still cancel
    /// exactly.
    pub fn to_oklab(&self) -> OklabFrame {
        let (w, h) = (self.width, self.height);
        let decode = &*SRGB_DECODE_F32;
        let mut l = vec![0f32; w * h];
        let mut a = vec![0f32; w * h];
        let mut b = vec![0f32; w * h];
        l.par_chunks_mut(w)
            .zip(a.par_chunks_mut(w))
            .zip(b.par_chunks_mut(w))
            .zip(self.data.par_chunks(w * 3))
            .for_each(|(((lr, ar), br), row)| {
                for x in 0..w {
                    let r = decode[row[3 * x] as usize];
                    let g = decode[row[3 * x + 1] as usize];
                    let bl = decode[row[3 * x + 2] as usize];
                    let lm = cbrt_fast(0.412_221_46 * r + 0.536_332_55 * g + 0.051_445_995 * bl);
                    let mm = cbrt_fast(0.211_903_5 * r + 0.680_699_5 * g + 0.107_396_96 * bl);
                    let sm = cbrt_fast(0.088_302_46 * r + 0.281_718_85 * g + 0.629_978_7 * bl);
                    lr[x] = 0.210_454_26 * lm + 0.793_617_8 * mm - 0.004_072_047 * sm;
                    ar[x] = 1.977_998_5 * lm - 2.428_592_2 * mm + 0.450_593_7 * sm;
                    br[x] = 0.025_904_037 * lm + 0.782_771_77 * mm - 0.808_675_77 * sm;
                }
            });
        OklabFrame {
            width: w,
            height: h,
            l: Plane::from_raw(w, h, l),
            a: Plane::from_raw(w, h, a),
            b: Plane::from_raw(w, h, b),
        }
    }
}

/// f32 gamma-decode table shared by the bulk conversion.
static SRGB_DECODE_F32: LazyLock<[f32; 256]> = LazyLock::new(|| {
    let mut t = [0.0f32; 256];
    for (i, v) in t.iter_mut().enumerate() {
        *v = color::srgb_decode(i as f64 / 255.0) as f32;
    }
    t
});

/// Cube root for nonnegative f32: exponent-trick seed plus two Newton
/// steps, accurate to about 1e-6 relative.
#[inline]
fn cbrt_fast(x: f32) -> f32 {
    if x <= 0.0 {
        return 0.0;
    }
    let mut y = f32::from_bits(x.to_bits() / 3 + 710_235_477);
    y = (2.0 / 3.0) * y + x / (3.0 * y * y);
    y = (2.0 / 3.0) * y + x / (3.0 * y * y);
    y
}

/// A single-channel float image.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl Plane {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    pub fn from_raw(width: usize, height: usize, data: Vec<f32>) -> Self {
        assert_eq!(data.len(), width * height);
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f32) {
        self.data[y * self.width + x] = v;
    }

    /// Clamped read: coordinates outside the plane replicate the edge.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> f32 {
        let xc = x.clamp(0, self.width as isize - 1) as usize;
        let yc = y.clamp(0, self.height as isize - 1) as usize;
        self.data[yc * self.width + xc]
    }

    /// Bilinear sample with edge clamping.
    pub fn sample_bilinear(&self, x: f64, y: f64) -> f32 {
        let x0 = x.floor();
        let y0 = y.floor();
        let fx = (x - x0) as f32;
        let fy = (y - y0) as f32;
        let x0 = x0 as isize;
        let y0 = y0 as isize;
        let p00 = self.get_clamped(x0, y0);
        let p10 = self.get_clamped(x0 + 1, y0);
        let p01 = self.get_clamped(x0, y0 + 1);
        let p11 = self.get_clamped(x0 + 1, y0 + 1);
        let top = p00 + (p10 - p00) * fx;
        let bot = p01 + (p11 - p01) * fx;
        top + (bot - top) * fy
    }

    /// Min-max normalization to [0,255]. A constant plane normalizes to all
    /// zeros.
    pub fn normalize_255(&mut self) {
        let mut min = f32::INFINITY;
        let mut max = f32::NEG_INFINITY;
        for &v in &self.data {
            min = min.min(v);
            max = max.max(v);
        }
        if max <= min {
            self.data.fill(0.0);
            return;
        }
        let scale = 255.0 / (max - min);
        self.data.par_iter_mut().for_each(|v| *v = (*v - min) * scale);
    }
}

/// One frame as OKLAB planes.
#[derive(Debug, Clone)]
pub struct OklabFrame {
    pub width: usize,
    pub height: usize,
    pub l: Plane,
    pub a: Plane,
    pub b: Plane,
}

impl OklabFrame {
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> OklabPixel {
        OklabPixel::new(
            self.l.get(x, y) as f64,
            self.a.get(x, y) as f64,
            self.b.get(x, y) as f64,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bilinear_identity_on_lattice() {
        let mut p = Plane::new(4, 3);
        for y in 0..3 {
            for x in 0..4 {
                p.set(x, y, (y * 4 + x) as f32);
            }
        }
        for y in 0..3 {
            for x in 0..4 {
                assert_eq!(p.sample_bilinear(x as f64, y as f64), (y * 4 + x) as f32);
            }
        }
        assert_eq!(p.sample_bilinear(0.5, 0.0), 0.5);
        assert_eq!(p.sample_bilinear(0.0, 0.5), 2.0);
    }

    #[test]
    fn fast_conversion_tracks_exact_conversion() {
        // The bulk f32 path must stay within 1e-4 of the f64 reference
        // across the gamut (flicker deltas are two orders larger).
        let mut frame = FrameBuffer::new(64, 64);
        for i in 0..64 * 64 {
            let r = (i * 7) % 256;
            let g = (i * 13 + 89) % 256;
            let b = (i * 29 + 211) % 256;
            frame.data_mut()[3 * i] = r as u8;
            frame.data_mut()[3 * i + 1] = g as u8;
            frame.data_mut()[3 * i + 2] = b as u8;
        }
        let planes = frame.to_oklab();
        for y in 0..64 {
            for x in 0..64 {
                let exact = color::srgb_to_oklab(frame.pixel(x, y));
                let got = planes.get(x, y);
                assert!((got.l - exact.l).abs() < 1e-4, "L at ({x},{y})");
                assert!((got.a - exact.a).abs() < 1e-4, "A at ({x},{y})");
                assert!((got.b - exact.b).abs() < 1e-4, "B at ({x},{y})");
            }
        }
    }

    #[test]
    fn fast_cbrt_is_accurate() {
        for i in 1..10_000 {
            let x = i as f32 / 1000.0;
            let got = cbrt_fast(x) as f64;
            let want = (x as f64).cbrt();
            assert!(
                ((got - want) / want).abs() < 1e-5,
                "cbrt({x}) = {got}, want {want}"
            );
        }
        assert_eq!(cbrt_fast(0.0), 0.0);
    }

    #[test]
    fn normalize_constant_plane_is_zero() {
        let mut p = Plane::from_raw(2, 2, vec![7.0; 4]);
        p.normalize_255();
        assert!(p.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn normalize_spans_full_range() {
        let mut p = Plane::from_raw(2, 2, vec![1.0, 3.0, 2.0, 5.0]);
        p.normalize_255();
        assert_eq!(p.get(0, 0), 0.0);
        assert_eq!(p.get(1, 1), 255.0);
    }
}
