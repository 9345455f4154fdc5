//! Conversion between 8-bit sRGB, linear RGB, and OKLAB.
//!
//! Both the encoder and the decoder work in OKLAB, where lightness and the
//! two opponent-color axes are close to perceptually orthogonal. All math is
//! done in `f64`; quantization to 8 bits rounds half away from zero so results
//! are identical across platforms.

use std::sync::LazyLock;

/// An 8-bit sRGB pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SrgbPixel {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl SrgbPixel {
    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        Self { r, g, b }
    }

    /// Packs the pixel into a single integer, useful as a cache key.
    pub const fn packed(self) -> u32 {
        (self.r as u32) << 16 | (self.g as u32) << 8 | self.b as u32
    }
}

/// A pixel in OKLAB space: `l` is lightness in [0,1] for in-gamut colors,
/// `a` (red-green) and `b` (blue-yellow) are roughly within [-0.4, 0.4].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OklabPixel {
    pub l: f64,
    pub a: f64,
    pub b: f64,
}

impl OklabPixel {
    pub const fn new(l: f64, a: f64, b: f64) -> Self {
        Self { l, a, b }
    }
}

/// Gamma decode table for all 256 sRGB byte values.
static SRGB_DECODE: LazyLock<[f64; 256]> = LazyLock::new(|| {
    let mut t = [0.0f64; 256];
    for (i, v) in t.iter_mut().enumerate() {
        *v = srgb_decode(i as f64 / 255.0);
    }
    t
});

/// sRGB electro-optical transfer function (gamma decode), input in [0,1].
#[inline]
pub fn srgb_decode(u: f64) -> f64 {
    if u <= 0.04045 {
        u / 12.92
    } else {
        ((u + 0.055) / 1.055).powf(2.4)
    }
}

/// Inverse transfer function (gamma encode). The linear segment extends to
/// negative inputs so the function is total; out-of-range results are dealt
/// with by the caller's clamp.
#[inline]
pub fn srgb_encode(v: f64) -> f64 {
    if v <= 0.0031308 {
        12.92 * v
    } else {
        1.055 * v.powf(1.0 / 2.4) - 0.055
    }
}

/// Linear sRGB to OKLAB, reference matrices.
#[inline]
pub fn linear_to_oklab(r: f64, g: f64, b: f64) -> OklabPixel {
    let l = 0.4122214708 * r + 0.5363325363 * g + 0.0514459929 * b;
    let m = 0.2119034982 * r + 0.6806995451 * g + 0.1073969566 * b;
    let s = 0.0883024619 * r + 0.2817188376 * g + 0.6299787005 * b;

    let l_ = l.cbrt();
    let m_ = m.cbrt();
    let s_ = s.cbrt();

    OklabPixel {
        l: 0.2104542553 * l_ + 0.7936177850 * m_ - 0.0040720468 * s_,
        a: 1.9779984951 * l_ - 2.4285922050 * m_ + 0.4505937099 * s_,
        b: 0.0259040371 * l_ + 0.7827717662 * m_ - 0.8086757660 * s_,
    }
}

/// OKLAB to linear sRGB, reference matrices. Output may fall outside [0,1]
/// for out-of-gamut inputs.
#[inline]
pub fn oklab_to_linear(q: OklabPixel) -> (f64, f64, f64) {
    let l_ = q.l + 0.3963377774 * q.a + 0.2158037573 * q.b;
    let m_ = q.l - 0.1055613458 * q.a - 0.0638541728 * q.b;
    let s_ = q.l - 0.0894841775 * q.a - 1.2914855480 * q.b;

    let l = l_ * l_ * l_;
    let m = m_ * m_ * m_;
    let s = s_ * s_ * s_;

    (
        4.0767416621 * l - 3.3077115913 * m + 0.2309699292 * s,
        -1.2684380046 * l + 2.6097574011 * m - 0.3413193965 * s,
        -0.0041960863 * l - 0.7034186147 * m + 1.7076147010 * s,
    )
}

/// Converts an 8-bit sRGB pixel to OKLAB.
#[inline]
pub fn srgb_to_oklab(p: SrgbPixel) -> OklabPixel {
    let t = &*SRGB_DECODE;
    linear_to_oklab(t[p.r as usize], t[p.g as usize], t[p.b as usize])
}

/// Converts OKLAB back to continuous gamma-encoded sRGB in [0,1], clamping
/// out-of-gamut values after gamma encode. Returns the channels and whether
/// any channel was clamped. The encoder's fused-lightness objective observes
/// these post-clamp values.
#[inline]
pub fn oklab_to_srgb_f64(q: OklabPixel) -> ([f64; 3], bool) {
    let (lr, lg, lb) = oklab_to_linear(q);
    let mut clamped = false;
    let mut enc = |v: f64| -> f64 {
        // encode(1) = 1 and the curve is monotone, so linear values at or
        // above white clamp without paying for the powf.
        if v >= 1.0 {
            if v > 1.0 {
                clamped = true;
            }
            return 1.0;
        }
        let e = srgb_encode(v);
        if e < 0.0 {
            clamped = true;
            0.0
        } else {
            e
        }
    };
    let r = enc(lr);
    let g = enc(lg);
    let b = enc(lb);
    ([r, g, b], clamped)
}

/// Converts OKLAB to an 8-bit sRGB pixel; the flag reports gamut clamping.
#[inline]
pub fn oklab_to_srgb(q: OklabPixel) -> (SrgbPixel, bool) {
    let ([r, g, b], clamped) = oklab_to_srgb_f64(q);
    (
        SrgbPixel {
            r: quantize(r),
            g: quantize(g),
            b: quantize(b),
        },
        clamped,
    )
}

/// [0,1] float to byte with round-half-away-from-zero (`f64::round`).
#[inline]
pub fn quantize(v: f64) -> u8 {
    (v * 255.0).round().clamp(0.0, 255.0) as u8
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn black_maps_to_zero() {
        let q = srgb_to_oklab(SrgbPixel::new(0, 0, 0));
        assert_eq!(q, OklabPixel::new(0.0, 0.0, 0.0));
        let (p, clamped) = oklab_to_srgb(OklabPixel::new(0.0, 0.0, 0.0));
        assert_eq!(p, SrgbPixel::new(0, 0, 0));
        assert!(!clamped);
    }

    #[test]
    fn white_is_unit_lightness() {
        let q = srgb_to_oklab(SrgbPixel::new(255, 255, 255));
        assert!((q.l - 1.0).abs() < 1e-4, "L = {}", q.l);
        assert!(q.a.abs() < 1e-4);
        assert!(q.b.abs() < 1e-4);
    }

    #[test]
    fn red_matches_reference_values() {
        let q = srgb_to_oklab(SrgbPixel::new(255, 0, 0));
        assert!((q.l - 0.6280).abs() < 1e-3, "L = {}", q.l);
        assert!((q.a - 0.2249).abs() < 1e-3, "A = {}", q.a);
        assert!((q.b - 0.1258).abs() < 1e-3, "B = {}", q.b);
    }

    #[test]
    fn above_white_clamps() {
        let (p, clamped) = oklab_to_srgb(OklabPixel::new(1.5, 0.0, 0.0));
        assert_eq!(p, SrgbPixel::new(255, 255, 255));
        assert!(clamped);
    }

    #[test]
    fn gray_axis_is_neutral_and_monotone() {
        let mut prev_l = -1.0;
        for v in 0..=255u8 {
            let q = srgb_to_oklab(SrgbPixel::new(v, v, v));
            assert!(q.a.abs() < 1e-4 && q.b.abs() < 1e-4, "gray {v} has chroma");
            assert!(q.l > prev_l, "L not strictly increasing at {v}");
            prev_l = q.l;
        }
    }

    /// Round trip over a dense deterministic sample of the 8-bit cube. The
    /// full 2^24 sweep lives in `exhaustive_round_trip` below (ignored by
    /// default; run with `--ignored` to sweep every value).
    #[test]
    fn round_trip_sampled() {
        let mut checked = 0u32;
        for r in (0..=255u16).step_by(7) {
            for g in (0..=255u16).step_by(5) {
                for b in (0..=255u16).step_by(9) {
                    let p = SrgbPixel::new(r as u8, g as u8, b as u8);
                    let (back, _) = oklab_to_srgb(srgb_to_oklab(p));
                    assert_eq!(p, back, "round trip failed at {p:?}");
                    checked += 1;
                }
            }
        }
        assert!(checked > 50_000);
    }

    #[test]
    #[ignore = "full 2^24 sweep, ~10 s"]
    fn exhaustive_round_trip() {
        for packed in 0..=0x00FF_FFFFu32 {
            let p = SrgbPixel::new((packed >> 16) as u8, (packed >> 8) as u8, packed as u8);
            let (back, _) = oklab_to_srgb(srgb_to_oklab(p));
            assert_eq!(p, back, "round trip failed at {p:?}");
        }
    }

    #[test]
    fn quantize_rounds_half_away_from_zero() {
        assert_eq!(quantize(0.5 / 255.0), 1);
        assert_eq!(quantize(1.5 / 255.0), 2);
        assert_eq!(quantize(-0.2), 0);
        assert_eq!(quantize(1.2), 255);
    }
}
