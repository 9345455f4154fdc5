//! Weighted differential accumulation over a decoding epoch.
//!
//! The accumulator F = F_1 + sum_i w_i |F_i - F_{i+1}| is computed per OKLAB
//! channel with decaying weights, which highlights flickered regions while
//! static content only contributes its base value. The L channel is Gaussian
//! filtered before accumulation to suppress content edges; chroma channels
//! are used as-is. Each channel is then min-max normalized to [0,255] and a
//! combined plane A + B + c*L (c < 1) feeds frame detection and symbol
//! classification.

use crate::frame::{FrameBuffer, OklabFrame, Plane};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AccumulateError {
    #[error("an epoch needs at least 2 frames, got {0}")]
    EpochTooShort(usize),
    #[error("expected {expected} decay weights, got {got}")]
    WrongWeightCount { expected: usize, got: usize },
    #[error("decay weights must be strictly positive and non-increasing")]
    InvalidWeights,
}

/// A run of consecutive camera frames, converted to OKLAB.
pub struct Epoch {
    pub start: usize,
    pub frames: Vec<OklabFrame>,
}

impl Epoch {
    pub fn from_srgb(frames: &[FrameBuffer], start: usize) -> Self {
        Self {
            start,
            frames: frames.iter().map(FrameBuffer::to_oklab).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

/// Gaussian blur parameters; the default is a 9x9 kernel with sigma 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianParams {
    pub sigma: f64,
    pub radius: usize,
}

impl Default for GaussianParams {
    fn default() -> Self {
        Self {
            sigma: 2.0,
            radius: 4,
        }
    }
}

impl GaussianParams {
    fn kernel(&self) -> Vec<f32> {
        let r = self.radius as isize;
        let s2 = 2.0 * self.sigma * self.sigma;
        let mut k: Vec<f64> = (-r..=r).map(|i| (-(i * i) as f64 / s2).exp()).collect();
        let sum: f64 = k.iter().sum();
        k.iter_mut().for_each(|v| *v /= sum);
        k.into_iter().map(|v| v as f32).collect()
    }
}

/// Separable Gaussian blur with edge replication.
pub fn gaussian_blur(plane: &Plane, params: GaussianParams) -> Plane {
    if params.radius == 0 || params.sigma <= 0.0 {
        return plane.clone();
    }
    let (w, h) = (plane.width(), plane.height());
    let kernel = params.kernel();
    let r = params.radius;

    let mut horizontal = Plane::new(w, h);
    horizontal
        .data_mut()
        .par_chunks_mut(w)
        .zip(plane.data().par_chunks(w))
        .for_each(|(out, src)| {
            for x in 0..w.min(r) {
                out[x] = clamped_tap(src, x as isize, r, &kernel);
            }
            // Interior pixels index the row directly.
            for x in r..w.saturating_sub(r) {
                let mut acc = 0.0f32;
                for (ki, &kv) in kernel.iter().enumerate() {
                    acc += kv * src[x + ki - r];
                }
                out[x] = acc;
            }
            for x in w.saturating_sub(r).max(r)..w {
                out[x] = clamped_tap(src, x as isize, r, &kernel);
            }
        });

    let h_src = horizontal.data();
    let mut out = Plane::new(w, h);
    out.data_mut()
        .par_chunks_mut(w)
        .enumerate()
        .for_each(|(y, row)| {
            if y >= r && y + r < h {
                let base = (y - r) * w;
                for (x, o) in row.iter_mut().enumerate() {
                    let mut acc = 0.0f32;
                    for (ki, &kv) in kernel.iter().enumerate() {
                        acc += kv * h_src[base + ki * w + x];
                    }
                    *o = acc;
                }
            } else {
                for (x, o) in row.iter_mut().enumerate() {
                    let mut acc = 0.0f32;
                    for (ki, &kv) in kernel.iter().enumerate() {
                        let sy = (y + ki).saturating_sub(r).min(h - 1);
                        acc += kv * h_src[sy * w + x];
                    }
                    *o = acc;
                }
            }
        });
    out
}

#[inline]
fn clamped_tap(row: &[f32], x: isize, r: usize, kernel: &[f32]) -> f32 {
    let mut acc = 0.0f32;
    for (ki, &kv) in kernel.iter().enumerate() {
        let sx = (x + ki as isize - r as isize).clamp(0, row.len() as isize - 1) as usize;
        acc += kv * row[sx];
    }
    acc
}

/// Per-channel accumulator planes, normalized to [0,255], plus the combined
/// detection plane.
#[derive(Debug, Clone)]
pub struct AccumulatorImage {
    pub l: Plane,
    pub a: Plane,
    pub b: Plane,
    pub combined: Plane,
}

/// sum w_i |F_i - F_{i+1}| for one channel, optionally on top of F_1.
fn accumulate_channel(planes: &[&Plane], weights: &[f32], include_base: bool) -> Plane {
    let (w, h) = (planes[0].width(), planes[0].height());
    let mut acc = if include_base {
        Plane::from_raw(w, h, planes[0].data().to_vec())
    } else {
        Plane::new(w, h)
    };
    for (i, wi) in weights.iter().enumerate() {
        let cur = planes[i].data();
        let next = planes[i + 1].data();
        acc.data_mut()
            .par_iter_mut()
            .zip(cur.par_iter().zip(next.par_iter()))
            .for_each(|(a, (&c, &n))| *a += wi * (c - n).abs());
    }
    acc
}

fn accumulate_channels(
    epoch: &Epoch,
    weights: &[f32],
    blur: GaussianParams,
    include_base: bool,
) -> Result<(Plane, Plane, Plane), AccumulateError> {
    let n = epoch.len();
    if n < 2 {
        return Err(AccumulateError::EpochTooShort(n));
    }
    if weights.len() != n - 1 {
        return Err(AccumulateError::WrongWeightCount {
            expected: n - 1,
            got: weights.len(),
        });
    }
    if weights.iter().any(|&w| w <= 0.0)
        || weights.windows(2).any(|w| w[1] > w[0])
    {
        return Err(AccumulateError::InvalidWeights);
    }

    let blurred_l: Vec<Plane> = epoch
        .frames
        .iter()
        .map(|f| gaussian_blur(&f.l, blur))
        .collect();
    let l_refs: Vec<&Plane> = blurred_l.iter().collect();
    let a_refs: Vec<&Plane> = epoch.frames.iter().map(|f| &f.a).collect();
    let b_refs: Vec<&Plane> = epoch.frames.iter().map(|f| &f.b).collect();

    Ok((
        accumulate_channel(&l_refs, weights, include_base),
        accumulate_channel(&a_refs, weights, include_base),
        accumulate_channel(&b_refs, weights, include_base),
    ))
}

/// Raw (pre-normalization) accumulator channels; the L planes are blurred
/// before differencing. Exposed for tests that check the accumulation
/// arithmetic directly.
pub fn accumulate_raw(
    epoch: &Epoch,
    weights: &[f32],
    blur: GaussianParams,
) -> Result<(Plane, Plane, Plane), AccumulateError> {
    accumulate_channels(epoch, weights, blur, true)
}

/// Full accumulation: raw channels, min-max normalization to [0,255], then
/// the combined plane A + B + c*L.
pub fn accumulate_epoch(
    epoch: &Epoch,
    weights: &[f32],
    c: f64,
    blur: GaussianParams,
) -> Result<AccumulatorImage, AccumulateError> {
    finish_accumulator(accumulate_channels(epoch, weights, blur, true)?, c)
}

/// Like [`accumulate_epoch`] but without the F_1 base term, leaving only the
/// weighted differences. Static content cancels out entirely, which is what
/// keeps the flickered border dominant for the threshold-based frame
/// detection; the full accumulator with its base term would let scene
/// structure in a flicker-poor channel swamp it after per-channel
/// normalization.
pub fn accumulate_differential(
    epoch: &Epoch,
    weights: &[f32],
    c: f64,
    blur: GaussianParams,
) -> Result<AccumulatorImage, AccumulateError> {
    finish_accumulator(accumulate_channels(epoch, weights, blur, false)?, c)
}

fn finish_accumulator(
    channels: (Plane, Plane, Plane),
    c: f64,
) -> Result<AccumulatorImage, AccumulateError> {
    let (mut l, mut a, mut b) = channels;
    l.normalize_255();
    a.normalize_255();
    b.normalize_255();

    let cf = c as f32;
    let combined_data: Vec<f32> = a
        .data()
        .par_iter()
        .zip(b.data().par_iter())
        .zip(l.data().par_iter())
        .map(|((&av, &bv), &lv)| av + bv + cf * lv)
        .collect();
    let combined = Plane::from_raw(l.width(), l.height(), combined_data);

    Ok(AccumulatorImage { l, a, b, combined })
}

/// Decay weight vector w_i = base^(i-1), i = 1..n_diffs.
pub fn decay_weights(base: f64, n_diffs: usize) -> Vec<f32> {
    (0..n_diffs).map(|i| base.powi(i as i32) as f32).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::OklabFrame;

    fn flat_frame(w: usize, h: usize, l: f32, a: f32, b: f32) -> OklabFrame {
        OklabFrame {
            width: w,
            height: h,
            l: Plane::from_raw(w, h, vec![l; w * h]),
            a: Plane::from_raw(w, h, vec![a; w * h]),
            b: Plane::from_raw(w, h, vec![b; w * h]),
        }
    }

    fn no_blur() -> GaussianParams {
        GaussianParams {
            sigma: 0.0,
            radius: 0,
        }
    }

    #[test]
    fn identical_frames_accumulate_to_first_frame() {
        let frames: Vec<OklabFrame> = (0..5).map(|_| flat_frame(4, 4, 0.5, 0.1, -0.2)).collect();
        let epoch = Epoch { start: 0, frames };
        let w = decay_weights(0.9, 4);
        let (l, a, b) = accumulate_raw(&epoch, &w, no_blur()).unwrap();
        assert!(l.data().iter().all(|&v| v == 0.5));
        assert!(a.data().iter().all(|&v| v == 0.1));
        assert!(b.data().iter().all(|&v| v == -0.2));
    }

    #[test]
    fn alternating_delta_matches_hand_computation() {
        // 4x4 frames, one pixel alternating +/- delta on the A channel.
        let delta = 0.03f32;
        let n = 6;
        let frames: Vec<OklabFrame> = (0..n)
            .map(|i| {
                let mut f = flat_frame(4, 4, 0.5, 0.0, 0.0);
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                f.a.set(2, 1, sign * delta);
                f
            })
            .collect();
        let epoch = Epoch { start: 0, frames };
        let w = decay_weights(0.9, n - 1);
        let (_, a, _) = accumulate_raw(&epoch, &w, no_blur()).unwrap();

        let expected: f32 = delta + w.iter().map(|wi| wi * 2.0 * delta).sum::<f32>();
        assert!(
            (a.get(2, 1) - expected).abs() < 1e-6,
            "got {}, want {}",
            a.get(2, 1),
            expected
        );
        assert_eq!(a.get(0, 0), 0.0);
    }

    #[test]
    fn weight_scaling_cancels_when_diffs_dominate() {
        // Over a flat first frame, min-max normalization removes a global
        // weight scale (the base term is constant, so the map is affine).
        let delta = 0.05f32;
        let n = 8;
        let make = || -> Vec<OklabFrame> {
            (0..n)
                .map(|i| {
                    let mut f = flat_frame(6, 6, 0.4, 0.0, 0.0);
                    let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                    f.b.set(3, 3, sign * delta);
                    f.b.set(1, 4, sign * delta * 0.5);
                    f
                })
                .collect()
        };
        let w1 = decay_weights(0.9, n - 1);
        let w2: Vec<f32> = w1.iter().map(|v| v * 3.25).collect();
        let acc1 = accumulate_epoch(&Epoch { start: 0, frames: make() }, &w1, 0.25, no_blur())
            .unwrap();
        let acc2 = accumulate_epoch(&Epoch { start: 0, frames: make() }, &w2, 0.25, no_blur())
            .unwrap();
        for (v1, v2) in acc1.b.data().iter().zip(acc2.b.data()) {
            assert!((v1 - v2).abs() < 1e-3, "{v1} vs {v2}");
        }
    }

    /// The difference terms only see |F_i - F_{i+1}|, so flipping every
    /// flicker sign after a shared first frame leaves the accumulator
    /// bit-identical. (The F_1 base term itself keeps whatever sign the
    /// first frame carried, which is why the flip starts at frame 1 here.)
    #[test]
    fn sign_agnostic_differences() {
        let n = 6;
        let make = |flip: f32| -> Vec<OklabFrame> {
            (0..n)
                .map(|i| {
                    let mut f = flat_frame(4, 4, 0.5, 0.0, 0.0);
                    if i > 0 {
                        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                        f.a.set(2, 2, flip * sign * 0.04);
                    }
                    f
                })
                .collect()
        };
        let w = decay_weights(0.9, n - 1);
        let acc_pos =
            accumulate_epoch(&Epoch { start: 0, frames: make(1.0) }, &w, 0.25, no_blur()).unwrap();
        let acc_neg =
            accumulate_epoch(&Epoch { start: 0, frames: make(-1.0) }, &w, 0.25, no_blur()).unwrap();
        assert_eq!(acc_pos.a.data(), acc_neg.a.data());
        assert_eq!(acc_pos.combined.data(), acc_neg.combined.data());
    }

    #[test]
    fn too_short_and_bad_weights_rejected() {
        let frames = vec![flat_frame(2, 2, 0.5, 0.0, 0.0)];
        let err = accumulate_raw(&Epoch { start: 0, frames }, &[], no_blur()).unwrap_err();
        assert_eq!(err, AccumulateError::EpochTooShort(1));

        let frames: Vec<OklabFrame> = (0..3).map(|_| flat_frame(2, 2, 0.5, 0.0, 0.0)).collect();
        let err = accumulate_raw(
            &Epoch { start: 0, frames },
            &[0.5, 0.9],
            no_blur(),
        )
        .unwrap_err();
        assert_eq!(err, AccumulateError::InvalidWeights);
    }

    #[test]
    fn blur_preserves_flat_planes_and_mass() {
        let mut p = Plane::new(16, 16);
        p.data_mut().fill(3.5);
        let blurred = gaussian_blur(&p, GaussianParams::default());
        for &v in blurred.data() {
            assert!((v - 3.5).abs() < 1e-5);
        }

        // A single spike keeps its mass (edge replication far away).
        let mut spike = Plane::new(32, 32);
        spike.set(16, 16, 100.0);
        let blurred = gaussian_blur(&spike, GaussianParams::default());
        let total: f32 = blurred.data().iter().sum();
        assert!((total - 100.0).abs() < 1e-3, "mass {total}");
    }
}
