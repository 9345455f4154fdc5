//! Full-reference video quality: PSNR and single-scale SSIM.

use crate::frame::{FrameBuffer, FrameError};
use serde::Serialize;

/// Sentinel PSNR for identical frames (zero MSE).
pub const PSNR_CAP_DB: f64 = 99.0;

fn check_dims(a: &FrameBuffer, b: &FrameBuffer) -> Result<(), FrameError> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(FrameError::DimensionMismatch {
            expected_w: a.width(),
            expected_h: a.height(),
            got_w: b.width(),
            got_h: b.height(),
        });
    }
    Ok(())
}

/// Peak signal-to-noise ratio over all RGB samples, peak 255.
pub fn psnr(reference: &FrameBuffer, test: &FrameBuffer) -> Result<f64, FrameError> {
    check_dims(reference, test)?;
    let mut sum_sq = 0.0f64;
    for (&a, &b) in reference.data().iter().zip(test.data().iter()) {
        let d = a as f64 - b as f64;
        sum_sq += d * d;
    }
    let mse = sum_sq / reference.data().len() as f64;
    if mse == 0.0 {
        return Ok(PSNR_CAP_DB);
    }
    Ok(10.0 * (255.0 * 255.0 / mse).log10())
}

/// BT.601 luma of an sRGB frame.
fn luma_plane(frame: &FrameBuffer) -> Vec<f64> {
    frame
        .data()
        .chunks_exact(3)
        .map(|p| 0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64)
        .collect()
}

/// Normalized 11-tap Gaussian, sigma 1.5 — the standard SSIM window.
fn ssim_kernel() -> [f64; 11] {
    let mut k = [0.0f64; 11];
    for (i, v) in k.iter_mut().enumerate() {
        let d = i as f64 - 5.0;
        *v = (-(d * d) / (2.0 * 1.5 * 1.5)).exp();
    }
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

fn blur_separable(src: &[f64], w: usize, h: usize, kernel: &[f64; 11]) -> Vec<f64> {
    let mut tmp = vec![0.0f64; src.len()];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for x in 0..w {
            let mut acc = 0.0;
            for (ki, &kv) in kernel.iter().enumerate() {
                let sx = (x as isize + ki as isize - 5).clamp(0, w as isize - 1) as usize;
                acc += kv * row[sx];
            }
            tmp[y * w + x] = acc;
        }
    }
    let mut dst = vec![0.0f64; src.len()];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (ki, &kv) in kernel.iter().enumerate() {
                let sy = (y as isize + ki as isize - 5).clamp(0, h as isize - 1) as usize;
                acc += kv * tmp[sy * w + x];
            }
            dst[y * w + x] = acc;
        }
    }
    dst
}

/// Single-scale SSIM on the luma plane: 11x11 Gaussian window (sigma 1.5),
/// K1 = 0.01, K2 = 0.03, dynamic range 255, averaged over window positions
/// that fit inside the frame.
pub fn ssim(reference: &FrameBuffer, test: &FrameBuffer) -> Result<f64, FrameError> {
    check_dims(reference, test)?;
    let (w, h) = (reference.width(), reference.height());
    let x = luma_plane(reference);
    let y = luma_plane(test);
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(y.iter()).map(|(a, b)| a * b).collect();

    let kernel = ssim_kernel();
    let mu_x = blur_separable(&x, w, h, &kernel);
    let mu_y = blur_separable(&y, w, h, &kernel);
    let e_xx = blur_separable(&xx, w, h, &kernel);
    let e_yy = blur_separable(&yy, w, h, &kernel);
    let e_xy = blur_separable(&xy, w, h, &kernel);

    const C1: f64 = (0.01 * 255.0) * (0.01 * 255.0);
    const C2: f64 = (0.03 * 255.0) * (0.03 * 255.0);

    let mut total = 0.0f64;
    let mut count = 0usize;
    for yy_i in 5..h - 5 {
        for xx_i in 5..w - 5 {
            let i = yy_i * w + xx_i;
            let mx = mu_x[i];
            let my = mu_y[i];
            let vx = e_xx[i] - mx * mx;
            let vy = e_yy[i] - my * my;
            let cov = e_xy[i] - mx * my;
            let s = ((2.0 * mx * my + C1) * (2.0 * cov + C2))
                / ((mx * mx + my * my + C1) * (vx + vy + C2));
            total += s;
            count += 1;
        }
    }
    Ok(total / count as f64)
}

/// Mean/std/min/max summary of a per-frame metric.
#[derive(Debug, Clone, Serialize)]
pub struct MetricStats {
    pub per_frame: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl MetricStats {
    pub fn from_values(values: Vec<f64>) -> Self {
        let n = values.len().max(1) as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Self {
            per_frame: values,
            mean,
            std: var.sqrt(),
            min,
            max,
        }
    }
}

/// Per-frame and aggregate quality of an encoded sequence against its
/// reference.
#[derive(Debug, Clone, Serialize)]
pub struct QualityReport {
    pub frames: usize,
    pub psnr: MetricStats,
    pub ssim: MetricStats,
}

pub fn quality_report(
    reference: &[FrameBuffer],
    encoded: &[FrameBuffer],
) -> Result<QualityReport, FrameError> {
    let frames = reference.len().min(encoded.len());
    let mut psnr_values = Vec::with_capacity(frames);
    let mut ssim_values = Vec::with_capacity(frames);
    for (r, e) in reference.iter().zip(encoded.iter()) {
        psnr_values.push(psnr(r, e)?);
        ssim_values.push(ssim(r, e)?);
    }
    Ok(QualityReport {
        frames,
        psnr: MetricStats::from_values(psnr_values),
        ssim: MetricStats::from_values(ssim_values),
    })
}
