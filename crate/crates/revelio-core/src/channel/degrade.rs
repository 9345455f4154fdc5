//! Sensor and tone degradation: blur, contrast/brightness, gamma, noise.

use super::profile::ChannelProfile;
use crate::frame::FrameBuffer;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// SplitMix64 step; derives per-frame noise seeds from the profile seed so
/// frames can be degraded in parallel yet deterministically.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Standard normal CDF via the Abramowitz-Stegun erf approximation
/// (|error| < 1.5e-7, far below anything observable in a noise stream).
fn normal_cdf(x: f64) -> f64 {
    let z = x / std::f64::consts::SQRT_2;
    let (z, sign) = if z < 0.0 { (-z, -1.0) } else { (z, 1.0) };
    let t = 1.0 / (1.0 + 0.327_591_1 * z);
    let poly = t
        * (0.254_829_592
            + t * (-0.284_496_736 + t * (1.421_413_741 + t * (-1.453_152_027 + t * 1.061_405_429))));
    let erf = 1.0 - poly * (-z * z).exp();
    0.5 * (1.0 + sign * erf)
}

/// Discrete distribution of round(N(0, sigma)) as a Walker alias table.
/// The rounded offset does not depend on the input value, and
/// clamp(v + round(n)) has exactly the distribution of the quantized noisy
/// sample, so one shared table serves every input byte. Each 32-bit draw
/// yields one offset in O(1).
struct DiscreteNoise {
    prob: Vec<u32>,
    alias: Vec<u16>,
    reach: i32,
}

impl DiscreteNoise {
    fn build(sigma: f64) -> Self {
        let reach = (8.0 * sigma).ceil() as i32;
        let n = (2 * reach + 1) as usize;
        // PMF of round(n): interior bins are CDF differences, the two end
        // bins absorb their tails.
        let mut pmf = Vec::with_capacity(n);
        for off in -reach..=reach {
            let lo = if off == -reach {
                0.0
            } else {
                normal_cdf((off as f64 - 0.5) / sigma)
            };
            let hi = if off == reach {
                1.0
            } else {
                normal_cdf((off as f64 + 0.5) / sigma)
            };
            pmf.push(hi - lo);
        }

        // Standard alias construction over probabilities scaled by n.
        let mut prob = vec![0u32; n];
        let mut alias = vec![0u16; n];
        let scaled: Vec<f64> = pmf.iter().map(|p| p * n as f64).collect();
        let mut small: Vec<usize> = Vec::new();
        let mut large: Vec<usize> = Vec::new();
        let mut work = scaled.clone();
        for (i, &s) in scaled.iter().enumerate() {
            if s < 1.0 {
                small.push(i);
            } else {
                large.push(i);
            }
        }
        while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
            small.pop();
            prob[s] = (work[s] * 4294967296.0).min(u32::MAX as f64) as u32;
            alias[s] = l as u16;
            work[l] = (work[l] + work[s]) - 1.0;
            if work[l] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        for &i in small.iter().chain(large.iter()) {
            prob[i] = u32::MAX;
            alias[i] = i as u16;
        }
        Self { prob, alias, reach }
    }

    /// Offset sampled from one 32-bit draw.
    #[inline]
    fn offset(&self, r: u32) -> i32 {
        let n = self.prob.len() as u64;
        let m = r as u64 * n;
        let idx = (m >> 32) as usize;
        let frac = (m & 0xFFFF_FFFF) as u32;
        let pick = if frac < self.prob[idx] {
            idx
        } else {
            self.alias[idx] as usize
        };
        pick as i32 - self.reach
    }

    #[inline]
    fn sample(&self, v: u8, r: u32) -> u8 {
        (v as i32 + self.offset(r)).clamp(0, 255) as u8
    }
}

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil().max(1.0) as isize;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

/// Applies the profile's degradation chain to one camera frame, in order:
/// Gaussian blur, contrast/brightness, gamma, seeded Gaussian noise, clamp.
/// `frame_index` selects the per-frame noise stream.
pub fn degrade(frame: &FrameBuffer, profile: &ChannelProfile, frame_index: usize) -> FrameBuffer {
    let identity_tone = profile.contrast == 1.0 && profile.brightness == 0.0 && profile.gamma == 1.0;
    let no_blur = profile.blur_sigma <= 0.0;
    let no_noise = profile.noise_sigma <= 0.0;
    if identity_tone && no_blur && no_noise {
        return frame.clone();
    }

    if identity_tone && no_blur {
        // Noise onto integer samples: draw from the exact discrete
        // distribution of clamp(round(v + n)) instead of per-sample
        // continuous noise. Two samples come out of each u64.
        let table = DiscreteNoise::build(profile.noise_sigma);
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(profile.seed, frame_index as u64));
        let mut out = frame.clone();
        let data = out.data_mut();
        let mut i = 0;
        while i + 1 < data.len() {
            let r: u64 = rand::Rng::gen(&mut rng);
            data[i] = table.sample(data[i], r as u32);
            data[i + 1] = table.sample(data[i + 1], (r >> 32) as u32);
            i += 2;
        }
        if i < data.len() {
            let r: u64 = rand::Rng::gen(&mut rng);
            data[i] = table.sample(data[i], r as u32);
        }
        return out;
    }

    let (w, h) = (frame.width(), frame.height());
    let mut data: Vec<f64> = frame.data().iter().map(|&v| v as f64).collect();

    if !no_blur {
        let kernel = gaussian_kernel(profile.blur_sigma);
        let radius = (kernel.len() / 2) as isize;
        let mut tmp = vec![0.0f64; data.len()];
        for y in 0..h {
            for x in 0..w {
                for ch in 0..3 {
                    let mut acc = 0.0;
                    for (ki, &kv) in kernel.iter().enumerate() {
                        let sx = (x as isize + ki as isize - radius).clamp(0, w as isize - 1);
                        acc += kv * data[(y * w + sx as usize) * 3 + ch];
                    }
                    tmp[(y * w + x) * 3 + ch] = acc;
                }
            }
        }
        for y in 0..h {
            for x in 0..w {
                for ch in 0..3 {
                    let mut acc = 0.0;
                    for (ki, &kv) in kernel.iter().enumerate() {
                        let sy = (y as isize + ki as isize - radius).clamp(0, h as isize - 1);
                        acc += kv * tmp[(sy as usize * w + x) * 3 + ch];
                    }
                    data[(y * w + x) * 3 + ch] = acc;
                }
            }
        }
    }

    if !identity_tone {
        for v in data.iter_mut() {
            let mut x = (*v - 127.5) * profile.contrast + 127.5 + profile.brightness;
            if profile.gamma != 1.0 {
                x = 255.0 * (x.clamp(0.0, 255.0) / 255.0).powf(profile.gamma);
            }
            *v = x;
        }
    }

    let mut out = FrameBuffer::new(w, h);
    if no_noise {
        for (o, &v) in out.data_mut().iter_mut().zip(data.iter()) {
            *o = v.round().clamp(0.0, 255.0) as u8;
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(profile.seed, frame_index as u64));
        let sigma = profile.noise_sigma;
        for (o, &v) in out.data_mut().iter_mut().zip(data.iter()) {
            let n: f64 = StandardNormal.sample(&mut rng);
            *o = (v + sigma * n).round().clamp(0.0, 255.0) as u8;
        }
    }
    out
}
