//! Spatially-adaptive flicker-split selection.
//!
//! The flicker strength `d` is distributed over the OKLAB channels as
//! (lambda*d, alpha*d, beta*d) with |lambda|+|alpha|+|beta| = 1. For every
//! pixel the encoder picks, from a finite candidate set, the split whose
//! fused pair of flickered frames stays closest to the original color:
//! it minimizes
//!
//!   omega*|r - (r1+r2)/2| + chi*|g - (g1+g2)/2| + gamma*|b - (b1+b2)/2|
//!
//! where (r1,g1,b1) and (r2,g2,b2) are the post-clamp sRGB values after
//! shifting by +/-(lambda*d, alpha*d, beta*d) in OKLAB. Near-white pixels
//! switch to uniform weights because every channel clips the same way there.

use crate::color::{self, OklabPixel, SrgbPixel};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Signed fractions of the flicker strength applied to L, A, B.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlickerSplit {
    pub lambda: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl FlickerSplit {
    pub const fn new(lambda: f64, alpha: f64, beta: f64) -> Self {
        Self {
            lambda,
            alpha,
            beta,
        }
    }

    pub fn norm1(&self) -> f64 {
        self.lambda.abs() + self.alpha.abs() + self.beta.abs()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm1() - 1.0).abs() <= 1e-9
    }
}

/// Weights of the per-channel fused-color objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveWeights {
    pub omega: f64,
    pub chi: f64,
    pub gamma: f64,
}

impl ObjectiveWeights {
    pub const DARK: ObjectiveWeights = ObjectiveWeights {
        omega: 0.27,
        chi: 0.70,
        gamma: 0.03,
    };
    pub const BRIGHT: ObjectiveWeights = ObjectiveWeights {
        omega: 1.0 / 3.0,
        chi: 1.0 / 3.0,
        gamma: 1.0 / 3.0,
    };
}

/// Lightness threshold above which the uniform weights take over.
pub const BRIGHT_LIGHTNESS_CUTOFF: f64 = 0.95;

/// Objective weights for a pixel of lightness `l`.
pub fn weights_for_lightness(l: f64) -> ObjectiveWeights {
    if l > BRIGHT_LIGHTNESS_CUTOFF {
        ObjectiveWeights::BRIGHT
    } else {
        ObjectiveWeights::DARK
    }
}

/// The default candidate set: |lambda| in {0, 0.1, 0.2, 0.3}, the remaining
/// mass split between A and B in quarters, with every sign combination on
/// nonzero components. 112 distinct splits.
pub fn default_candidates() -> Vec<FlickerSplit> {
    let lambda_levels = [0.0, 0.1, 0.2, 0.3];
    let chroma_fractions = [0.0, 0.25, 0.5, 0.75, 1.0];
    let mut out = Vec::new();
    for &la in &lambda_levels {
        for &t in &chroma_fractions {
            let aa = t * (1.0 - la);
            let bb = (1.0 - t) * (1.0 - la);
            let l_signs: &[f64] = if la == 0.0 { &[1.0] } else { &[1.0, -1.0] };
            let a_signs: &[f64] = if aa == 0.0 { &[1.0] } else { &[1.0, -1.0] };
            let b_signs: &[f64] = if bb == 0.0 { &[1.0] } else { &[1.0, -1.0] };
            for &sl in l_signs {
                for &sa in a_signs {
                    for &sb in b_signs {
                        out.push(FlickerSplit::new(sl * la, sa * aa, sb * bb));
                    }
                }
            }
        }
    }
    out
}

/// Post-clamp sRGB values (continuous, in [0,1]) of `lab` shifted by
/// `delta`, followed by the opposite shift.
#[inline]
fn fused_pair(lab: OklabPixel, delta: (f64, f64, f64)) -> ([f64; 3], [f64; 3]) {
    let plus = color::oklab_to_srgb_f64(OklabPixel::new(
        lab.l + delta.0,
        lab.a + delta.1,
        lab.b + delta.2,
    ))
    .0;
    let minus = color::oklab_to_srgb_f64(OklabPixel::new(
        lab.l - delta.0,
        lab.a - delta.1,
        lab.b - delta.2,
    ))
    .0;
    (plus, minus)
}

/// The fused-color objective for one candidate split.
pub fn split_objective(
    p: SrgbPixel,
    d: f64,
    split: FlickerSplit,
    weights: ObjectiveWeights,
) -> f64 {
    let lab = color::srgb_to_oklab(p);
    let original = [
        p.r as f64 / 255.0,
        p.g as f64 / 255.0,
        p.b as f64 / 255.0,
    ];
    let (plus, minus) = fused_pair(lab, (split.lambda * d, split.alpha * d, split.beta * d));
    weights.omega * (original[0] - 0.5 * (plus[0] + minus[0])).abs()
        + weights.chi * (original[1] - 0.5 * (plus[1] + minus[1])).abs()
        + weights.gamma * (original[2] - 0.5 * (plus[2] + minus[2])).abs()
}

/// Exhaustive argmin over the candidate list; ties break to the lowest
/// index. `weights` is taken as given — use [`weights_for_lightness`] (or a
/// [`SplitSelector`]) for the lightness-dependent switch.
pub fn select_flicker_split(
    p: SrgbPixel,
    d: f64,
    candidates: &[FlickerSplit],
    weights: ObjectiveWeights,
) -> FlickerSplit {
    assert!(d > 0.0, "flicker strength must be positive");
    assert!(!candidates.is_empty(), "candidate list must be nonempty");
    let lab = color::srgb_to_oklab(p);
    let original = [
        p.r as f64 / 255.0,
        p.g as f64 / 255.0,
        p.b as f64 / 255.0,
    ];
    let mut best = 0usize;
    let mut best_obj = f64::INFINITY;
    for (i, s) in candidates.iter().enumerate() {
        let (plus, minus) = fused_pair(lab, (s.lambda * d, s.alpha * d, s.beta * d));
        let obj = weights.omega * (original[0] - 0.5 * (plus[0] + minus[0])).abs()
            + weights.chi * (original[1] - 0.5 * (plus[1] + minus[1])).abs()
            + weights.gamma * (original[2] - 0.5 * (plus[2] + minus[2])).abs();
        if obj < best_obj {
            best_obj = obj;
            best = i;
        }
    }
    candidates[best]
}

/// Split selection for a whole encode run: fixed strength, fixed candidate
/// set, lightness-dependent weights, and an exact memo keyed by the 24-bit
/// color (the selection depends on nothing else). Optionally a 33x33x33
/// nearest-bin lookup table replaces the exact argmin.
pub struct SplitSelector {
    candidates: Vec<FlickerSplit>,
    d: f64,
    cache: HashMap<u32, u16>,
    lut: Option<Vec<u16>>,
}

/// Side length of the optional RGB lookup table.
pub const LUT_BINS: usize = 33;

impl SplitSelector {
    pub fn new(candidates: Vec<FlickerSplit>, d: f64) -> Self {
        assert!(d > 0.0, "flicker strength must be positive");
        assert!(!candidates.is_empty());
        for c in &candidates {
            assert!(c.is_normalized(), "candidate {c:?} violates |l|+|a|+|b|=1");
        }
        Self {
            candidates,
            d,
            cache: HashMap::new(),
            lut: None,
        }
    }

    pub fn with_default_candidates(d: f64) -> Self {
        Self::new(default_candidates(), d)
    }

    /// Builds the nearest-bin LUT and switches selection to it.
    pub fn enable_lut(&mut self) {
        let mut lut = vec![0u16; LUT_BINS * LUT_BINS * LUT_BINS];
        for (i, slot) in lut.iter_mut().enumerate() {
            let rb = i / (LUT_BINS * LUT_BINS);
            let gb = (i / LUT_BINS) % LUT_BINS;
            let bb = i % LUT_BINS;
            let to_byte = |bin: usize| ((bin * 255) / (LUT_BINS - 1)) as u8;
            let p = SrgbPixel::new(to_byte(rb), to_byte(gb), to_byte(bb));
            *slot = self.select_index_exact(p);
        }
        self.lut = Some(lut);
    }

    pub fn candidates(&self) -> &[FlickerSplit] {
        &self.candidates
    }

    pub fn strength(&self) -> f64 {
        self.d
    }

    /// Chosen candidate index for `p`.
    pub fn select_index(&mut self, p: SrgbPixel) -> u16 {
        if let Some(lut) = &self.lut {
            let bin = |v: u8| (v as usize * (LUT_BINS - 1) + 127) / 255;
            return lut[(bin(p.r) * LUT_BINS + bin(p.g)) * LUT_BINS + bin(p.b)];
        }
        if let Some(&i) = self.cache.get(&p.packed()) {
            return i;
        }
        let i = self.select_index_exact(p);
        self.cache.insert(p.packed(), i);
        i
    }

    pub fn select(&mut self, p: SrgbPixel) -> FlickerSplit {
        let i = self.select_index(p);
        self.candidates[i as usize]
    }

    /// Makes sure every color in `colors` is memoized; the heavy argmin runs
    /// in parallel over the missing ones. No-op in LUT mode.
    pub fn warm_cache(&mut self, colors: &[u32]) {
        use rayon::prelude::*;
        if self.lut.is_some() {
            return;
        }
        let missing: Vec<u32> = colors
            .iter()
            .copied()
            .filter(|k| !self.cache.contains_key(k))
            .collect();
        let computed: Vec<(u32, u16)> = missing
            .par_iter()
            .map(|&k| {
                let p = SrgbPixel::new((k >> 16) as u8, (k >> 8) as u8, k as u8);
                (k, self.select_index_exact(p))
            })
            .collect();
        self.cache.extend(computed);
    }

    /// Read-only lookup; the color must have been selected or warmed before.
    #[inline]
    pub fn cached_index(&self, p: SrgbPixel) -> u16 {
        if let Some(lut) = &self.lut {
            let bin = |v: u8| (v as usize * (LUT_BINS - 1) + 127) / 255;
            return lut[(bin(p.r) * LUT_BINS + bin(p.g)) * LUT_BINS + bin(p.b)];
        }
        self.cache[&p.packed()]
    }

    #[inline]
    pub fn split_at(&self, index: u16) -> FlickerSplit {
        self.candidates[index as usize]
    }

    /// Memoized (color, candidate index) pairs accumulated so far.
    pub fn cache_entries(&self) -> impl Iterator<Item = (&u32, &u16)> {
        self.cache.iter()
    }

    fn select_index_exact(&self, p: SrgbPixel) -> u16 {
        let lab = color::srgb_to_oklab(p);
        let weights = weights_for_lightness(lab.l);
        let original = [
            p.r as f64 / 255.0,
            p.g as f64 / 255.0,
            p.b as f64 / 255.0,
        ];
        let mut best = 0usize;
        let mut best_obj = f64::INFINITY;
        for (i, s) in self.candidates.iter().enumerate() {
            let (plus, minus) =
                fused_pair(lab, (s.lambda * self.d, s.alpha * self.d, s.beta * self.d));
            let obj = weights.omega * (original[0] - 0.5 * (plus[0] + minus[0])).abs()
                + weights.chi * (original[1] - 0.5 * (plus[1] + minus[1])).abs()
                + weights.gamma * (original[2] - 0.5 * (plus[2] + minus[2])).abs();
            if obj < best_obj {
                best_obj = obj;
                best = i;
            }
        }
        best as u16
    }
}
