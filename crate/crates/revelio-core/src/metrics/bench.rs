//! Randomized error-rate benchmarking over channel profiles.
//!
//! A run is a success when the decoded payload equals the embedded one. Each
//! (profile, trial) pair derives its own seed from the top-level seed, so a
//! whole bench is reproducible bit-for-bit.

use crate::channel::{derive_seed, simulate, ChannelProfile};
use crate::decoder::{decode_recording, DecoderParams, EpochDiagnostics};
use crate::ecc::RevelioCode;
use crate::frame::FrameBuffer;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct TrialOutcome {
    pub trial: usize,
    pub seed: u64,
    pub success: bool,
    pub payload: Option<u16>,
    pub epochs_used: usize,
    pub epochs: Vec<EpochDiagnostics>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileBench {
    pub profile: ChannelProfile,
    pub trials: usize,
    pub successes: usize,
    pub error_rate: f64,
    pub outcomes: Vec<TrialOutcome>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub code: u16,
    pub seed: u64,
    pub trials_per_profile: usize,
    pub profiles: Vec<ProfileBench>,
}

impl BenchReport {
    /// Overall error rate across profiles.
    pub fn error_rate(&self) -> f64 {
        let trials: usize = self.profiles.iter().map(|p| p.trials).sum();
        let successes: usize = self.profiles.iter().map(|p| p.successes).sum();
        if trials == 0 {
            0.0
        } else {
            1.0 - successes as f64 / trials as f64
        }
    }
}

/// Runs `trials` simulate+decode rounds per profile over an encoded video.
pub fn run_bench(
    encoded: &[FrameBuffer],
    code: RevelioCode,
    profiles: &[ChannelProfile],
    trials: usize,
    seed: u64,
    params: &DecoderParams,
) -> BenchReport {
    assert!(trials >= 1, "at least one trial per profile");
    let mut out = Vec::with_capacity(profiles.len());
    for (pi, profile) in profiles.iter().enumerate() {
        let mut outcomes = Vec::with_capacity(trials);
        let mut successes = 0usize;
        for trial in 0..trials {
            let trial_seed = derive_seed(seed, ((pi as u64) << 32) | trial as u64);
            let trial_profile = profile.clone().with_seed(trial_seed);
            let recording = simulate(encoded, &trial_profile)
                .expect("profile quads are validated before benching");
            let (payload, report) = decode_recording(&recording, trial_seed, params);
            let success = payload == Some(code);
            successes += success as usize;
            outcomes.push(TrialOutcome {
                trial,
                seed: trial_seed,
                success,
                payload: payload.map(|c| c.0),
                epochs_used: report.epochs.len(),
                epochs: report.epochs,
            });
        }
        out.push(ProfileBench {
            profile: profile.clone(),
            trials,
            successes,
            error_rate: 1.0 - successes as f64 / trials as f64,
            outcomes,
        });
    }
    BenchReport {
        code: code.0,
        seed,
        trials_per_profile: trials,
        profiles: out,
    }
}
