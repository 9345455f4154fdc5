//! Evaluation: video quality metrics and the error-rate bench harness.

mod bench;
mod quality;

pub use bench::{run_bench, BenchReport, ProfileBench, TrialOutcome};
pub use quality::{psnr, quality_report, ssim, MetricStats, QualityReport, PSNR_CAP_DB};
