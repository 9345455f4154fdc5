//! Invisible screen-camera communication codec and channel laboratory.
//!
//! A 16-bit payload (the "Revelio code") is protected by a shortened
//! Reed-Solomon code, spread over a 16x9 grid of ellipse-shaped symbols, and
//! embedded into 60 FPS HD video by flickering pixels in the OKLAB color
//! space: +delta on even frames, -delta on odd frames, so the eye fuses the
//! pair back to the original color while a 120 FPS camera sees the
//! difference. The crate contains:
//!
//! - [`color`]: exact sRGB <-> OKLAB conversion,
//! - [`ecc`]: RS(36,2) with errors-and-erasures decoding plus the symbol
//!   alphabet and grid interleaver,
//! - [`encoder`]: data-frame construction and spatially-adaptive flicker
//!   embedding,
//! - [`decoder`]: epoch accumulation, frame detection, perspective
//!   correction, symbol classification, and time diversity,
//! - [`channel`]: a parametric screen-to-camera channel simulator,
//! - [`metrics`]: PSNR/SSIM and the randomized error-rate bench harness.

pub mod channel;
pub mod color;
pub mod decoder;
pub mod ecc;
pub mod encoder;
pub mod frame;
pub mod metrics;

pub use color::{OklabPixel, SrgbPixel};
pub use ecc::{Codeword, RevelioCode};
pub use frame::{FrameBuffer, OklabFrame, Plane, FRAME_HEIGHT, FRAME_WIDTH};
