//! Encoder: data-frame geometry, per-pixel flicker-split selection, and the
//! symmetric OKLAB flicker pipeline.

mod dataframe;
mod flicker;
mod split;
mod upsample;

pub use dataframe::{
    build_data_frame, rasterize_symbol, DataFrame, SymbolGeometry, BORDER_WIDTH, LATTICE_MARGIN,
    LATTICE_STEP, SEMI_MAJOR_ALIGNED, SEMI_MAJOR_DIAGONAL, SEMI_MINOR,
};
pub use flicker::{apply_flicker, encode_video, flicker_delta, EncodeStats, Parity, SplitCount};
pub use split::{
    default_candidates, select_flicker_split, split_objective, weights_for_lightness,
    FlickerSplit, ObjectiveWeights, SplitSelector, BRIGHT_LIGHTNESS_CUTOFF, LUT_BINS,
};
pub use upsample::{upsample_sample_and_hold, UnsupportedRate};

/// Default flicker strength; keeps the embedding invisible while leaving
/// enough differential signal for the decoder.
pub const DEFAULT_STRENGTH: f64 = 0.0425;
/// Lower-strength alternative.
pub const ALT_STRENGTH: f64 = 0.0375;
