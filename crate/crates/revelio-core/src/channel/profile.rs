//! Channel profiles: everything the screen-to-camera path does to the video.

use crate::decoder::Quad;
use serde::{Deserialize, Serialize};
use std::str::FromStr;

/// Parameters of the simulated screen-camera channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelProfile {
    /// Optional preset name this profile was derived from.
    pub name: String,
    /// Screen quad in camera space, TL TR BR BL (pixel centers).
    pub quad: [[f64; 2]; 4],
    pub camera_width: usize,
    pub camera_height: usize,
    /// Temporal phase of the camera shutter relative to the display refresh,
    /// in display periods, in [0,1).
    pub phase: f64,
    /// Exposure as a fraction of the camera frame period, in [0,1];
    /// 0 means the instantaneous-shutter limit.
    pub exposure: f64,
    /// Additive Gaussian noise sigma in 8-bit units.
    pub noise_sigma: f64,
    /// Display/camera tone gamma applied to [0,1] values.
    pub gamma: f64,
    /// Brightness offset in 8-bit units.
    pub brightness: f64,
    /// Contrast factor around mid-gray.
    pub contrast: f64,
    /// Gaussian blur sigma in pixels (0 = off).
    pub blur_sigma: f64,
    /// Fill color for camera pixels outside the screen quad.
    pub background: [u8; 3],
    /// Seed for the per-frame noise streams.
    pub seed: u64,
}

impl Default for ChannelProfile {
    fn default() -> Self {
        Self {
            name: "identity".to_string(),
            quad: full_frame_quad(),
            camera_width: crate::frame::FRAME_WIDTH,
            camera_height: crate::frame::FRAME_HEIGHT,
            phase: 0.0,
            exposure: 0.0,
            noise_sigma: 0.0,
            gamma: 1.0,
            brightness: 0.0,
            contrast: 1.0,
            blur_sigma: 0.0,
            background: [32, 32, 32],
            seed: 0,
        }
    }
}

impl ChannelProfile {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..1.0).contains(&self.phase) {
            return Err(format!("phase {} outside [0,1)", self.phase));
        }
        if !(0.0..=1.0).contains(&self.exposure) {
            return Err(format!("exposure {} outside [0,1]", self.exposure));
        }
        if self.noise_sigma < 0.0 {
            return Err("noise_sigma must be nonnegative".into());
        }
        if self.gamma <= 0.0 {
            return Err("gamma must be positive".into());
        }
        let q = Quad { corners: self.quad };
        if !q.is_convex() || q.area().abs() < 1.0 {
            return Err("screen quad must be convex and non-degenerate".into());
        }
        Ok(())
    }

    pub fn quad(&self) -> Quad {
        Quad { corners: self.quad }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// The whole camera frame, corner to corner.
pub fn full_frame_quad() -> [[f64; 2]; 4] {
    crate::decoder::canonical_corners()
}

/// A view point: how much of the camera frame the screen occupies (by area)
/// and at which yaw/pitch angles it is seen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViewPointPreset {
    /// Fraction of the camera frame area the screen covers, in (0,1].
    pub occupancy: f64,
    /// Rotation about the vertical axis, degrees.
    pub yaw_deg: f64,
    /// Rotation about the horizontal axis, degrees.
    pub pitch_deg: f64,
}

/// Camera distance used by the pinhole view-point model, in screen
/// half-widths; controls keystone strength.
const VIEW_DISTANCE: f64 = 3.0;

impl ViewPointPreset {
    /// Projects the screen rectangle through a pinhole camera at the preset
    /// pose. Occupancy 1 at zero angles maps exactly onto the full camera
    /// frame. Like a person framing the shot, the view is pulled back just
    /// enough that the whole screen stays visible: if perspective
    /// magnification pushes a corner outside the camera frame, the quad is
    /// rescaled about its center to fit with a small margin.
    pub fn quad(&self, camera_width: usize, camera_height: usize) -> [[f64; 2]; 4] {
        let aspect = camera_height as f64 / camera_width as f64;
        // Screen corners in units of its half-width, TL TR BR BL; y down.
        let corners3 = [
            (-1.0, -aspect),
            (1.0, -aspect),
            (1.0, aspect),
            (-1.0, aspect),
        ];
        let yaw = self.yaw_deg.to_radians();
        let pitch = self.pitch_deg.to_radians();
        let scale = self.occupancy.sqrt();
        let half_w = (camera_width as f64 - 1.0) / 2.0;
        let half_h = (camera_height as f64 - 1.0) / 2.0;

        let mut out = [[0.0f64; 2]; 4];
        let mut overflow = 1.0f64;
        for (i, &(x, y)) in corners3.iter().enumerate() {
            // Yaw about the vertical axis, then pitch about the horizontal.
            let (xz_x, xz_z) = (x * yaw.cos(), x * yaw.sin());
            let (yz_y, yz_z) = (y * pitch.cos(), y * pitch.sin());
            let z = VIEW_DISTANCE + xz_z + yz_z;
            // Normalize so occupancy is exact at zero angles: the frustum
            // half-angle is 1/VIEW_DISTANCE.
            let u = xz_x / z * VIEW_DISTANCE * scale;
            let v = yz_y / z * VIEW_DISTANCE * scale / aspect;
            out[i] = [u, v];
            overflow = overflow.max(u.abs()).max(v.abs());
        }
        let fit = if overflow > 1.0 {
            0.995 / overflow
        } else {
            1.0
        };
        for c in out.iter_mut() {
            *c = [half_w + c[0] * fit * half_w, half_h + c[1] * fit * half_h];
        }
        out
    }

    pub fn profile(&self) -> ChannelProfile {
        ChannelProfile {
            name: format!(
                "occ{}_yaw{}",
                (self.occupancy * 100.0).round() as i64,
                self.yaw_deg.round() as i64
            ),
            quad: self.quad(crate::frame::FRAME_WIDTH, crate::frame::FRAME_HEIGHT),
            phase: 0.3,
            exposure: 0.8,
            noise_sigma: 2.0,
            ..ChannelProfile::default()
        }
    }
}

/// Parses preset names: `identity` (or `transparent`) and the view-point
/// matrix `occ<pct>_yaw<deg>`, e.g. `occ75_yaw30` or `occ100_yaw-20`.
impl FromStr for ChannelProfile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "identity" | "transparent" => {
                return Ok(ChannelProfile {
                    name: s.to_string(),
                    ..ChannelProfile::default()
                })
            }
            _ => {}
        }
        let rest = s
            .strip_prefix("occ")
            .ok_or_else(|| format!("unknown profile preset `{s}`"))?;
        let (occ_str, yaw_str) = rest
            .split_once("_yaw")
            .ok_or_else(|| format!("unknown profile preset `{s}`"))?;
        let occ: f64 = occ_str
            .parse::<f64>()
            .map_err(|_| format!("bad occupancy in `{s}`"))?;
        let yaw: f64 = yaw_str
            .parse::<f64>()
            .map_err(|_| format!("bad yaw in `{s}`"))?;
        if !(0.0..=100.0).contains(&occ) || occ == 0.0 {
            return Err(format!("occupancy {occ} outside (0,100]"));
        }
        if yaw.abs() > 60.0 {
            return Err(format!("yaw {yaw} outside [-60,60]"));
        }
        let preset = ViewPointPreset {
            occupancy: occ / 100.0,
            yaw_deg: yaw,
            pitch_deg: 0.0,
        };
        let mut profile = preset.profile();
        profile.name = s.to_string();
        Ok(profile)
    }
}
