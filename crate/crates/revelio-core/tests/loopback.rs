//! End-to-end loopback: encode, run through channels, decode.

use revelio_core::channel::{simulate, ChannelProfile};
use revelio_core::color::SrgbPixel;
use revelio_core::decoder::{decode_recording, DecoderParams};
use revelio_core::ecc::RevelioCode;
use revelio_core::encoder::{encode_video, SplitSelector, DEFAULT_STRENGTH};
use revelio_core::frame::{FrameBuffer, FRAME_HEIGHT, FRAME_WIDTH};

fn gray_video(frames: usize, v: u8) -> Vec<FrameBuffer> {
    (0..frames)
        .map(|_| FrameBuffer::filled(FRAME_WIDTH, FRAME_HEIGHT, SrgbPixel::new(v, v, v)))
        .collect()
}

fn gradient_video(frames: usize) -> Vec<FrameBuffer> {
    // Smooth triangle-wave gradient drifting over time; no hard edges.
    let tri = |v: usize| -> u8 {
        let m = v % 510;
        if m < 255 {
            m as u8
        } else {
            (509 - m) as u8
        }
    };
    (0..frames)
        .map(|t| {
            let mut f = FrameBuffer::new(FRAME_WIDTH, FRAME_HEIGHT);
            for y in 0..FRAME_HEIGHT {
                for x in 0..FRAME_WIDTH {
                    let r = tri(x + t * 2);
                    let g = 64 + tri(y / 2) / 2;
                    f.set_pixel(x, y, SrgbPixel::new(r, g, 96));
                }
            }
            f
        })
        .collect()
}

#[test]
fn transparent_channel_round_trip_gray() {
    let code = RevelioCode(0xBEEF);
    let video = gray_video(30, 120);
    let mut selector = SplitSelector::with_default_candidates(DEFAULT_STRENGTH);
    let (encoded, _, _) = encode_video(&video, code, &mut selector).unwrap();

    let recording = simulate(&encoded, &ChannelProfile::default()).unwrap();
    assert_eq!(recording.len(), 60);

    let (payload, report) = decode_recording(&recording, 42, &DecoderParams::default());
    assert_eq!(
        payload,
        Some(code),
        "decode failed; first epoch diagnostics: {:?}",
        report.epochs.first()
    );
    // Transparent channel should succeed in the first epoch.
    assert_eq!(report.epochs.len(), 1);
}

#[test]
fn transparent_channel_round_trip_gradient() {
    let code = RevelioCode(0x5A17);
    let video = gradient_video(30);
    let mut selector = SplitSelector::with_default_candidates(DEFAULT_STRENGTH);
    let (encoded, _, _) = encode_video(&video, code, &mut selector).unwrap();

    let recording = simulate(&encoded, &ChannelProfile::default()).unwrap();
    let (payload, report) = decode_recording(&recording, 7, &DecoderParams::default());
    assert_eq!(
        payload,
        Some(code),
        "decode failed; first epoch diagnostics: {:?}",
        report.epochs.first()
    );
}

#[test]
fn unencoded_video_fails_decode() {
    let video = gray_video(30, 90);
    let recording = simulate(&video, &ChannelProfile::default()).unwrap();
    let (payload, report) = decode_recording(&recording, 42, &DecoderParams::default());
    assert_eq!(payload, None);
    assert!(report.epochs.len() >= 2, "diversity should have been tried");
}
