// temp probe: repeated timing
use revelio_core::channel::{simulate, ChannelProfile};
use revelio_core::color::SrgbPixel;
use revelio_core::decoder::*;
use revelio_core::ecc::RevelioCode;
use revelio_core::encoder::{encode_video, SplitSelector, DEFAULT_STRENGTH};
use revelio_core::frame::{FrameBuffer, FRAME_HEIGHT, FRAME_WIDTH};
use std::time::Instant;

#[test]
#[ignore]
fn probe_repeat() {
    let code = RevelioCode(0x5A17);
    let video: Vec<FrameBuffer> = (0..60)
        .map(|_| FrameBuffer::filled(FRAME_WIDTH, FRAME_HEIGHT, SrgbPixel::new(110, 120, 130)))
        .collect();
    let mut selector = SplitSelector::with_default_candidates(DEFAULT_STRENGTH);
    let (encoded, _, _) = encode_video(&video, code, &mut selector).unwrap();
    drop(video);
    let recording = simulate(&encoded, &ChannelProfile::default()).unwrap();
    drop(encoded);
    for i in 0..3 {
        let t = Instant::now();
        let epoch = Epoch::from_srgb(&recording[31..43], 31);
        let c = t.elapsed();
        let t = Instant::now();
        let r = decode_epoch(&epoch, &DecoderParams::default()).unwrap();
        eprintln!("round {i}: from_srgb={c:?} decode_epoch={:?} ok={}", t.elapsed(), r.payload.is_some());
    }
}
