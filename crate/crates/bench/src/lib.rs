//! Shared inputs for the criterion benches.

use defectscan::{quantize, synth_texture, GrayImage, QuantizedImage, TextureKind};

pub fn texture(size: usize) -> GrayImage {
    synth_texture(TextureKind::Checker, 6, size, 10.0, 17).expect("valid synth params")
}

pub fn quantized(size: usize, levels: usize) -> QuantizedImage {
    quantize(&texture(size), levels).expect("valid level count")
}
