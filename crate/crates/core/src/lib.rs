//! Texture defect detection from directional GLCM energy differences.
//!
//! A model is trained on defect-free images: each `W x W` window is reduced to
//! six differences between the co-occurrence energies at 0°, 45°, 90° and
//! 135°, the mean of those vectors is stored, and the largest Sørensen
//! distance from any training window to the mean becomes the health
//! threshold. At test time a window whose distance exceeds the threshold is
//! reported as defective.
//!
//! ```
//! use defectscan::{detect, synth_texture, train, TextureKind, TrainConfig};
//!
//! let clean = synth_texture(TextureKind::Stripes, 8, 128, 4.0, 1).unwrap();
//! let model = train(&[clean.clone()], TrainConfig::default()).unwrap();
//! assert_eq!(detect(&clean, &model).unwrap().defective_count(), 0);
//! ```

pub mod detector;
pub mod error;
pub mod eval;
pub mod features;
pub mod glcm;
pub mod imaging;
pub mod io;
pub mod model;

pub use detector::{classify_window, detect, render_overlay, DefectMap, Report, WindowVerdict};
pub use error::{Error, Result};
pub use eval::{
    detection_rate, inject_defect, macro_detection_rate, mask_to_ground_truth,
    pooled_detection_rate, synth_texture, DefectKind, DetectionCounts, GroundTruth, Region,
    TextureKind, DEFAULT_COVERAGE,
};
pub use features::{
    energy, feature_vector, grid_features, DirectionalEnergies, EnergyMode, FeatureVector,
};
pub use glcm::{compute_glcm, glcm_quad, Direction, Glcm};
pub use imaging::{
    decode_image, load_image, quantize, tile, to_grayscale, GrayImage, Plane, QuantizedImage,
    WindowGrid, DEFAULT_LEVELS, DEFAULT_WINDOW,
};
pub use model::{
    average_vector, compute_threshold, load_model, save_model, sorensen_distance, train,
    DefectModel, TrainConfig, INFINITE_DISTANCE,
};
