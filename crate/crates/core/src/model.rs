//! Training: mean feature vector, Sørensen health threshold, model files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{grid_features, EnergyMode, FeatureVector, FEATURE_DIM};
use crate::imaging::{quantize, tile, GrayImage, DEFAULT_LEVELS, DEFAULT_WINDOW};
use crate::io::write_atomic;

pub const MODEL_VERSION: u64 = 1;

/// Denominators (and numerators) below this are treated as zero.
pub const DISTANCE_EPSILON: f64 = 1e-12;

/// Distance reported when two vectors cancel out but still differ.
/// Compares greater than every finite threshold.
pub const INFINITE_DISTANCE: f64 = f64::INFINITY;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub levels: usize,
    pub window: usize,
    pub energy_mode: EnergyMode,
    /// Multiplier applied to the largest training distance; 1.0 keeps the raw max.
    pub threshold_margin: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            levels: DEFAULT_LEVELS,
            window: DEFAULT_WINDOW,
            energy_mode: EnergyMode::Asm,
            threshold_margin: 1.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(2..=256).contains(&self.levels) {
            return Err(Error::LevelsOutOfRange(self.levels));
        }
        if self.window < 2 {
            return Err(Error::WindowTooSmall(self.window));
        }
        check_margin(self.threshold_margin)
    }
}

fn check_margin(margin: f64) -> Result<()> {
    if margin.is_finite() && margin >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "threshold margin must be a finite value >= 1, got {margin}"
        )))
    }
}

/// Componentwise arithmetic mean.
pub fn average_vector(vectors: &[FeatureVector]) -> Result<FeatureVector> {
    if vectors.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut sum = [0.0; FEATURE_DIM];
    for v in vectors {
        for (s, x) in sum.iter_mut().zip(v.0) {
            *s += x;
        }
    }
    let k = vectors.len() as f64;
    Ok(FeatureVector(sum.map(|s| s / k)))
}

/// `Σ|f - g| / Σ|f + g|` over the six components.
///
/// When the denominator vanishes the result is 0 if the numerator vanishes
/// too, otherwise [`INFINITE_DISTANCE`].
pub fn sorensen_distance(f: &FeatureVector, g: &FeatureVector) -> Result<f64> {
    if !f.is_finite() || !g.is_finite() {
        return Err(Error::NonFinite);
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (a, b) in f.0.iter().zip(&g.0) {
        num += (a - b).abs();
        den += (a + b).abs();
    }
    if den < DISTANCE_EPSILON {
        return Ok(if num < DISTANCE_EPSILON {
            0.0
        } else {
            INFINITE_DISTANCE
        });
    }
    Ok(num / den)
}

/// `margin` times the largest distance from any vector to `average`.
pub fn compute_threshold(
    vectors: &[FeatureVector],
    average: &FeatureVector,
    margin: f64,
) -> Result<f64> {
    if vectors.is_empty() {
        return Err(Error::EmptyInput);
    }
    check_margin(margin)?;
    let mut max = 0.0f64;
    for (index, v) in vectors.iter().enumerate() {
        let d = sorensen_distance(v, average)?;
        if d == INFINITE_DISTANCE {
            return Err(Error::InconsistentTraining { index });
        }
        max = max.max(d);
    }
    Ok(margin * max)
}

/// Trained one-class model: healthy mean vector plus the health threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct DefectModel {
    config: TrainConfig,
    average: FeatureVector,
    threshold: f64,
    trained_windows: usize,
}

impl DefectModel {
    /// Assembles a model from already-validated parts.
    pub fn from_parts(
        config: TrainConfig,
        average: FeatureVector,
        threshold: f64,
        trained_windows: usize,
    ) -> Result<Self> {
        config.validate()?;
        if !average.is_finite() || !threshold.is_finite() {
            return Err(Error::NonFinite);
        }
        if threshold < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "threshold must be >= 0, got {threshold}"
            )));
        }
        if trained_windows == 0 {
            return Err(Error::EmptyInput);
        }
        Ok(Self {
            config,
            average,
            threshold,
            trained_windows,
        })
    }

    /// Fits mean and threshold to precomputed healthy feature vectors.
    pub fn fit(vectors: &[FeatureVector], config: TrainConfig) -> Result<Self> {
        config.validate()?;
        let average = average_vector(vectors)?;
        let threshold = compute_threshold(vectors, &average, config.threshold_margin)?;
        Self::from_parts(config, average, threshold, vectors.len())
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn average(&self) -> &FeatureVector {
        &self.average
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn trained_windows(&self) -> usize {
        self.trained_windows
    }

    /// Copy of this model with a different threshold.
    pub fn with_threshold(&self, threshold: f64) -> Result<Self> {
        Self::from_parts(self.config, self.average, threshold, self.trained_windows)
    }

    pub fn to_json(&self) -> String {
        let file = ModelFile {
            version: MODEL_VERSION,
            levels: self.config.levels,
            window: self.config.window,
            energy_mode: self.config.energy_mode,
            margin: self.config.threshold_margin,
            average: self.average.0,
            threshold: self.threshold,
            trained_windows: self.trained_windows,
        };
        let mut s = serde_json::to_string_pretty(&file).expect("model fields are plain numbers");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::MalformedModel(e.to_string()))?;
        match value.get("version").map(serde_json::Value::as_u64) {
            Some(Some(MODEL_VERSION)) => {}
            Some(Some(v)) => return Err(Error::UnsupportedVersion(v)),
            Some(None) => return Err(Error::MalformedModel("version is not an integer".into())),
            None => return Err(Error::MalformedModel("missing version".into())),
        }
        let file: ModelFile =
            serde_json::from_value(value).map_err(|e| Error::MalformedModel(e.to_string()))?;
        let config = TrainConfig {
            levels: file.levels,
            window: file.window,
            energy_mode: file.energy_mode,
            threshold_margin: file.margin,
        };
        Self::from_parts(
            config,
            FeatureVector(file.average),
            file.threshold,
            file.trained_windows,
        )
        .map_err(|e| Error::MalformedModel(e.to_string()))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    version: u64,
    levels: usize,
    window: usize,
    energy_mode: EnergyMode,
    margin: f64,
    average: [f64; FEATURE_DIM],
    threshold: f64,
    trained_windows: usize,
}

pub fn save_model(model: &DefectModel, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), model.to_json().as_bytes())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<DefectModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::FileNotFound(path.to_path_buf()),
        _ => e.into(),
    })?;
    DefectModel::from_json(&text)
}

/// Feature vectors of every window of every image, image order then row-major.
pub fn training_vectors(images: &[GrayImage], config: &TrainConfig) -> Result<Vec<FeatureVector>> {
    config.validate()?;
    let mut all = Vec::new();
    for img in images {
        let q = quantize(img, config.levels)?;
        let grid = tile(&q, config.window)?;
        all.extend(grid_features(&q, &grid, config.energy_mode)?);
    }
    Ok(all)
}

pub fn train(images: &[GrayImage], config: TrainConfig) -> Result<DefectModel> {
    if images.is_empty() {
        return Err(Error::InvalidParameter("no training images".into()));
    }
    let vectors = training_vectors(images, &config)?;
    DefectModel::fit(&vectors, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fv(v: [f64; 6]) -> FeatureVector {
        FeatureVector(v)
    }

    #[test]
    fn average_examples() {
        let v = fv([0.1, -0.2, 0.3, 0.0, 0.5, -0.6]);
        assert_eq!(average_vector(&[v]).unwrap(), v);
        assert_eq!(
            average_vector(&[fv([0.0; 6]), fv([2.0; 6])]).unwrap(),
            fv([1.0; 6])
        );
        let three = [
            fv([3.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
            fv([0.0, 3.0, 0.0, 0.0, 0.0, 0.0]),
            fv([0.0, 0.0, 3.0, 0.0, 0.0, 0.0]),
        ];
        assert_eq!(
            average_vector(&three).unwrap(),
            fv([1.0, 1.0, 1.0, 0.0, 0.0, 0.0])
        );
        assert!(matches!(average_vector(&[]), Err(Error::EmptyInput)));
    }

    #[test]
    fn distance_examples() {
        let f = fv([0.2, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let g = fv([0.1, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!((sorensen_distance(&f, &g).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(sorensen_distance(&f, &f).unwrap(), 0.0);

        let a = fv([0.1, -0.1, 0.0, 0.0, 0.0, 0.0]);
        let b = fv([-0.1, 0.1, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(sorensen_distance(&a, &b).unwrap(), INFINITE_DISTANCE);
        assert_eq!(
            sorensen_distance(&FeatureVector::ZERO, &FeatureVector::ZERO).unwrap(),
            0.0
        );
    }

    #[test]
    fn distance_rejects_non_finite() {
        let bad = fv([f64::NAN, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(matches!(
            sorensen_distance(&bad, &FeatureVector::ZERO),
            Err(Error::NonFinite)
        ));
    }

    #[test]
    fn threshold_examples() {
        // distances {0.1, 0.3, 0.2} to the chosen reference
        let avg = fv([1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let at = |d: f64| fv([(1.0 + d) / (1.0 - d), 0.0, 0.0, 0.0, 0.0, 0.0]);
        let vs = [at(0.1), at(0.3), at(0.2)];
        assert!((compute_threshold(&vs, &avg, 1.0).unwrap() - 0.3).abs() < 1e-12);

        let same = [fv([0.1; 6]); 5];
        assert_eq!(
            compute_threshold(&same, &average_vector(&same).unwrap(), 1.0).unwrap(),
            0.0
        );
        let one = [fv([0.3, -0.1, 0.2, 0.0, 0.0, 0.0])];
        assert_eq!(compute_threshold(&one, &one[0], 1.0).unwrap(), 0.0);
        assert!(compute_threshold(&[], &avg, 1.0).is_err());
        assert!(compute_threshold(&vs, &avg, 0.5).is_err());
    }

    #[test]
    fn threshold_rejects_cancelling_training_vector() {
        let avg = fv([0.1, -0.1, 0.0, 0.0, 0.0, 0.0]);
        let vs = [avg, fv([-0.1, 0.1, 0.0, 0.0, 0.0, 0.0])];
        assert!(matches!(
            compute_threshold(&vs, &avg, 1.0),
            Err(Error::InconsistentTraining { index: 1 })
        ));
    }

    #[test]
    fn train_constant_image() {
        let img = GrayImage::filled(64, 64, 100).unwrap();
        let m = train(&[img], TrainConfig::default()).unwrap();
        assert_eq!(m.trained_windows(), 4);
        assert_eq!(*m.average(), FeatureVector::ZERO);
        assert_eq!(m.threshold(), 0.0);
    }

    #[test]
    fn train_rejects_empty_and_small() {
        assert!(train(&[], TrainConfig::default()).is_err());
        let small = GrayImage::filled(16, 16, 0).unwrap();
        assert!(matches!(
            train(&[small], TrainConfig::default()),
            Err(Error::WindowTooLarge { .. })
        ));
        let cfg = TrainConfig {
            levels: 1,
            ..TrainConfig::default()
        };
        assert!(matches!(
            train(&[GrayImage::filled(64, 64, 0).unwrap()], cfg),
            Err(Error::LevelsOutOfRange(1))
        ));
    }

    fn sample_model() -> DefectModel {
        DefectModel::from_parts(
            TrainConfig {
                levels: 16,
                window: 24,
                energy_mode: EnergyMode::Histogram,
                threshold_margin: 1.25,
            },
            fv([0.1, -0.2, 1.0 / 3.0, 1e-17, -0.0, 0.123456789012345]),
            0.625,
            42,
        )
        .unwrap()
    }

    #[test]
    fn model_round_trip_through_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        let m = sample_model();
        save_model(&m, &path).unwrap();
        let back = load_model(&path).unwrap();
        assert_eq!(back, m);
        for (a, b) in back.average().0.iter().zip(m.average().0) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn model_file_schema() {
        let v: serde_json::Value = serde_json::from_str(&sample_model().to_json()).unwrap();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(
            sorted,
            [
                "average",
                "energy_mode",
                "levels",
                "margin",
                "threshold",
                "trained_windows",
                "version",
                "window"
            ]
        );
        assert_eq!(v["version"], 1);
        assert_eq!(v["energy_mode"], "histogram");
    }

    #[test]
    fn load_rejects_bad_files() {
        let good: serde_json::Value = serde_json::from_str(&sample_model().to_json()).unwrap();

        let mut v = good.clone();
        v["version"] = 99.into();
        let err = DefectModel::from_json(&v.to_string()).unwrap_err();
        assert!(
            err.to_string().contains("unsupported model version"),
            "{err}"
        );

        let mut v = good.clone();
        v["threshold"] = "NaN".into();
        assert!(matches!(
            DefectModel::from_json(&v.to_string()),
            Err(Error::MalformedModel(_))
        ));

        let mut v = good.clone();
        v["extra"] = 1.into();
        assert!(DefectModel::from_json(&v.to_string()).is_err());

        let mut v = good.clone();
        v["average"] = serde_json::json!([0.0, 0.0]);
        assert!(DefectModel::from_json(&v.to_string()).is_err());

        let mut v = good;
        v["threshold"] = (-1.0).into();
        assert!(DefectModel::from_json(&v.to_string()).is_err());

        assert!(DefectModel::from_json("{not json").is_err());
        assert!(matches!(
            load_model("/nonexistent/model.json"),
            Err(Error::FileNotFound(_))
        ));
    }

    fn arb_vec() -> impl Strategy<Value = FeatureVector> {
        proptest::array::uniform6(-1.0f64..1.0).prop_map(FeatureVector)
    }

    proptest! {
        #[test]
        fn distance_symmetric_nonnegative(f in arb_vec(), g in arb_vec()) {
            let d = sorensen_distance(&f, &g).unwrap();
            prop_assert!(d >= 0.0);
            prop_assert_eq!(d, sorensen_distance(&g, &f).unwrap());
            prop_assert_eq!(sorensen_distance(&f, &f).unwrap(), 0.0);
        }

        #[test]
        fn average_is_order_independent(mut vs in proptest::collection::vec(arb_vec(), 1..20)) {
            let a = average_vector(&vs).unwrap();
            vs.reverse();
            let b = average_vector(&vs).unwrap();
            for (x, y) in a.0.iter().zip(b.0) {
                prop_assert!((x - y).abs() < 1e-12);
            }
            let copies = vec![vs[0]; vs.len()];
            let c = average_vector(&copies).unwrap();
            for (x, y) in c.0.iter().zip(vs[0].0) {
                prop_assert!((x - y).abs() <= 1e-15 * vs.len() as f64);
            }
        }

        #[test]
        fn fit_closure_and_margin(vs in proptest::collection::vec(arb_vec(), 1..30), margin in 1.0f64..3.0) {
            let base = DefectModel::fit(&vs, TrainConfig::default());
            prop_assume!(base.is_ok());
            let base = base.unwrap();
            let mut hit = false;
            for v in &vs {
                let d = sorensen_distance(v, base.average()).unwrap();
                prop_assert!(d <= base.threshold());
                hit |= d == base.threshold();
            }
            prop_assert!(hit);
            let cfg = TrainConfig { threshold_margin: margin, ..TrainConfig::default() };
            let scaled = DefectModel::fit(&vs, cfg).unwrap();
            prop_assert_eq!(scaled.threshold(), margin * base.threshold());
        }
    }
}
