//! Test phase: per-window classification of an image against a trained model.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::features::{grid_features, FeatureVector};
use crate::imaging::{quantize, tile, GrayImage};
use crate::model::{sorensen_distance, DefectModel};

/// Gray value used for the outline of a defective window.
pub const HIGHLIGHT_BORDER: u8 = 255;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowVerdict {
    pub row: usize,
    pub col: usize,
    /// Distance to the model mean; `f64::INFINITY` for the cancelling case.
    pub distance: f64,
    pub defective: bool,
}

/// Distance to the model mean and the resulting verdict. A distance equal
/// to the threshold is healthy.
pub fn classify_window(f: &FeatureVector, model: &DefectModel) -> Result<(f64, bool)> {
    let distance = sorensen_distance(f, model.average())?;
    Ok((distance, distance > model.threshold()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DefectMap {
    rows: usize,
    cols: usize,
    window: usize,
    width: usize,
    height: usize,
    threshold: f64,
    verdicts: Vec<WindowVerdict>,
}

impl DefectMap {
    /// Builds a map from row-major distances, classifying against `threshold`.
    pub fn from_distances(
        rows: usize,
        cols: usize,
        window: usize,
        (width, height): (usize, usize),
        threshold: f64,
        distances: &[f64],
    ) -> Result<Self> {
        if distances.len() != rows * cols {
            return Err(Error::GridMismatch {
                expected: (rows, cols),
                actual: (distances.len(), 1),
            });
        }
        if rows * window > height || cols * window > width {
            return Err(Error::InvalidParameter(format!(
                "{rows}x{cols} grid of {window}px windows exceeds {width}x{height}"
            )));
        }
        let verdicts = distances
            .iter()
            .enumerate()
            .map(|(i, &distance)| WindowVerdict {
                row: i / cols,
                col: i % cols,
                distance,
                defective: distance > threshold,
            })
            .collect();
        Ok(Self {
            rows,
            cols,
            window,
            width,
            height,
            threshold,
            verdicts,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// Dimensions of the image the map was computed from.
    pub fn source_dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Row-major verdicts.
    pub fn verdicts(&self) -> &[WindowVerdict] {
        &self.verdicts
    }

    pub fn get(&self, row: usize, col: usize) -> &WindowVerdict {
        &self.verdicts[row * self.cols + col]
    }

    pub fn defective_count(&self) -> usize {
        self.verdicts.iter().filter(|v| v.defective).count()
    }

    /// Reclassifies the stored distances under a different threshold.
    pub fn rescored(&self, threshold: f64) -> Self {
        let mut out = self.clone();
        out.threshold = threshold;
        for v in &mut out.verdicts {
            v.defective = v.distance > threshold;
        }
        out
    }

    pub fn to_report(&self) -> Report {
        Report {
            rows: self.rows,
            cols: self.cols,
            window: self.window,
            threshold: self.threshold,
            windows: self
                .verdicts
                .iter()
                .map(|v| ReportWindow {
                    row: v.row,
                    col: v.col,
                    distance: ReportDistance(v.distance),
                    defective: v.defective,
                })
                .collect(),
        }
    }
}

/// Quantizes, tiles and featurizes `img` with the model's settings, then
/// classifies every window.
pub fn detect(img: &GrayImage, model: &DefectModel) -> Result<DefectMap> {
    let cfg = model.config();
    let q = quantize(img, cfg.levels)?;
    let grid = tile(&q, cfg.window)?;
    let features = grid_features(&q, &grid, cfg.energy_mode)?;
    let distances = features
        .iter()
        .map(|f| sorensen_distance(f, model.average()))
        .collect::<Result<Vec<_>>>()?;
    DefectMap::from_distances(
        grid.rows(),
        grid.cols(),
        grid.window(),
        (img.width(), img.height()),
        model.threshold(),
        &distances,
    )
}

/// Copy of `img` with each defective window brightened halfway toward white
/// and outlined with a one-pixel [`HIGHLIGHT_BORDER`] frame.
pub fn render_overlay(img: &GrayImage, map: &DefectMap) -> Result<GrayImage> {
    if (img.width(), img.height()) != map.source_dimensions() {
        return Err(Error::GridMismatch {
            expected: map.source_dimensions(),
            actual: (img.width(), img.height()),
        });
    }
    let mut out = img.clone();
    let w = map.window;
    for v in map.verdicts.iter().filter(|v| v.defective) {
        let (x0, y0) = (v.col * w, v.row * w);
        for y in y0..y0 + w {
            for x in x0..x0 + w {
                let edge = x == x0 || y == y0 || x == x0 + w - 1 || y == y0 + w - 1;
                let value = if edge {
                    HIGHLIGHT_BORDER
                } else {
                    ((u16::from(img.get(x, y)) + 255) / 2) as u8
                };
                out.set(x, y, value);
            }
        }
    }
    Ok(out)
}

/// Serialized form of a [`DefectMap`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub rows: usize,
    pub cols: usize,
    pub window: usize,
    pub threshold: f64,
    pub windows: Vec<ReportWindow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportWindow {
    pub row: usize,
    pub col: usize,
    pub distance: ReportDistance,
    pub defective: bool,
}

/// A distance written as a JSON number, or the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportDistance(pub f64);

impl Serialize for ReportDistance {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for ReportDistance {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(ReportDistance(v)),
            Raw::Str(s) if s == "inf" => Ok(ReportDistance(f64::INFINITY)),
            Raw::Str(s) => Err(serde::de::Error::custom(format!(
                "expected a number or \"inf\", got {s:?}"
            ))),
        }
    }
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is plain data");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidParameter(format!("bad report: {e}")))
    }
}
