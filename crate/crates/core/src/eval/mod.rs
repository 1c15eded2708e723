//! Scoring against ground truth and synthetic test textures.

mod synth;

pub use synth::{
    inject_defect, synth_texture, DefectKind, Region, TextureKind, HIGH_LEVEL, LOW_LEVEL,
};

use crate::detector::DefectMap;
use crate::error::{Error, Result};
use crate::imaging::{GrayImage, WindowGrid};

pub const DEFAULT_COVERAGE: f64 = 0.10;

/// Per-window truth labels on a window grid; `true` means defective.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    rows: usize,
    cols: usize,
    labels: Vec<bool>,
}

impl GroundTruth {
    pub fn new(rows: usize, cols: usize, labels: Vec<bool>) -> Result<Self> {
        if labels.len() != rows * cols {
            return Err(Error::GridMismatch {
                expected: (rows, cols),
                actual: (labels.len(), 1),
            });
        }
        Ok(Self { rows, cols, labels })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn is_defective(&self, row: usize, col: usize) -> bool {
        self.labels[row * self.cols + col]
    }

    pub fn inverted(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            labels: self.labels.iter().map(|l| !l).collect(),
        }
    }
}

/// Labels a window defective when at least `coverage` of its pixels are 255
/// in `mask`.
pub fn mask_to_ground_truth(mask: &GrayImage, window: usize, coverage: f64) -> Result<GroundTruth> {
    if !(coverage > 0.0 && coverage <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "coverage must be in (0, 1], got {coverage}"
        )));
    }
    if let Some(&bad) = mask.pixels().iter().find(|&&p| p != 0 && p != 255) {
        return Err(Error::InvalidMask(bad));
    }
    let grid = WindowGrid::for_dimensions(mask.width(), mask.height(), window)?;
    let area = (window * window) as f64;
    let labels = grid
        .cells()
        .map(|(r, c)| {
            let (x0, y0) = grid.origin(r, c);
            let positive: usize = (y0..y0 + window)
                .map(|y| {
                    let row = &mask.pixels()[y * mask.width() + x0..y * mask.width() + x0 + window];
                    row.iter().filter(|&&p| p == 255).count()
                })
                .sum();
            positive as f64 / area >= coverage
        })
        .collect();
    GroundTruth::new(grid.rows(), grid.cols(), labels)
}

/// Window counts behind the detection rate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DetectionCounts {
    /// Truly healthy windows predicted healthy.
    pub n_c: usize,
    /// Truly defective windows predicted defective.
    pub n_d: usize,
    pub n_total: usize,
}

impl DetectionCounts {
    pub fn tally(map: &DefectMap, gt: &GroundTruth) -> Result<Self> {
        if (map.rows(), map.cols()) != (gt.rows, gt.cols) {
            return Err(Error::GridMismatch {
                expected: (map.rows(), map.cols()),
                actual: (gt.rows, gt.cols),
            });
        }
        let mut counts = DetectionCounts {
            n_total: gt.labels.len(),
            ..Default::default()
        };
        for (v, &truth) in map.verdicts().iter().zip(&gt.labels) {
            match (truth, v.defective) {
                (false, false) => counts.n_c += 1,
                (true, true) => counts.n_d += 1,
                _ => {}
            }
        }
        Ok(counts)
    }

    /// `100 * (n_c + n_d) / n_total`.
    pub fn rate(&self) -> Result<f64> {
        if self.n_total == 0 {
            return Err(Error::EmptyInput);
        }
        if self.n_c + self.n_d > self.n_total {
            return Err(Error::InvalidParameter(format!(
                "n_c + n_d = {} exceeds n_total = {}",
                self.n_c + self.n_d,
                self.n_total
            )));
        }
        Ok((100 * (self.n_c + self.n_d)) as f64 / self.n_total as f64)
    }
}

impl std::ops::Add for DetectionCounts {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self {
            n_c: self.n_c + rhs.n_c,
            n_d: self.n_d + rhs.n_d,
            n_total: self.n_total + rhs.n_total,
        }
    }
}

pub fn detection_rate(map: &DefectMap, gt: &GroundTruth) -> Result<f64> {
    DetectionCounts::tally(map, gt)?.rate()
}

/// Detection rate over the union of all windows.
pub fn pooled_detection_rate(runs: &[DetectionCounts]) -> Result<f64> {
    runs.iter()
        .copied()
        .fold(DetectionCounts::default(), |a, b| a + b)
        .rate()
}

/// Mean of the per-image detection rates.
pub fn macro_detection_rate(runs: &[DetectionCounts]) -> Result<f64> {
    if runs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let sum = runs
        .iter()
        .map(DetectionCounts::rate)
        .sum::<Result<f64>>()?;
    Ok(sum / runs.len() as f64)
}
