//! GLCM energy and the six-component directional energy-difference vector.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::glcm::{Direction, Glcm};
use crate::imaging::{Plane, QuantizedImage, WindowGrid};

/// How a GLCM is reduced to a single energy value.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnergyMode {
    /// Angular second moment: sum of squared normalized cell probabilities.
    #[default]
    Asm,
    /// Treats the matrix as an image whose pixel values are the raw cell
    /// counts and takes the energy of that image's normalized histogram.
    Histogram,
}

impl EnergyMode {
    pub fn as_str(self) -> &'static str {
        match self {
            EnergyMode::Asm => "asm",
            EnergyMode::Histogram => "histogram",
        }
    }
}

impl fmt::Display for EnergyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EnergyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "asm" => Ok(EnergyMode::Asm),
            "histogram" => Ok(EnergyMode::Histogram),
            other => Err(Error::InvalidParameter(format!(
                "unknown energy mode {other:?} (expected asm or histogram)"
            ))),
        }
    }
}

/// Energy of `glcm` in `(0, 1]`.
///
/// Both modes accumulate an exact integer sum of squares and divide once,
/// so a matrix and its transpose always produce bit-identical energies.
pub fn energy(glcm: &Glcm, mode: EnergyMode) -> Result<f64> {
    if glcm.total() == 0 {
        return Err(Error::EmptyGlcm);
    }
    let e = match mode {
        EnergyMode::Asm => {
            let sum_sq: u128 = glcm
                .counts()
                .iter()
                .map(|&c| u128::from(c) * u128::from(c))
                .sum();
            let total = glcm.total() as f64;
            sum_sq as f64 / (total * total)
        }
        EnergyMode::Histogram => {
            let mut freq: HashMap<u32, u64> = HashMap::new();
            for &c in glcm.counts() {
                *freq.entry(c).or_default() += 1;
            }
            let cells = glcm.counts().len() as f64;
            let sum_sq: u128 = freq.values().map(|&f| u128::from(f) * u128::from(f)).sum();
            sum_sq as f64 / (cells * cells)
        }
    };
    Ok(e)
}

/// Energies at 0°, 45°, 90° and 135°.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionalEnergies(pub [f64; 4]);

impl DirectionalEnergies {
    pub fn compute(window: Plane<'_>, mode: EnergyMode) -> Result<Self> {
        let mut scratch = Glcm::zeros(window.levels(), Direction::D0);
        Self::compute_with(window, mode, &mut scratch)
    }

    /// Same as [`compute`](Self::compute) but reuses `scratch` for the matrices.
    pub fn compute_with(window: Plane<'_>, mode: EnergyMode, scratch: &mut Glcm) -> Result<Self> {
        let mut out = [0.0; 4];
        for (slot, dir) in out.iter_mut().zip(Direction::CANONICAL) {
            scratch.compute_into(window, dir)?;
            *slot = energy(scratch, mode)?;
        }
        Ok(Self(out))
    }

    /// Pairwise differences in the fixed order
    /// `E0-E45, E0-E90, E0-E135, E45-E90, E45-E135, E90-E135`.
    pub fn differences(&self) -> FeatureVector {
        let [e0, e45, e90, e135] = self.0;
        FeatureVector([
            e0 - e45,
            e0 - e90,
            e0 - e135,
            e45 - e90,
            e45 - e135,
            e90 - e135,
        ])
    }
}

pub const FEATURE_DIM: usize = 6;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureVector(pub [f64; FEATURE_DIM]);

impl FeatureVector {
    pub const ZERO: FeatureVector = FeatureVector([0.0; FEATURE_DIM]);

    pub fn components(&self) -> &[f64; FEATURE_DIM] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn scale(&self, c: f64) -> FeatureVector {
        FeatureVector(self.0.map(|v| v * c))
    }
}

impl From<[f64; FEATURE_DIM]> for FeatureVector {
    fn from(v: [f64; FEATURE_DIM]) -> Self {
        FeatureVector(v)
    }
}

pub fn feature_vector(window: Plane<'_>, mode: EnergyMode) -> Result<FeatureVector> {
    ensure_2x2(window)?;
    Ok(DirectionalEnergies::compute(window, mode)?.differences())
}

fn feature_vector_with(
    window: Plane<'_>,
    mode: EnergyMode,
    scratch: &mut Glcm,
) -> Result<FeatureVector> {
    ensure_2x2(window)?;
    Ok(DirectionalEnergies::compute_with(window, mode, scratch)?.differences())
}

/// Feature vectors for every window of `grid`, in row-major order.
///
/// Windows are featurized in parallel; the output order does not depend on
/// scheduling.
pub fn grid_features(
    img: &QuantizedImage,
    grid: &WindowGrid,
    mode: EnergyMode,
) -> Result<Vec<FeatureVector>> {
    let cells: Vec<(usize, usize)> = grid.cells().collect();
    cells
        .par_iter()
        .map_init(
            || Glcm::zeros(img.levels(), Direction::D0),
            |scratch, &(r, c)| feature_vector_with(grid.plane(img, r, c), mode, scratch),
        )
        .collect()
}

fn ensure_2x2(window: Plane<'_>) -> Result<()> {
    if window.width() < 2 || window.height() < 2 {
        return Err(Error::NoPixelPairs {
            width: window.width(),
            height: window.height(),
            direction: "diagonal",
        });
    }
    Ok(())
}
