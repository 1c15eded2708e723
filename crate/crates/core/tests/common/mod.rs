//! Brute-force reference pipeline, written without touching the library's
//! quantizer, GLCM, energy or distance code. Used to cross-check it.

#![allow(dead_code)]

use std::collections::HashMap;

use defectscan::GrayImage;

pub const OFFSETS: [(i64, i64); 8] = [
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
];

/// Pair counts keyed by (level, neighbor level) for an owned pixel grid.
pub fn pair_counts(px: &[Vec<u32>], offset: (i64, i64)) -> HashMap<(u32, u32), u64> {
    let h = px.len() as i64;
    let w = px[0].len() as i64;
    let mut m = HashMap::new();
    for r in 0..h {
        for c in 0..w {
            let (nr, nc) = (r + offset.0, c + offset.1);
            if nr >= 0 && nr < h && nc >= 0 && nc < w {
                *m.entry((px[r as usize][c as usize], px[nr as usize][nc as usize]))
                    .or_insert(0) += 1;
            }
        }
    }
    m
}

pub fn asm(counts: &HashMap<(u32, u32), u64>) -> f64 {
    let total: u64 = counts.values().sum();
    counts
        .values()
        .map(|&c| {
            let p = c as f64 / total as f64;
            p * p
        })
        .sum()
}

/// Histogram-of-cell-values energy over the full `levels x levels` matrix.
pub fn histogram_energy(counts: &HashMap<(u32, u32), u64>, levels: u32) -> f64 {
    let cells = u64::from(levels) * u64::from(levels);
    let mut freq: HashMap<u64, u64> = HashMap::new();
    for i in 0..levels {
        for j in 0..levels {
            *freq.entry(*counts.get(&(i, j)).unwrap_or(&0)).or_insert(0) += 1;
        }
    }
    freq.values()
        .map(|&f| {
            let p = f as f64 / cells as f64;
            p * p
        })
        .sum()
}

pub fn features(px: &[Vec<u32>]) -> [f64; 6] {
    let e: Vec<f64> = OFFSETS[..4]
        .iter()
        .map(|&o| asm(&pair_counts(px, o)))
        .collect();
    [
        e[0] - e[1],
        e[0] - e[2],
        e[0] - e[3],
        e[1] - e[2],
        e[1] - e[3],
        e[2] - e[3],
    ]
}

pub fn sorensen(f: &[f64; 6], g: &[f64; 6]) -> f64 {
    let num: f64 = f.iter().zip(g).map(|(a, b)| (a - b).abs()).sum();
    let den: f64 = f.iter().zip(g).map(|(a, b)| (a + b).abs()).sum();
    if den < 1e-12 {
        if num < 1e-12 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    }
}

/// Quantized W x W windows of `img`, row-major.
pub fn windows(img: &GrayImage, levels: u32, w: usize) -> Vec<Vec<Vec<u32>>> {
    let mut out = Vec::new();
    for wr in 0..img.height() / w {
        for wc in 0..img.width() / w {
            let block = (0..w)
                .map(|y| {
                    (0..w)
                        .map(|x| u32::from(img.get(wc * w + x, wr * w + y)) * levels / 256)
                        .collect()
                })
                .collect();
            out.push(block);
        }
    }
    out
}

pub struct OracleModel {
    pub average: [f64; 6],
    pub threshold: f64,
    pub windows: usize,
}

pub fn train(images: &[GrayImage], levels: u32, w: usize) -> OracleModel {
    let feats: Vec<[f64; 6]> = images
        .iter()
        .flat_map(|img| windows(img, levels, w))
        .map(|b| features(&b))
        .collect();
    let mut average = [0.0; 6];
    for f in &feats {
        for d in 0..6 {
            average[d] += f[d];
        }
    }
    for a in &mut average {
        *a /= feats.len() as f64;
    }
    let threshold = feats
        .iter()
        .map(|f| sorensen(f, &average))
        .fold(0.0, f64::max);
    OracleModel {
        average,
        threshold,
        windows: feats.len(),
    }
}

/// (distance, defective) per window, row-major.
pub fn detect(img: &GrayImage, model: &OracleModel, levels: u32, w: usize) -> Vec<(f64, bool)> {
    windows(img, levels, w)
        .iter()
        .map(|b| {
            let d = sorensen(&features(b), &model.average);
            (d, d > model.threshold)
        })
        .collect()
}
