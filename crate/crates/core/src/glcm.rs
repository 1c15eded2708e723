//! Directed gray-level co-occurrence matrices at unit distance.

use std::fmt;

use crate::error::{Error, Result};
use crate::imaging::Plane;

/// Neighbor relation for the co-occurrence count, named by its angle.
///
/// Offsets are `(row, col)` deltas with rows growing downward, so `D90`
/// looks one row up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    D0,
    D45,
    D90,
    D135,
    D180,
    D225,
    D270,
    D315,
}

impl Direction {
    pub const ALL: [Direction; 8] = [
        Direction::D0,
        Direction::D45,
        Direction::D90,
        Direction::D135,
        Direction::D180,
        Direction::D225,
        Direction::D270,
        Direction::D315,
    ];

    /// The four directions the feature vector is built from.
    pub const CANONICAL: [Direction; 4] = [
        Direction::D0,
        Direction::D45,
        Direction::D90,
        Direction::D135,
    ];

    pub const fn offset(self) -> (isize, isize) {
        match self {
            Direction::D0 => (0, 1),
            Direction::D45 => (-1, 1),
            Direction::D90 => (-1, 0),
            Direction::D135 => (-1, -1),
            Direction::D180 => (0, -1),
            Direction::D225 => (1, -1),
            Direction::D270 => (1, 0),
            Direction::D315 => (1, 1),
        }
    }

    pub const fn degrees(self) -> u16 {
        match self {
            Direction::D0 => 0,
            Direction::D45 => 45,
            Direction::D90 => 90,
            Direction::D135 => 135,
            Direction::D180 => 180,
            Direction::D225 => 225,
            Direction::D270 => 270,
            Direction::D315 => 315,
        }
    }

    pub const fn opposite(self) -> Direction {
        match self {
            Direction::D0 => Direction::D180,
            Direction::D45 => Direction::D225,
            Direction::D90 => Direction::D270,
            Direction::D135 => Direction::D315,
            Direction::D180 => Direction::D0,
            Direction::D225 => Direction::D45,
            Direction::D270 => Direction::D90,
            Direction::D315 => Direction::D135,
        }
    }

    const fn name(self) -> &'static str {
        match self {
            Direction::D0 => "0°",
            Direction::D45 => "45°",
            Direction::D90 => "90°",
            Direction::D135 => "135°",
            Direction::D180 => "180°",
            Direction::D225 => "225°",
            Direction::D270 => "270°",
            Direction::D315 => "315°",
        }
    }

    /// Number of in-bounds (pixel, neighbor) pairs on a `width x height` grid.
    pub fn pair_count(self, width: usize, height: usize) -> usize {
        let (dr, dc) = self.offset();
        let rows = height.saturating_sub(dr.unsigned_abs());
        let cols = width.saturating_sub(dc.unsigned_abs());
        rows * cols
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `levels x levels` count matrix; `counts[i][j]` is the number of pixels at
/// level `i` whose neighbor along `direction` is at level `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Glcm {
    levels: usize,
    direction: Direction,
    counts: Vec<u32>,
    total: u64,
}

impl Glcm {
    pub fn zeros(levels: usize, direction: Direction) -> Self {
        Self {
            levels,
            direction,
            counts: vec![0; levels * levels],
            total: 0,
        }
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// Row-major `levels x levels` counts.
    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.counts[i * self.levels + j]
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn transpose(&self) -> Self {
        let n = self.levels;
        let mut counts = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                counts[j * n + i] = self.counts[i * n + j];
            }
        }
        Self {
            levels: n,
            direction: self.direction.opposite(),
            counts,
            total: self.total,
        }
    }

    /// Recounts `window` along `direction`, reusing this matrix's storage.
    pub fn compute_into(&mut self, window: Plane<'_>, direction: Direction) -> Result<()> {
        let (w, h) = (window.width(), window.height());
        if direction.pair_count(w, h) == 0 {
            return Err(Error::NoPixelPairs {
                width: w,
                height: h,
                direction: direction.name(),
            });
        }
        let n = window.levels();
        self.levels = n;
        self.direction = direction;
        self.counts.clear();
        self.counts.resize(n * n, 0);

        let (dr, dc) = direction.offset();
        // Source rows/cols whose neighbor stays inside the window.
        let (y0, y1) = if dr < 0 { (1, h) } else { (0, h - dr as usize) };
        let (x0, x1) = if dc < 0 { (1, w) } else { (0, w - dc as usize) };
        let nx0 = (x0 as isize + dc) as usize;
        let len = x1 - x0;
        for y in y0..y1 {
            let src = &window.row(y)[x0..x1];
            let dst = &window.row((y as isize + dr) as usize)[nx0..nx0 + len];
            for (&a, &b) in src.iter().zip(dst) {
                self.counts[usize::from(a) * n + usize::from(b)] += 1;
            }
        }
        self.total = ((y1 - y0) * len) as u64;
        Ok(())
    }

    /// Comma-separated dump, one matrix row per line.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.counts.chunks(self.levels) {
            let line: Vec<String> = row.iter().map(u32::to_string).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn compute_glcm(window: Plane<'_>, direction: Direction) -> Result<Glcm> {
    let mut g = Glcm::zeros(window.levels(), direction);
    g.compute_into(window, direction)?;
    Ok(g)
}

/// GLCMs for 0°, 45°, 90° and 135°, in that order.
pub fn glcm_quad(window: Plane<'_>) -> Result<[Glcm; 4]> {
    if window.width() < 2 || window.height() < 2 {
        return Err(Error::NoPixelPairs {
            width: window.width(),
            height: window.height(),
            direction: "diagonal",
        });
    }
    Ok([
        compute_glcm(window, Direction::D0)?,
        compute_glcm(window, Direction::D45)?,
        compute_glcm(window, Direction::D90)?,
        compute_glcm(window, Direction::D135)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::QuantizedImage;
    use proptest::prelude::*;

    fn naive(img: &QuantizedImage, direction: Direction) -> Vec<u32> {
        let n = img.levels();
        let (dr, dc) = direction.offset();
        let mut counts = vec![0; n * n];
        for y in 0..img.height() as isize {
            for x in 0..img.width() as isize {
                let (ny, nx) = (y + dr, x + dc);
                if ny < 0 || nx < 0 || ny >= img.height() as isize || nx >= img.width() as isize {
                    continue;
                }
                let a = img.pixels()[y as usize * img.width() + x as usize] as usize;
                let b = img.pixels()[ny as usize * img.width() + nx as usize] as usize;
                counts[a * n + b] += 1;
            }
        }
        counts
    }

    #[test]
    fn offsets_are_antisymmetric() {
        for d in Direction::ALL {
            let (r, c) = d.offset();
            assert_eq!(d.opposite().offset(), (-r, -c));
            assert_eq!(d.opposite().opposite(), d);
        }
        assert_eq!(Direction::D315.offset(), (1, 1));
    }

    #[test]
    fn constant_2x2() {
        let img = QuantizedImage::new(2, 2, 2, vec![0; 4]).unwrap();
        let g = compute_glcm(img.view(), Direction::D0).unwrap();
        assert_eq!(g.get(0, 0), 2);
        assert_eq!(g.total(), 2);
        assert_eq!(g.counts().iter().sum::<u32>(), 2);

        let totals: Vec<u64> = glcm_quad(img.view())
            .unwrap()
            .iter()
            .map(Glcm::total)
            .collect();
        assert_eq!(totals, vec![2, 1, 2, 1]);
    }

    #[test]
    fn three_level_example() {
        // rows [0 0 1; 1 2 2; 0 1 2]
        let img = QuantizedImage::new(3, 3, 3, vec![0, 0, 1, 1, 2, 2, 0, 1, 2]).unwrap();
        let g = compute_glcm(img.view(), Direction::D0).unwrap();
        assert_eq!(g.counts(), &[1, 2, 0, 0, 0, 2, 0, 0, 1]);
        assert_eq!(g.total(), 6);
        assert_eq!(g.to_csv(), "1,2,0\n0,0,2\n0,0,1\n");
    }

    #[test]
    fn reverse_direction_is_transpose() {
        let img = QuantizedImage::new(4, 3, 4, vec![0, 1, 2, 3, 3, 2, 1, 0, 1, 1, 3, 0]).unwrap();
        for d in Direction::ALL {
            let g = compute_glcm(img.view(), d).unwrap();
            assert_eq!(
                compute_glcm(img.view(), d.opposite()).unwrap(),
                g.transpose()
            );
        }
    }

    #[test]
    fn row_image_rejects_vertical_and_diagonals() {
        let img = QuantizedImage::new(5, 1, 4, vec![0, 1, 2, 3, 0]).unwrap();
        assert_eq!(compute_glcm(img.view(), Direction::D0).unwrap().total(), 4);
        assert_eq!(
            compute_glcm(img.view(), Direction::D180).unwrap().total(),
            4
        );
        for d in [Direction::D90, Direction::D45, Direction::D315] {
            assert!(matches!(
                compute_glcm(img.view(), d),
                Err(Error::NoPixelPairs { .. })
            ));
        }
        assert!(glcm_quad(img.view()).is_err());
    }

    fn arb_image() -> impl Strategy<Value = QuantizedImage> {
        (2usize..=8, 1usize..=16, 1usize..=16).prop_flat_map(|(levels, w, h)| {
            proptest::collection::vec(0..levels as u8, w * h)
                .prop_map(move |px| QuantizedImage::new(w, h, levels, px).unwrap())
        })
    }

    proptest! {
        #[test]
        fn matches_naive_enumeration(img in arb_image()) {
            for d in Direction::ALL {
                let expected_total = d.pair_count(img.width(), img.height());
                match compute_glcm(img.view(), d) {
                    Ok(g) => {
                        let expected = naive(&img, d);
                        prop_assert_eq!(g.counts(), expected.as_slice());
                        prop_assert_eq!(g.total() as usize, expected_total);
                        prop_assert_eq!(g.counts().iter().map(|&c| c as u64).sum::<u64>(), g.total());
                    }
                    Err(_) => prop_assert_eq!(expected_total, 0),
                }
            }
        }

        #[test]
        fn relabeling_permutes_rows_and_cols(img in arb_image(), shift in 0usize..8) {
            let n = img.levels();
            let perm: Vec<u8> = (0..n).map(|v| ((v + shift) % n) as u8).collect();
            let relabeled = QuantizedImage::new(
                img.width(), img.height(), n,
                img.pixels().iter().map(|&p| perm[p as usize]).collect(),
            ).unwrap();
            for d in Direction::ALL {
                if let (Ok(a), Ok(b)) = (compute_glcm(img.view(), d), compute_glcm(relabeled.view(), d)) {
                    for i in 0..n {
                        for j in 0..n {
                            prop_assert_eq!(a.get(i, j), b.get(perm[i] as usize, perm[j] as usize));
                        }
                    }
                }
            }
        }
    }
}
