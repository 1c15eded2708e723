//! Seeded procedural textures and defect injection.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::imaging::GrayImage;

pub const LOW_LEVEL: u8 = 64;
pub const HIGH_LEVEL: u8 = 192;

const BLUR_RADIUS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TextureKind {
    /// Vertical bands: the first half of each period is dark.
    Stripes,
    Checker,
    /// Horizontal sinusoid with vertical wavefronts.
    Sinusoid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DefectKind {
    /// Region content rotated 90° counter-clockwise; region must be square.
    Rotate90,
    /// 5x5 box blur of the region.
    Blur,
    /// Brightness offset of seeded sign and magnitude in [48, 96].
    LevelShift,
}

macro_rules! str_enum {
    ($ty:ident { $($variant:ident => $name:literal),+ $(,)? }) => {
        impl $ty {
            pub fn as_str(self) -> &'static str {
                match self { $($ty::$variant => $name),+ }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok($ty::$variant),)+
                    other => Err(Error::InvalidParameter(format!(
                        concat!("unknown ", stringify!($ty), " {:?}"), other
                    ))),
                }
            }
        }
    };
}

str_enum!(TextureKind { Stripes => "stripes", Checker => "checker", Sinusoid => "sinusoid" });
str_enum!(DefectKind { Rotate90 => "rotate90", Blur => "blur", LevelShift => "level-shift" });

/// Axis-aligned pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Region {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

impl Region {
    pub fn new(x: usize, y: usize, width: usize, height: usize) -> Self {
        Self {
            x,
            y,
            width,
            height,
        }
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x && x < self.x + self.width && y >= self.y && y < self.y + self.height
    }

    fn fits(&self, img: &GrayImage) -> bool {
        self.x
            .checked_add(self.width)
            .is_some_and(|r| r <= img.width())
            && self
                .y
                .checked_add(self.height)
                .is_some_and(|b| b <= img.height())
    }
}

impl FromStr for Region {
    type Err = Error;

    /// Parses `x,y,width,height`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<usize> = s
            .split(',')
            .map(|p| p.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidParameter(format!("bad region {s:?}: {e}")))?;
        match parts[..] {
            [x, y, w, h] => Ok(Region::new(x, y, w, h)),
            _ => Err(Error::InvalidParameter(format!(
                "region {s:?} must be x,y,width,height"
            ))),
        }
    }
}

/// `size x size` texture with additive Gaussian noise of std-dev `noise`.
pub fn synth_texture(
    kind: TextureKind,
    period: usize,
    size: usize,
    noise: f64,
    seed: u64,
) -> Result<GrayImage> {
    if period < 2 {
        return Err(Error::InvalidParameter(format!(
            "period must be >= 2, got {period}"
        )));
    }
    if size < period {
        return Err(Error::InvalidParameter(format!(
            "size {size} is smaller than period {period}"
        )));
    }
    if !(noise.is_finite() && noise >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "noise must be >= 0, got {noise}"
        )));
    }
    let first_half = |v: usize| (v % period) * 2 < period;
    let base = |x: usize, y: usize| -> f64 {
        match kind {
            TextureKind::Stripes => {
                if first_half(x) {
                    f64::from(LOW_LEVEL)
                } else {
                    f64::from(HIGH_LEVEL)
                }
            }
            TextureKind::Checker => {
                if first_half(x) ^ first_half(y) {
                    f64::from(HIGH_LEVEL)
                } else {
                    f64::from(LOW_LEVEL)
                }
            }
            TextureKind::Sinusoid => {
                let phase = std::f64::consts::TAU * (x % period) as f64 / period as f64;
                128.0 + 96.0 * phase.sin()
            }
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, noise.max(f64::MIN_POSITIVE)).expect("finite std-dev");
    GrayImage::from_fn(size, size, |x, y| {
        let n = if noise > 0.0 {
            normal.sample(&mut rng)
        } else {
            0.0
        };
        (base(x, y) + n).round().clamp(0.0, 255.0) as u8
    })
}

/// Applies `kind` inside `region`; returns the altered image and a mask that
/// is 255 exactly on the region.
pub fn inject_defect(
    img: &GrayImage,
    region: Region,
    kind: DefectKind,
    seed: u64,
) -> Result<(GrayImage, GrayImage)> {
    if !region.fits(img) {
        return Err(Error::RegionOutOfBounds(region));
    }
    let mask = GrayImage::from_fn(img.width(), img.height(), |x, y| {
        if region.contains(x, y) {
            255
        } else {
            0
        }
    })?;
    let mut out = img.clone();
    if region.width == 0 || region.height == 0 {
        return Ok((out, mask));
    }
    let Region {
        x: rx,
        y: ry,
        width: rw,
        height: rh,
    } = region;
    match kind {
        DefectKind::Rotate90 => {
            if rw != rh {
                return Err(Error::InvalidParameter(format!(
                    "rotate90 needs a square region, got {rw}x{rh}"
                )));
            }
            for dy in 0..rh {
                for dx in 0..rw {
                    // destination (dx, dy) takes source (rw - 1 - dy, dx)
                    out.set(rx + dx, ry + dy, img.get(rx + rw - 1 - dy, ry + dx));
                }
            }
        }
        DefectKind::Blur => {
            for y in ry..ry + rh {
                for x in rx..rx + rw {
                    let (x0, x1) = (
                        x.saturating_sub(BLUR_RADIUS),
                        (x + BLUR_RADIUS).min(img.width() - 1),
                    );
                    let (y0, y1) = (
                        y.saturating_sub(BLUR_RADIUS),
                        (y + BLUR_RADIUS).min(img.height() - 1),
                    );
                    let mut sum = 0u32;
                    for yy in y0..=y1 {
                        for xx in x0..=x1 {
                            sum += u32::from(img.get(xx, yy));
                        }
                    }
                    let n = ((x1 - x0 + 1) * (y1 - y0 + 1)) as u32;
                    out.set(x, y, ((sum + n / 2) / n) as u8);
                }
            }
        }
        DefectKind::LevelShift => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let magnitude: i32 = rng.random_range(48..=96);
            let shift = if rng.random::<bool>() {
                magnitude
            } else {
                -magnitude
            };
            for y in ry..ry + rh {
                for x in rx..rx + rw {
                    let v = (i32::from(img.get(x, y)) + shift).clamp(0, 255);
                    out.set(x, y, v as u8);
                }
            }
        }
    }
    Ok((out, mask))
}
