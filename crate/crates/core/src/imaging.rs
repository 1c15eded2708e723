//! Image input, grayscale reduction, gray-level quantization and window tiling.
//!
//! Every texture computation downstream runs on a [`QuantizedImage`] or a
//! borrowed [`Plane`] into one, so windows never copy pixels.

use std::io::Cursor;
use std::path::Path;

use image::{DynamicImage, ImageFormat};

use crate::error::{Error, Result};
use crate::io::write_atomic;

pub const DEFAULT_LEVELS: usize = 32;
pub const DEFAULT_WINDOW: usize = 32;

const PNG_MAGIC: &[u8] = b"\x89PNG\r\n\x1a\n";
const PGM_MAGIC: &[u8] = b"P5";

/// 8-bit single-channel image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!(
                "zero-dimension image ({width}x{height})"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "expected {} pixels for {width}x{height}, got {}",
                width * height,
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> u8,
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        self.pixels[y * self.width + x] = value;
    }

    /// Encodes as an 8-bit grayscale PNG.
    pub fn encode_png(&self) -> Result<Vec<u8>> {
        self.encode(ImageFormat::Png)
    }

    /// Encodes as a binary (P5) PGM.
    pub fn encode_pgm(&self) -> Result<Vec<u8>> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        Ok(out)
    }

    fn encode(&self, format: ImageFormat) -> Result<Vec<u8>> {
        let buf =
            image::GrayImage::from_raw(self.width as u32, self.height as u32, self.pixels.clone())
                .expect("pixel buffer length checked at construction");
        let mut out = Cursor::new(Vec::new());
        buf.write_to(&mut out, format)
            .map_err(|e| Error::Decode(e.to_string()))?;
        Ok(out.into_inner())
    }

    /// Writes the image atomically; `.pgm` paths get P5, anything else PNG.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let is_pgm = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("pgm"));
        let bytes = if is_pgm {
            self.encode_pgm()?
        } else {
            self.encode_png()?
        };
        write_atomic(path, &bytes)
    }
}

/// BT.601 luma, rounded half away from zero.
pub fn to_grayscale(r: u8, g: u8, b: u8) -> u8 {
    let luma = 0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b);
    luma.round().clamp(0.0, 255.0) as u8
}

/// Loads a PNG or binary PGM from disk as grayscale.
pub fn load_image(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = match std::fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(Error::FileNotFound(path.to_path_buf()))
        }
        Err(e) => return Err(e.into()),
    };
    decode_image(&bytes)
}

/// Decodes PNG or P5 PGM bytes. Color inputs go through [`to_grayscale`].
pub fn decode_image(bytes: &[u8]) -> Result<GrayImage> {
    let format = if bytes.starts_with(PNG_MAGIC) {
        ImageFormat::Png
    } else if bytes.starts_with(PGM_MAGIC) {
        ImageFormat::Pnm
    } else {
        let head: String = bytes.iter().take(4).map(|b| format!("{b:02x}")).collect();
        return Err(Error::UnsupportedFormat(format!(
            "expected PNG or binary PGM, leading bytes {head}"
        )));
    };
    let decoded = image::load_from_memory_with_format(bytes, format)
        .map_err(|e| Error::Decode(e.to_string()))?;
    let (w, h) = (decoded.width() as usize, decoded.height() as usize);
    let pixels = match decoded {
        DynamicImage::ImageLuma8(buf) => buf.into_raw(),
        DynamicImage::ImageLumaA8(buf) => buf.pixels().map(|p| p.0[0]).collect(),
        other => other
            .to_rgb8()
            .pixels()
            .map(|p| to_grayscale(p.0[0], p.0[1], p.0[2]))
            .collect(),
    };
    GrayImage::new(w, h, pixels)
}

/// Image reduced to `levels` gray levels; every pixel is `< levels`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantizedImage {
    width: usize,
    height: usize,
    levels: usize,
    pixels: Vec<u8>,
}

impl QuantizedImage {
    pub fn new(width: usize, height: usize, levels: usize, pixels: Vec<u8>) -> Result<Self> {
        check_levels(levels)?;
        if width == 0 || height == 0 || pixels.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "{} pixels do not form a {width}x{height} image",
                pixels.len()
            )));
        }
        if let Some(&bad) = pixels.iter().find(|&&p| usize::from(p) >= levels) {
            return Err(Error::InvalidImage(format!(
                "gray level {bad} outside alphabet of {levels}"
            )));
        }
        Ok(Self {
            width,
            height,
            levels,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn view(&self) -> Plane<'_> {
        Plane {
            data: &self.pixels,
            stride: self.width,
            width: self.width,
            height: self.height,
            levels: self.levels,
        }
    }

    /// Rotates 90° counter-clockwise: pixel (x, y) moves to (y, width - 1 - x).
    pub fn rotate90(&self) -> Self {
        let (w, h) = (self.width, self.height);
        let mut out = vec![0u8; w * h];
        for y in 0..h {
            for x in 0..w {
                let (nx, ny) = (y, w - 1 - x);
                out[ny * h + nx] = self.pixels[y * w + x];
            }
        }
        Self {
            width: h,
            height: w,
            levels: self.levels,
            pixels: out,
        }
    }
}

/// Borrowed rectangular region of a quantized image.
#[derive(Debug, Clone, Copy)]
pub struct Plane<'a> {
    data: &'a [u8],
    stride: usize,
    width: usize,
    height: usize,
    levels: usize,
}

impl<'a> Plane<'a> {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    #[inline]
    pub fn row(&self, y: usize) -> &'a [u8] {
        let start = y * self.stride;
        &self.data[start..start + self.width]
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.row(y)[x]
    }

    pub fn to_owned_image(&self) -> QuantizedImage {
        let mut pixels = Vec::with_capacity(self.width * self.height);
        for y in 0..self.height {
            pixels.extend_from_slice(self.row(y));
        }
        QuantizedImage {
            width: self.width,
            height: self.height,
            levels: self.levels,
            pixels,
        }
    }
}

fn check_levels(levels: usize) -> Result<()> {
    if (2..=256).contains(&levels) {
        Ok(())
    } else {
        Err(Error::LevelsOutOfRange(levels))
    }
}

/// Uniform binning: `floor(p * levels / 256)`.
#[inline]
pub fn quantize_value(pixel: u8, levels: usize) -> u8 {
    ((usize::from(pixel) * levels) >> 8) as u8
}

pub fn quantize(img: &GrayImage, levels: usize) -> Result<QuantizedImage> {
    check_levels(levels)?;
    let mut lut = [0u8; 256];
    for (p, slot) in lut.iter_mut().enumerate() {
        *slot = quantize_value(p as u8, levels);
    }
    let pixels = img.pixels.iter().map(|&p| lut[usize::from(p)]).collect();
    Ok(QuantizedImage {
        width: img.width,
        height: img.height,
        levels,
        pixels,
    })
}

/// Non-overlapping `window x window` tiling; right and bottom remainders are dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowGrid {
    window: usize,
    rows: usize,
    cols: usize,
}

impl WindowGrid {
    pub fn for_dimensions(width: usize, height: usize, window: usize) -> Result<Self> {
        if window < 2 {
            return Err(Error::WindowTooSmall(window));
        }
        if window > width || window > height {
            return Err(Error::WindowTooLarge {
                window,
                width,
                height,
            });
        }
        Ok(Self {
            window,
            rows: height / window,
            cols: width / window,
        })
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Pixel origin `(x, y)` of the window at grid cell `(row, col)`.
    pub fn origin(&self, row: usize, col: usize) -> (usize, usize) {
        (col * self.window, row * self.window)
    }

    /// Grid cells in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.rows).flat_map(move |r| (0..self.cols).map(move |c| (r, c)))
    }

    pub fn plane<'a>(&self, img: &'a QuantizedImage, row: usize, col: usize) -> Plane<'a> {
        assert!(
            row < self.rows && col < self.cols,
            "window ({row}, {col}) outside grid"
        );
        let (x, y) = self.origin(row, col);
        let start = y * img.width + x;
        Plane {
            data: &img.pixels[start..],
            stride: img.width,
            width: self.window,
            height: self.window,
            levels: img.levels,
        }
    }
}

pub fn tile(img: &QuantizedImage, window: usize) -> Result<WindowGrid> {
    WindowGrid::for_dimensions(img.width, img.height, window)
}
