use crate::color::RgbPixel;
use crate::scalar::Scalar;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ImageError {
    #[error("image dimensions must be at least 1x1, got {width}x{height}")]
    Empty { width: usize, height: usize },
    #[error("expected {expected} values for a {width}x{height} image, got {actual}")]
    BufferSize {
        width: usize,
        height: usize,
        expected: usize,
        actual: usize,
    },
}

/// Row-major RGB image with normalized channels.
#[derive(Debug, Clone, PartialEq)]
pub struct Image<T> {
    width: usize,
    height: usize,
    pixels: Vec<RgbPixel<T>>,
}

impl<T: Scalar> Image<T> {
    pub fn new(width: usize, height: usize, pixels: Vec<RgbPixel<T>>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::Empty { width, height });
        }
        if pixels.len() != width * height {
            return Err(ImageError::BufferSize {
                width,
                height,
                expected: width * height,
                actual: pixels.len(),
            });
        }
        Ok(Self { width, height, pixels })
    }

    pub fn filled(width: usize, height: usize, px: RgbPixel<T>) -> Result<Self, ImageError> {
        Self::new(width, height, vec![px; width * height])
    }

    /// Builds an image from interleaved 8-bit RGB bytes.
    pub fn from_rgb8(width: usize, height: usize, bytes: &[u8]) -> Result<Self, ImageError> {
        if bytes.len() != width * height * 3 {
            return Err(ImageError::BufferSize {
                width,
                height,
                expected: width * height * 3,
                actual: bytes.len(),
            });
        }
        let pixels = bytes
            .chunks_exact(3)
            .map(|c| RgbPixel::from_rgb8([c[0], c[1], c[2]]))
            .collect();
        Self::new(width, height, pixels)
    }

    /// Interleaved 8-bit RGB bytes, rounding each channel.
    pub fn to_rgb8(&self) -> Vec<u8> {
        self.pixels.iter().flat_map(|p| p.to_rgb8()).collect()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[RgbPixel<T>] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [RgbPixel<T>] {
        &mut self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> RgbPixel<T> {
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, px: RgbPixel<T>) {
        self.pixels[y * self.width + x] = px;
    }

    /// New image of the same size with `f` applied to every pixel.
    pub fn map(&self, f: impl Fn(RgbPixel<T>) -> RgbPixel<T>) -> Self {
        Self {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|&p| f(p)).collect(),
        }
    }

    /// Copies the inclusive rectangle `[x0, x1] x [y0, y1]`.
    pub fn crop(&self, x0: usize, y0: usize, x1: usize, y1: usize) -> Self {
        assert!(x0 <= x1 && x1 < self.width && y0 <= y1 && y1 < self.height, "crop out of bounds");
        let mut pixels = Vec::with_capacity((x1 - x0 + 1) * (y1 - y0 + 1));
        for y in y0..=y1 {
            pixels.extend_from_slice(&self.pixels[y * self.width + x0..=y * self.width + x1]);
        }
        Self {
            width: x1 - x0 + 1,
            height: y1 - y0 + 1,
            pixels,
        }
    }
}
