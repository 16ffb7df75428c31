//! In-memory image representation shared by every stage of the pipeline.

use alloc::vec;
use alloc::vec::Vec;

/// Channels per pixel. All buffers are RGB; alpha is dropped at decode time.
pub const CHANNELS: usize = 3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ImageError {
    #[error("image dimensions must be at least 1x1, got {width}x{height}")]
    InvalidDimensions { width: u32, height: u32 },
    #[error("data length {got} does not match {want} (h*w*3)")]
    LengthMismatch { got: usize, want: usize },
    #[error("channel value at index {index} is {value}, outside [0,1]")]
    ValueOutOfRange { index: usize, value: f64 },
}

/// An H×W×3 image with channel values in `[0,1]`, stored row-major.
///
/// The constructor validates every invariant, so holding an `ImageBuffer`
/// is proof the data is finite and in range.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBuffer {
    height: u32,
    width: u32,
    data: Vec<f64>,
}

impl ImageBuffer {
    pub fn new(height: u32, width: u32, data: Vec<f64>) -> Result<Self, ImageError> {
        if height == 0 || width == 0 {
            return Err(ImageError::InvalidDimensions { width, height });
        }
        let want = height as usize * width as usize * CHANNELS;
        if data.len() != want {
            return Err(ImageError::LengthMismatch { got: data.len(), want });
        }
        for (index, &value) in data.iter().enumerate() {
            if !value.is_finite() || !(0.0..=1.0).contains(&value) {
                return Err(ImageError::ValueOutOfRange { index, value });
            }
        }
        Ok(Self { height, width, data })
    }

    /// Builds an image by evaluating `f(x, y, channel)`; the result is
    /// clamped to `[0,1]` so procedural generators cannot violate the
    /// range invariant.
    pub fn from_fn(height: u32, width: u32, mut f: impl FnMut(u32, u32, usize) -> f64) -> Result<Self, ImageError> {
        if height == 0 || width == 0 {
            return Err(ImageError::InvalidDimensions { width, height });
        }
        let mut data = Vec::with_capacity(height as usize * width as usize * CHANNELS);
        for y in 0..height {
            for x in 0..width {
                for c in 0..CHANNELS {
                    data.push(f(x, y, c).clamp(0.0, 1.0));
                }
            }
        }
        Ok(Self { height, width, data })
    }

    pub fn filled(height: u32, width: u32, value: f64) -> Result<Self, ImageError> {
        let want = height as usize * width as usize * CHANNELS;
        Self::new(height, width, vec![value; want])
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn channels(&self) -> usize {
        CHANNELS
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32, c: usize) -> f64 {
        debug_assert!(x < self.width && y < self.height && c < CHANNELS);
        self.data[(y as usize * self.width as usize + x as usize) * CHANNELS + c]
    }

    pub fn same_dimensions(&self, other: &Self) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Snaps every channel to the 8-bit grid (`round(v*255)/255`). Images
    /// that pass through PNG encoding land on this grid, so quantizing
    /// in-memory buffers keeps them byte-identical with their on-disk form.
    pub fn quantize_u8(&self) -> Self {
        let data = self.data.iter().map(|&v| libm::round(v * 255.0) / 255.0).collect();
        Self { height: self.height, width: self.width, data }
    }

    /// Bilinear resample to `height`×`width` (half-pixel centers, edge
    /// clamped). Returns a clone when the dimensions already match.
    pub fn resize_bilinear(&self, height: u32, width: u32) -> Result<Self, ImageError> {
        if height == 0 || width == 0 {
            return Err(ImageError::InvalidDimensions { width, height });
        }
        if height == self.height && width == self.width {
            return Ok(self.clone());
        }
        let sx = self.width as f64 / width as f64;
        let sy = self.height as f64 / height as f64;
        let src_w = self.width as usize;
        let mut data = Vec::with_capacity(height as usize * width as usize * CHANNELS);
        for y in 0..height {
            let fy = ((y as f64 + 0.5) * sy - 0.5).clamp(0.0, (self.height - 1) as f64);
            let y0 = libm::floor(fy) as usize;
            let y1 = (y0 + 1).min(self.height as usize - 1);
            let wy = fy - y0 as f64;
            for x in 0..width {
                let fx = ((x as f64 + 0.5) * sx - 0.5).clamp(0.0, (self.width - 1) as f64);
                let x0 = libm::floor(fx) as usize;
                let x1 = (x0 + 1).min(self.width as usize - 1);
                let wx = fx - x0 as f64;
                for c in 0..CHANNELS {
                    let p00 = self.data[(y0 * src_w + x0) * CHANNELS + c];
                    let p01 = self.data[(y0 * src_w + x1) * CHANNELS + c];
                    let p10 = self.data[(y1 * src_w + x0) * CHANNELS + c];
                    let p11 = self.data[(y1 * src_w + x1) * CHANNELS + c];
                    let top = p00 + (p01 - p00) * wx;
                    let bottom = p10 + (p11 - p10) * wx;
                    data.push((top + (bottom - top) * wy).clamp(0.0, 1.0));
                }
            }
        }
        Ok(Self { height, width, data })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_zero_dimensions() {
        assert!(matches!(
            ImageBuffer::new(0, 4, vec![]),
            Err(ImageError::InvalidDimensions { .. })
        ));
    }

    #[test]
    fn rejects_out_of_range_values() {
        let mut data = vec![0.5; 12];
        data[7] = 1.5;
        assert_eq!(
            ImageBuffer::new(2, 2, data),
            Err(ImageError::ValueOutOfRange { index: 7, value: 1.5 })
        );
    }

    #[test]
    fn rejects_non_finite_values() {
        let mut data = vec![0.5; 12];
        data[3] = f64::NAN;
        assert!(matches!(
            ImageBuffer::new(2, 2, data),
            Err(ImageError::ValueOutOfRange { index: 3, .. })
        ));
    }

    #[test]
    fn rejects_length_mismatch() {
        assert_eq!(
            ImageBuffer::new(2, 2, vec![0.0; 11]),
            Err(ImageError::LengthMismatch { got: 11, want: 12 })
        );
    }

    #[test]
    fn resize_to_same_dimensions_is_identity() {
        let img = ImageBuffer::from_fn(5, 7, |x, y, c| (x + y + c as u32) as f64 / 16.0).unwrap();
        assert_eq!(img.resize_bilinear(5, 7).unwrap(), img);
    }

    #[test]
    fn resize_of_constant_image_is_constant() {
        let img = ImageBuffer::filled(8, 8, 0.37).unwrap();
        let out = img.resize_bilinear(3, 13).unwrap();
        assert!(out.data().iter().all(|&v| (v - 0.37).abs() < 1e-12));
    }

    #[test]
    fn resize_2x_upscale_interpolates_between_pixels() {
        // 1x2 image [0, 1] upscaled to 1x4: centers at src coords
        // -0.25, 0.25, 0.75, 1.25 -> clamped lerp 0, 0.25, 0.75, 1.
        let img = ImageBuffer::from_fn(1, 2, |x, _, _| x as f64).unwrap();
        let out = img.resize_bilinear(1, 4).unwrap();
        let got: Vec<f64> = (0..4).map(|x| out.get(x, 0, 0)).collect();
        assert_eq!(got, vec![0.0, 0.25, 0.75, 1.0]);
    }

    #[test]
    fn quantize_snaps_to_u8_grid() {
        let img = ImageBuffer::filled(2, 2, 0.5).unwrap();
        let q = img.quantize_u8();
        assert!((q.get(0, 0, 0) - 128.0 / 255.0).abs() < 1e-15);
        // Quantizing twice is a no-op.
        assert_eq!(q.quantize_u8(), q);
    }
}
