//! PNG-backed image IO bridging `image` buffers to [`ImageBuffer`].
//!
//! Channel values map `u8 -> v/255` on load and `round(v*255)` on save, so
//! a load/save round trip over 8-bit data is lossless and an in-memory
//! buffer produced by [`ImageBuffer::quantize_u8`] is byte-identical to
//! its encoded form.

use std::fs;
use std::io::Cursor;
use std::path::Path;

use coremix_core::ImageBuffer;
use image::{DynamicImage, ImageFormat, RgbImage};

#[derive(Debug, thiserror::Error)]
pub enum ImageIoError {
    #[error("failed to read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("failed to write {path}: {source}")]
    Write { path: String, source: std::io::Error },
    #[error("failed to decode image{}: {source}", path_suffix(.path))]
    Decode { path: Option<String>, source: image::ImageError },
    #[error("failed to encode image: {0}")]
    Encode(image::ImageError),
    #[error("invalid pixel data: {0}")]
    Buffer(#[from] coremix_core::image::ImageError),
}

fn path_suffix(path: &Option<String>) -> String {
    path.as_ref().map(|p| format!(" {p}")).unwrap_or_default()
}

fn from_dynamic(decoded: DynamicImage) -> Result<ImageBuffer, ImageIoError> {
    // Alpha channels are dropped; everything is normalized to RGB.
    let rgb = decoded.to_rgb8();
    let (width, height) = rgb.dimensions();
    let data = rgb.as_raw().iter().map(|&v| v as f64 / 255.0).collect();
    Ok(ImageBuffer::new(height, width, data)?)
}

pub fn load_image(path: &Path) -> Result<ImageBuffer, ImageIoError> {
    let bytes = fs::read(path).map_err(|source| ImageIoError::Read {
        path: path.display().to_string(),
        source,
    })?;
    let decoded = image::load_from_memory(&bytes).map_err(|source| ImageIoError::Decode {
        path: Some(path.display().to_string()),
        source,
    })?;
    from_dynamic(decoded)
}

pub fn decode_png(bytes: &[u8]) -> Result<ImageBuffer, ImageIoError> {
    let decoded = image::load_from_memory_with_format(bytes, ImageFormat::Png)
        .map_err(|source| ImageIoError::Decode { path: None, source })?;
    from_dynamic(decoded)
}

fn to_rgb(image: &ImageBuffer) -> RgbImage {
    let data: Vec<u8> = image
        .data()
        .iter()
        .map(|&v| (v * 255.0).round().clamp(0.0, 255.0) as u8)
        .collect();
    RgbImage::from_raw(image.width(), image.height(), data)
        .expect("buffer length matches dimensions by construction")
}

pub fn encode_png(image: &ImageBuffer) -> Result<Vec<u8>, ImageIoError> {
    let mut bytes = Vec::new();
    to_rgb(image)
        .write_to(&mut Cursor::new(&mut bytes), ImageFormat::Png)
        .map_err(ImageIoError::Encode)?;
    Ok(bytes)
}

/// Encodes to PNG and writes, creating parent directories as needed.
pub fn save_png(image: &ImageBuffer, path: &Path) -> Result<(), ImageIoError> {
    let bytes = encode_png(image)?;
    let write_err = |source| ImageIoError::Write { path: path.display().to_string(), source };
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(write_err)?;
    }
    fs::write(path, bytes).map_err(write_err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use coremix_core::mock::synthetic_original;

    #[test]
    fn quantized_buffers_roundtrip_losslessly() {
        let img = synthetic_original("a wren, a bird", 3, 40, 56).unwrap();
        let bytes = encode_png(&img).unwrap();
        let back = decode_png(&bytes).unwrap();
        assert_eq!(back, img);
    }

    #[test]
    fn save_and_load_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested/dir/img.png");
        let img = synthetic_original("a jay, a bird", 0, 32, 32).unwrap();
        save_png(&img, &path).unwrap();
        assert_eq!(load_image(&path).unwrap(), img);
    }

    #[test]
    fn encoding_is_deterministic() {
        let img = synthetic_original("a finch, a bird", 9, 48, 48).unwrap();
        assert_eq!(encode_png(&img).unwrap(), encode_png(&img).unwrap());
    }

    #[test]
    fn undecodable_bytes_error() {
        assert!(matches!(decode_png(b"not a png"), Err(ImageIoError::Decode { .. })));
    }

    #[test]
    fn missing_file_errors_with_path() {
        let err = load_image(Path::new("/nonexistent/x.png")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/x.png"));
    }
}
