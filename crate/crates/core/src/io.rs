//! Raster file decoding and encoding.
//!
//! Reads binary/ASCII PGM, PNG (8-bit gray, gray+alpha, RGB, RGBA) and JPEG.
//! Color inputs are reduced to BT.601 luma. Writes PGM (P5) and 8-bit gray PNG.

use std::fs;
use std::io::Cursor;
use std::path::Path;

use image::{DynamicImage, ImageEncoder, ImageFormat, ImageReader};

use crate::error::{Error, Result};
use crate::gray::{luma_bt601, GrayImage};

/// File extensions recognized when scanning a dataset tree.
pub const IMAGE_EXTENSIONS: &[&str] = &["pgm", "png", "jpg", "jpeg"];

pub fn has_image_extension(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| IMAGE_EXTENSIONS.iter().any(|x| e.eq_ignore_ascii_case(x)))
        .unwrap_or(false)
}

pub fn load_image(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_image(&bytes, path)
}

/// Decodes an in-memory raster. `origin` is used only for error messages.
pub fn decode_image(bytes: &[u8], origin: &Path) -> Result<GrayImage> {
    let reader = ImageReader::new(Cursor::new(bytes))
        .with_guessed_format()
        .map_err(|e| Error::io(origin, e))?;
    match reader.format() {
        Some(ImageFormat::Png | ImageFormat::Jpeg | ImageFormat::Pnm) => {}
        Some(other) => {
            return Err(Error::UnsupportedImage {
                path: origin.to_path_buf(),
                reason: format!("format {other:?}"),
            })
        }
        None => {
            return Err(Error::UnsupportedImage {
                path: origin.to_path_buf(),
                reason: "unrecognized file signature".into(),
            })
        }
    }
    let decoded = reader.decode().map_err(|e| match e {
        image::ImageError::Unsupported(u) => Error::UnsupportedImage {
            path: origin.to_path_buf(),
            reason: u.to_string(),
        },
        other => Error::Decode {
            path: origin.to_path_buf(),
            reason: other.to_string(),
        },
    })?;
    to_gray(decoded, origin)
}

fn to_gray(img: DynamicImage, origin: &Path) -> Result<GrayImage> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let pixels = match img {
        DynamicImage::ImageLuma8(buf) => buf.into_raw(),
        DynamicImage::ImageLumaA8(buf) => buf.into_raw().chunks_exact(2).map(|p| p[0]).collect(),
        DynamicImage::ImageRgb8(buf) => buf
            .into_raw()
            .chunks_exact(3)
            .map(|p| luma_bt601(p[0], p[1], p[2]))
            .collect(),
        DynamicImage::ImageRgba8(buf) => buf
            .into_raw()
            .chunks_exact(4)
            .map(|p| luma_bt601(p[0], p[1], p[2]))
            .collect(),
        other => {
            return Err(Error::UnsupportedImage {
                path: origin.to_path_buf(),
                reason: format!("bit depth / color type {:?}", other.color()),
            })
        }
    };
    GrayImage::new(w, h, pixels).map_err(|e| Error::Decode {
        path: origin.to_path_buf(),
        reason: e.to_string(),
    })
}

/// Writes `img` as PGM or PNG depending on the extension of `path`.
pub fn save_image(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase());
    match ext.as_deref() {
        Some("pgm") => fs::write(path, encode_pgm(img)).map_err(|e| Error::io(path, e)),
        Some("png") => fs::write(path, encode_png(img)?).map_err(|e| Error::io(path, e)),
        _ => Err(Error::UnsupportedImage {
            path: path.to_path_buf(),
            reason: "can only write .pgm or .png".into(),
        }),
    }
}

/// Binary PGM (P5, maxval 255).
pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", img.width(), img.height());
    let mut out = Vec::with_capacity(header.len() + img.pixels().len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(img.pixels());
    out
}

pub fn encode_png(img: &GrayImage) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    image::codecs::png::PngEncoder::new(&mut out)
        .write_image(
            img.pixels(),
            img.width() as u32,
            img.height() as u32,
            image::ExtendedColorType::L8,
        )
        .map_err(|e| Error::InvalidImage(e.to_string()))?;
    Ok(out)
}
