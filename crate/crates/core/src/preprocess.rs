//! Foreground cropping, bilinear resizing and CLAHE.
//!
//! The pipeline order is crop → resize → CLAHE. All stages work in the 8-bit
//! intensity domain; there is no floating-point normalization stage.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gray::GrayImage;

pub const HISTOGRAM_BINS: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClaheConfig {
    pub tile_cols: usize,
    pub tile_rows: usize,
    /// Multiple of the uniform bin height `tile_pixels / 256`.
    pub clip_limit: f64,
}

impl Default for ClaheConfig {
    fn default() -> Self {
        ClaheConfig {
            tile_cols: 8,
            tile_rows: 8,
            clip_limit: 2.0,
        }
    }
}

impl ClaheConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tile_cols < 1 || self.tile_rows < 1 {
            return Err(Error::Config(format!(
                "CLAHE tile grid must be at least 1x1, got {}x{}",
                self.tile_cols, self.tile_rows
            )));
        }
        if self.clip_limit.is_nan() || self.clip_limit < 1.0 {
            return Err(Error::Config(format!(
                "CLAHE clip limit must be >= 1.0, got {}",
                self.clip_limit
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreprocessConfig {
    pub enable_crop: bool,
    pub crop_threshold: u8,
    pub target_width: usize,
    pub target_height: usize,
    pub enable_clahe: bool,
    pub clahe: ClaheConfig,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            enable_crop: true,
            crop_threshold: 10,
            target_width: 224,
            target_height: 224,
            enable_clahe: true,
            clahe: ClaheConfig::default(),
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<()> {
        if self.target_width < 3 || self.target_height < 3 {
            return Err(Error::Config(format!(
                "resize target must be at least 3x3, got {}x{}",
                self.target_width, self.target_height
            )));
        }
        self.clahe.validate()
    }
}

/// Tight bounding box of all pixels brighter than `threshold`.
/// Returns the input unchanged when nothing exceeds the threshold.
pub fn crop_foreground(img: &GrayImage, threshold: u8) -> GrayImage {
    let (mut x_min, mut y_min) = (usize::MAX, usize::MAX);
    let (mut x_max, mut y_max) = (0usize, 0usize);
    for y in 0..img.height() {
        let row = img.row(y);
        let first = row.iter().position(|&p| p > threshold);
        let Some(first) = first else { continue };
        let last = row.iter().rposition(|&p| p > threshold).unwrap_or(first);
        x_min = x_min.min(first);
        x_max = x_max.max(last);
        y_min = y_min.min(y);
        y_max = y;
    }
    if x_min == usize::MAX {
        return img.clone();
    }
    img.sub_image(x_min, y_min, x_max - x_min + 1, y_max - y_min + 1)
        .expect("bounding box lies inside the image")
}

/// Source sample positions for one output axis: `(lower index, upper index, weight of upper)`.
fn bilinear_taps(src_len: usize, dst_len: usize) -> Vec<(usize, usize, f64)> {
    let scale = src_len as f64 / dst_len as f64;
    let last = (src_len - 1) as f64;
    (0..dst_len)
        .map(|i| {
            let s = ((i as f64 + 0.5) * scale - 0.5).clamp(0.0, last);
            let lo = s.floor();
            let lo_i = lo as usize;
            let hi_i = (lo_i + 1).min(src_len - 1);
            (lo_i, hi_i, s - lo)
        })
        .collect()
}

#[inline]
fn round_to_u8(v: f64) -> u8 {
    (v + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// Bilinear resize with half-pixel centers and edge clamping.
pub fn resize_bilinear(img: &GrayImage, width: usize, height: usize) -> Result<GrayImage> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidImage(format!(
            "resize target must be at least 1x1, got {width}x{height}"
        )));
    }
    if width == img.width() && height == img.height() {
        return Ok(img.clone());
    }
    let xs = bilinear_taps(img.width(), width);
    let ys = bilinear_taps(img.height(), height);
    let (lo, hi) = img.min_max();
    let mut out = Vec::with_capacity(width * height);
    for &(y0, y1, fy) in &ys {
        let (r0, r1) = (img.row(y0), img.row(y1));
        for &(x0, x1, fx) in &xs {
            let top = r0[x0] as f64 * (1.0 - fx) + r0[x1] as f64 * fx;
            let bottom = r1[x0] as f64 * (1.0 - fx) + r1[x1] as f64 * fx;
            let v = top * (1.0 - fy) + bottom * fy;
            out.push(round_to_u8(v).clamp(lo, hi));
        }
    }
    GrayImage::new(width, height, out)
}

/// Clips every bin at `limit` and spreads the clipped mass back over all
/// bins: an even share per bin, then the integer remainder one count at a
/// time over evenly spaced bins. Total mass is unchanged.
pub fn clip_histogram(hist: &mut [u32; HISTOGRAM_BINS], limit: u32) {
    let mut excess: u64 = 0;
    for h in hist.iter_mut() {
        if *h > limit {
            excess += (*h - limit) as u64;
            *h = limit;
        }
    }
    if excess == 0 {
        return;
    }
    let share = (excess / HISTOGRAM_BINS as u64) as u32;
    let remainder = (excess % HISTOGRAM_BINS as u64) as usize;
    for h in hist.iter_mut() {
        *h += share;
    }
    if let Some(step) = HISTOGRAM_BINS.checked_div(remainder) {
        for i in 0..remainder {
            hist[i * step] += 1;
        }
    }
}

/// Equalization mapping of a histogram holding `total` samples:
/// `round_half_up(255 · cdf(v) / total)`.
pub fn equalization_lut(hist: &[u32; HISTOGRAM_BINS], total: u64) -> [u8; HISTOGRAM_BINS] {
    let mut lut = [0u8; HISTOGRAM_BINS];
    let mut cdf: u64 = 0;
    for (v, &h) in hist.iter().enumerate() {
        cdf += h as u64;
        // Exact half-up rounding in integer arithmetic.
        lut[v] = ((2 * 255 * cdf + total) / (2 * total)).min(255) as u8;
    }
    lut
}

/// Tile grid actually used for an image: the configured grid shrunk so that
/// every tile holds at least one pixel.
pub fn effective_grid(img: &GrayImage, cfg: &ClaheConfig) -> (usize, usize) {
    (
        cfg.tile_cols.clamp(1, img.width()),
        cfg.tile_rows.clamp(1, img.height()),
    )
}

/// Tile edge length along one axis: tiles are equal-sized and cover the
/// image, with the overhang filled by mirroring.
#[inline]
fn tile_size(len: usize, tiles: usize) -> usize {
    len.div_ceil(tiles)
}

/// Reflect-101 index into `0..len` for a coordinate past the far edge.
#[inline]
fn mirror(p: usize, len: usize) -> usize {
    if p < len {
        p
    } else {
        (2 * (len - 1)).saturating_sub(p).min(len - 1)
    }
}

/// Per-tile clipped-equalization mappings, row-major over the tile grid.
pub fn clahe_tile_mappings(img: &GrayImage, cfg: &ClaheConfig) -> Result<Vec<[u8; HISTOGRAM_BINS]>> {
    cfg.validate()?;
    let (tx, ty) = effective_grid(img, cfg);
    let (tw, th) = (tile_size(img.width(), tx), tile_size(img.height(), ty));
    let total = (tw * th) as u64;
    let limit = (cfg.clip_limit * total as f64 / HISTOGRAM_BINS as f64)
        .floor()
        .clamp(1.0, u32::MAX as f64) as u32;
    let mut luts = Vec::with_capacity(tx * ty);
    for j in 0..ty {
        for i in 0..tx {
            let mut hist = [0u32; HISTOGRAM_BINS];
            for y in j * th..(j + 1) * th {
                let row = img.row(mirror(y, img.height()));
                for x in i * tw..(i + 1) * tw {
                    hist[row[mirror(x, img.width())] as usize] += 1;
                }
            }
            clip_histogram(&mut hist, limit);
            luts.push(equalization_lut(&hist, total));
        }
    }
    Ok(luts)
}

/// Interpolation taps along one axis in tile units: `(lower tile, upper tile, weight of upper)`.
fn tile_taps(len: usize, tiles: usize) -> Vec<(usize, usize, f64)> {
    let size = tile_size(len, tiles) as f64;
    let last = (tiles - 1) as f64;
    (0..len)
        .map(|p| {
            let g = ((p as f64 + 0.5) / size - 0.5).clamp(0.0, last);
            let lo = g.floor();
            let lo_i = lo as usize;
            (lo_i, (lo_i + 1).min(tiles - 1), g - lo)
        })
        .collect()
}

/// Contrast-limited adaptive histogram equalization.
pub fn clahe(img: &GrayImage, cfg: &ClaheConfig) -> Result<GrayImage> {
    let luts = clahe_tile_mappings(img, cfg)?;
    let (tx, ty) = effective_grid(img, cfg);
    let xs = tile_taps(img.width(), tx);
    let ys = tile_taps(img.height(), ty);
    let mut out = Vec::with_capacity(img.pixels().len());
    for (y, &(j0, j1, wy)) in ys.iter().enumerate() {
        let row = img.row(y);
        for (&p, &(i0, i1, wx)) in row.iter().zip(&xs) {
            let v = p as usize;
            let a = luts[j0 * tx + i0][v] as f64;
            let b = luts[j0 * tx + i1][v] as f64;
            let c = luts[j1 * tx + i0][v] as f64;
            let d = luts[j1 * tx + i1][v] as f64;
            let top = a * (1.0 - wx) + b * wx;
            let bottom = c * (1.0 - wx) + d * wx;
            out.push(round_to_u8(top * (1.0 - wy) + bottom * wy));
        }
    }
    GrayImage::new(img.width(), img.height(), out)
}

/// Crop (optional) → resize → CLAHE (optional).
pub fn preprocess(img: &GrayImage, cfg: &PreprocessConfig) -> Result<GrayImage> {
    cfg.validate()?;
    let cropped;
    let mut current = img;
    if cfg.enable_crop {
        cropped = crop_foreground(img, cfg.crop_threshold);
        current = &cropped;
    }
    let resized = resize_bilinear(current, cfg.target_width, cfg.target_height)?;
    if cfg.enable_clahe {
        clahe(&resized, &cfg.clahe)
    } else {
        Ok(resized)
    }
}
