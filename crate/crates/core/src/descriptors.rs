//! Local binary pattern encoders and histogram featurization.
//!
//! Both encoders visit the eight neighbors of every interior pixel clockwise,
//! starting at the upper-left one, and write neighbor `n` into bit `n`:
//!
//! ```text
//! b0 b1 b2
//! b7 c  b3
//! b6 b5 b4
//! ```
//!
//! The one-pixel border has no full neighborhood and is not encoded, so a
//! `w`×`h` image yields a `(w-2)`×`(h-2)` code image.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gray::GrayImage;
use crate::par;

pub const NUM_CODES: usize = 256;

/// `(dx, dy)` of neighbor `n`, in bit order.
pub const NEIGHBOR_OFFSETS: [(isize, isize); 8] =
    [(-1, -1), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0)];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlbpConfig {
    /// Relative half-width of the acceptance band around the center intensity.
    pub beta: f64,
}

impl Default for AlbpConfig {
    fn default() -> Self {
        AlbpConfig { beta: 0.10 }
    }
}

impl AlbpConfig {
    pub fn new(beta: f64) -> Result<Self> {
        let cfg = AlbpConfig { beta };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.beta.is_finite() || self.beta < 0.0 {
            return Err(Error::Config(format!(
                "beta must be a finite value >= 0, got {}",
                self.beta
            )));
        }
        Ok(())
    }

    /// Inclusive integer band `[lo, hi]` of neighbor intensities that set a bit
    /// for every possible center intensity.
    ///
    /// The bounds `c·(1-β)` and `c·(1+β)` are real numbers; because neighbor
    /// intensities are integers, `lo ≤ n ≤ hi` with `lo = ⌈c·(1-β)⌉`,
    /// `hi = ⌊c·(1+β)⌋` is the same test as comparing against the real bounds.
    pub fn band_table(&self) -> [(i16, i16); 256] {
        let mut table = [(0i16, 0i16); 256];
        for (c, slot) in table.iter_mut().enumerate() {
            let c = c as f64;
            let lower = c * (1.0 - self.beta);
            let upper = c * (1.0 + self.beta);
            let lo = lower.ceil().clamp(0.0, 256.0) as i16;
            let hi = upper.floor().clamp(-1.0, 255.0) as i16;
            *slot = (lo, hi);
        }
        table
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Descriptor {
    Lbp,
    Albp(AlbpConfig),
}

impl Descriptor {
    pub fn albp(beta: f64) -> Result<Self> {
        AlbpConfig::new(beta).map(Descriptor::Albp)
    }

    /// Short human-readable name used in reports.
    pub fn label(&self) -> String {
        match self {
            Descriptor::Lbp => "LBP".into(),
            Descriptor::Albp(cfg) => format!("ALBP(beta={})", cfg.beta),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeImage {
    width: usize,
    height: usize,
    codes: Vec<u8>,
}

impl CodeImage {
    pub fn new(width: usize, height: usize, codes: Vec<u8>) -> Result<Self> {
        if codes.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "{width}x{height} code image needs {} codes, got {}",
                width * height,
                codes.len()
            )));
        }
        Ok(CodeImage { width, height, codes })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn codes(&self) -> &[u8] {
        &self.codes
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.codes[y * self.width + x]
    }

    /// View as a grayscale image for inspection; fails on empty code images.
    pub fn to_gray(&self) -> Result<GrayImage> {
        GrayImage::new(self.width, self.height, self.codes.clone())
    }
}

fn check_size(img: &GrayImage) -> Result<()> {
    if img.width() < 3 || img.height() < 3 {
        return Err(Error::InvalidImage(format!(
            "encoders need at least a 3x3 image, got {}x{}",
            img.width(),
            img.height()
        )));
    }
    Ok(())
}

/// Shared 3×3 sweep; `bit(center, neighbor)` decides each neighbor bit.
#[inline(always)]
fn encode_with(img: &GrayImage, bit: impl Fn(u8, u8) -> bool) -> CodeImage {
    let (w, h) = (img.width(), img.height());
    let (ow, oh) = (w - 2, h - 2);
    let mut codes = Vec::with_capacity(ow * oh);
    for y in 1..h - 1 {
        let up = img.row(y - 1);
        let mid = img.row(y);
        let down = img.row(y + 1);
        for x in 1..w - 1 {
            let c = mid[x];
            let neighbors = [
                up[x - 1],
                up[x],
                up[x + 1],
                mid[x + 1],
                down[x + 1],
                down[x],
                down[x - 1],
                mid[x - 1],
            ];
            let mut code = 0u8;
            for (n, &v) in neighbors.iter().enumerate() {
                code |= (bit(c, v) as u8) << n;
            }
            codes.push(code);
        }
    }
    CodeImage {
        width: ow,
        height: oh,
        codes,
    }
}

/// Classical LBP: neighbor bit set iff `neighbor ≥ center`.
pub fn lbp_encode(img: &GrayImage) -> Result<CodeImage> {
    check_size(img)?;
    Ok(encode_with(img, |c, n| n >= c))
}

/// Adaptive LBP: neighbor bit set iff `c·(1-β) ≤ neighbor ≤ c·(1+β)`.
pub fn albp_encode(img: &GrayImage, cfg: &AlbpConfig) -> Result<CodeImage> {
    check_size(img)?;
    cfg.validate()?;
    let band = cfg.band_table();
    Ok(encode_with(img, |c, n| {
        let (lo, hi) = band[c as usize];
        let n = n as i16;
        lo <= n && n <= hi
    }))
}

pub fn encode(img: &GrayImage, descriptor: &Descriptor) -> Result<CodeImage> {
    match descriptor {
        Descriptor::Lbp => lbp_encode(img),
        Descriptor::Albp(cfg) => albp_encode(img, cfg),
    }
}

/// 256-bin code histogram, L1-normalized.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for FeatureVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

pub fn histogram_features(codes: &CodeImage) -> Result<FeatureVector> {
    if codes.codes.is_empty() {
        return Err(Error::Empty("code image has no codes".into()));
    }
    let mut counts = [0u64; NUM_CODES];
    for &c in &codes.codes {
        counts[c as usize] += 1;
    }
    let total = codes.codes.len() as f64;
    Ok(FeatureVector(counts.iter().map(|&n| n as f64 / total).collect()))
}

pub fn extract(img: &GrayImage, descriptor: &Descriptor) -> Result<FeatureVector> {
    histogram_features(&encode(img, descriptor)?)
}

/// Extracts features for a batch of images, in input order. Runs in parallel
/// when the `parallel` feature is enabled.
pub fn extract_batch(images: &[GrayImage], descriptor: &Descriptor) -> Vec<Result<FeatureVector>> {
    par::map(images, |img| extract(img, descriptor))
}

/// Sequential reference for [`extract_batch`].
pub fn extract_batch_sequential(images: &[GrayImage], descriptor: &Descriptor) -> Vec<Result<FeatureVector>> {
    images.iter().map(|img| extract(img, descriptor)).collect()
}
