#![allow(dead_code)]

use std::path::Path;

use albp::{GrayImage, LabeledDataset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_image(rng: &mut impl Rng, w: usize, h: usize) -> GrayImage {
    GrayImage::from_fn(w, h, |_, _| rng.random()).unwrap()
}

/// Reference LBP code straight from the definition, neighbors listed
/// clockwise from the upper-left one, which becomes bit 0.
pub fn oracle_lbp(img: &GrayImage) -> Vec<u8> {
    oracle_codes(img, |c, n| n >= c)
}

/// Reference A-LBP code: bit set when the neighbor lies in the closed band
/// `[c(1-beta), c(1+beta)]`, evaluated in floating point.
pub fn oracle_albp(img: &GrayImage, beta: f64) -> Vec<u8> {
    oracle_codes(img, |c, n| {
        let (c, n) = (c as f64, n as f64);
        c * (1.0 - beta) <= n && n <= c * (1.0 + beta)
    })
}

fn oracle_codes(img: &GrayImage, bit: impl Fn(u8, u8) -> bool) -> Vec<u8> {
    let ring: [(isize, isize); 8] = [(-1, -1), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0)];
    let mut out = Vec::new();
    for y in 1..img.height() - 1 {
        for x in 1..img.width() - 1 {
            let c = img.get(x, y);
            let mut code = 0u32;
            for (k, (dx, dy)) in ring.iter().enumerate() {
                let n = img.get((x as isize + dx) as usize, (y as isize + dy) as usize);
                if bit(c, n) {
                    code += 1 << k;
                }
            }
            out.push(code as u8);
        }
    }
    out
}

/// `classes` Gaussian blobs in `dim` dimensions with unit noise and class
/// means `separation` apart along distinct coordinates.
pub fn gaussian_clusters(classes: usize, dim: usize, per_class: usize, separation: f64, seed: u64) -> LabeledDataset {
    let mut rng = rng(seed);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..per_class * classes {
        let c = i % classes;
        let row: Vec<f64> = (0..dim)
            .map(|d| {
                let mean = if d % classes == c { separation } else { 0.0 };
                mean + noise.sample(&mut rng)
            })
            .collect();
        rows.push(row);
        labels.push(c);
    }
    let names = (0..classes).map(|c| format!("class{c}")).collect();
    LabeledDataset::new(rows, labels, names).unwrap()
}

/// A textured image whose local structure depends on `class`.
pub fn texture_image(class: usize, seed: u64, w: usize, h: usize) -> GrayImage {
    let mut rng = rng(seed.wrapping_mul(7919).wrapping_add(class as u64));
    let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    GrayImage::from_fn(w, h, |x, y| {
        let (fx, fy) = (x as f64, y as f64);
        let base = match class % 4 {
            0 => 128.0 + 90.0 * (fx * 0.9 + phase).sin(),
            1 => 128.0 + 90.0 * ((fx + fy) * 0.35 + phase).sin(),
            2 => {
                if ((x / 3) + (y / 3)) % 2 == 0 {
                    60.0
                } else {
                    190.0
                }
            }
            _ => 40.0 + 3.0 * fy,
        };
        let jitter: f64 = rng.random_range(-12.0..12.0);
        (base + jitter).clamp(0.0, 255.0) as u8
    })
    .unwrap()
}

/// Writes `per_class` PNG images per class under `root/<class>/`.
pub fn write_texture_dataset(root: &Path, classes: usize, per_class: usize, size: usize) {
    for c in 0..classes {
        let dir = root.join(format!("class{c}"));
        std::fs::create_dir_all(&dir).unwrap();
        for i in 0..per_class {
            let img = texture_image(c, i as u64, size, size);
            albp::save_image(&img, dir.join(format!("img{i:03}.png"))).unwrap();
        }
    }
}
