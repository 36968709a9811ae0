mod common;

use albp::descriptors::{extract_batch, extract_batch_sequential};
use albp::{albp_encode, extract, histogram_features, lbp_encode, AlbpConfig, Descriptor, GrayImage};
use proptest::prelude::*;

fn image_strategy() -> impl Strategy<Value = GrayImage> {
    (3usize..20, 3usize..20).prop_flat_map(|(w, h)| {
        proptest::collection::vec(any::<u8>(), w * h).prop_map(move |px| GrayImage::new(w, h, px).unwrap())
    })
}

#[test]
fn golden_block() {
    let img = GrayImage::new(3, 3, vec![10, 20, 30, 40, 50, 60, 70, 80, 90]).unwrap();
    assert_eq!(lbp_encode(&img).unwrap().codes(), &[120]);
    assert_eq!(albp_encode(&img, &AlbpConfig { beta: 0.5 }).unwrap().codes(), &[204]);
}

#[test]
fn zero_center_band_is_single_point() {
    // Center 0: only neighbors equal to 0 fall in the band.
    let img = GrayImage::new(3, 3, vec![0, 1, 0, 5, 0, 0, 9, 0, 3]).unwrap();
    let code = albp_encode(&img, &AlbpConfig { beta: 0.3 }).unwrap().codes()[0];
    assert_eq!(code, 0b0010_1101);
    assert_eq!(oracle_single(&img, 0.3), code);
}

fn oracle_single(img: &GrayImage, beta: f64) -> u8 {
    common::oracle_albp(img, beta)[0]
}

#[test]
fn exhaustive_band_edges() {
    // Every (center, neighbor) pair for a few betas, through a 3x3 block with
    // the neighbor in every ring position.
    for beta in [0.0, 0.05, 0.1, 0.25, 0.5, 1.0] {
        let cfg = AlbpConfig { beta };
        for c in 0..=255u8 {
            for n in 0..=255u8 {
                let img = GrayImage::new(3, 3, vec![n, c, c, c, c, c, c, c, c]).unwrap();
                let got = albp_encode(&img, &cfg).unwrap().codes()[0];
                assert_eq!(got, oracle_single(&img, beta), "beta={beta} c={c} n={n}");
            }
        }
    }
}

#[test]
fn histogram_of_constant_image() {
    let img = GrayImage::filled(10, 7, 42).unwrap();
    for d in [Descriptor::Lbp, Descriptor::albp(0.1).unwrap()] {
        let f = extract(&img, &d).unwrap();
        assert_eq!(f.values().len(), 256);
        assert_eq!(f.values()[255], 1.0);
        assert_eq!(f.values().iter().sum::<f64>(), 1.0);
    }
}

#[test]
fn batch_matches_sequential() {
    let mut rng = common::rng(5);
    let images: Vec<GrayImage> = (0..40)
        .map(|i| common::random_image(&mut rng, 3 + i % 9, 4 + i % 5))
        .collect();
    let d = Descriptor::albp(0.2).unwrap();
    let par: Vec<_> = extract_batch(&images, &d).into_iter().map(Result::unwrap).collect();
    let seq: Vec<_> = extract_batch_sequential(&images, &d)
        .into_iter()
        .map(Result::unwrap)
        .collect();
    assert_eq!(par, seq);
}

#[test]
fn too_small_is_rejected() {
    let img = GrayImage::filled(2, 5, 1).unwrap();
    assert!(lbp_encode(&img).is_err());
    assert!(albp_encode(&img, &AlbpConfig::default()).is_err());
}

#[test]
fn invalid_beta_rejected() {
    assert!(AlbpConfig::new(-0.1).is_err());
    assert!(AlbpConfig::new(f64::NAN).is_err());
    assert!(AlbpConfig::new(0.0).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn lbp_matches_oracle(img in image_strategy()) {
        let codes = lbp_encode(&img).unwrap();
        prop_assert_eq!(codes.width(), img.width() - 2);
        prop_assert_eq!(codes.height(), img.height() - 2);
        prop_assert_eq!(codes.codes(), &common::oracle_lbp(&img)[..]);
    }

    #[test]
    fn albp_matches_oracle(img in image_strategy(), beta in 0.0f64..1.5) {
        let codes = albp_encode(&img, &AlbpConfig { beta }).unwrap();
        prop_assert_eq!(codes.codes(), &common::oracle_albp(&img, beta)[..]);
    }

    #[test]
    fn albp_bits_grow_with_beta(img in image_strategy(), b1 in 0.0f64..1.0, db in 0.0f64..1.0) {
        let small = albp_encode(&img, &AlbpConfig { beta: b1 }).unwrap();
        let large = albp_encode(&img, &AlbpConfig { beta: b1 + db }).unwrap();
        for (s, l) in small.codes().iter().zip(large.codes()) {
            prop_assert_eq!(s & !l, 0);
        }
    }

    #[test]
    fn lbp_invariant_under_increasing_maps(img in image_strategy(), offset in 0u8..50, num in 1u32..4) {
        // Strictly increasing affine map on a reduced range.
        let reduced = img.map(|p| p / 4);
        let mapped = reduced.map(|p| offset + p * num as u8);
        prop_assert_eq!(lbp_encode(&reduced).unwrap(), lbp_encode(&mapped).unwrap());
    }

    #[test]
    fn albp_scale_invariant(img in image_strategy(), k in 1u8..4) {
        let base = img.map(|p| p / 4);
        let scaled = base.map(|p| p * k);
        for beta in [0.0, 0.1, 0.25, 0.5, 1.0] {
            let cfg = AlbpConfig { beta };
            prop_assert_eq!(albp_encode(&base, &cfg).unwrap(), albp_encode(&scaled, &cfg).unwrap());
        }
    }

    #[test]
    fn histogram_is_a_distribution(img in image_strategy(), beta in 0.0f64..1.0) {
        let f = histogram_features(&albp_encode(&img, &AlbpConfig { beta }).unwrap()).unwrap();
        prop_assert!(f.values().iter().all(|&v| v >= 0.0));
        prop_assert!((f.values().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
