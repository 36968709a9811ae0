//! Texture classification with adaptive local binary patterns.
//!
//! The crate covers the whole experiment: grayscale image I/O and dataset
//! scanning, CT-style preprocessing (foreground crop, bilinear resize, CLAHE),
//! LBP and adaptive-LBP encoders with histogram featurization, five
//! from-scratch classifiers plus a soft-voting ensemble, and per-class
//! evaluation. [`cli`] ties the stages together behind the `albp` binary.

pub mod classifiers;
pub mod cli;
pub mod dataset;
pub mod descriptors;
pub mod error;
pub mod eval;
pub mod gray;
pub mod io;
pub mod par;
pub mod preprocess;

pub use dataset::{scan_dataset, ClassLabel, ImageManifest, LabeledDataset};
pub use descriptors::{
    albp_encode, extract, histogram_features, lbp_encode, AlbpConfig, CodeImage, Descriptor, FeatureVector,
};
pub use error::{Error, Result};
pub use gray::GrayImage;
pub use io::{load_image, save_image};
