//! Configuration, feature files and pipeline commands used by the `albp` binary.

pub mod commands;
pub mod config;
pub mod features;

pub use commands::{
    cmd_evaluate, cmd_extract, cmd_preprocess, cmd_run, cmd_train, ExtractSummary, PreprocessSummary, RunSummary,
    TableOverride,
};
pub use config::{DescriptorChoice, DescriptorRun, ImageFormat, RunConfig};
pub use features::{read_features_csv, write_features_csv, FeatureRow};
