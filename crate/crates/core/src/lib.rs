//! Causal-inference attributes for drug/medical-event pairs mined from
//! longitudinal observational databases, and correlation-based selection of
//! the attributes that best separate adverse drug reactions from indicators
//! and noise.
//!
//! Typical flow: load a [`Database`], compute a [`FeatureMatrix`] with
//! [`compute_features`], then rank attributes with [`cfs::select`].

pub mod association;
pub mod attributes;
pub mod cfs;
pub mod context;
pub mod dosage;
pub mod error;
pub mod experimentation;
pub mod matrix;
pub mod pipeline;
pub mod readcode;
pub mod specificity;
pub mod store;
pub mod synth;
pub mod temporality;

pub use attributes::{Attribute, AttributeExtractor, ExtractorRegistry, FeatureRow};
pub use cfs::{CfsResult, SearchConfig};
pub use context::{Context, Measure, Params};
pub use error::{Error, Result};
pub use matrix::{compute_features, FeatureMatrix};
pub use readcode::ReadCode;
pub use store::{Database, Label};
pub use synth::ScenarioConfig;
