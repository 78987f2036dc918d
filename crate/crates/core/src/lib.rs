//! Hybrid numeral OCR engine for printed Arabic (0-9) and Indian (٠-٩)
//! postal codes.
//!
//! The pipeline binarizes a scanned image, locates the code line, segments
//! it into characters, normalizes each to a 25x20 glyph, and classifies it
//! with three independent matchers (Hamming net with Maxnet, Euclidean
//! nearest neighbor over zoning densities, and a fuzzy-feature similarity
//! network). A character is accepted only when two classifiers agree;
//! otherwise it is rejected for manual handling.

pub mod classifiers;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod features;
pub mod imageio;
pub mod pipeline;
pub mod preprocess;

pub use classifiers::{ClassLabel, MaxnetConfig, Prototype, RankedResult, Script};
pub use error::{OcrError, Result};
pub use features::{BinaryFeature, FuzzyFeature, FuzzyParams, ZoningFeature};
pub use imageio::GrayImage;
pub use pipeline::{
    Decision, DecisionStage, DecisionStatus, PipelineConfig, PostalCodeResult, PrototypeStore,
    Recognizer, TrainingSet,
};
pub use preprocess::{BinaryImage, Glyph, PreprocessConfig, Region};
