//! Error type shared across the crate.

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum OcrError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// The file is recognizable but uses a feature we do not decode.
    #[error("unsupported image format ({field}): {detail}")]
    UnsupportedFormat { field: String, detail: String },

    /// The file claims to be a supported format but its contents are broken.
    #[error("corrupt image file: {detail}")]
    CorruptImage { detail: String },

    #[error("invalid image dimensions: {detail}")]
    InvalidDimensions { detail: String },

    /// Binarized content was empty where ink was required.
    #[error("no ink content found: {detail}")]
    NoContent { detail: String },

    /// A region hint fell entirely outside the image.
    #[error("region lies outside the image bounds")]
    EmptyRegion,

    /// A crop with no foreground pixels cannot be normalized.
    #[error("glyph has no foreground pixels")]
    EmptyGlyph,

    #[error("vector length mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("prototype store is empty")]
    EmptyStore,

    #[error("maxnet input is all zeros")]
    DegenerateInput,

    /// Maxnet ran out of iterations; usually means epsilon is out of range
    /// for the number of competing prototypes.
    #[error("maxnet did not converge within {max_iters} iterations")]
    NoConvergence { max_iters: usize },

    #[error("invalid configuration: {detail}")]
    InvalidConfig { detail: String },

    #[error("training set incomplete: missing {}", missing.join(", "))]
    IncompleteTrainingSet { missing: Vec<String> },

    #[error("unsupported prototype store version: {found}")]
    UnsupportedStoreVersion { found: String },

    #[error("malformed prototype store: {detail}")]
    MalformedStore { detail: String },

    #[error("postal code contains unresolved characters: {text}")]
    UnresolvedCode { text: String },

    #[error("malformed dataset manifest: {detail}")]
    MalformedManifest { detail: String },

    /// Wraps an error with the index of the character that produced it.
    #[error("character {index}: {source}")]
    AtCharacter {
        index: usize,
        #[source]
        source: Box<OcrError>,
    },
}

impl OcrError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        OcrError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn at_character(self, index: usize) -> Self {
        OcrError::AtCharacter {
            index,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, OcrError>;
