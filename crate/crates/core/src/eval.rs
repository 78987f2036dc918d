//! Dataset evaluation: per-resolution recognition, misclassification and
//! rejection counts for each solo classifier and for the hybrid pipeline,
//! with both rate conventions (excluding rejects, and counting rejects as
//! errors).

use std::fmt::Write as _;
use std::path::Path;

use crate::classifiers::{classify_euclidean, classify_fnn, classify_hamming, ClassLabel};
use crate::dataset::{read_manifest, ManifestEntry};
use crate::error::{OcrError, Result};
use crate::features::{binary_features, fuzzy_features, zoning_features};
use crate::imageio::load_image;
use crate::pipeline::{DecisionStatus, Recognizer};
use crate::preprocess::{binarize, locate_code_region, normalize, segment_characters, Glyph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MethodCounts {
    pub recognized: usize,
    pub misclassified: usize,
    pub rejected: usize,
}

impl MethodCounts {
    pub fn total(&self) -> usize {
        self.recognized + self.misclassified + self.rejected
    }

    /// recognized / (total - rejected), in percent. Vacuously 100 when
    /// every character was rejected.
    pub fn rate_excluding_rejects(&self) -> f64 {
        let denom = self.total() - self.rejected;
        if denom == 0 {
            100.0
        } else {
            100.0 * self.recognized as f64 / denom as f64
        }
    }

    /// recognized / total, in percent.
    pub fn rate_counting_rejects(&self) -> f64 {
        if self.total() == 0 {
            100.0
        } else {
            100.0 * self.recognized as f64 / self.total() as f64
        }
    }
}

pub const METHOD_NAMES: [&str; 4] = ["hamming", "euclidean", "fnn", "hybrid"];

/// Counts for one resolution tier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalRow {
    pub resolution: String,
    pub total_characters: usize,
    pub hamming: MethodCounts,
    pub euclidean: MethodCounts,
    pub fnn: MethodCounts,
    pub hybrid: MethodCounts,
}

impl EvalRow {
    fn new(resolution: &str) -> Self {
        EvalRow {
            resolution: resolution.to_string(),
            total_characters: 0,
            hamming: MethodCounts::default(),
            euclidean: MethodCounts::default(),
            fnn: MethodCounts::default(),
            hybrid: MethodCounts::default(),
        }
    }

    pub fn methods(&self) -> [(&'static str, &MethodCounts); 4] {
        [
            ("hamming", &self.hamming),
            ("euclidean", &self.euclidean),
            ("fnn", &self.fnn),
            ("hybrid", &self.hybrid),
        ]
    }

    /// Counting identity: recognized + misclassified (+ rejected) == total,
    /// for every method.
    pub fn is_consistent(&self) -> bool {
        self.methods()
            .iter()
            .all(|(_, counts)| counts.total() == self.total_characters)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub rows: Vec<EvalRow>,
}

impl EvalReport {
    /// Tab-separated rows, one line per (resolution, method).
    pub fn to_tsv(&self) -> String {
        let mut out = String::from(
            "resolution\ttotal\tmethod\trecognized\tmisclassified\trejected\trate_excluding_rejects\trate_counting_rejects\n",
        );
        for row in &self.rows {
            for (name, counts) in row.methods() {
                writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}\t{}\t{:.2}\t{:.2}",
                    row.resolution,
                    row.total_characters,
                    name,
                    counts.recognized,
                    counts.misclassified,
                    counts.rejected,
                    counts.rate_excluding_rejects(),
                    counts.rate_counting_rejects(),
                )
                .unwrap();
            }
        }
        out
    }

    /// Human-readable per-tier summary.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            writeln!(
                out,
                "resolution {} ({} characters):",
                row.resolution, row.total_characters
            )
            .unwrap();
            for (name, counts) in row.methods() {
                writeln!(
                    out,
                    "  {:<10} recognized {:>4}  misclassified {:>3}  rejected {:>3}  \
                     rate {:.2}% (excl) / {:.2}% (incl rejects)",
                    name,
                    counts.recognized,
                    counts.misclassified,
                    counts.rejected,
                    counts.rate_excluding_rejects(),
                    counts.rate_counting_rejects(),
                )
                .unwrap();
            }
        }
        out
    }
}

fn label_matches(recognizer: &Recognizer, got: ClassLabel, truth: ClassLabel) -> bool {
    if recognizer.config().digit_level_match {
        got.digit == truth.digit
    } else {
        got == truth
    }
}

/// Segment one dataset image into per-character glyphs; None when the
/// character count does not match the expected label length.
fn glyphs_for_entry(
    recognizer: &Recognizer,
    dataset_dir: &Path,
    entry: &ManifestEntry,
) -> Result<Option<Vec<Glyph>>> {
    let image = load_image(dataset_dir.join(&entry.filename))?;
    let binary = binarize(&image);
    let region = match locate_code_region(&binary, None) {
        Ok(r) => r,
        Err(OcrError::NoContent { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let crops = match segment_characters(&binary, region, &recognizer.config().preprocess) {
        Ok(c) => c,
        Err(OcrError::NoContent { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    if crops.len() != entry.digits.chars().count() {
        return Ok(None);
    }
    let mut glyphs = Vec::with_capacity(crops.len());
    for crop in &crops {
        match normalize(crop) {
            Ok(g) => glyphs.push(g),
            Err(OcrError::EmptyGlyph) => return Ok(None),
            Err(e) => return Err(e),
        }
    }
    Ok(Some(glyphs))
}

/// Evaluate every manifest entry: the three classifiers run solo on each
/// character (top label, no rejection), the hybrid runs the full decision
/// rule. A segmentation failure counts every expected character as
/// misclassified for the solo methods and rejected for the hybrid.
pub fn evaluate_dataset(recognizer: &Recognizer, dataset_dir: &Path) -> Result<EvalReport> {
    let manifest = read_manifest(dataset_dir)?;
    if manifest.is_empty() {
        return Err(OcrError::MalformedManifest {
            detail: "manifest has no entries".into(),
        });
    }

    let mut rows: Vec<EvalRow> = Vec::new();
    for entry in &manifest {
        if !rows.iter().any(|r| r.resolution == entry.resolution) {
            rows.push(EvalRow::new(&entry.resolution));
        }
        let row = rows
            .iter_mut()
            .find(|r| r.resolution == entry.resolution)
            .unwrap();

        let expected = entry.digits.chars().count();
        row.total_characters += expected;

        let glyphs = glyphs_for_entry(recognizer, dataset_dir, entry)?;
        let Some(glyphs) = glyphs else {
            row.hamming.misclassified += expected;
            row.euclidean.misclassified += expected;
            row.fnn.misclassified += expected;
            row.hybrid.rejected += expected;
            continue;
        };

        let protos = recognizer.store().prototypes();
        for (glyph, digit_char) in glyphs.iter().zip(entry.digits.chars()) {
            let digit = digit_char.to_digit(10).expect("manifest digits verified") as u8;
            let truth = ClassLabel::new(entry.script, digit)?;

            let c1 = classify_hamming(
                &binary_features(glyph),
                protos,
                &recognizer.config().maxnet,
            )?;
            if label_matches(recognizer, c1.label, truth) {
                row.hamming.recognized += 1;
            } else {
                row.hamming.misclassified += 1;
            }

            let c2 = classify_euclidean(&zoning_features(glyph), protos)?;
            if label_matches(recognizer, c2.label, truth) {
                row.euclidean.recognized += 1;
            } else {
                row.euclidean.misclassified += 1;
            }

            let c3 = classify_fnn(
                &fuzzy_features(glyph, recognizer.config().fuzzy),
                protos,
            )?;
            if label_matches(recognizer, c3.label, truth) {
                row.fnn.recognized += 1;
            } else {
                row.fnn.misclassified += 1;
            }

            let decision = recognizer.decide(glyph)?;
            match decision.status {
                DecisionStatus::Rejected => row.hybrid.rejected += 1,
                DecisionStatus::Accepted => {
                    let label = decision.label.expect("accepted implies label");
                    if label_matches(recognizer, label, truth) {
                        row.hybrid.recognized += 1;
                    } else {
                        row.hybrid.misclassified += 1;
                    }
                }
            }
        }
    }

    Ok(EvalReport { rows })
}
