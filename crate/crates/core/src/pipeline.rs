//! Prototype construction, the multistage agreement/reject decision, full
//! postal-code recognition, codebook validation, and the on-disk prototype
//! store format.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::classifiers::{
    classify_euclidean, classify_fnn, classify_hamming, ClassLabel, MaxnetConfig, Prototype,
    RankedResult, Script,
};
use crate::error::{OcrError, Result};
use crate::features::{
    binary_features, fuzzy_features, zoning_features, FuzzyFeature, FuzzyParams, ZoningFeature,
    ZONING_WINDOWS,
};
use crate::imageio::GrayImage;
use crate::preprocess::{
    binarize, locate_code_region, normalize, segment_characters, Glyph, PreprocessConfig, Region,
    GLYPH_CELLS, GLYPH_COLS, GLYPH_ROWS,
};

/// Font sizes (points) that make up one typeset in the training grid.
pub const FONT_SIZES: [u32; 5] = [12, 14, 16, 18, 20];

/// The font size whose features become the binary and zoning prototypes.
pub const PROTOTYPE_FONT_SIZE: u32 = 12;

const STORE_MAGIC: &str = "HYBRID-OCR-PROTOS";
const STORE_VERSION: u32 = 1;

/// Complete training grid: one normalized glyph per
/// (typeset, font size, script, digit).
#[derive(Debug, Clone, Default)]
pub struct TrainingSet {
    glyphs: BTreeMap<(String, u32, ClassLabel), Glyph>,
}

impl TrainingSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, typeset: &str, size: u32, label: ClassLabel, glyph: Glyph) {
        self.glyphs.insert((typeset.to_string(), size, label), glyph);
    }

    pub fn get(&self, typeset: &str, size: u32, label: ClassLabel) -> Option<&Glyph> {
        self.glyphs.get(&(typeset.to_string(), size, label))
    }

    pub fn len(&self) -> usize {
        self.glyphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.glyphs.is_empty()
    }

    /// Typesets present, sorted.
    pub fn typesets(&self) -> Vec<String> {
        self.glyphs
            .keys()
            .map(|(t, _, _)| t.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    fn all_labels() -> impl Iterator<Item = ClassLabel> {
        [Script::Arabic, Script::Indian].into_iter().flat_map(|s| {
            (0..10u8).map(move |d| ClassLabel::new(s, d).expect("digit in range"))
        })
    }

    /// Keys required by the grid but absent, formatted for error messages.
    pub fn missing_keys(&self) -> Vec<String> {
        let mut missing = Vec::new();
        for typeset in self.typesets() {
            for &size in &FONT_SIZES {
                for label in Self::all_labels() {
                    if !self.glyphs.contains_key(&(typeset.clone(), size, label)) {
                        missing.push(format!(
                            "{typeset}_{size}_{}_{}",
                            label.script, label.digit
                        ));
                    }
                }
            }
        }
        missing
    }
}

/// Immutable prototype collection. Store order is the serialization order
/// and the tie-break authority for every classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct PrototypeStore {
    version: u32,
    typesets: Vec<String>,
    prototypes: Vec<Prototype>,
}

impl PrototypeStore {
    pub fn new(prototypes: Vec<Prototype>) -> Result<Self> {
        if prototypes.is_empty() {
            return Err(OcrError::EmptyStore);
        }
        let mut seen = BTreeSet::new();
        let mut typesets = Vec::new();
        for proto in &prototypes {
            if !seen.insert((proto.typeset.clone(), proto.label)) {
                return Err(OcrError::MalformedStore {
                    detail: format!(
                        "duplicate prototype for {} {}",
                        proto.typeset, proto.label
                    ),
                });
            }
            if !typesets.contains(&proto.typeset) {
                typesets.push(proto.typeset.clone());
            }
        }
        Ok(PrototypeStore {
            version: STORE_VERSION,
            typesets,
            prototypes,
        })
    }

    pub fn version(&self) -> u32 {
        self.version
    }

    pub fn typesets(&self) -> &[String] {
        &self.typesets
    }

    pub fn prototypes(&self) -> &[Prototype] {
        &self.prototypes
    }

    pub fn len(&self) -> usize {
        self.prototypes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prototypes.is_empty()
    }

    /// Serialize to the line-oriented text format and write it out.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| OcrError::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| OcrError::io(path, e))?;
        Self::from_text(&text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{STORE_MAGIC} {STORE_VERSION}").unwrap();
        writeln!(out, "count {}", self.prototypes.len()).unwrap();
        for proto in &self.prototypes {
            writeln!(
                out,
                "proto {} {} {}",
                proto.typeset, proto.label.script, proto.label.digit
            )
            .unwrap();
            out.push_str("binary");
            for v in proto.binary.values() {
                write!(out, " {v}").unwrap();
            }
            out.push('\n');
            out.push_str("zoning");
            for v in proto.zoning.values() {
                write!(out, " {v}").unwrap();
            }
            out.push('\n');
            out.push_str("fuzzy\n");
            for row in 0..GLYPH_ROWS {
                for col in 0..GLYPH_COLS {
                    if col > 0 {
                        out.push(' ');
                    }
                    write!(out, "{}", proto.fuzzy.value(row, col)).unwrap();
                }
                out.push('\n');
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| malformed("empty file"))?;
        let mut parts = header.split_whitespace();
        if parts.next() != Some(STORE_MAGIC) {
            return Err(malformed("missing magic header"));
        }
        let version = parts
            .next()
            .ok_or_else(|| malformed("missing version"))?;
        if version != STORE_VERSION.to_string() {
            return Err(OcrError::UnsupportedStoreVersion {
                found: version.to_string(),
            });
        }

        let count_line = lines.next().ok_or_else(|| malformed("missing count"))?;
        let count: usize = count_line
            .strip_prefix("count ")
            .and_then(|c| c.parse().ok())
            .ok_or_else(|| malformed("bad count line"))?;

        let mut prototypes = Vec::with_capacity(count);
        for index in 0..count {
            let head = lines
                .next()
                .ok_or_else(|| malformed(format!("prototype {index}: missing proto line")))?;
            let mut parts = head.split_whitespace();
            if parts.next() != Some("proto") {
                return Err(malformed(format!("prototype {index}: expected proto line")));
            }
            let typeset = parts
                .next()
                .ok_or_else(|| malformed(format!("prototype {index}: missing typeset")))?
                .to_string();
            let script = parts
                .next()
                .and_then(Script::parse)
                .ok_or_else(|| malformed(format!("prototype {index}: bad script")))?;
            let digit: u8 = parts
                .next()
                .and_then(|d| d.parse().ok())
                .filter(|&d| d <= 9)
                .ok_or_else(|| malformed(format!("prototype {index}: bad digit")))?;
            let label = ClassLabel::new(script, digit)?;

            let binary_line = lines
                .next()
                .and_then(|l| l.strip_prefix("binary "))
                .ok_or_else(|| malformed(format!("prototype {index}: missing binary line")))?;
            let mut binary_bits = [0u8; GLYPH_CELLS];
            let mut n = 0;
            for token in binary_line.split_whitespace() {
                if n >= GLYPH_CELLS {
                    return Err(malformed(format!("prototype {index}: too many binary values")));
                }
                binary_bits[n] = match token {
                    "0" => 0,
                    "1" => 1,
                    other => {
                        return Err(malformed(format!(
                            "prototype {index}: binary value {other}"
                        )))
                    }
                };
                n += 1;
            }
            if n != GLYPH_CELLS {
                return Err(malformed(format!(
                    "prototype {index}: {n} binary values, expected {GLYPH_CELLS}"
                )));
            }
            let glyph = Glyph::from_bits(&binary_bits).map_err(|_| {
                malformed(format!("prototype {index}: binary vector has no ink"))
            })?;
            let binary = binary_features(&glyph);

            let zoning_line = lines
                .next()
                .and_then(|l| l.strip_prefix("zoning "))
                .ok_or_else(|| malformed(format!("prototype {index}: missing zoning line")))?;
            let zoning_vals = parse_f64_row(zoning_line, ZONING_WINDOWS, index, "zoning")?;
            for &v in &zoning_vals {
                if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                    return Err(malformed(format!(
                        "prototype {index}: zoning value {v} outside [0, 1]"
                    )));
                }
            }
            let mut zoning_arr = [0.0; ZONING_WINDOWS];
            zoning_arr.copy_from_slice(&zoning_vals);
            let zoning = ZoningFeature::from_values(zoning_arr)?;

            if lines.next() != Some("fuzzy") {
                return Err(malformed(format!("prototype {index}: missing fuzzy header")));
            }
            let mut fuzzy_vals = [0.0; GLYPH_CELLS];
            for row in 0..GLYPH_ROWS {
                let line = lines.next().ok_or_else(|| {
                    malformed(format!("prototype {index}: fuzzy row {row} missing"))
                })?;
                let vals = parse_f64_row(line, GLYPH_COLS, index, "fuzzy")?;
                for (col, &v) in vals.iter().enumerate() {
                    if !v.is_finite() || v <= 0.0 || v > 1.0 {
                        return Err(malformed(format!(
                            "prototype {index}: fuzzy value {v} outside (0, 1]"
                        )));
                    }
                    fuzzy_vals[row * GLYPH_COLS + col] = v;
                }
            }
            let fuzzy = FuzzyFeature::from_values(fuzzy_vals)?;

            prototypes.push(Prototype {
                label,
                typeset,
                binary,
                zoning,
                fuzzy,
            });
        }

        if lines.any(|l| !l.trim().is_empty()) {
            return Err(malformed("trailing data after last prototype"));
        }
        PrototypeStore::new(prototypes)
    }
}

fn malformed(detail: impl Into<String>) -> OcrError {
    OcrError::MalformedStore {
        detail: detail.into(),
    }
}

fn parse_f64_row(line: &str, expected: usize, index: usize, what: &str) -> Result<Vec<f64>> {
    let vals: Vec<f64> = line
        .split_whitespace()
        .map(|t| t.parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| malformed(format!("prototype {index}: {what} parse error: {e}")))?;
    if vals.len() != expected {
        return Err(malformed(format!(
            "prototype {index}: {} {what} values, expected {expected}",
            vals.len()
        )));
    }
    Ok(vals)
}

/// Build the store from a complete training grid. Binary and zoning
/// prototypes come from the size-12 glyph; the fuzzy prototype is the
/// elementwise mean of the fuzzy maps over all five sizes.
pub fn build_prototypes(train: &TrainingSet, params: FuzzyParams) -> Result<PrototypeStore> {
    if train.is_empty() {
        return Err(OcrError::IncompleteTrainingSet {
            missing: vec!["(empty training set)".into()],
        });
    }
    let missing = train.missing_keys();
    if !missing.is_empty() {
        return Err(OcrError::IncompleteTrainingSet { missing });
    }

    let mut prototypes = Vec::new();
    for typeset in train.typesets() {
        for script in [Script::Arabic, Script::Indian] {
            for digit in 0..10u8 {
                let label = ClassLabel::new(script, digit)?;
                let base = train
                    .get(&typeset, PROTOTYPE_FONT_SIZE, label)
                    .expect("grid verified complete");

                let mut fuzzy_sum = [0.0f64; GLYPH_CELLS];
                for &size in &FONT_SIZES {
                    let glyph = train.get(&typeset, size, label).expect("grid complete");
                    let fuzzy = fuzzy_features(glyph, params);
                    for (acc, v) in fuzzy_sum.iter_mut().zip(fuzzy.values()) {
                        *acc += v;
                    }
                }
                for v in fuzzy_sum.iter_mut() {
                    *v /= FONT_SIZES.len() as f64;
                }

                prototypes.push(Prototype {
                    label,
                    typeset: typeset.clone(),
                    binary: binary_features(base),
                    zoning: zoning_features(base),
                    fuzzy: FuzzyFeature::from_values(fuzzy_sum)?,
                });
            }
        }
    }
    PrototypeStore::new(prototypes)
}

/// How a character decision was reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecisionStage {
    /// Hamming and Euclidean classifiers agreed; no fuzzy features computed.
    TwoWayAgreement,
    /// The fuzzy classifier arbitrated a disagreement.
    FnnArbitration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecisionStatus {
    Accepted,
    Rejected,
}

/// Outcome for one glyph with full classifier diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub status: DecisionStatus,
    /// Present exactly when accepted.
    pub label: Option<ClassLabel>,
    pub stage: DecisionStage,
    pub hamming: RankedResult,
    pub euclidean: RankedResult,
    /// Present exactly when the fuzzy classifier ran.
    pub fnn: Option<RankedResult>,
}

/// Aggregated result for a postal-code image: per-character decisions plus
/// the assembled text, with '?' marking rejected characters.
#[derive(Debug, Clone, PartialEq)]
pub struct PostalCodeResult {
    pub decisions: Vec<Decision>,
    pub text: String,
    pub all_accepted: bool,
}

/// Pipeline tunables.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PipelineConfig {
    pub fuzzy: FuzzyParams,
    pub maxnet: MaxnetConfig,
    /// When set, classifier outputs "match" if their digit values agree
    /// even across scripts. Default is full 20-class equality.
    pub digit_level_match: bool,
    pub preprocess: PreprocessConfig,
}

impl PipelineConfig {
    /// Serialize as key=value lines, one setting per line.
    pub fn to_key_values(&self) -> String {
        let connectivity = match self.preprocess.connectivity {
            crate::preprocess::Connectivity::Four => "four",
            crate::preprocess::Connectivity::Eight => "eight",
        };
        format!(
            "beta={}\nepsilon={}\nmax_iters={}\ndigit_level_match={}\nmin_component_area={}\nmerge_overlap_fraction={}\nconnectivity={}\n",
            self.fuzzy.beta,
            self.maxnet.epsilon,
            self.maxnet.max_iters,
            self.digit_level_match,
            self.preprocess.min_component_area,
            self.preprocess.merge_overlap_fraction,
            connectivity,
        )
    }

    /// Parse key=value lines produced by [`to_key_values`]; unknown keys are
    /// rejected, missing keys keep their defaults.
    pub fn from_key_values(text: &str) -> Result<Self> {
        let mut config = PipelineConfig::default();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| OcrError::InvalidConfig {
                detail: format!("expected key=value, got {line:?}"),
            })?;
            let bad = |detail: String| OcrError::InvalidConfig { detail };
            match key.trim() {
                "beta" => {
                    config.fuzzy = FuzzyParams::new(
                        value.parse().map_err(|e| bad(format!("beta: {e}")))?,
                    )?
                }
                "epsilon" => {
                    config.maxnet.epsilon =
                        value.parse().map_err(|e| bad(format!("epsilon: {e}")))?
                }
                "max_iters" => {
                    config.maxnet.max_iters =
                        value.parse().map_err(|e| bad(format!("max_iters: {e}")))?
                }
                "digit_level_match" => {
                    config.digit_level_match = value
                        .parse()
                        .map_err(|e| bad(format!("digit_level_match: {e}")))?
                }
                "min_component_area" => {
                    config.preprocess.min_component_area = value
                        .parse()
                        .map_err(|e| bad(format!("min_component_area: {e}")))?
                }
                "merge_overlap_fraction" => {
                    config.preprocess.merge_overlap_fraction = value
                        .parse()
                        .map_err(|e| bad(format!("merge_overlap_fraction: {e}")))?
                }
                "connectivity" => {
                    config.preprocess.connectivity = match value.trim() {
                        "four" => crate::preprocess::Connectivity::Four,
                        "eight" => crate::preprocess::Connectivity::Eight,
                        other => return Err(bad(format!("connectivity: {other}"))),
                    }
                }
                other => return Err(bad(format!("unknown key {other}"))),
            }
        }
        Ok(config)
    }
}

/// Read-only recognition engine over an immutable store. Safe to share
/// across threads; the only interior state is a fuzzy-extraction counter.
#[derive(Debug)]
pub struct Recognizer {
    store: PrototypeStore,
    config: PipelineConfig,
    fuzzy_extractions: AtomicU64,
}

impl Recognizer {
    pub fn new(store: PrototypeStore, config: PipelineConfig) -> Self {
        Recognizer {
            store,
            config,
            fuzzy_extractions: AtomicU64::new(0),
        }
    }

    pub fn store(&self) -> &PrototypeStore {
        &self.store
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    /// Number of fuzzy feature extractions performed so far; stays flat
    /// while the first two classifiers keep agreeing.
    pub fn fuzzy_extraction_count(&self) -> u64 {
        self.fuzzy_extractions.load(Ordering::Relaxed)
    }

    fn labels_match(&self, a: ClassLabel, b: ClassLabel) -> bool {
        if self.config.digit_level_match {
            a.digit == b.digit
        } else {
            a == b
        }
    }

    /// Multistage decision: accept on two-way agreement between the Hamming
    /// and Euclidean classifiers; otherwise compute fuzzy features and accept
    /// the fuzzy verdict if it matches either of the first two; otherwise
    /// reject.
    pub fn decide(&self, glyph: &Glyph) -> Result<Decision> {
        let protos = self.store.prototypes();
        let c1 = classify_hamming(&binary_features(glyph), protos, &self.config.maxnet)?;
        let c2 = classify_euclidean(&zoning_features(glyph), protos)?;

        if self.labels_match(c1.label, c2.label) {
            return Ok(Decision {
                status: DecisionStatus::Accepted,
                label: Some(c1.label),
                stage: DecisionStage::TwoWayAgreement,
                hamming: c1,
                euclidean: c2,
                fnn: None,
            });
        }

        self.fuzzy_extractions.fetch_add(1, Ordering::Relaxed);
        let fuzzy = fuzzy_features(glyph, self.config.fuzzy);
        let c3 = classify_fnn(&fuzzy, protos)?;

        if self.labels_match(c3.label, c1.label) || self.labels_match(c3.label, c2.label) {
            Ok(Decision {
                status: DecisionStatus::Accepted,
                label: Some(c3.label),
                stage: DecisionStage::FnnArbitration,
                hamming: c1,
                euclidean: c2,
                fnn: Some(c3),
            })
        } else {
            Ok(Decision {
                status: DecisionStatus::Rejected,
                label: None,
                stage: DecisionStage::FnnArbitration,
                hamming: c1,
                euclidean: c2,
                fnn: Some(c3),
            })
        }
    }

    /// Full pipeline: binarize, locate the code line (or use the hint),
    /// segment, normalize and decide each character.
    pub fn recognize_code(
        &self,
        image: &GrayImage,
        hint: Option<Region>,
    ) -> Result<PostalCodeResult> {
        let binary = binarize(image);
        let region = locate_code_region(&binary, hint)?;
        let crops = segment_characters(&binary, region, &self.config.preprocess)?;

        let mut decisions = Vec::with_capacity(crops.len());
        let mut text = String::new();
        for (index, crop) in crops.iter().enumerate() {
            let glyph = normalize(crop).map_err(|e| e.at_character(index))?;
            let decision = self.decide(&glyph).map_err(|e| e.at_character(index))?;
            match decision.label {
                Some(label) => text.push(label.glyph_char()),
                None => text.push('?'),
            }
            decisions.push(decision);
        }
        let all_accepted = decisions
            .iter()
            .all(|d| d.status == DecisionStatus::Accepted);
        Ok(PostalCodeResult {
            decisions,
            text,
            all_accepted,
        })
    }
}

/// Map any Arabic-Indic digit characters to their ASCII digit values.
/// Returns None when the string contains a character with no digit value.
pub fn normalize_digit_string(text: &str) -> Option<String> {
    text.chars()
        .map(|c| match c {
            '0'..='9' => Some(c),
            '\u{0660}'..='\u{0669}' => {
                Some((b'0' + (c as u32 - 0x0660) as u8) as char)
            }
            _ => None,
        })
        .collect()
}

/// Check a fully recognized code against the codebook. Both sides are
/// compared in the shared 0-9 value space, so Indian glyphs validate
/// against ASCII codebook entries.
pub fn validate_code(digits: &str, codebook: &BTreeSet<String>) -> Result<bool> {
    if digits.contains('?') {
        return Err(OcrError::UnresolvedCode {
            text: digits.to_string(),
        });
    }
    let normalized = normalize_digit_string(digits).ok_or_else(|| OcrError::UnresolvedCode {
        text: digits.to_string(),
    })?;
    Ok(codebook
        .iter()
        .any(|entry| normalize_digit_string(entry).as_deref() == Some(normalized.as_str())))
}

/// Load a codebook: one code per line, blank lines and `#` comments skipped.
pub fn load_codebook(path: impl AsRef<Path>) -> Result<BTreeSet<String>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| OcrError::io(path, e))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect())
}
