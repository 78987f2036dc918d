//! The three matchers: Euclidean nearest neighbor over zoning vectors, a
//! Hamming net with a Maxnet winner-take-all layer over binary vectors, and
//! fuzzy-feature similarity with argmax defuzzification.

use std::fmt;

use crate::error::{OcrError, Result};
use crate::features::{BinaryFeature, FuzzyFeature, ZoningFeature};
use crate::preprocess::GLYPH_CELLS;

/// Numeral script. Both scripts share the digit values 0-9 but use
/// different glyph shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Script {
    Arabic,
    Indian,
}

impl Script {
    pub fn as_str(&self) -> &'static str {
        match self {
            Script::Arabic => "arabic",
            Script::Indian => "indian",
        }
    }

    pub fn parse(text: &str) -> Option<Script> {
        match text {
            "arabic" => Some(Script::Arabic),
            "indian" => Some(Script::Indian),
            _ => None,
        }
    }
}

impl fmt::Display for Script {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One of the 20 classes: a script plus a digit value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassLabel {
    pub script: Script,
    pub digit: u8,
}

impl ClassLabel {
    pub fn new(script: Script, digit: u8) -> Result<Self> {
        if digit > 9 {
            return Err(OcrError::InvalidConfig {
                detail: format!("digit {digit} out of range 0-9"),
            });
        }
        Ok(ClassLabel { script, digit })
    }

    /// The character this label renders as: '0'-'9' for Arabic script,
    /// U+0660-U+0669 for Indian script.
    pub fn glyph_char(&self) -> char {
        match self.script {
            Script::Arabic => (b'0' + self.digit) as char,
            Script::Indian => char::from_u32(0x0660 + self.digit as u32).unwrap(),
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.script, self.digit)
    }
}

/// Stored feature templates for one (typeset, class) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Prototype {
    pub label: ClassLabel,
    pub typeset: String,
    pub binary: BinaryFeature,
    pub zoning: ZoningFeature,
    pub fuzzy: FuzzyFeature,
}

/// Classifier verdict: winning prototype plus the runner-up score for
/// margin diagnostics. `score` is a distance for the Euclidean classifier
/// (lower is better) and a similarity for the other two (higher is better).
#[derive(Debug, Clone, PartialEq)]
pub struct RankedResult {
    pub label: ClassLabel,
    pub typeset: String,
    pub score: f64,
    pub runner_up_score: f64,
}

/// Maxnet lateral inhibition settings. Convergence requires
/// 0 < epsilon < 1/(M-1) for M competing prototypes; the default suits the
/// 80-prototype store.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxnetConfig {
    pub epsilon: f64,
    pub max_iters: usize,
}

impl Default for MaxnetConfig {
    fn default() -> Self {
        MaxnetConfig {
            epsilon: 0.01,
            max_iters: 10_000,
        }
    }
}

/// Euclidean distance between two equal-length vectors.
pub fn euclidean_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() || p.is_empty() {
        return Err(OcrError::DimensionMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    Ok(p.iter()
        .zip(q.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt())
}

/// Nearest prototype by Euclidean distance over zoning vectors. Ties go to
/// the earlier prototype in store order.
pub fn classify_euclidean(
    feature: &ZoningFeature,
    prototypes: &[Prototype],
) -> Result<RankedResult> {
    if prototypes.is_empty() {
        return Err(OcrError::EmptyStore);
    }
    let mut best_idx = 0;
    let mut best = f64::INFINITY;
    let mut runner_up = f64::INFINITY;
    for (i, proto) in prototypes.iter().enumerate() {
        let d = euclidean_distance(feature.values(), proto.zoning.values())?;
        if d < best {
            runner_up = best;
            best = d;
            best_idx = i;
        } else if d < runner_up {
            runner_up = d;
        }
    }
    let winner = &prototypes[best_idx];
    Ok(RankedResult {
        label: winner.label,
        typeset: winner.typeset.clone(),
        score: best,
        runner_up_score: runner_up,
    })
}

/// First-layer activations of the Hamming net. Input and prototypes are
/// encoded bipolar (0 -> -1, 1 -> +1); net_j = n/2 + (1/2) sum_i x_i c_ji,
/// which equals n minus the Hamming distance to prototype j.
pub fn hamming_activations(x: &BinaryFeature, prototypes: &[Prototype]) -> Result<Vec<f64>> {
    if prototypes.is_empty() {
        return Err(OcrError::EmptyStore);
    }
    let n = GLYPH_CELLS as i64;
    Ok(prototypes
        .iter()
        .map(|proto| {
            let dot: i64 = x
                .values()
                .iter()
                .zip(proto.binary.values().iter())
                .map(|(&a, &b)| if a == b { 1i64 } else { -1 })
                .sum();
            (n + dot) as f64 / 2.0
        })
        .collect())
}

/// Maxnet winner and the number of recurrence steps it took.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MaxnetOutcome {
    pub winner: usize,
    pub iterations: usize,
}

/// Winner-take-all recurrence: y_j <- max(0, y_j - epsilon * sum_{k != j} y_k)
/// until exactly one activation stays positive. Requires a unique maximum.
pub fn maxnet(net: &[f64], config: &MaxnetConfig) -> Result<MaxnetOutcome> {
    if net.iter().any(|&v| v < 0.0 || !v.is_finite()) {
        return Err(OcrError::InvalidConfig {
            detail: "maxnet activations must be finite and nonnegative".into(),
        });
    }
    if !config.epsilon.is_finite() || config.epsilon <= 0.0 {
        return Err(OcrError::InvalidConfig {
            detail: format!("epsilon must be > 0, got {}", config.epsilon),
        });
    }
    let mut y: Vec<f64> = net.to_vec();
    for iteration in 0..=config.max_iters {
        let positive: Vec<usize> = (0..y.len()).filter(|&j| y[j] > 0.0).collect();
        match positive.len() {
            0 => return Err(OcrError::DegenerateInput),
            1 => {
                return Ok(MaxnetOutcome {
                    winner: positive[0],
                    iterations: iteration,
                })
            }
            _ => {}
        }
        if iteration == config.max_iters {
            break;
        }
        let total: f64 = y.iter().sum();
        for v in y.iter_mut() {
            let inhibition = config.epsilon * (total - *v);
            *v = (*v - inhibition).max(0.0);
        }
    }
    Err(OcrError::NoConvergence {
        max_iters: config.max_iters,
    })
}

/// Hamming net followed by Maxnet. Exact activation ties are broken before
/// the Maxnet runs by store order, keeping the result deterministic.
pub fn classify_hamming(
    x: &BinaryFeature,
    prototypes: &[Prototype],
    config: &MaxnetConfig,
) -> Result<RankedResult> {
    let net = hamming_activations(x, prototypes)?;
    let score = net.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let first_max = net.iter().position(|&v| v == score).unwrap();
    let runner_up = net
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != first_max)
        .map(|(_, &v)| v)
        .fold(f64::NEG_INFINITY, f64::max);

    // Activations are exact integers here, at least 1 apart, so nudging
    // duplicate maxima down by 1/4 cannot reorder anything else.
    let mut competing = net.clone();
    for v in competing.iter_mut().skip(first_max + 1) {
        if *v == score {
            *v -= 0.25;
        }
    }
    let outcome = maxnet(&competing, config)?;
    let winner = &prototypes[outcome.winner];
    Ok(RankedResult {
        label: winner.label,
        typeset: winner.typeset.clone(),
        score: net[outcome.winner],
        runner_up_score: runner_up,
    })
}

/// Mean-absolute-agreement similarity between two fuzzy maps:
/// 1 - (sum |s_ij - p_ij|) / 500. Equals 1 exactly when the maps agree
/// elementwise.
pub fn fnn_similarity(s: &FuzzyFeature, proto: &FuzzyFeature) -> f64 {
    let l1: f64 = s
        .values()
        .iter()
        .zip(proto.values().iter())
        .map(|(a, b)| (a - b).abs())
        .sum();
    1.0 - l1 / GLYPH_CELLS as f64
}

/// Most similar prototype under a caller-supplied similarity measure.
pub fn classify_fnn_with<F>(
    s: &FuzzyFeature,
    prototypes: &[Prototype],
    similarity: F,
) -> Result<RankedResult>
where
    F: Fn(&FuzzyFeature, &FuzzyFeature) -> f64,
{
    if prototypes.is_empty() {
        return Err(OcrError::EmptyStore);
    }
    let mut best_idx = 0;
    let mut best = f64::NEG_INFINITY;
    let mut runner_up = f64::NEG_INFINITY;
    for (i, proto) in prototypes.iter().enumerate() {
        let sim = similarity(s, &proto.fuzzy);
        if sim > best {
            runner_up = best;
            best = sim;
            best_idx = i;
        } else if sim > runner_up {
            runner_up = sim;
        }
    }
    let winner = &prototypes[best_idx];
    Ok(RankedResult {
        label: winner.label,
        typeset: winner.typeset.clone(),
        score: best,
        runner_up_score: runner_up,
    })
}

/// Most similar prototype by mean-absolute-agreement over fuzzy maps.
pub fn classify_fnn(s: &FuzzyFeature, prototypes: &[Prototype]) -> Result<RankedResult> {
    classify_fnn_with(s, prototypes, fnn_similarity)
}
