//! Synthetic degraded postal-code dataset generator: composes labeled code
//! line images from fixture glyphs at several scales, with bounded skew,
//! brightness shift, and salt noise. Deterministic under a fixed seed.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classifiers::{ClassLabel, Script};
use crate::error::{OcrError, Result};
use crate::imageio::{load_image, save_pgm, GrayImage};
use crate::pipeline::PROTOTYPE_FONT_SIZE;
use crate::preprocess::{binarize, ink_bounds, BinaryImage};

/// Degradation knobs. Scale percents are relative to the size-12 fixture
/// baseline; skew is bounded by the pipeline's +/-2 degree tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct DegradationSpec {
    pub scale_percents: Vec<u32>,
    /// Rotation drawn uniformly from [-skew_degrees, +skew_degrees].
    pub skew_degrees: f64,
    /// Per-pixel probability of flipping to the opposite extreme.
    pub salt_noise_fraction: f64,
    /// Intensity offset drawn uniformly from [-brightness_shift, +brightness_shift].
    pub brightness_shift: i32,
    pub seed: u64,
    /// Five-digit codes rendered per scale tier.
    pub codes_per_scale: usize,
}

impl Default for DegradationSpec {
    fn default() -> Self {
        DegradationSpec {
            scale_percents: vec![100, 200, 300, 400],
            skew_degrees: 2.0,
            salt_noise_fraction: 0.002,
            brightness_shift: 20,
            seed: 42,
            codes_per_scale: 20,
        }
    }
}

impl DegradationSpec {
    pub fn validate(&self) -> Result<()> {
        if self.scale_percents.is_empty() || self.scale_percents.contains(&0) {
            return Err(OcrError::InvalidConfig {
                detail: "scale percents must be nonempty and positive".into(),
            });
        }
        if !(0.0..=2.0).contains(&self.skew_degrees) {
            return Err(OcrError::InvalidConfig {
                detail: format!(
                    "skew {} outside the tolerated 0..=2 degrees",
                    self.skew_degrees
                ),
            });
        }
        if !(0.0..=1.0).contains(&self.salt_noise_fraction) {
            return Err(OcrError::InvalidConfig {
                detail: format!("salt fraction {} outside [0, 1]", self.salt_noise_fraction),
            });
        }
        if !(0..=255).contains(&self.brightness_shift) {
            return Err(OcrError::InvalidConfig {
                detail: format!("brightness shift {} outside 0..=255", self.brightness_shift),
            });
        }
        if self.codes_per_scale == 0 {
            return Err(OcrError::InvalidConfig {
                detail: "codes_per_scale must be positive".into(),
            });
        }
        Ok(())
    }
}

/// One labeled dataset image.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    /// Path relative to the dataset root.
    pub filename: String,
    pub script: Script,
    /// Expected digit values as ASCII digits, in reading order.
    pub digits: String,
    /// Scale tier tag, e.g. "100%".
    pub resolution: String,
}

pub const MANIFEST_NAME: &str = "labels.tsv";
const MANIFEST_HEADER: &str = "filename\tscript\tdigits\tresolution";

pub fn write_manifest(dir: &Path, entries: &[ManifestEntry]) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "{MANIFEST_HEADER}").unwrap();
    for e in entries {
        writeln!(
            out,
            "{}\t{}\t{}\t{}",
            e.filename, e.script, e.digits, e.resolution
        )
        .unwrap();
    }
    let path = dir.join(MANIFEST_NAME);
    fs::write(&path, out).map_err(|e| OcrError::io(path, e))
}

pub fn read_manifest(dir: &Path) -> Result<Vec<ManifestEntry>> {
    let path = dir.join(MANIFEST_NAME);
    let text = fs::read_to_string(&path).map_err(|e| OcrError::io(path, e))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(MANIFEST_HEADER) => {}
        other => {
            return Err(OcrError::MalformedManifest {
                detail: format!("bad header line: {other:?}"),
            })
        }
    }
    let mut entries = Vec::new();
    for (n, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(OcrError::MalformedManifest {
                detail: format!("line {}: expected 4 fields, got {}", n + 2, fields.len()),
            });
        }
        let script = Script::parse(fields[1]).ok_or_else(|| OcrError::MalformedManifest {
            detail: format!("line {}: unknown script {}", n + 2, fields[1]),
        })?;
        if fields[2].is_empty() || !fields[2].bytes().all(|b| b.is_ascii_digit()) {
            return Err(OcrError::MalformedManifest {
                detail: format!("line {}: digits field {:?}", n + 2, fields[2]),
            });
        }
        entries.push(ManifestEntry {
            filename: fields[0].to_string(),
            script,
            digits: fields[2].to_string(),
            resolution: fields[3].to_string(),
        });
    }
    Ok(entries)
}

/// Tight binarized crops of the size-12 fixture glyphs, the composition
/// material for generated codes.
pub struct FixtureGlyphs {
    typesets: Vec<String>,
    crops: Vec<((String, ClassLabel), BinaryImage)>,
}

impl FixtureGlyphs {
    /// Load `<typeset>_12_<script>_<digit>.pgm` for every typeset found in
    /// the directory. Each typeset must be complete across both scripts.
    pub fn load(glyph_dir: &Path) -> Result<Self> {
        let mut typesets = std::collections::BTreeSet::new();
        let entries = fs::read_dir(glyph_dir).map_err(|e| OcrError::io(glyph_dir, e))?;
        for entry in entries {
            let entry = entry.map_err(|e| OcrError::io(glyph_dir, e))?;
            let name = entry.file_name().to_string_lossy().to_string();
            if let Some(parsed) = parse_glyph_filename(&name) {
                typesets.insert(parsed.0);
            }
        }
        if typesets.is_empty() {
            return Err(OcrError::NoContent {
                detail: format!("no fixture glyphs found in {}", glyph_dir.display()),
            });
        }

        let mut crops = Vec::new();
        let mut missing = Vec::new();
        for typeset in &typesets {
            for script in [Script::Arabic, Script::Indian] {
                for digit in 0..10u8 {
                    let name =
                        format!("{typeset}_{PROTOTYPE_FONT_SIZE}_{script}_{digit}.pgm");
                    let path = glyph_dir.join(&name);
                    if !path.exists() {
                        missing.push(name);
                        continue;
                    }
                    let gray = load_image(&path)?;
                    let binary = binarize(&gray);
                    let crop = tight_crop(&binary).ok_or_else(|| OcrError::NoContent {
                        detail: format!("fixture {name} is blank"),
                    })?;
                    crops.push(((typeset.clone(), ClassLabel::new(script, digit)?), crop));
                }
            }
        }
        if !missing.is_empty() {
            return Err(OcrError::IncompleteTrainingSet { missing });
        }
        Ok(FixtureGlyphs {
            typesets: typesets.into_iter().collect(),
            crops,
        })
    }

    pub fn typesets(&self) -> &[String] {
        &self.typesets
    }

    fn crop(&self, typeset: &str, label: ClassLabel) -> &BinaryImage {
        &self
            .crops
            .iter()
            .find(|((t, l), _)| t == typeset && *l == label)
            .expect("completeness checked at load")
            .1
    }
}

/// Parse `<typeset>_<size>_<script>_<digit>.pgm`.
pub fn parse_glyph_filename(name: &str) -> Option<(String, u32, Script, u8)> {
    let stem = name.strip_suffix(".pgm")?;
    let mut parts = stem.rsplitn(4, '_');
    let digit: u8 = parts.next()?.parse().ok().filter(|&d| d <= 9)?;
    let script = Script::parse(parts.next()?)?;
    let size: u32 = parts.next()?.parse().ok()?;
    let typeset = parts.next()?.to_string();
    if typeset.is_empty() {
        return None;
    }
    Some((typeset, size, script, digit))
}

/// Nearest-neighbor rescale of a binary crop.
fn scale_crop(crop: &BinaryImage, percent: u32) -> BinaryImage {
    let h = ((crop.height() as u64 * percent as u64 + 50) / 100).max(1) as u32;
    let w = ((crop.width() as u64 * percent as u64 + 50) / 100).max(1) as u32;
    let mut bits = vec![0u8; (w * h) as usize];
    for y in 0..h {
        let sy = (y as u64 * crop.height() as u64 / h as u64) as u32;
        for x in 0..w {
            let sx = (x as u64 * crop.width() as u64 / w as u64) as u32;
            bits[(y * w + x) as usize] = crop.bit(sx, sy);
        }
    }
    BinaryImage::new(w, h, bits).expect("positive dimensions")
}

fn tight_crop(image: &BinaryImage) -> Option<BinaryImage> {
    let (x0, y0, x1, y1) = ink_bounds(image)?;
    let w = x1 - x0 + 1;
    let h = y1 - y0 + 1;
    let mut bits = vec![0u8; (w * h) as usize];
    for y in 0..h {
        for x in 0..w {
            bits[(y * w + x) as usize] = image.bit(x0 + x, y0 + y);
        }
    }
    Some(BinaryImage::new(w, h, bits).expect("positive dimensions"))
}

/// Nearest-neighbor rotation about the image center, white background fill.
/// A zero angle reproduces the input exactly.
pub fn rotate_image(image: &GrayImage, degrees: f64) -> GrayImage {
    if degrees == 0.0 {
        return image.clone();
    }
    let (w, h) = (image.width(), image.height());
    let cx = (w as f64 - 1.0) / 2.0;
    let cy = (h as f64 - 1.0) / 2.0;
    let theta = degrees.to_radians();
    let (sin, cos) = theta.sin_cos();
    let mut out = GrayImage::filled(w, h, 255).expect("positive dimensions");
    for y in 0..h {
        for x in 0..w {
            let dx = x as f64 - cx;
            let dy = y as f64 - cy;
            let sx = (cos * dx + sin * dy + cx).round();
            let sy = (-sin * dx + cos * dy + cy).round();
            if sx >= 0.0 && sy >= 0.0 && (sx as u32) < w && (sy as u32) < h {
                out.set_pixel(x, y, image.pixel(sx as u32, sy as u32));
            }
        }
    }
    out
}

/// Render one code line: scaled glyph crops pasted onto white with
/// proportional margins and gaps, vertically centered.
fn compose_line(glyphs: &[BinaryImage], percent: u32) -> GrayImage {
    let unit = (percent as usize).div_ceil(100);
    let margin = 3 * unit.max(1);
    let gap = 4 * unit.max(1);
    let max_h = glyphs.iter().map(|g| g.height()).max().unwrap() as usize;
    let total_w: usize = glyphs.iter().map(|g| g.width() as usize).sum();
    let width = (total_w + gap * (glyphs.len() - 1) + 2 * margin) as u32;
    let height = (max_h + 2 * margin) as u32;
    let mut canvas = GrayImage::filled(width, height, 255).expect("positive dimensions");
    let mut x = margin as u32;
    for glyph in glyphs {
        let y0 = margin as u32 + ((max_h - glyph.height() as usize) / 2) as u32;
        for gy in 0..glyph.height() {
            for gx in 0..glyph.width() {
                if glyph.is_ink(gx, gy) {
                    canvas.set_pixel(x + gx, y0 + gy, 0);
                }
            }
        }
        x += glyph.width() + gap as u32;
    }
    canvas
}

fn shift_brightness(image: &mut GrayImage, delta: i32) {
    if delta == 0 {
        return;
    }
    for y in 0..image.height() {
        for x in 0..image.width() {
            let v = (image.pixel(x, y) as i32 + delta).clamp(0, 255) as u8;
            image.set_pixel(x, y, v);
        }
    }
}

fn add_salt(image: &mut GrayImage, fraction: f64, rng: &mut ChaCha8Rng) {
    if fraction == 0.0 {
        return;
    }
    for y in 0..image.height() {
        for x in 0..image.width() {
            if rng.gen_bool(fraction) {
                let v = if image.pixel(x, y) < 128 { 255 } else { 0 };
                image.set_pixel(x, y, v);
            }
        }
    }
}

/// Dataset summary returned by the generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSummary {
    pub images: usize,
    pub characters: usize,
    pub scales: usize,
}

/// Generate the dataset tree under `out_dir`: one `scale_<p>` directory per
/// scale percent plus a `labels.tsv` manifest at the root.
pub fn generate_dataset(
    glyph_dir: &Path,
    out_dir: &Path,
    spec: &DegradationSpec,
) -> Result<DatasetSummary> {
    spec.validate()?;
    let fixtures = FixtureGlyphs::load(glyph_dir)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    fs::create_dir_all(out_dir).map_err(|e| OcrError::io(out_dir, e))?;

    let mut entries = Vec::new();
    for &percent in &spec.scale_percents {
        let subdir = format!("scale_{percent}");
        let dir = out_dir.join(&subdir);
        fs::create_dir_all(&dir).map_err(|e| OcrError::io(&dir, e))?;
        for index in 0..spec.codes_per_scale {
            let script = if rng.gen_bool(0.5) {
                Script::Indian
            } else {
                Script::Arabic
            };
            let typeset = &fixtures.typesets()[rng.gen_range(0..fixtures.typesets().len())];
            let digits: Vec<u8> = (0..5).map(|_| rng.gen_range(0..10u8)).collect();

            let glyphs: Vec<BinaryImage> = digits
                .iter()
                .map(|&d| {
                    let label = ClassLabel::new(script, d).expect("digit in range");
                    scale_crop(fixtures.crop(typeset, label), percent)
                })
                .collect();

            let mut image = compose_line(&glyphs, percent);
            let angle = if spec.skew_degrees > 0.0 {
                rng.gen_range(-spec.skew_degrees..=spec.skew_degrees)
            } else {
                0.0
            };
            image = rotate_image(&image, angle);
            let delta = if spec.brightness_shift > 0 {
                rng.gen_range(-spec.brightness_shift..=spec.brightness_shift)
            } else {
                0
            };
            shift_brightness(&mut image, delta);
            add_salt(&mut image, spec.salt_noise_fraction, &mut rng);

            let filename = format!("{subdir}/code_{index:03}.pgm");
            save_pgm(&image, out_dir.join(&filename))?;
            entries.push(ManifestEntry {
                filename,
                script,
                digits: digits.iter().map(|d| (b'0' + d) as char).collect(),
                resolution: format!("{percent}%"),
            });
        }
    }
    write_manifest(out_dir, &entries)?;
    Ok(DatasetSummary {
        images: entries.len(),
        characters: entries.iter().map(|e| e.digits.len()).sum(),
        scales: spec.scale_percents.len(),
    })
}
