//! Preprocessing: mean-threshold binarization, code-line localization,
//! connected-component character segmentation, and 25x20 normalization.

use crate::error::{OcrError, Result};
use crate::imageio::GrayImage;

/// Normalized glyph height in rows.
pub const GLYPH_ROWS: usize = 25;
/// Normalized glyph width in columns.
pub const GLYPH_COLS: usize = 20;
/// Cells per normalized glyph.
pub const GLYPH_CELLS: usize = GLYPH_ROWS * GLYPH_COLS;

/// Binary raster, row-major, 1 = foreground ink, 0 = background.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryImage {
    width: u32,
    height: u32,
    bits: Vec<u8>,
}

impl BinaryImage {
    pub fn new(width: u32, height: u32, bits: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 || bits.len() != width as usize * height as usize {
            return Err(OcrError::InvalidDimensions {
                detail: format!("{width}x{height} with {} bits", bits.len()),
            });
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(OcrError::InvalidDimensions {
                detail: "bit values must be 0 or 1".into(),
            });
        }
        Ok(BinaryImage {
            width,
            height,
            bits,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn bit(&self, x: u32, y: u32) -> u8 {
        debug_assert!(x < self.width && y < self.height);
        self.bits[y as usize * self.width as usize + x as usize]
    }

    pub fn is_ink(&self, x: u32, y: u32) -> bool {
        self.bit(x, y) == 1
    }

    pub fn ink_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }
}

/// Axis-aligned rectangle in image coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Region {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl Region {
    pub fn new(x: u32, y: u32, w: u32, h: u32) -> Self {
        Region { x, y, w, h }
    }

    /// Intersection with an image of the given size, if nonempty.
    pub fn clip_to(&self, width: u32, height: u32) -> Option<Region> {
        let x0 = self.x.min(width);
        let y0 = self.y.min(height);
        let x1 = self.x.saturating_add(self.w).min(width);
        let y1 = self.y.saturating_add(self.h).min(height);
        if x1 > x0 && y1 > y0 {
            Some(Region::new(x0, y0, x1 - x0, y1 - y0))
        } else {
            None
        }
    }
}

/// One normalized numeral: 25 rows x 20 columns of ink bits, at least one set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Glyph {
    bits: [u8; GLYPH_CELLS],
}

impl Glyph {
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        if bits.len() != GLYPH_CELLS {
            return Err(OcrError::DimensionMismatch {
                left: bits.len(),
                right: GLYPH_CELLS,
            });
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(OcrError::InvalidDimensions {
                detail: "glyph bits must be 0 or 1".into(),
            });
        }
        if !bits.contains(&1) {
            return Err(OcrError::EmptyGlyph);
        }
        let mut arr = [0u8; GLYPH_CELLS];
        arr.copy_from_slice(bits);
        Ok(Glyph { bits: arr })
    }

    pub fn bits(&self) -> &[u8; GLYPH_CELLS] {
        &self.bits
    }

    pub fn bit(&self, row: usize, col: usize) -> u8 {
        debug_assert!(row < GLYPH_ROWS && col < GLYPH_COLS);
        self.bits[row * GLYPH_COLS + col]
    }

    pub fn is_ink(&self, row: usize, col: usize) -> bool {
        self.bit(row, col) == 1
    }

    pub fn ink_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }
}

/// Which neighbors count as connected during segmentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Connectivity {
    #[default]
    Four,
    Eight,
}

/// Tunables for segmentation.
#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessConfig {
    /// Components smaller than this many pixels are discarded as noise.
    pub min_component_area: usize,
    /// Components whose horizontal extents overlap by at least this fraction
    /// of the narrower width are merged into one glyph.
    pub merge_overlap_fraction: f64,
    pub connectivity: Connectivity,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            min_component_area: 4,
            merge_overlap_fraction: 0.5,
            connectivity: Connectivity::Four,
        }
    }
}

/// Global mean thresholding. T = floor(mean intensity); a pixel at or above
/// T becomes background, below it becomes ink, so blank pages stay blank.
pub fn binarize(image: &GrayImage) -> BinaryImage {
    let sum: u64 = image.pixels().iter().map(|&p| p as u64).sum();
    let threshold = (sum / image.pixels().len() as u64) as u8;
    let bits = image
        .pixels()
        .iter()
        .map(|&p| if p >= threshold { 0 } else { 1 })
        .collect();
    BinaryImage::new(image.width(), image.height(), bits).expect("dimensions preserved")
}

/// Locate the postal-code line. An explicit hint wins (clipped to bounds);
/// otherwise the bottom-most horizontal text band is used: maximal runs of
/// consecutive inked rows are scanned and the last run at least 3 rows tall
/// is taken, expanded to the ink column extent of those rows. A qualifying
/// run must also reach a quarter of the global peak row-ink, which keeps
/// stray noise rows below a real text band from being mistaken for it.
/// When no run qualifies the last run at least 3 rows tall is used, then
/// the last run of any height.
pub fn locate_code_region(image: &BinaryImage, hint: Option<Region>) -> Result<Region> {
    if let Some(h) = hint {
        return h
            .clip_to(image.width(), image.height())
            .ok_or(OcrError::EmptyRegion);
    }

    let mut row_ink = vec![0u32; image.height() as usize];
    for y in 0..image.height() {
        for x in 0..image.width() {
            row_ink[y as usize] += image.bit(x, y) as u32;
        }
    }

    // Maximal runs of consecutive rows with any ink.
    let mut runs: Vec<(u32, u32)> = Vec::new(); // (first row, last row)
    let mut start: Option<u32> = None;
    for y in 0..image.height() {
        if row_ink[y as usize] > 0 {
            if start.is_none() {
                start = Some(y);
            }
        } else if let Some(s) = start.take() {
            runs.push((s, y - 1));
        }
    }
    if let Some(s) = start {
        runs.push((s, image.height() - 1));
    }
    if runs.is_empty() {
        return Err(OcrError::NoContent {
            detail: "image has no ink".into(),
        });
    }

    let peak = row_ink.iter().copied().max().unwrap_or(0);
    let min_peak = (peak.div_ceil(4)).max(2);
    let run_peak = |&(s, e): &(u32, u32)| {
        (s..=e).map(|y| row_ink[y as usize]).max().unwrap_or(0)
    };
    let (y0, y1) = runs
        .iter()
        .rev()
        .find(|r| r.1 - r.0 + 1 >= 3 && run_peak(r) >= min_peak)
        .or_else(|| runs.iter().rev().find(|(s, e)| e - s + 1 >= 3))
        .copied()
        .unwrap_or(*runs.last().unwrap());

    let mut x0 = image.width();
    let mut x1 = 0;
    for y in y0..=y1 {
        for x in 0..image.width() {
            if image.is_ink(x, y) {
                x0 = x0.min(x);
                x1 = x1.max(x);
            }
        }
    }
    Ok(Region::new(x0, y0, x1 - x0 + 1, y1 - y0 + 1))
}

struct Component {
    x0: u32,
    x1: u32,
    y0: u32,
    y1: u32,
    pixels: Vec<(u32, u32)>,
}

/// Label connected components inside `region`, drop specks below the area
/// cutoff, merge horizontally stacked parts of multi-part glyphs, and return
/// the crops ordered left to right (ties by top edge).
pub fn segment_characters(
    image: &BinaryImage,
    region: Region,
    config: &PreprocessConfig,
) -> Result<Vec<BinaryImage>> {
    let region = region
        .clip_to(image.width(), image.height())
        .ok_or(OcrError::EmptyRegion)?;

    let rw = region.w as usize;
    let rh = region.h as usize;
    let mut labels = vec![0u32; rw * rh]; // 0 = unvisited or background
    let mut components: Vec<Component> = Vec::new();

    let neighbors: &[(i64, i64)] = match config.connectivity {
        Connectivity::Four => &[(0, 1), (0, -1), (1, 0), (-1, 0)],
        Connectivity::Eight => &[
            (0, 1),
            (0, -1),
            (1, 0),
            (-1, 0),
            (1, 1),
            (1, -1),
            (-1, 1),
            (-1, -1),
        ],
    };

    for ly in 0..rh {
        for lx in 0..rw {
            let gx = region.x + lx as u32;
            let gy = region.y + ly as u32;
            if labels[ly * rw + lx] != 0 || !image.is_ink(gx, gy) {
                continue;
            }
            let label = components.len() as u32 + 1;
            let mut comp = Component {
                x0: gx,
                x1: gx,
                y0: gy,
                y1: gy,
                pixels: Vec::new(),
            };
            let mut stack = vec![(lx, ly)];
            labels[ly * rw + lx] = label;
            while let Some((cx, cy)) = stack.pop() {
                let gx = region.x + cx as u32;
                let gy = region.y + cy as u32;
                comp.x0 = comp.x0.min(gx);
                comp.x1 = comp.x1.max(gx);
                comp.y0 = comp.y0.min(gy);
                comp.y1 = comp.y1.max(gy);
                comp.pixels.push((gx, gy));
                for &(dx, dy) in neighbors {
                    let nx = cx as i64 + dx;
                    let ny = cy as i64 + dy;
                    if nx < 0 || ny < 0 || nx >= rw as i64 || ny >= rh as i64 {
                        continue;
                    }
                    let (nx, ny) = (nx as usize, ny as usize);
                    if labels[ny * rw + nx] == 0
                        && image.is_ink(region.x + nx as u32, region.y + ny as u32)
                    {
                        labels[ny * rw + nx] = label;
                        stack.push((nx, ny));
                    }
                }
            }
            components.push(comp);
        }
    }

    components.retain(|c| c.pixels.len() >= config.min_component_area);
    if components.is_empty() {
        return Err(OcrError::NoContent {
            detail: "no components survive the noise filter".into(),
        });
    }

    // Union components whose horizontal extents overlap enough; this keeps
    // multi-part glyphs (dots, detached diacritics) together.
    let n = components.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut root = i;
        while parent[root] != root {
            root = parent[root];
        }
        let mut cur = i;
        while parent[cur] != root {
            let next = parent[cur];
            parent[cur] = root;
            cur = next;
        }
        root
    }
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (&components[i], &components[j]);
            let lo = a.x0.max(b.x0);
            let hi = a.x1.min(b.x1);
            if hi < lo {
                continue;
            }
            let overlap = (hi - lo + 1) as f64;
            let narrower = (a.x1 - a.x0 + 1).min(b.x1 - b.x0 + 1) as f64;
            if overlap >= config.merge_overlap_fraction * narrower {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }

    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        let root = find(&mut parent, i);
        groups[root].push(i);
    }

    let mut crops: Vec<BinaryImage> = Vec::new();
    let mut order: Vec<(u32, u32)> = Vec::new();
    for group in groups.into_iter().filter(|g| !g.is_empty()) {
        let x0 = group.iter().map(|&i| components[i].x0).min().unwrap();
        let x1 = group.iter().map(|&i| components[i].x1).max().unwrap();
        let y0 = group.iter().map(|&i| components[i].y0).min().unwrap();
        let y1 = group.iter().map(|&i| components[i].y1).max().unwrap();
        let w = (x1 - x0 + 1) as usize;
        let h = (y1 - y0 + 1) as usize;
        let mut bits = vec![0u8; w * h];
        for &i in &group {
            for &(px, py) in &components[i].pixels {
                bits[(py - y0) as usize * w + (px - x0) as usize] = 1;
            }
        }
        crops.push(BinaryImage::new(w as u32, h as u32, bits)?);
        order.push((x0, y0));
    }

    let mut indices: Vec<usize> = (0..crops.len()).collect();
    indices.sort_by_key(|&i| order[i]);
    Ok(indices.into_iter().map(|i| crops[i].clone()).collect())
}

/// Ink bounding box as (x0, y0, x1, y1), inclusive, or None when blank.
pub fn ink_bounds(image: &BinaryImage) -> Option<(u32, u32, u32, u32)> {
    let mut x0 = u32::MAX;
    let mut x1 = 0;
    let mut y0 = u32::MAX;
    let mut y1 = 0;
    for y in 0..image.height() {
        for x in 0..image.width() {
            if image.is_ink(x, y) {
                x0 = x0.min(x);
                x1 = x1.max(x);
                y0 = y0.min(y);
                y1 = y1.max(y);
            }
        }
    }
    (x0 != u32::MAX).then_some((x0, y0, x1, y1))
}

/// Tighten a crop to its ink bounding box and resample it to 25x20 by
/// nearest neighbor: output cell (r, c) reads input cell
/// (floor(r*H/25), floor(c*W/20)).
pub fn normalize(crop: &BinaryImage) -> Result<Glyph> {
    let (x0, y0, x1, y1) = ink_bounds(crop).ok_or(OcrError::EmptyGlyph)?;
    let w = (x1 - x0 + 1) as usize;
    let h = (y1 - y0 + 1) as usize;
    let mut bits = [0u8; GLYPH_CELLS];
    for r in 0..GLYPH_ROWS {
        let sy = y0 + (r * h / GLYPH_ROWS) as u32;
        for c in 0..GLYPH_COLS {
            let sx = x0 + (c * w / GLYPH_COLS) as u32;
            bits[r * GLYPH_COLS + c] = crop.bit(sx, sy);
        }
    }
    Glyph::from_bits(&bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gray(width: u32, height: u32, pixels: Vec<u8>) -> GrayImage {
        GrayImage::new(width, height, pixels).unwrap()
    }

    fn binary(width: u32, height: u32, bits: Vec<u8>) -> BinaryImage {
        BinaryImage::new(width, height, bits).unwrap()
    }

    #[test]
    fn binarize_uniform_is_all_background() {
        let img = gray(4, 4, vec![200; 16]);
        let bin = binarize(&img);
        assert_eq!(bin.ink_count(), 0);
    }

    #[test]
    fn binarize_two_pixels() {
        // mean = 127 by integer division; 0 < 127 -> ink, 255 >= 127 -> background
        let bin = binarize(&gray(2, 1, vec![0, 255]));
        assert_eq!(bin.bits(), &[1, 0]);
    }

    #[test]
    fn binarize_checkerboard() {
        let pixels: Vec<u8> = (0..16)
            .map(|i| if (i / 4 + i % 4) % 2 == 0 { 0 } else { 255 })
            .collect();
        let bin = binarize(&gray(4, 4, pixels.clone()));
        for (i, &p) in pixels.iter().enumerate() {
            assert_eq!(bin.bits()[i], if p == 0 { 1 } else { 0 });
        }
    }

    fn band_image(rows: &[(u32, u32)], width: u32, height: u32) -> BinaryImage {
        let mut bits = vec![0u8; (width * height) as usize];
        for &(y0, y1) in rows {
            for y in y0..=y1 {
                for x in 2..width - 2 {
                    bits[(y * width + x) as usize] = 1;
                }
            }
        }
        binary(width, height, bits)
    }

    #[test]
    fn locate_single_band() {
        let img = band_image(&[(10, 15)], 30, 40);
        let region = locate_code_region(&img, None).unwrap();
        assert_eq!(region, Region::new(2, 10, 26, 6));
    }

    #[test]
    fn locate_takes_last_qualifying_band() {
        let img = band_image(&[(5, 12), (30, 40)], 30, 50);
        let region = locate_code_region(&img, None).unwrap();
        assert_eq!((region.y, region.h), (30, 11));
    }

    #[test]
    fn locate_hint_passthrough() {
        let img = band_image(&[(10, 15)], 30, 40);
        let hint = Region::new(1, 2, 10, 10);
        assert_eq!(locate_code_region(&img, Some(hint)).unwrap(), hint);
    }

    #[test]
    fn locate_hint_clipped() {
        let img = band_image(&[(10, 15)], 30, 40);
        let hint = Region::new(20, 30, 100, 100);
        let clipped = locate_code_region(&img, Some(hint)).unwrap();
        assert_eq!(clipped, Region::new(20, 30, 10, 10));
    }

    #[test]
    fn locate_hint_outside_is_error() {
        let img = band_image(&[(10, 15)], 30, 40);
        let err = locate_code_region(&img, Some(Region::new(100, 100, 5, 5))).unwrap_err();
        assert!(matches!(err, OcrError::EmptyRegion));
    }

    #[test]
    fn locate_blank_is_no_content() {
        let img = binary(10, 10, vec![0; 100]);
        assert!(matches!(
            locate_code_region(&img, None),
            Err(OcrError::NoContent { .. })
        ));
    }

    fn paint(bits: &mut [u8], width: u32, x0: u32, y0: u32, w: u32, h: u32) {
        for y in y0..y0 + h {
            for x in x0..x0 + w {
                bits[(y * width + x) as usize] = 1;
            }
        }
    }

    #[test]
    fn segment_two_squares_ordered() {
        let mut bits = vec![0u8; 20 * 10];
        paint(&mut bits, 20, 10, 2, 5, 5);
        paint(&mut bits, 20, 0, 2, 5, 5);
        let img = binary(20, 10, bits);
        let crops =
            segment_characters(&img, Region::new(0, 0, 20, 10), &PreprocessConfig::default())
                .unwrap();
        assert_eq!(crops.len(), 2);
        assert_eq!((crops[0].width(), crops[0].height()), (5, 5));
        assert_eq!(crops[0].ink_count(), 25);
        assert_eq!(crops[1].ink_count(), 25);
    }

    #[test]
    fn segment_single_pixel_is_filtered_to_error() {
        let mut bits = vec![0u8; 100];
        bits[55] = 1;
        let img = binary(10, 10, bits);
        let err = segment_characters(&img, Region::new(0, 0, 10, 10), &PreprocessConfig::default())
            .unwrap_err();
        assert!(matches!(err, OcrError::NoContent { .. }));
    }

    #[test]
    fn segment_drops_speck_keeps_digits() {
        let mut bits = vec![0u8; 40 * 12];
        paint(&mut bits, 40, 1, 2, 6, 8);
        paint(&mut bits, 40, 10, 2, 6, 8);
        paint(&mut bits, 40, 19, 2, 6, 8);
        // 2-pixel speck
        paint(&mut bits, 40, 30, 5, 2, 1);
        let img = binary(40, 12, bits);
        let crops =
            segment_characters(&img, Region::new(0, 0, 40, 12), &PreprocessConfig::default())
                .unwrap();
        assert_eq!(crops.len(), 3);
    }

    #[test]
    fn segment_merges_vertically_stacked_parts() {
        // Two parts sharing most of their horizontal extent, like a dot
        // below a stroke; they must come back as one crop.
        let mut bits = vec![0u8; 20 * 16];
        paint(&mut bits, 20, 5, 1, 6, 3);
        paint(&mut bits, 20, 6, 10, 6, 3);
        let img = binary(20, 16, bits);
        let crops =
            segment_characters(&img, Region::new(0, 0, 20, 16), &PreprocessConfig::default())
                .unwrap();
        assert_eq!(crops.len(), 1);
        assert_eq!(crops[0].ink_count(), 36);
        assert_eq!((crops[0].width(), crops[0].height()), (7, 12));
    }

    #[test]
    fn eight_connectivity_joins_diagonal_blocks() {
        // Two 2x2 blocks touching only at a corner: separate under
        // four-connectivity, one component under eight.
        let mut bits = vec![0u8; 8 * 8];
        paint(&mut bits, 8, 1, 1, 2, 2);
        paint(&mut bits, 8, 3, 3, 2, 2);
        let img = binary(8, 8, bits);
        let region = Region::new(0, 0, 8, 8);
        let four = segment_characters(&img, region, &PreprocessConfig::default()).unwrap();
        assert_eq!(four.len(), 2);
        let config = PreprocessConfig {
            connectivity: Connectivity::Eight,
            ..Default::default()
        };
        let eight = segment_characters(&img, region, &config).unwrap();
        assert_eq!(eight.len(), 1);
    }

    #[test]
    fn segment_respects_region_bounds() {
        let mut bits = vec![0u8; 30 * 10];
        paint(&mut bits, 30, 0, 2, 5, 5);
        paint(&mut bits, 30, 20, 2, 5, 5);
        let img = binary(30, 10, bits);
        let crops =
            segment_characters(&img, Region::new(0, 0, 12, 10), &PreprocessConfig::default())
                .unwrap();
        assert_eq!(crops.len(), 1);
    }

    #[test]
    fn normalize_identity_on_25x20() {
        let mut bits = vec![0u8; GLYPH_CELLS];
        // A tight box outline fills the full 25x20 frame.
        for c in 0..GLYPH_COLS {
            bits[c] = 1;
            bits[(GLYPH_ROWS - 1) * GLYPH_COLS + c] = 1;
        }
        for r in 0..GLYPH_ROWS {
            bits[r * GLYPH_COLS] = 1;
            bits[r * GLYPH_COLS + GLYPH_COLS - 1] = 1;
        }
        let img = binary(GLYPH_COLS as u32, GLYPH_ROWS as u32, bits.clone());
        let glyph = normalize(&img).unwrap();
        assert_eq!(glyph.bits().as_slice(), bits.as_slice());
    }

    #[test]
    fn normalize_all_ink_scales() {
        let img = binary(40, 50, vec![1; 2000]);
        let glyph = normalize(&img).unwrap();
        assert_eq!(glyph.ink_count(), GLYPH_CELLS);
    }

    #[test]
    fn normalize_index_map_on_tight_input() {
        // Tight 5x4 input: floor(r*5/25) = 0 for r < 5, so the full-width
        // top row expands into output rows 0-4; the single pixel at (4, 0)
        // keeps the box tight and lands in output rows 20-24, cols 0-4.
        let mut bits = vec![0u8; 20];
        bits[..4].fill(1);
        bits[4 * 4] = 1;
        let img = binary(4, 5, bits);
        let glyph = normalize(&img).unwrap();
        for r in 0..GLYPH_ROWS {
            for c in 0..GLYPH_COLS {
                let expected = r < 5 || (r >= 20 && c < 5);
                assert_eq!(glyph.bit(r, c) == 1, expected, "row {r} col {c}");
            }
        }
    }

    #[test]
    fn normalize_tightens_before_resampling() {
        // Only one row carries ink, so the tight box is a single row and
        // the output is fully inked.
        let mut bits = vec![0u8; 20];
        bits[4..8].fill(1);
        let img = binary(4, 5, bits);
        let glyph = normalize(&img).unwrap();
        assert_eq!(glyph.ink_count(), GLYPH_CELLS);
    }

    #[test]
    fn normalize_empty_is_error() {
        let img = binary(5, 5, vec![0; 25]);
        assert!(matches!(normalize(&img), Err(OcrError::EmptyGlyph)));
    }

    proptest! {
        // Tight 25x20 inputs are fixed points of normalize.
        #[test]
        fn normalize_idempotent_on_tight_inputs(seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut bits = vec![0u8; GLYPH_CELLS];
            for b in bits.iter_mut() {
                *b = if rng.gen_bool(0.3) { 1 } else { 0 };
            }
            // Force tightness: ink in every border line.
            bits[GLYPH_COLS / 2] = 1;
            bits[(GLYPH_ROWS - 1) * GLYPH_COLS + GLYPH_COLS / 2] = 1;
            bits[(GLYPH_ROWS / 2) * GLYPH_COLS] = 1;
            bits[(GLYPH_ROWS / 2) * GLYPH_COLS + GLYPH_COLS - 1] = 1;
            let img = BinaryImage::new(GLYPH_COLS as u32, GLYPH_ROWS as u32, bits.clone()).unwrap();
            let once = normalize(&img).unwrap();
            prop_assert_eq!(once.bits().as_slice(), bits.as_slice());
            let img2 = BinaryImage::new(
                GLYPH_COLS as u32,
                GLYPH_ROWS as u32,
                once.bits().to_vec(),
            ).unwrap();
            let twice = normalize(&img2).unwrap();
            prop_assert_eq!(&twice, &once);
        }

        // Permuting equal-intensity pixels permutes the binarized output
        // identically: the threshold depends only on the multiset.
        #[test]
        fn binarize_pointwise(pixels in proptest::collection::vec(any::<u8>(), 16), i in 0usize..16, j in 0usize..16) {
            let img = GrayImage::new(4, 4, pixels.clone()).unwrap();
            let out = binarize(&img);
            let mut swapped = pixels.clone();
            swapped.swap(i, j);
            let img2 = GrayImage::new(4, 4, swapped).unwrap();
            let out2 = binarize(&img2);
            let mut expect = out.bits().to_vec();
            expect.swap(i, j);
            prop_assert_eq!(out2.bits(), expect.as_slice());
        }

        // Left edges are nondecreasing and every crop carries >= 4 ink pixels.
        #[test]
        fn segment_order_and_area(seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let width = 60u32;
            let height = 14u32;
            let mut bits = vec![0u8; (width * height) as usize];
            let mut x = 1u32;
            while x + 5 < width {
                let w = rng.gen_range(2..5u32);
                let h = rng.gen_range(2..8u32);
                let y = rng.gen_range(1..height - h);
                paint(&mut bits, width, x, y, w, h);
                x += w + rng.gen_range(2..6u32);
            }
            let img = BinaryImage::new(width, height, bits).unwrap();
            let crops = segment_characters(
                &img,
                Region::new(0, 0, width, height),
                &PreprocessConfig::default(),
            );
            if let Ok(crops) = crops {
                for crop in &crops {
                    prop_assert!(crop.ink_count() >= 4);
                }
            }
        }
    }
}
