//! Regenerates the training fixture glyphs under `fixtures/glyphs/`.
//!
//! Each of the 20 classes (Arabic and Indian numerals 0-9) is drawn from
//! stroke paths in four typeset variants, rasterized at the 25x20 size-12
//! baseline, and written at the five training font sizes as nearest-neighbor
//! upscales. The renderer validates that every glyph is 4-connected, carries
//! enough ink, and that normalized glyphs of different classes stay far
//! apart in Hamming distance.

use std::path::PathBuf;

use hybrid_ocr::classifiers::Script;
use hybrid_ocr::imageio::{save_pgm, GrayImage};
use hybrid_ocr::preprocess::{normalize, BinaryImage, Glyph, GLYPH_CELLS, GLYPH_COLS, GLYPH_ROWS};

struct Style {
    name: &'static str,
    thickness: i64,
    shear: f64,
}

const STYLES: [Style; 4] = [
    Style { name: "sans", thickness: 2, shear: 0.0 },
    Style { name: "bold", thickness: 4, shear: 0.0 },
    Style { name: "italic", thickness: 2, shear: 0.28 },
    Style { name: "heavy", thickness: 3, shear: -0.22 },
];

const FONT_SIZES: [u32; 5] = [12, 14, 16, 18, 20];

enum Piece {
    Poly(&'static [(f64, f64)]),
    /// Elliptical arc: center (row, col), radii (row, col), angles in
    /// degrees swept from `from` to `to`; 90 degrees is the top.
    Arc {
        c: (f64, f64),
        r: (f64, f64),
        from: f64,
        to: f64,
    },
    Disk {
        c: (f64, f64),
        r: f64,
    },
}

use Piece::{Arc, Disk, Poly};

fn shapes(script: Script, digit: u8) -> Vec<Piece> {
    match (script, digit) {
        (Script::Arabic, 0) => vec![Arc { c: (12.0, 9.5), r: (11.0, 8.0), from: 0.0, to: 360.0 }],
        (Script::Arabic, 1) => vec![
            Poly(&[(5.0, 4.5), (0.0, 9.5)]),
            Poly(&[(0.0, 9.5), (24.0, 9.5)]),
            Poly(&[(24.0, 4.0), (24.0, 15.0)]),
        ],
        (Script::Arabic, 2) => vec![
            Arc { c: (6.5, 9.5), r: (6.5, 8.0), from: 180.0, to: 0.0 },
            Poly(&[(6.5, 17.5), (13.0, 13.0), (19.0, 7.0), (24.0, 1.5)]),
            Poly(&[(24.0, 1.5), (24.0, 17.5)]),
        ],
        (Script::Arabic, 3) => vec![
            Arc { c: (6.5, 9.0), r: (6.5, 7.5), from: 150.0, to: -75.0 },
            Arc { c: (17.5, 9.0), r: (6.5, 7.5), from: 75.0, to: -150.0 },
        ],
        (Script::Arabic, 4) => vec![
            Poly(&[(0.0, 13.5), (15.0, 1.5)]),
            Poly(&[(15.0, 1.5), (15.0, 17.5)]),
            Poly(&[(0.0, 13.5), (24.0, 13.5)]),
        ],
        (Script::Arabic, 5) => vec![
            Poly(&[(0.0, 16.5), (0.0, 3.5)]),
            Poly(&[(0.0, 3.5), (10.0, 3.5)]),
            Arc { c: (16.5, 9.0), r: (7.5, 8.0), from: 130.0, to: -160.0 },
        ],
        (Script::Arabic, 6) => vec![
            Poly(&[(0.0, 13.5), (5.0, 6.5), (11.0, 2.5), (16.0, 1.5)]),
            Arc { c: (17.5, 9.0), r: (6.5, 7.5), from: 0.0, to: 360.0 },
        ],
        (Script::Arabic, 7) => vec![
            Poly(&[(0.0, 1.5), (0.0, 17.5)]),
            Poly(&[(0.0, 17.5), (24.0, 3.5)]),
            Poly(&[(11.0, 3.5), (11.0, 13.0)]),
        ],
        (Script::Arabic, 8) => vec![
            Arc { c: (6.0, 9.5), r: (6.0, 7.0), from: 0.0, to: 360.0 },
            Arc { c: (18.0, 9.5), r: (6.0, 8.0), from: 0.0, to: 360.0 },
        ],
        (Script::Arabic, 9) => vec![
            Arc { c: (7.0, 8.5), r: (7.0, 7.0), from: 0.0, to: 360.0 },
            Poly(&[(7.0, 15.5), (14.0, 14.0), (20.0, 10.0), (24.0, 4.0)]),
        ],
        (Script::Indian, 0) => vec![Disk { c: (12.0, 9.5), r: 3.4 }],
        (Script::Indian, 1) => vec![Poly(&[(0.0, 11.0), (24.0, 8.5)])],
        (Script::Indian, 2) => vec![
            Poly(&[(4.0, 3.0), (1.0, 8.0), (2.5, 13.5), (7.0, 15.0)]),
            Poly(&[(7.0, 15.0), (13.0, 11.5), (19.5, 6.5), (24.0, 3.0)]),
        ],
        (Script::Indian, 3) => vec![
            Poly(&[(5.5, 2.0), (2.0, 5.0), (5.5, 8.0)]),
            Poly(&[(5.5, 8.0), (2.0, 11.0), (5.5, 14.0)]),
            Poly(&[(5.5, 14.0), (12.0, 12.5), (19.0, 8.0), (24.0, 3.5)]),
        ],
        (Script::Indian, 4) => vec![Poly(&[
            (0.0, 16.0),
            (5.0, 3.0),
            (12.0, 11.0),
            (18.0, 2.5),
            (24.0, 14.0),
        ])],
        (Script::Indian, 5) => vec![Poly(&[
            (0.0, 4.0),
            (8.0, 1.2),
            (16.0, 3.0),
            (22.0, 7.0),
            (23.5, 9.5),
            (22.0, 12.0),
            (16.0, 16.0),
            (8.0, 17.8),
            (0.0, 15.0),
            (9.0, 9.5),
            (0.0, 4.0),
        ])],
        (Script::Indian, 6) => vec![
            Poly(&[(0.0, 3.0), (0.0, 16.5)]),
            Poly(&[(0.0, 16.5), (24.0, 13.0)]),
        ],
        (Script::Indian, 7) => vec![
            Poly(&[(0.0, 2.0), (24.0, 9.5)]),
            Poly(&[(24.0, 9.5), (0.0, 17.0)]),
        ],
        (Script::Indian, 8) => vec![
            Poly(&[(24.0, 2.0), (0.0, 9.5)]),
            Poly(&[(0.0, 9.5), (24.0, 17.0)]),
        ],
        (Script::Indian, 9) => vec![
            Arc { c: (7.0, 7.5), r: (7.0, 6.5), from: 0.0, to: 360.0 },
            Poly(&[(4.0, 13.5), (24.0, 14.5)]),
        ],
        _ => unreachable!("digits are 0-9"),
    }
}

struct Raster {
    bits: [u8; GLYPH_CELLS],
}

impl Raster {
    fn new() -> Self {
        Raster {
            bits: [0; GLYPH_CELLS],
        }
    }

    fn stamp(&mut self, row: f64, col: f64, thickness: i64) {
        let half = (thickness as f64 - 1.0) / 2.0;
        let r0 = (row - half).round() as i64;
        let c0 = (col - half).round() as i64;
        for dr in 0..thickness {
            for dc in 0..thickness {
                let r = r0 + dr;
                let c = c0 + dc;
                if (0..GLYPH_ROWS as i64).contains(&r) && (0..GLYPH_COLS as i64).contains(&c) {
                    self.bits[r as usize * GLYPH_COLS + c as usize] = 1;
                }
            }
        }
    }
}

/// Shear transform: columns compress so the sheared shape still fits the
/// 25x20 frame, then shift linearly with the row.
fn transform(row: f64, col: f64, shear: f64) -> (f64, f64) {
    let k = (19.0 - 24.0 * shear.abs()) / 19.0;
    let offset = if shear >= 0.0 {
        shear * (24.0 - row)
    } else {
        -shear * row
    };
    (row, col * k + offset)
}

fn draw_point(raster: &mut Raster, row: f64, col: f64, style: &Style) {
    let (r, c) = transform(row, col, style.shear);
    raster.stamp(r, c, style.thickness);
}

fn draw_segment(raster: &mut Raster, a: (f64, f64), b: (f64, f64), style: &Style) {
    let len = ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt();
    let steps = (len / 0.25).ceil().max(1.0) as usize;
    for s in 0..=steps {
        let t = s as f64 / steps as f64;
        draw_point(
            raster,
            a.0 + t * (b.0 - a.0),
            a.1 + t * (b.1 - a.1),
            style,
        );
    }
}

fn draw_arc(raster: &mut Raster, c: (f64, f64), r: (f64, f64), from: f64, to: f64, style: &Style) {
    let steps = ((from - to).abs() / 2.0).ceil().max(1.0) as usize;
    for s in 0..=steps {
        let theta = (from + (to - from) * s as f64 / steps as f64).to_radians();
        let row = c.0 - r.0 * theta.sin();
        let col = c.1 + r.1 * theta.cos();
        draw_point(raster, row, col, style);
    }
}

fn rasterize(pieces: &[Piece], style: &Style) -> [u8; GLYPH_CELLS] {
    let mut raster = Raster::new();
    for piece in pieces {
        match piece {
            Poly(pts) => {
                for pair in pts.windows(2) {
                    draw_segment(&mut raster, pair[0], pair[1], style);
                }
            }
            Arc { c, r, from, to } => draw_arc(&mut raster, *c, *r, *from, *to, style),
            Disk { c, r } => {
                let mut radius = *r;
                while radius > 0.0 {
                    draw_arc(&mut raster, *c, (radius, radius), 0.0, 360.0, style);
                    radius -= 0.5;
                }
                draw_point(&mut raster, c.0, c.1, style);
            }
        }
    }
    raster.bits
}

fn ink_count(bits: &[u8]) -> usize {
    bits.iter().filter(|&&b| b == 1).count()
}

/// Single 4-connected component check.
fn connected(bits: &[u8; GLYPH_CELLS]) -> bool {
    let total = ink_count(bits);
    if total == 0 {
        return false;
    }
    let start = bits.iter().position(|&b| b == 1).unwrap();
    let mut seen = [false; GLYPH_CELLS];
    let mut stack = vec![start];
    seen[start] = true;
    let mut reached = 0;
    while let Some(idx) = stack.pop() {
        reached += 1;
        let (r, c) = (idx / GLYPH_COLS, idx % GLYPH_COLS);
        let mut push = |rr: i64, cc: i64| {
            if (0..GLYPH_ROWS as i64).contains(&rr) && (0..GLYPH_COLS as i64).contains(&cc) {
                let n = rr as usize * GLYPH_COLS + cc as usize;
                if bits[n] == 1 && !seen[n] {
                    seen[n] = true;
                    stack.push(n);
                }
            }
        };
        push(r as i64 - 1, c as i64);
        push(r as i64 + 1, c as i64);
        push(r as i64, c as i64 - 1);
        push(r as i64, c as i64 + 1);
    }
    reached == total
}

fn is_tight(glyph: &Glyph) -> bool {
    let row_has = |r: usize| (0..GLYPH_COLS).any(|c| glyph.is_ink(r, c));
    let col_has = |c: usize| (0..GLYPH_ROWS).any(|r| glyph.is_ink(r, c));
    row_has(0) && row_has(GLYPH_ROWS - 1) && col_has(0) && col_has(GLYPH_COLS - 1)
}

fn hamming(a: &Glyph, b: &Glyph) -> usize {
    a.bits()
        .iter()
        .zip(b.bits().iter())
        .filter(|(x, y)| x != y)
        .count()
}

/// Nearest-neighbor upscale of the 25x20 raster to the pixel size of the
/// given font size, with a 2-pixel white margin, as a grayscale image.
fn render_at_size(bits: &[u8; GLYPH_CELLS], size: u32) -> GrayImage {
    let h = (GLYPH_ROWS as u32 * size + 6) / 12;
    let w = (GLYPH_COLS as u32 * size + 6) / 12;
    let margin = 2u32;
    let mut img = GrayImage::filled(w + 2 * margin, h + 2 * margin, 255).unwrap();
    for y in 0..h {
        let sy = (y as usize * GLYPH_ROWS) / h as usize;
        for x in 0..w {
            let sx = (x as usize * GLYPH_COLS) / w as usize;
            if bits[sy * GLYPH_COLS + sx] == 1 {
                img.set_pixel(x + margin, y + margin, 0);
            }
        }
    }
    img
}

fn main() {
    let out_dir: PathBuf = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/glyphs")));
    std::fs::create_dir_all(&out_dir).expect("create output directory");

    let scripts = [Script::Arabic, Script::Indian];
    let mut files = 0usize;
    for style in &STYLES {
        let mut normalized: Vec<(Script, u8, Glyph)> = Vec::new();
        for script in scripts {
            for digit in 0..10u8 {
                let bits = rasterize(&shapes(script, digit), style);
                assert!(
                    ink_count(&bits) >= 4,
                    "{} {script} {digit}: too little ink",
                    style.name
                );
                assert!(
                    connected(&bits),
                    "{} {script} {digit}: raster not 4-connected",
                    style.name
                );
                let raster_img = BinaryImage::new(
                    GLYPH_COLS as u32,
                    GLYPH_ROWS as u32,
                    bits.to_vec(),
                )
                .unwrap();
                let glyph = normalize(&raster_img).expect("raster has ink");
                assert!(
                    is_tight(&glyph),
                    "{} {script} {digit}: normalized glyph not tight",
                    style.name
                );
                normalized.push((script, digit, glyph));

                for &size in &FONT_SIZES {
                    let img = render_at_size(&bits, size);
                    let name = format!("{}_{size}_{script}_{digit}.pgm", style.name);
                    save_pgm(&img, out_dir.join(name)).expect("write fixture");
                    files += 1;
                }
            }
        }

        // Class separation within the typeset.
        let mut min_pair = (usize::MAX, String::new());
        for i in 0..normalized.len() {
            for j in i + 1..normalized.len() {
                let d = hamming(&normalized[i].2, &normalized[j].2);
                if d < min_pair.0 {
                    min_pair = (
                        d,
                        format!(
                            "{} {} vs {} {}",
                            normalized[i].0, normalized[i].1, normalized[j].0, normalized[j].1
                        ),
                    );
                }
            }
        }
        println!(
            "{:<7} min inter-class Hamming distance: {:>3} ({})",
            style.name, min_pair.0, min_pair.1
        );
        assert!(
            min_pair.0 >= 40,
            "{}: classes too close, worst pair {}",
            style.name,
            min_pair.1
        );
    }
    println!("wrote {files} glyph images to {}", out_dir.display());
}
