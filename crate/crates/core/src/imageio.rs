//! Minimal raster image I/O: PGM (P5/P2) and uncompressed BMP readers,
//! PGM P5 writer.
//!
//! Decoding is bit-exact and total: a conforming file yields an image, a
//! non-conforming one yields a typed error naming the offending header
//! field. Density/dpi metadata is ignored everywhere.

use std::fs;
use std::path::Path;

use crate::error::{OcrError, Result};

/// 8-bit grayscale raster, row-major, 0 = black ink, 255 = white paper.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(OcrError::InvalidDimensions {
                detail: format!("{width}x{height}"),
            });
        }
        let expected = width as usize * height as usize;
        if pixels.len() != expected {
            return Err(OcrError::InvalidDimensions {
                detail: format!(
                    "{width}x{height} needs {expected} pixels, got {}",
                    pixels.len()
                ),
            });
        }
        Ok(GrayImage {
            width,
            height,
            pixels,
        })
    }

    /// Uniform image of the given intensity.
    pub fn filled(width: u32, height: u32, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width as usize * height as usize])
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixel(&self, x: u32, y: u32) -> u8 {
        debug_assert!(x < self.width && y < self.height);
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    pub fn set_pixel(&mut self, x: u32, y: u32, value: u8) {
        debug_assert!(x < self.width && y < self.height);
        self.pixels[y as usize * self.width as usize + x as usize] = value;
    }
}

/// Integer luma rule used for every color-to-gray conversion.
fn luma(r: u8, g: u8, b: u8) -> u8 {
    ((299 * r as u32 + 587 * g as u32 + 114 * b as u32) / 1000) as u8
}

/// Load a PGM (P5/P2) or uncompressed BMP (8-bit palette or 24-bit) file.
pub fn load_image(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let data = fs::read(path).map_err(|e| OcrError::io(path, e))?;
    decode_image(&data)
}

/// Decode from an in-memory buffer; format is sniffed from the magic bytes.
pub fn decode_image(data: &[u8]) -> Result<GrayImage> {
    match data {
        [b'P', b'5', ..] => decode_pgm(data, true),
        [b'P', b'2', ..] => decode_pgm(data, false),
        [b'B', b'M', ..] => decode_bmp(data),
        _ => Err(OcrError::UnsupportedFormat {
            field: "magic".into(),
            detail: format!(
                "expected P5, P2 or BM, got {:?}",
                data.iter().take(2).map(|&b| b as char).collect::<String>()
            ),
        }),
    }
}

/// Write a P5 PGM with maxval 255. `load_image(save_pgm(x)) == x` bit-exactly.
pub fn save_pgm(image: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_pgm(image)).map_err(|e| OcrError::io(path, e))
}

/// P5 bytes: header `P5\n<w> <h>\n255\n` followed by the raw payload.
pub fn encode_pgm(image: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.width, image.height).into_bytes();
    out.extend_from_slice(&image.pixels);
    out
}

// --- PGM ---

/// Pulls whitespace-separated header tokens, skipping `#` comments.
struct PnmTokens<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> PnmTokens<'a> {
    fn new(data: &'a [u8], pos: usize) -> Self {
        PnmTokens { data, pos }
    }

    fn skip_filler(&mut self) {
        while self.pos < self.data.len() {
            let b = self.data[self.pos];
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while self.pos < self.data.len() && self.data[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn next_u32(&mut self, field: &str) -> Result<u32> {
        self.skip_filler();
        let start = self.pos;
        while self.pos < self.data.len() && self.data[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(OcrError::CorruptImage {
                detail: format!("missing or non-numeric {field}"),
            });
        }
        let text = std::str::from_utf8(&self.data[start..self.pos]).unwrap();
        text.parse::<u32>().map_err(|_| OcrError::CorruptImage {
            detail: format!("{field} out of range: {text}"),
        })
    }
}

fn decode_pgm(data: &[u8], binary: bool) -> Result<GrayImage> {
    let mut tokens = PnmTokens::new(data, 2);
    let width = tokens.next_u32("width")?;
    let height = tokens.next_u32("height")?;
    let maxval = tokens.next_u32("maxval")?;
    if width == 0 || height == 0 {
        return Err(OcrError::CorruptImage {
            detail: format!("zero dimension {width}x{height}"),
        });
    }
    if maxval == 0 || maxval > 255 {
        return Err(OcrError::UnsupportedFormat {
            field: "maxval".into(),
            detail: format!("only 8-bit PGM supported, maxval {maxval}"),
        });
    }
    let count = width as usize * height as usize;
    if binary {
        // Exactly one whitespace byte separates the header from the payload.
        if tokens.pos >= data.len() || !data[tokens.pos].is_ascii_whitespace() {
            return Err(OcrError::CorruptImage {
                detail: "missing separator after maxval".into(),
            });
        }
        let start = tokens.pos + 1;
        let payload = data.get(start..start + count).ok_or(OcrError::CorruptImage {
            detail: format!(
                "pixel payload truncated: need {count} bytes, have {}",
                data.len().saturating_sub(start)
            ),
        })?;
        for &b in payload {
            if b as u32 > maxval {
                return Err(OcrError::CorruptImage {
                    detail: format!("pixel value {b} exceeds maxval {maxval}"),
                });
            }
        }
        GrayImage::new(width, height, payload.to_vec())
    } else {
        let mut pixels = Vec::with_capacity(count);
        for _ in 0..count {
            let v = tokens.next_u32("pixel value")?;
            if v > maxval {
                return Err(OcrError::CorruptImage {
                    detail: format!("pixel value {v} exceeds maxval {maxval}"),
                });
            }
            pixels.push(v as u8);
        }
        GrayImage::new(width, height, pixels)
    }
}

// --- BMP ---

fn le_u32(data: &[u8], at: usize) -> Result<u32> {
    data.get(at..at + 4)
        .map(|b| u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or(OcrError::CorruptImage {
            detail: format!("header truncated at byte {at}"),
        })
}

fn le_i32(data: &[u8], at: usize) -> Result<i32> {
    Ok(le_u32(data, at)? as i32)
}

fn le_u16(data: &[u8], at: usize) -> Result<u16> {
    data.get(at..at + 2)
        .map(|b| u16::from_le_bytes([b[0], b[1]]))
        .ok_or(OcrError::CorruptImage {
            detail: format!("header truncated at byte {at}"),
        })
}

/// Uncompressed BMP with BITMAPINFOHEADER (or a later extension of it),
/// 8-bit palette or 24-bit pixels. Positive height means bottom-up storage,
/// which is normalized to top-down here.
fn decode_bmp(data: &[u8]) -> Result<GrayImage> {
    let pixel_offset = le_u32(data, 10)? as usize;
    let dib_size = le_u32(data, 14)?;
    if dib_size < 40 {
        return Err(OcrError::UnsupportedFormat {
            field: "biSize".into(),
            detail: format!("DIB header size {dib_size}, need BITMAPINFOHEADER (>= 40)"),
        });
    }
    let width = le_i32(data, 18)?;
    let raw_height = le_i32(data, 22)?;
    let bit_count = le_u16(data, 28)?;
    let compression = le_u32(data, 30)?;
    if compression != 0 {
        return Err(OcrError::UnsupportedFormat {
            field: "biCompression".into(),
            detail: format!("compression {compression}, only BI_RGB (0) supported"),
        });
    }
    if bit_count != 8 && bit_count != 24 {
        return Err(OcrError::UnsupportedFormat {
            field: "biBitCount".into(),
            detail: format!("bit depth {bit_count}, only 8 or 24 supported"),
        });
    }
    if width <= 0 || raw_height == 0 {
        return Err(OcrError::CorruptImage {
            detail: format!("non-positive dimensions {width}x{raw_height}"),
        });
    }
    let top_down = raw_height < 0;
    let height = raw_height.unsigned_abs();
    let width = width as u32;

    let palette = if bit_count == 8 {
        let used = le_u32(data, 46)?;
        let entries = if used == 0 { 256 } else { used as usize };
        if entries > 256 {
            return Err(OcrError::CorruptImage {
                detail: format!("palette claims {entries} entries"),
            });
        }
        let start = 14 + dib_size as usize;
        let table = data
            .get(start..start + entries * 4)
            .ok_or(OcrError::CorruptImage {
                detail: "palette truncated".into(),
            })?;
        // Entries are stored B, G, R, reserved.
        Some(
            table
                .chunks_exact(4)
                .map(|e| luma(e[2], e[1], e[0]))
                .collect::<Vec<u8>>(),
        )
    } else {
        None
    };

    let bytes_per_px = bit_count as usize / 8;
    let row_stride = (width as usize * bytes_per_px).div_ceil(4) * 4;
    let mut pixels = vec![0u8; width as usize * height as usize];
    for out_y in 0..height as usize {
        let src_y = if top_down {
            out_y
        } else {
            height as usize - 1 - out_y
        };
        let row_start = pixel_offset + src_y * row_stride;
        let row = data
            .get(row_start..row_start + width as usize * bytes_per_px)
            .ok_or(OcrError::CorruptImage {
                detail: format!("pixel data truncated in row {src_y}"),
            })?;
        let out_row = &mut pixels[out_y * width as usize..(out_y + 1) * width as usize];
        match &palette {
            Some(table) => {
                for (out, &idx) in out_row.iter_mut().zip(row.iter()) {
                    *out = *table.get(idx as usize).ok_or(OcrError::CorruptImage {
                        detail: format!("palette index {idx} out of range"),
                    })?;
                }
            }
            None => {
                for (out, bgr) in out_row.iter_mut().zip(row.chunks_exact(3)) {
                    *out = luma(bgr[2], bgr[1], bgr[0]);
                }
            }
        }
    }
    GrayImage::new(width, height, pixels)
}
