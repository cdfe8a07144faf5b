//! Grayscale image files: binary PGM (P5) and 8-bit PNG.

use std::path::{Path, PathBuf};

use image::{DynamicImage, ImageFormat};
use stagetv_core::ImageGrid;

#[derive(Debug, thiserror::Error)]
pub enum ImageError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {reason}")]
    Format { path: PathBuf, reason: String },
}

fn format_err(path: &Path, reason: impl Into<String>) -> ImageError {
    ImageError::Format {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

const PNG_MAGIC: &[u8] = b"\x89PNG\r\n\x1a\n";

/// Rec. 601 luma weights for color inputs.
const LUMA: [f64; 3] = [0.299, 0.587, 0.114];

pub fn load_image(path: &Path) -> Result<ImageGrid, ImageError> {
    let bytes = std::fs::read(path).map_err(|source| ImageError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    if bytes.starts_with(b"P5") {
        decode_pgm(&bytes).map_err(|reason| format_err(path, reason))
    } else if bytes.starts_with(PNG_MAGIC) {
        decode_png(&bytes).map_err(|reason| format_err(path, reason))
    } else {
        Err(format_err(path, "unsupported format (expected binary PGM or PNG)"))
    }
}

struct Header<'a> {
    rest: &'a [u8],
}

impl<'a> Header<'a> {
    fn skip_space(&mut self) {
        loop {
            match self.rest.first() {
                Some(b) if b.is_ascii_whitespace() => self.rest = &self.rest[1..],
                Some(b'#') => {
                    let end = self.rest.iter().position(|&b| b == b'\n').unwrap_or(self.rest.len());
                    self.rest = &self.rest[end..];
                }
                _ => return,
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize, String> {
        self.skip_space();
        let len = self.rest.iter().take_while(|b| b.is_ascii_digit()).count();
        if len == 0 {
            return Err(format!("malformed PGM header: missing {what}"));
        }
        let text = std::str::from_utf8(&self.rest[..len]).expect("ASCII digits");
        self.rest = &self.rest[len..];
        text.parse().map_err(|_| format!("malformed PGM header: {what} out of range"))
    }
}

fn decode_pgm(bytes: &[u8]) -> Result<ImageGrid, String> {
    let mut h = Header { rest: &bytes[2..] };
    let cols = h.number("width")?;
    let rows = h.number("height")?;
    let maxval = h.number("maxval")?;
    if maxval > 255 {
        return Err(format!("16-bit PGM (maxval {maxval}) is not supported"));
    }
    if maxval == 0 || rows == 0 || cols == 0 {
        return Err("malformed PGM header: zero dimension or maxval".into());
    }
    match h.rest.first() {
        Some(b) if b.is_ascii_whitespace() => {}
        _ => return Err("malformed PGM header: no separator before raster".into()),
    }
    let body = &h.rest[1..];
    let n = rows * cols;
    if body.len() < n {
        return Err(format!("truncated PGM raster: {} of {n} bytes", body.len()));
    }
    let scale = 255.0 / maxval as f64;
    let data = body[..n].iter().map(|&b| (b as f64 * scale).min(255.0)).collect();
    ImageGrid::new(rows, cols, data).map_err(|e| e.to_string())
}

fn decode_png(bytes: &[u8]) -> Result<ImageGrid, String> {
    let img = image::load_from_memory_with_format(bytes, ImageFormat::Png).map_err(|e| e.to_string())?;
    let (cols, rows) = (img.width() as usize, img.height() as usize);
    let data: Vec<f64> = match &img {
        DynamicImage::ImageLuma8(g) => g.as_raw().iter().map(|&b| b as f64).collect(),
        DynamicImage::ImageLumaA8(g) => g.pixels().map(|p| p.0[0] as f64).collect(),
        DynamicImage::ImageRgb8(c) => c.pixels().map(|p| luma(p.0[0], p.0[1], p.0[2])).collect(),
        DynamicImage::ImageRgba8(c) => c.pixels().map(|p| luma(p.0[0], p.0[1], p.0[2])).collect(),
        _ => return Err(format!("{:?} PNG is not supported (8-bit only)", img.color())),
    };
    ImageGrid::new(rows, cols, data).map_err(|e| e.to_string())
}

fn luma(r: u8, g: u8, b: u8) -> f64 {
    LUMA[0] * r as f64 + LUMA[1] * g as f64 + LUMA[2] * b as f64
}

/// Clamp to `[0, 255]`, round half away from zero, and write P5 or PNG by
/// extension.
pub fn save_image(grid: &ImageGrid, path: &Path) -> Result<(), ImageError> {
    let bytes: Vec<u8> = grid.quantized().as_slice().iter().map(|&v| v as u8).collect();
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .unwrap_or_default();
    let encoded = match ext.as_str() {
        "pgm" | "pnm" => {
            let mut out = format!("P5\n{} {}\n255\n", grid.cols(), grid.rows()).into_bytes();
            out.extend_from_slice(&bytes);
            out
        }
        "png" => {
            let img = image::GrayImage::from_raw(grid.cols() as u32, grid.rows() as u32, bytes)
                .expect("buffer matches dimensions");
            let mut out = std::io::Cursor::new(Vec::new());
            img.write_to(&mut out, ImageFormat::Png)
                .map_err(|e| format_err(path, e.to_string()))?;
            out.into_inner()
        }
        _ => return Err(format_err(path, "output extension must be .pgm or .png")),
    };
    std::fs::write(path, encoded).map_err(|source| ImageError::Io {
        path: path.to_path_buf(),
        source,
    })
}
