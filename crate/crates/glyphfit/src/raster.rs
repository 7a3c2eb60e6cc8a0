//! Grayscale raster images, binary PGM I/O and a scanline-free winding
//! rasterizer over Bezier contours (used as an oracle independent of the
//! implicit-field renderer).

use crate::geom::Point;
use crate::glyph_ir::Contour;
use std::io::{self, Read, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RasterError {
    #[error("image dimensions differ: {0}x{1} vs {2}x{3}")]
    ShapeMismatch(usize, usize, usize, usize),
    #[error("malformed PGM: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Row-major grayscale image with values in [0,1]; row 0 is the top.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize) -> Self {
        Image {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut img = Image::new(width, height);
        for row in 0..height {
            for col in 0..width {
                img.data[row * width + col] = f(row, col);
            }
        }
        img
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    pub fn same_shape(&self, other: &Image) -> Result<(), RasterError> {
        if self.width != other.width || self.height != other.height {
            return Err(RasterError::ShapeMismatch(
                self.width,
                self.height,
                other.width,
                other.height,
            ));
        }
        Ok(())
    }

    /// Center of pixel (row, col) mapped into [-1,1]^2, y-up, row 0 on top.
    pub fn pixel_center(width: usize, height: usize, row: usize, col: usize) -> Point {
        Point::new(
            2.0 * (col as f64 + 0.5) / width as f64 - 1.0,
            1.0 - 2.0 * (row as f64 + 0.5) / height as f64,
        )
    }

    /// Binary PGM (P5, maxval 255), rounding half up.
    pub fn write_pgm(&self, mut w: impl Write) -> Result<(), RasterError> {
        write!(w, "P5\n{} {}\n255\n", self.width, self.height)?;
        let bytes: Vec<u8> = self
            .data
            .iter()
            .map(|&v| (v.clamp(0.0, 1.0) * 255.0 + 0.5).floor() as u8)
            .collect();
        w.write_all(&bytes)?;
        Ok(())
    }

    pub fn read_pgm(mut r: impl Read) -> Result<Image, RasterError> {
        let mut buf = Vec::new();
        r.read_to_end(&mut buf)?;
        let bad = |m: &str| RasterError::Format(m.to_string());
        // header: magic, width, height, maxval separated by whitespace
        let mut pos = 0;
        let mut fields = Vec::new();
        while fields.len() < 4 {
            while pos < buf.len() && buf[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < buf.len() && buf[pos] == b'#' {
                while pos < buf.len() && buf[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            let start = pos;
            while pos < buf.len() && !buf[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err(bad("truncated header"));
            }
            fields.push(std::str::from_utf8(&buf[start..pos]).map_err(|_| bad("header"))?);
        }
        pos += 1; // single whitespace after maxval
        if fields[0] != "P5" {
            return Err(bad("not a P5 PGM"));
        }
        let width: usize = fields[1].parse().map_err(|_| bad("width"))?;
        let height: usize = fields[2].parse().map_err(|_| bad("height"))?;
        let maxval: f64 = fields[3].parse().map_err(|_| bad("maxval"))?;
        let need = width * height;
        if buf.len() < pos + need {
            return Err(bad("truncated pixel data"));
        }
        let data = buf[pos..pos + need]
            .iter()
            .map(|&b| b as f64 / maxval)
            .collect();
        Ok(Image {
            width,
            height,
            data,
        })
    }
}

/// Rasterizes contours with the nonzero winding rule at pixel centers:
/// inside = 0 (ink), outside = 1. Purely outline-based; shares nothing with
/// the implicit-field render path.
pub fn rasterize_winding(contours: &[Contour], width: usize, height: usize) -> Image {
    Image::from_fn(width, height, |row, col| {
        let q = Image::pixel_center(width, height, row, col);
        let w: i32 = contours.iter().map(|c| c.winding_number(q)).sum();
        if w != 0 {
            0.0
        } else {
            1.0
        }
    })
}
