//! Binary PGM (P5) and PPM (P6) reading and writing, maxval 255.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use ndarray::{Array2, Array3};

use crate::error::{Error, Result};

/// Write a grayscale image as binary PGM.
pub fn write_pgm(path: &Path, pixels: &Array2<u8>) -> Result<()> {
    let (h, w) = pixels.dim();
    let mut out = BufWriter::new(
        File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?,
    );
    let ctx = || path.display().to_string();
    write!(out, "P5\n{w} {h}\n255\n").map_err(|e| Error::io(ctx(), e))?;
    for row in pixels.rows() {
        for &v in row {
            out.write_all(&[v]).map_err(|e| Error::io(ctx(), e))?;
        }
    }
    out.flush().map_err(|e| Error::io(ctx(), e))
}

/// Write an RGB image (H x W x 3) as binary PPM.
pub fn write_ppm(path: &Path, pixels: &Array3<u8>) -> Result<()> {
    let (h, w, c) = pixels.dim();
    if c != 3 {
        return Err(Error::Shape(format!("ppm needs 3 channels, got {c}")));
    }
    let mut out = BufWriter::new(
        File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?,
    );
    let ctx = || path.display().to_string();
    write!(out, "P6\n{w} {h}\n255\n").map_err(|e| Error::io(ctx(), e))?;
    for r in 0..h {
        for col in 0..w {
            let px = [pixels[[r, col, 0]], pixels[[r, col, 1]], pixels[[r, col, 2]]];
            out.write_all(&px).map_err(|e| Error::io(ctx(), e))?;
        }
    }
    out.flush().map_err(|e| Error::io(ctx(), e))
}

/// Read a binary PGM written by [`write_pgm`].
pub fn read_pgm(path: &Path) -> Result<Array2<u8>> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    parse_pgm(&bytes).map_err(|msg| Error::Format(format!("{}: {msg}", path.display())))
}

fn parse_pgm(bytes: &[u8]) -> std::result::Result<Array2<u8>, String> {
    let mut pos = 0;
    let magic = next_token(bytes, &mut pos).ok_or("missing magic")?;
    if magic != b"P5" {
        return Err("magic is not P5".into());
    }
    let w: usize = parse_token(bytes, &mut pos, "width")?;
    let h: usize = parse_token(bytes, &mut pos, "height")?;
    let maxval: usize = parse_token(bytes, &mut pos, "maxval")?;
    if maxval != 255 {
        return Err(format!("unsupported maxval {maxval}"));
    }
    // Exactly one whitespace byte separates the header from pixel data.
    pos += 1;
    let data = bytes.get(pos..pos + w * h).ok_or("truncated pixel data")?;
    Array2::from_shape_vec((h, w), data.to_vec()).map_err(|e| e.to_string())
}

fn next_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Option<&'a [u8]> {
    while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    (*pos > start).then(|| &bytes[start..*pos])
}

fn parse_token(bytes: &[u8], pos: &mut usize, what: &str) -> std::result::Result<usize, String> {
    let tok = next_token(bytes, pos).ok_or_else(|| format!("missing {what}"))?;
    std::str::from_utf8(tok)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| format!("bad {what}"))
}
