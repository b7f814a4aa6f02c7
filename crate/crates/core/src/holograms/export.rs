use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

use super::PhaseMask;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaskFormat {
    /// Binary P5, maxval 255.
    Pgm,
    Png,
}

impl FromStr for MaskFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pgm" | "pgm8" => Ok(MaskFormat::Pgm),
            "png" | "png8" => Ok(MaskFormat::Png),
            other => Err(Error::invalid(format!("unknown mask format '{other}' (pgm or png)"))),
        }
    }
}

pub fn write_pgm<W: Write>(mut out: W, width: usize, height: usize, pixels: &[u8]) -> std::io::Result<()> {
    write!(out, "P5\n{width} {height}\n255\n")?;
    out.write_all(pixels)?;
    out.flush()
}

fn next_token(data: &[u8], pos: &mut usize) -> Result<usize> {
    loop {
        match data.get(*pos) {
            Some(b'#') => {
                while data.get(*pos).is_some_and(|&b| b != b'\n') {
                    *pos += 1;
                }
            }
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(_) => break,
            None => return Err(Error::invalid("truncated PGM header")),
        }
    }
    let start = *pos;
    while data.get(*pos).is_some_and(|b| b.is_ascii_digit()) {
        *pos += 1;
    }
    std::str::from_utf8(&data[start..*pos])
        .ok()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::invalid("malformed PGM header"))
}

/// Reads an 8-bit binary PGM into `(width, height, pixels)`.
pub fn read_pgm<R: Read>(mut input: R) -> Result<(usize, usize, Vec<u8>)> {
    let mut data = Vec::new();
    input
        .read_to_end(&mut data)
        .map_err(|e| Error::invalid(format!("cannot read PGM data: {e}")))?;
    if !data.starts_with(b"P5") {
        return Err(Error::invalid("not a binary PGM (missing P5 magic)"));
    }
    let mut pos = 2;
    let width = next_token(&data, &mut pos)?;
    let height = next_token(&data, &mut pos)?;
    let maxval = next_token(&data, &mut pos)?;
    if maxval != 255 {
        return Err(Error::invalid(format!("only maxval 255 is supported, found {maxval}")));
    }
    if !data.get(pos).is_some_and(|b| b.is_ascii_whitespace()) {
        return Err(Error::invalid("malformed PGM header"));
    }
    pos += 1;
    let pixels = data[pos..].to_vec();
    if pixels.len() != width * height {
        return Err(Error::invalid(format!(
            "PGM holds {} pixels, header says {width}x{height}",
            pixels.len()
        )));
    }
    Ok((width, height, pixels))
}

pub fn write_png(path: &Path, width: usize, height: usize, pixels: &[u8]) -> Result<()> {
    let image = image::GrayImage::from_raw(width as u32, height as u32, pixels.to_vec())
        .ok_or_else(|| Error::invalid("pixel buffer does not match the image size"))?;
    image.save_with_format(path, image::ImageFormat::Png)?;
    Ok(())
}

/// Writes the quantized mask; PGM is the bit-exact reference format.
pub fn export_mask(mask: &PhaseMask, path: &Path, format: MaskFormat) -> Result<()> {
    let pixels = mask.quantize();
    match format {
        MaskFormat::Pgm => {
            let file = File::create(path).map_err(|e| Error::io(path, e))?;
            write_pgm(BufWriter::new(file), mask.width(), mask.height(), &pixels).map_err(|e| Error::io(path, e))
        }
        MaskFormat::Png => write_png(path, mask.width(), mask.height(), &pixels).map_err(|e| match e {
            Error::Image(image::ImageError::IoError(io)) => Error::io(path, io),
            other => other,
        }),
    }
}
