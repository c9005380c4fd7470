//! Binary PGM (`P5`, 8-bit) images held as `f64` samples in `[0, 255]`.

use std::io::{Read, Write};
use std::path::Path;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    /// Row-major samples.
    pub pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        Error::check_len(width * height, pixels.len())?;
        Ok(GrayImage {
            width,
            height,
            pixels,
        })
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut pos = 0;
        let magic = next_token(bytes, &mut pos)?;
        if magic != b"P5" {
            return Err(Error::Format("PGM magic is not P5".into()));
        }
        let width = parse_number(next_token(bytes, &mut pos)?)?;
        let height = parse_number(next_token(bytes, &mut pos)?)?;
        let maxval = parse_number(next_token(bytes, &mut pos)?)?;
        if maxval == 0 || maxval > 255 {
            return Err(Error::Format(format!("unsupported maxval {maxval}")));
        }
        // exactly one whitespace byte separates the header from the raster
        pos += 1;
        let len = width * height;
        let raster = bytes
            .get(pos..pos + len)
            .ok_or_else(|| Error::Format("truncated raster".into()))?;
        let scale = 255.0 / maxval as f64;
        let pixels = raster.iter().map(|&b| b as f64 * scale).collect();
        GrayImage::new(width, height, pixels)
    }

    /// Encodes with maxval 255, clamping to `[0, 255]` and rounding.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend(self.pixels.iter().map(|&v| v.clamp(0.0, 255.0).round() as u8));
        out
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        Self::decode(&bytes)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::File::create(path)?.write_all(&self.encode())?;
        Ok(())
    }
}

fn next_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<&'a [u8]> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::Format("truncated PGM header".into()));
    }
    Ok(&bytes[start..*pos])
}

fn parse_number(token: &[u8]) -> Result<usize> {
    std::str::from_utf8(token)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Format(format!("bad header field {:?}", String::from_utf8_lossy(token))))
}
