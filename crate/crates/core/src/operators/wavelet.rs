//! Orthonormal 2-D Haar wavelet on square power-of-two images.
//!
//! Images are row-major `side × side` arrays. Each level transforms the rows
//! and then the columns of the current top-left approximation block, placing
//! averages in the first half and differences in the second half.

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HaarWavelet2d {
    side: usize,
    levels: usize,
}

impl HaarWavelet2d {
    pub fn new(side: usize, levels: usize) -> Result<Self> {
        if side == 0 || !side.is_power_of_two() {
            return Err(Error::InvalidDimension(format!(
                "wavelet side {side} is not a power of two"
            )));
        }
        let max_levels = side.trailing_zeros() as usize;
        if levels > max_levels {
            return Err(Error::InvalidDimension(format!(
                "{levels} levels exceed log2({side}) = {max_levels}"
            )));
        }
        Ok(HaarWavelet2d { side, levels })
    }

    /// Full-depth transform.
    pub fn full(side: usize) -> Result<Self> {
        Self::new(side, side.max(1).trailing_zeros() as usize)
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn len(&self) -> usize {
        self.side * self.side
    }

    pub fn is_empty(&self) -> bool {
        self.side == 0
    }

    /// Analysis: image → coefficients.
    pub fn forward(&self, image: &[f64]) -> Vec<f64> {
        assert_eq!(image.len(), self.len(), "wavelet input length");
        let mut c = image.to_vec();
        let mut buf = vec![0.0; self.side];
        let mut size = self.side;
        for _ in 0..self.levels {
            for row in 0..size {
                let line = &mut c[row * self.side..row * self.side + size];
                split(line, &mut buf[..size]);
            }
            for col in 0..size {
                let mut line: Vec<f64> = (0..size).map(|r| c[r * self.side + col]).collect();
                split(&mut line, &mut buf[..size]);
                for (r, v) in line.into_iter().enumerate() {
                    c[r * self.side + col] = v;
                }
            }
            size /= 2;
        }
        c
    }

    /// Synthesis: coefficients → image.
    pub fn inverse(&self, coeffs: &[f64]) -> Vec<f64> {
        assert_eq!(coeffs.len(), self.len(), "wavelet input length");
        let mut x = coeffs.to_vec();
        let mut buf = vec![0.0; self.side];
        let mut size = self.side >> self.levels.saturating_sub(1);
        for _ in 0..self.levels {
            for col in 0..size {
                let mut line: Vec<f64> = (0..size).map(|r| x[r * self.side + col]).collect();
                merge(&mut line, &mut buf[..size]);
                for (r, v) in line.into_iter().enumerate() {
                    x[r * self.side + col] = v;
                }
            }
            for row in 0..size {
                let line = &mut x[row * self.side..row * self.side + size];
                merge(line, &mut buf[..size]);
            }
            size *= 2;
        }
        x
    }
}

fn split(line: &mut [f64], buf: &mut [f64]) {
    let half = line.len() / 2;
    for i in 0..half {
        let (a, b) = (line[2 * i], line[2 * i + 1]);
        buf[i] = (a + b) * std::f64::consts::FRAC_1_SQRT_2;
        buf[half + i] = (a - b) * std::f64::consts::FRAC_1_SQRT_2;
    }
    line.copy_from_slice(&buf[..line.len()]);
}

fn merge(line: &mut [f64], buf: &mut [f64]) {
    let half = line.len() / 2;
    for i in 0..half {
        let (s, d) = (line[i], line[half + i]);
        buf[2 * i] = (s + d) * std::f64::consts::FRAC_1_SQRT_2;
        buf[2 * i + 1] = (s - d) * std::f64::consts::FRAC_1_SQRT_2;
    }
    line.copy_from_slice(&buf[..line.len()]);
}

/// One-shot 2-D Haar transform of a row-major `side × side` image.
pub fn haar_wavelet_2d(
    image: &[f64],
    side: usize,
    levels: usize,
    direction: Direction,
) -> Result<Vec<f64>> {
    let w = HaarWavelet2d::new(side, levels)?;
    Error::check_len(w.len(), image.len())?;
    Ok(match direction {
        Direction::Forward => w.forward(image),
        Direction::Inverse => w.inverse(image),
    })
}
