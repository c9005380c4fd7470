use crate::{Error, Result};

/// Singular values of an `m × n` operator, zero-padded to length `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    values: Vec<f64>,
    rank: usize,
}

impl Spectrum {
    /// Wraps explicit values. They must be finite, non-negative and sorted
    /// non-increasing; `rank` counts the leading slots that belong to the
    /// measurement dimension (the rest must be zero).
    pub fn from_values(values: Vec<f64>, rank: usize) -> Result<Self> {
        if rank > values.len() {
            return Err(Error::InvalidSpectrum(format!(
                "rank {rank} exceeds length {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidSpectrum("negative or non-finite value".into()));
        }
        if values.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidSpectrum("values not sorted non-increasing".into()));
        }
        if values[rank..].iter().any(|v| *v != 0.0) {
            return Err(Error::InvalidSpectrum("nonzero value past the rank".into()));
        }
        Ok(Spectrum { values, rank })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// `s₁ / s_M`; infinite when the last in-range value is zero.
    pub fn cond(&self) -> f64 {
        if self.rank == 0 {
            return f64::NAN;
        }
        self.values[0] / self.values[self.rank - 1]
    }

    /// `Σ s_i²`, which equals `‖A‖_F²`.
    pub fn normalization(&self) -> f64 {
        self.values.iter().map(|s| s * s).sum()
    }

    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }
}

/// `m` geometrically spaced singular values with `s₁/s_m = cond`,
/// zero-padded to `n` and scaled so that `Σ s_i² = n`.
pub fn geometric_spectrum(m: usize, n: usize, cond: f64) -> Result<Spectrum> {
    if m == 0 || m > n {
        return Err(Error::InvalidDimension(format!("need 1 ≤ m ≤ n, got m={m}, n={n}")));
    }
    if !(cond >= 1.0) || !cond.is_finite() {
        return Err(Error::InvalidSpectrum(format!("condition number {cond} < 1")));
    }
    let mut values = vec![0.0; n];
    for (i, v) in values.iter_mut().take(m).enumerate() {
        *v = if m == 1 || i == 0 {
            1.0
        } else if i == m - 1 {
            1.0 / cond
        } else {
            cond.powf(-(i as f64) / (m - 1) as f64)
        };
    }
    let energy: f64 = values.iter().map(|s| s * s).sum();
    let scale = (n as f64 / energy).sqrt();
    values.iter_mut().for_each(|v| *v *= scale);
    Spectrum::from_values(values, m)
}
