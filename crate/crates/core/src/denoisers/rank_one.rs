//! Approximate MMSE denoiser for a rank-one matrix `X = c·bᵀ` seen in
//! white Gaussian noise of precision `γ`.
//!
//! The input is `vec(X)` with `X` stored column-major as `P × L`, so column
//! `l` is `b_l·c`. Starting from the leading singular pair of the noisy
//! matrix, the scheme alternates conditional posterior means: each `b_l`
//! given `ĉ` under a `N(0, σ_b²)` prior, then each `c_p` given `b̂` under a
//! Bernoulli–Gaussian prior. Known entries of `b` are clamped on every pass.

use nalgebra::DMatrix;

use super::scalar::bg_mmse_scalar;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RankOneDenoiser {
    pub l: usize,
    pub p: usize,
    pub sigma_b2: f64,
    pub rho: f64,
    pub sigma_c2: f64,
    pub inner_iters: usize,
    /// Known entries of `b`; `None` means free.
    pub clamp: Vec<Option<f64>>,
}

impl RankOneDenoiser {
    pub fn new(l: usize, p: usize, rho: f64, sigma_c2: f64, inner_iters: usize) -> Result<Self> {
        if l == 0 || p == 0 {
            return Err(Error::InvalidDimension("rank-one dims must be positive".into()));
        }
        if !(rho > 0.0 && rho < 1.0) || !(sigma_c2 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Bernoulli-Gaussian prior needs ρ ∈ (0,1), σ² > 0; got ρ={rho}, σ²={sigma_c2}"
            )));
        }
        if inner_iters == 0 {
            return Err(Error::InvalidParameter("inner_iters must be ≥ 1".into()));
        }
        Ok(RankOneDenoiser {
            l,
            p,
            sigma_b2: 1.0,
            rho,
            sigma_c2,
            inner_iters,
            clamp: vec![None; l],
        })
    }

    pub fn with_known_b(mut self, index: usize, value: f64) -> Result<Self> {
        if index >= self.l {
            return Err(Error::InvalidDimension(format!("b index {index} ≥ L = {}", self.l)));
        }
        self.clamp[index] = Some(value);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.l * self.p
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Leading singular pair split evenly, `(b, c) = (√σ v, √σ u)`.
    pub fn spectral_init(&self, r: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let m = DMatrix::from_column_slice(self.p, self.l, r);
        let svd = m.svd(true, true);
        let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
        let (idx, sigma) = svd
            .singular_values
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, s)| if s > best.1 { (i, s) } else { best });
        let root = sigma.max(0.0).sqrt();
        let c = u.column(idx).iter().map(|v| root * v).collect();
        let b = vt.row(idx).iter().map(|v| root * v).collect();
        (b, c)
    }

    pub fn denoise(&self, r: &[f64], gamma: f64) -> Vec<f64> {
        let (b, c) = self.spectral_init(r);
        self.denoise_from(r, gamma, b, c)
    }

    /// Runs the alternating updates from a given initial pair. The pair is
    /// first rebalanced to `‖b‖ = ‖c‖`, so only the product `c·bᵀ` of the
    /// initialization matters.
    pub fn denoise_from(&self, r: &[f64], gamma: f64, mut b: Vec<f64>, mut c: Vec<f64>) -> Vec<f64> {
        let (nb, nc) = (crate::linalg::norm(&b), crate::linalg::norm(&c));
        if nb > 0.0 && nc > 0.0 {
            let a = (nc / nb).sqrt();
            b.iter_mut().for_each(|v| *v *= a);
            c.iter_mut().for_each(|v| *v /= a);
        }
        let (l, p) = (self.l, self.p);
        for _ in 0..self.inner_iters {
            let c_energy = crate::linalg::norm_sq(&c);
            for li in 0..l {
                b[li] = match self.clamp[li] {
                    Some(known) => known,
                    None => {
                        let col = &r[li * p..(li + 1) * p];
                        gamma * crate::linalg::dot(&c, col) / (1.0 / self.sigma_b2 + gamma * c_energy)
                    }
                };
            }
            let b_energy = crate::linalg::norm_sq(&b);
            // below this the projection bᵀR/‖b‖² loses all precision
            if b_energy < f64::MIN_POSITIVE.sqrt() {
                c.iter_mut().for_each(|v| *v = 0.0);
                continue;
            }
            let precision = gamma * b_energy;
            for (pi, cp) in c.iter_mut().enumerate() {
                let proj: f64 = (0..l).map(|li| r[li * p + pi] * b[li]).sum::<f64>() / b_energy;
                *cp = bg_mmse_scalar(proj, precision, self.rho, self.sigma_c2).0;
            }
        }
        let mut out = vec![0.0; l * p];
        for li in 0..l {
            for pi in 0..p {
                out[li * p + pi] = c[pi] * b[li];
            }
        }
        out
    }
}
