//! AMP baseline:
//!
//! ```text
//! x̂ₖ = g(rₖ, γₖ)
//! vₖ = y − A x̂ₖ + (N/M) αₖ₋₁ vₖ₋₁
//! rₖ₊₁ = x̂ₖ + Aᵀ vₖ,   γₖ₊₁ = M/‖vₖ‖²
//! ```
//!
//! started from `r₀ = Aᵀy`, `γ₀ = M/‖y‖²`, `v₋₁ = 0`.

use serde::Serialize;

use crate::denoisers::DenoiserSpec;
use crate::linalg::{all_finite, mse, norm_sq};
use crate::rng;
use crate::vamp::ProblemInstance;
use crate::Result;

/// MSE growth factor over the first iterate that counts as blowing up.
pub const DIVERGENCE_FACTOR: f64 = 1e3;
/// Consecutive blown-up iterations before the run is declared diverged.
pub const DIVERGENCE_PATIENCE: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct AmpConfig {
    pub iterations: usize,
    /// With `false` the memory term is dropped, leaving plain iterative
    /// thresholding.
    pub onsager: bool,
    pub seed: u64,
    pub gamma_min: f64,
    pub gamma_max: f64,
}

impl Default for AmpConfig {
    fn default() -> Self {
        AmpConfig {
            iterations: 50,
            onsager: true,
            seed: 0,
            gamma_min: 1e-11,
            gamma_max: 1e11,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmpState {
    pub k: usize,
    pub r: Vec<f64>,
    pub gamma: f64,
    pub xhat: Vec<f64>,
    pub alpha: f64,
    pub v: Vec<f64>,
    /// `(N/M) αₖ₋₁ vₖ₋₁`.
    pub onsager: Vec<f64>,
    pub mse: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AmpRow {
    pub k: usize,
    pub gamma1: f64,
    pub alpha1: f64,
    pub mse1: f64,
    pub diverged: bool,
}

#[derive(Debug, Clone)]
pub struct AmpTrajectory {
    pub states: Vec<AmpState>,
    /// Set when the MSE stayed above `1e3 ×` the first iterate's MSE for
    /// three iterations in a row, or the state became non-finite. The run
    /// stops at that point.
    pub diverged: bool,
}

impl AmpTrajectory {
    pub fn xhat(&self) -> Option<&[f64]> {
        self.states.last().map(|s| s.xhat.as_slice())
    }

    pub fn final_mse(&self) -> f64 {
        if self.diverged {
            f64::INFINITY
        } else {
            self.states.last().map_or(f64::NAN, |s| s.mse)
        }
    }

    pub fn rows(&self) -> Vec<AmpRow> {
        self.states
            .iter()
            .map(|s| AmpRow {
                k: s.k,
                gamma1: s.gamma,
                alpha1: s.alpha,
                mse1: s.mse,
                diverged: self.diverged,
            })
            .collect()
    }
}

pub fn amp_run(instance: &ProblemInstance, denoiser: &DenoiserSpec, config: &AmpConfig) -> Result<AmpTrajectory> {
    let op = &instance.operator;
    let (m, n) = (op.rows(), op.cols());
    let ratio = n as f64 / m as f64;
    let precision = |v: &[f64]| (m as f64 / norm_sq(v)).clamp(config.gamma_min, config.gamma_max);

    let mut r = op.adjoint(&instance.y);
    let mut gamma = precision(&instance.y);
    let mut v_prev = vec![0.0; m];
    let mut alpha_prev = 0.0;
    let mut states = Vec::with_capacity(config.iterations);
    let mut first_mse = None;
    let mut strikes = 0;
    let mut diverged = false;

    for k in 0..config.iterations {
        let (xhat, div) = denoiser.denoise_with_divergence(&r, gamma, rng::derive(config.seed, k as u64))?;
        let mse_k = mse(&xhat, &instance.x0);
        let onsager: Vec<f64> = if config.onsager {
            v_prev.iter().map(|v| ratio * alpha_prev * v).collect()
        } else {
            vec![0.0; m]
        };
        let ax = op.forward(&xhat);
        let v: Vec<f64> = instance
            .y
            .iter()
            .zip(&ax)
            .zip(&onsager)
            .map(|((y, a), o)| y - a + o)
            .collect();
        let back = op.adjoint(&v);
        let r_next: Vec<f64> = xhat.iter().zip(&back).map(|(x, b)| x + b).collect();
        let gamma_next = precision(&v);

        let baseline = *first_mse.get_or_insert(mse_k);
        if !mse_k.is_finite() || !all_finite(&r_next) {
            diverged = true;
        } else if mse_k > DIVERGENCE_FACTOR * baseline {
            strikes += 1;
            diverged = strikes >= DIVERGENCE_PATIENCE;
        } else {
            strikes = 0;
        }

        states.push(AmpState {
            k,
            r: std::mem::replace(&mut r, r_next),
            gamma,
            xhat,
            alpha: div.value,
            v: v.clone(),
            onsager,
            mse: mse_k,
        });
        if diverged {
            break;
        }
        gamma = gamma_next;
        alpha_prev = div.value;
        v_prev = v;
    }
    Ok(AmpTrajectory { states, diverged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::denoisers::soft_threshold;
    use crate::linalg::matvec_transpose;
    use crate::operators::{build_operator, geometric_spectrum, haar_orthogonal, OperatorKind, SpectralOperator};
    use crate::vamp::{make_instance, Noise, X0Source};
    use std::sync::Arc;

    #[test]
    fn identity_denoiser_inverts_orthogonal_operator() {
        let n = 64;
        let op = SpectralOperator::new(n, vec![1.0; n], haar_orthogonal(n, 1).unwrap(), haar_orthogonal(n, 2).unwrap(), OperatorKind::Custom).unwrap();
        let inst = make_instance(&X0Source::BernoulliGaussian { rho: 0.3, sigma2: 1.0 }, Arc::new(op), Noise::Noiseless, None, 3).unwrap();
        let den = DenoiserSpec::soft_threshold(0.0).unwrap();
        let t = amp_run(&inst, &den, &AmpConfig { iterations: 1, ..AmpConfig::default() }).unwrap();
        assert!(t.states[0].mse < 1e-25);
    }

    #[test]
    fn without_onsager_is_iterative_thresholding() {
        let spec = geometric_spectrum(32, 64, 1.0).unwrap();
        let op = Arc::new(build_operator(&spec, 32, 1, 2).unwrap());
        let inst = make_instance(&X0Source::BernoulliGaussian { rho: 0.1, sigma2: 1.0 }, op.clone(), Noise::SnrDb(30.0), None, 4).unwrap();
        let theta = 0.2;
        let den = DenoiserSpec::soft_threshold(theta).unwrap();
        let t = amp_run(&inst, &den, &AmpConfig { iterations: 6, onsager: false, ..AmpConfig::default() }).unwrap();
        assert!(t.states.iter().all(|s| s.onsager.iter().all(|o| *o == 0.0)));

        let dense = op.to_dense();
        let mut x = vec![0.0; 64];
        let mut r = matvec_transpose(&dense, &inst.y);
        for s in &t.states {
            x = r.iter().map(|v| soft_threshold(*v, theta)).collect();
            for (a, b) in x.iter().zip(&s.xhat) {
                assert!((a - b).abs() < 1e-10);
            }
            let ax = crate::linalg::matvec(&dense, &x);
            let resid: Vec<f64> = inst.y.iter().zip(&ax).map(|(y, a)| y - a).collect();
            let back = matvec_transpose(&dense, &resid);
            r = x.iter().zip(&back).map(|(a, b)| a + b).collect();
        }
        assert_eq!(x.len(), 64);
    }

    #[test]
    fn gamma_follows_residual_norm() {
        let spec = geometric_spectrum(64, 128, 1.0).unwrap();
        let op = Arc::new(build_operator(&spec, 64, 1, 2).unwrap());
        let inst = make_instance(&X0Source::BernoulliGaussian { rho: 0.1, sigma2: 1.0 }, op, Noise::SnrDb(40.0), None, 5).unwrap();
        let den = DenoiserSpec::bg_mmse(0.1, 1.0).unwrap();
        let t = amp_run(&inst, &den, &AmpConfig { iterations: 5, ..AmpConfig::default() }).unwrap();
        assert!((t.states[0].gamma - 64.0 / norm_sq(&inst.y)).abs() < 1e-12);
        for w in t.states.windows(2) {
            assert!((w[1].gamma - 64.0 / norm_sq(&w[0].v)).abs() < 1e-9 * w[1].gamma);
        }
        assert!(!t.diverged);
    }

    #[test]
    fn deterministic() {
        let spec = geometric_spectrum(64, 128, 1.0).unwrap();
        let op = Arc::new(build_operator(&spec, 64, 1, 2).unwrap());
        let inst = make_instance(&X0Source::BernoulliGaussian { rho: 0.1, sigma2: 1.0 }, op, Noise::SnrDb(40.0), None, 5).unwrap();
        let den = DenoiserSpec::bg_mmse(0.1, 1.0).unwrap();
        let c = AmpConfig { iterations: 5, ..AmpConfig::default() };
        assert_eq!(amp_run(&inst, &den, &c).unwrap().states, amp_run(&inst, &den, &c).unwrap().states);
    }
}
