//! Plug-in denoisers `g(r, γ)` behind one contract: evaluate the map and
//! report its normalized divergence `⟨∇g⟩ = (1/N) Σ ∂g_n/∂r_n`.
//!
//! Kinds with a closed-form Jacobian trace (soft threshold, Bernoulli–Gaussian
//! MMSE, group soft threshold, FIR) offer an analytic divergence; every kind
//! supports the Monte Carlo estimate
//! `(1/(N·K)) Σ_k η_kᵀ [g(r + ε η_k, γ) − g(r, γ)] / ε`.
//! with Gaussian probes rescaled to `‖η_k‖² = N`.

mod cnn;
mod fir;
mod group;
mod rank_one;
mod scalar;
mod svt;

pub use cnn::{CnnStack, ConvLayer, Layer};
pub use fir::Fir;
pub use group::{group_soft_threshold, group_soft_threshold_divergence};
pub use rank_one::RankOneDenoiser;
pub use scalar::{bg_mmse_scalar, soft_threshold};
pub use svt::svt;

use crate::linalg::{dot, norm};
use crate::rng;
use crate::{Error, Result};

/// Threshold of the soft-thresholding kinds: a constant, or `λ/√γ` so it
/// tracks the noise standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    Fixed(f64),
    NoiseScaled(f64),
}

impl Threshold {
    pub fn value(&self, gamma: f64) -> f64 {
        match *self {
            Threshold::Fixed(t) => t,
            Threshold::NoiseScaled(lambda) => lambda / gamma.sqrt(),
        }
    }

    fn validate(&self) -> Result<()> {
        let t = match *self {
            Threshold::Fixed(t) | Threshold::NoiseScaled(t) => t,
        };
        if t >= 0.0 && t.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("threshold {t} must be finite and ≥ 0")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DenoiserKind {
    SoftThreshold(Threshold),
    BgMmse { rho: f64, sigma_x2: f64 },
    GroupSoftThreshold { group_size: usize, threshold: Threshold },
    Fir(Fir),
    Cnn(CnnStack),
    /// `γ` is used directly as the singular-value threshold.
    Svt { rows: usize, cols: usize },
    LiftedRankOne(RankOneDenoiser),
}

impl DenoiserKind {
    pub fn name(&self) -> &'static str {
        match self {
            DenoiserKind::SoftThreshold(_) => "soft-threshold",
            DenoiserKind::BgMmse { .. } => "bernoulli-gaussian-mmse",
            DenoiserKind::GroupSoftThreshold { .. } => "group-soft-threshold",
            DenoiserKind::Fir(_) => "fir-convolution",
            DenoiserKind::Cnn(_) => "cnn-stack",
            DenoiserKind::Svt { .. } => "svt",
            DenoiserKind::LiftedRankOne(_) => "lifted-rank-one",
        }
    }

    fn has_analytic_divergence(&self) -> bool {
        matches!(
            self,
            DenoiserKind::SoftThreshold(_)
                | DenoiserKind::BgMmse { .. }
                | DenoiserKind::GroupSoftThreshold { .. }
                | DenoiserKind::Fir(_)
        )
    }

    fn uses_gamma(&self) -> bool {
        match self {
            DenoiserKind::SoftThreshold(t) | DenoiserKind::GroupSoftThreshold { threshold: t, .. } => {
                matches!(t, Threshold::NoiseScaled(_))
            }
            DenoiserKind::BgMmse { .. } | DenoiserKind::LiftedRankOne(_) => true,
            DenoiserKind::Fir(_) | DenoiserKind::Cnn(_) | DenoiserKind::Svt { .. } => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DivergenceMode {
    Analytic,
    /// `epsilon = None` selects `1e-4·max(1, ‖r‖/√N)`.
    MonteCarlo { probes: usize, epsilon: Option<f64> },
}

impl DivergenceMode {
    pub const DEFAULT_PROBES: usize = 8;

    pub fn monte_carlo() -> Self {
        DivergenceMode::MonteCarlo {
            probes: Self::DEFAULT_PROBES,
            epsilon: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceEstimate {
    pub value: f64,
    pub mode: DivergenceMode,
    pub probes_used: usize,
    /// Standard error of the probe average; zero for analytic values.
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenoiserSpec {
    kind: DenoiserKind,
    mode: DivergenceMode,
}

impl DenoiserSpec {
    /// Validates parameters. Analytic divergence is rejected for kinds
    /// without a closed form.
    pub fn new(kind: DenoiserKind, mode: DivergenceMode) -> Result<Self> {
        match &kind {
            DenoiserKind::SoftThreshold(t) => t.validate()?,
            DenoiserKind::BgMmse { rho, sigma_x2 } => {
                if !(*rho > 0.0 && *rho < 1.0) || !(*sigma_x2 > 0.0 && sigma_x2.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "Bernoulli-Gaussian prior needs ρ ∈ (0,1), σ² > 0; got ρ={rho}, σ²={sigma_x2}"
                    )));
                }
            }
            DenoiserKind::GroupSoftThreshold { group_size, threshold } => {
                if *group_size == 0 {
                    return Err(Error::InvalidParameter("group size must be ≥ 1".into()));
                }
                threshold.validate()?;
            }
            DenoiserKind::Fir(f) => {
                if f.taps.is_empty() {
                    return Err(Error::InvalidParameter("empty tap vector".into()));
                }
                if f.origin >= f.taps.len() || f.taps.iter().any(|h| !h.is_finite()) {
                    return Err(Error::InvalidParameter("bad FIR taps or origin".into()));
                }
            }
            DenoiserKind::Cnn(_) => {}
            DenoiserKind::Svt { rows, cols } => {
                if *rows == 0 || *cols == 0 {
                    return Err(Error::InvalidDimension("SVT shape must be positive".into()));
                }
            }
            DenoiserKind::LiftedRankOne(_) => {}
        }
        match mode {
            DivergenceMode::Analytic if !kind.has_analytic_divergence() => {
                return Err(Error::InvalidParameter(format!(
                    "{} has no analytic divergence",
                    kind.name()
                )));
            }
            DivergenceMode::MonteCarlo { probes: 0, .. } => {
                return Err(Error::InvalidParameter("Monte Carlo divergence needs ≥ 1 probe".into()));
            }
            DivergenceMode::MonteCarlo { epsilon: Some(e), .. } if !(e > 0.0) => {
                return Err(Error::InvalidParameter("Monte Carlo step must be positive".into()));
            }
            _ => {}
        }
        Ok(DenoiserSpec { kind, mode })
    }

    /// Analytic divergence where available, Monte Carlo otherwise.
    pub fn with_default_mode(kind: DenoiserKind) -> Result<Self> {
        let mode = if kind.has_analytic_divergence() {
            DivergenceMode::Analytic
        } else {
            DivergenceMode::monte_carlo()
        };
        Self::new(kind, mode)
    }

    pub fn soft_threshold(theta: f64) -> Result<Self> {
        Self::with_default_mode(DenoiserKind::SoftThreshold(Threshold::Fixed(theta)))
    }

    pub fn bg_mmse(rho: f64, sigma_x2: f64) -> Result<Self> {
        Self::with_default_mode(DenoiserKind::BgMmse { rho, sigma_x2 })
    }

    pub fn group_soft_threshold(group_size: usize, theta: f64) -> Result<Self> {
        Self::with_default_mode(DenoiserKind::GroupSoftThreshold {
            group_size,
            threshold: Threshold::Fixed(theta),
        })
    }

    pub fn fir(fir: Fir) -> Result<Self> {
        Self::with_default_mode(DenoiserKind::Fir(fir))
    }

    pub fn svt(rows: usize, cols: usize) -> Result<Self> {
        Self::with_default_mode(DenoiserKind::Svt { rows, cols })
    }

    pub fn kind(&self) -> &DenoiserKind {
        &self.kind
    }

    pub fn mode(&self) -> DivergenceMode {
        self.mode
    }

    pub fn with_mode(&self, mode: DivergenceMode) -> Result<Self> {
        Self::new(self.kind.clone(), mode)
    }

    fn check_input(&self, r: &[f64], gamma: f64) -> Result<()> {
        let n = r.len();
        if n == 0 {
            return Err(Error::InvalidDimension("empty denoiser input".into()));
        }
        match &self.kind {
            DenoiserKind::GroupSoftThreshold { group_size, .. } if n % group_size != 0 => {
                return Err(Error::InvalidDimension(format!(
                    "group size {group_size} does not divide N = {n}"
                )));
            }
            DenoiserKind::Fir(f) if n <= f.taps.len() => {
                return Err(Error::InvalidDimension(format!(
                    "N = {n} must exceed the filter length {}",
                    f.taps.len()
                )));
            }
            DenoiserKind::Cnn(c) if n % c.input_channels != 0 => {
                return Err(Error::InvalidDimension(format!(
                    "N = {n} is not a multiple of {} channels",
                    c.input_channels
                )));
            }
            DenoiserKind::Svt { rows, cols } => Error::check_len(rows * cols, n)?,
            DenoiserKind::LiftedRankOne(d) => Error::check_len(d.len(), n)?,
            _ => {}
        }
        if !crate::linalg::all_finite(r) {
            return Err(Error::NonFinite("denoiser input".into()));
        }
        let gamma_ok = match self.kind {
            DenoiserKind::Svt { .. } => gamma >= 0.0 && gamma.is_finite(),
            _ if self.kind.uses_gamma() => gamma > 0.0 && !gamma.is_nan(),
            _ => true,
        };
        if !gamma_ok {
            return Err(Error::InvalidParameter(format!("precision γ = {gamma} out of range")));
        }
        Ok(())
    }

    fn eval(&self, r: &[f64], gamma: f64) -> Vec<f64> {
        match &self.kind {
            DenoiserKind::SoftThreshold(t) => {
                let theta = t.value(gamma);
                r.iter().map(|&v| soft_threshold(v, theta)).collect()
            }
            DenoiserKind::BgMmse { rho, sigma_x2 } => r
                .iter()
                .map(|&v| bg_mmse_scalar(v, gamma, *rho, *sigma_x2).0)
                .collect(),
            DenoiserKind::GroupSoftThreshold { group_size, threshold } => {
                group_soft_threshold(r, *group_size, threshold.value(gamma))
            }
            DenoiserKind::Fir(f) => f.apply(r),
            DenoiserKind::Cnn(c) => c.apply(r),
            DenoiserKind::Svt { rows, cols } => svt(r, *rows, *cols, gamma),
            DenoiserKind::LiftedRankOne(d) => d.denoise(r, gamma),
        }
    }

    fn analytic_divergence(&self, r: &[f64], gamma: f64) -> Option<f64> {
        let n = r.len() as f64;
        Some(match &self.kind {
            DenoiserKind::SoftThreshold(t) => {
                let theta = t.value(gamma);
                r.iter().filter(|v| v.abs() > theta).count() as f64 / n
            }
            DenoiserKind::BgMmse { rho, sigma_x2 } => {
                r.iter().map(|&v| bg_mmse_scalar(v, gamma, *rho, *sigma_x2).1).sum::<f64>() / n
            }
            DenoiserKind::GroupSoftThreshold { group_size, threshold } => {
                group_soft_threshold_divergence(r, *group_size, threshold.value(gamma))
            }
            DenoiserKind::Fir(f) => f.divergence(),
            _ => return None,
        })
    }

    /// `x̂ = g(r, γ)`.
    pub fn denoise(&self, r: &[f64], gamma: f64) -> Result<Vec<f64>> {
        self.check_input(r, gamma)?;
        Ok(self.eval(r, gamma))
    }

    /// `⟨∇g(r, γ)⟩` in the spec's divergence mode. Monte Carlo probes are
    /// drawn from `seed`.
    pub fn divergence(&self, r: &[f64], gamma: f64, seed: u64) -> Result<DivergenceEstimate> {
        Ok(self.denoise_with_divergence(r, gamma, seed)?.1)
    }

    /// Evaluates the map and its divergence, sharing `g(r, γ)` with the
    /// Monte Carlo estimate.
    pub fn denoise_with_divergence(
        &self,
        r: &[f64],
        gamma: f64,
        seed: u64,
    ) -> Result<(Vec<f64>, DivergenceEstimate)> {
        self.check_input(r, gamma)?;
        let out = self.eval(r, gamma);
        let est = match self.mode {
            DivergenceMode::Analytic => DivergenceEstimate {
                value: self
                    .analytic_divergence(r, gamma)
                    .expect("analytic mode validated at construction"),
                mode: self.mode,
                probes_used: 0,
                std_error: 0.0,
            },
            DivergenceMode::MonteCarlo { probes, epsilon } => {
                monte_carlo_divergence(|x| self.eval(x, gamma), r, &out, probes, epsilon, seed)
            }
        };
        Ok((out, est))
    }

    /// Lipschitz constant in `r` used by the property checks: 1 for the
    /// proximal maps, the filter gain for FIR, the product of layer gains
    /// for CNNs, and the supremum of the scalar derivative for the
    /// Bernoulli–Gaussian MMSE map (sampled on a dense grid).
    pub fn lipschitz_constant(&self, gamma: f64) -> f64 {
        match &self.kind {
            DenoiserKind::SoftThreshold(_) | DenoiserKind::GroupSoftThreshold { .. } | DenoiserKind::Svt { .. } => {
                1.0
            }
            DenoiserKind::Fir(f) => f.lipschitz_bound(512),
            DenoiserKind::Cnn(c) => c.lipschitz_bound(512),
            DenoiserKind::BgMmse { rho, sigma_x2 } => {
                let spread = 12.0 * (sigma_x2 + 1.0 / gamma).sqrt();
                (0..=20_000)
                    .map(|i| {
                        let r = spread * i as f64 / 20_000.0;
                        bg_mmse_scalar(r, gamma, *rho, *sigma_x2).1
                    })
                    .fold(0.0, f64::max)
            }
            DenoiserKind::LiftedRankOne(_) => f64::INFINITY,
        }
    }
}

/// Monte Carlo divergence of `g` at `r`, given `g_r = g(r)`.
pub fn monte_carlo_divergence<G>(
    g: G,
    r: &[f64],
    g_r: &[f64],
    probes: usize,
    epsilon: Option<f64>,
    seed: u64,
) -> DivergenceEstimate
where
    G: Fn(&[f64]) -> Vec<f64>,
{
    let n = r.len();
    let eps = epsilon.unwrap_or_else(|| 1e-4 * (norm(r) / (n as f64).sqrt()).max(1.0));
    let samples: Vec<f64> = (0..probes)
        .map(|k| {
            let mut eta = rng::gaussian_vec(&mut rng::stream(seed, k as u64), n);
            // rescale to ‖η‖² = N: still isotropic, and exact when g is a multiple of I
            let scale = (n as f64).sqrt() / norm(&eta).max(f64::MIN_POSITIVE);
            eta.iter_mut().for_each(|e| *e *= scale);
            let shifted: Vec<f64> = r.iter().zip(&eta).map(|(a, e)| a + eps * e).collect();
            let g_shift = g(&shifted);
            let diff: Vec<f64> = g_shift.iter().zip(g_r).map(|(a, b)| a - b).collect();
            dot(&eta, &diff) / (eps * n as f64)
        })
        .collect();
    let (value, std_error) = crate::stats::mean_stderr(&samples);
    DivergenceEstimate {
        value,
        mode: DivergenceMode::MonteCarlo {
            probes,
            epsilon: Some(eps),
        },
        probes_used: probes,
        std_error,
    }
}

/// Two estimates of the same divergence: `lhs = ⟨∇g(u + z₁)⟩` and the Stein
/// form `rhs = g(u + z₁)ᵀ z₂ / (N·S₁₂)` with `(z₁, z₂) ~ N(0, S)` i.i.d.
/// per component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteinCheck {
    pub lhs: f64,
    pub rhs: f64,
}

pub fn stein_identity_check(
    spec: &DenoiserSpec,
    x0: &[f64],
    cov: [[f64; 2]; 2],
    gamma: f64,
    seed: u64,
) -> Result<SteinCheck> {
    let [[s11, s12], [s21, s22]] = cov;
    let det = s11 * s22 - s12 * s21;
    if (s12 - s21).abs() > 1e-12 * s12.abs().max(1.0) || !(s11 > 0.0) || !(det > 0.0) {
        return Err(Error::InvalidParameter("covariance is not symmetric positive definite".into()));
    }
    if s12.abs() < 1e-12 {
        return Err(Error::InvalidParameter("S₁₂ ≈ 0 leaves the Stein form undefined".into()));
    }
    let n = x0.len();
    let mut g = rng::stream(seed, 0x5354_4e);
    let e1 = rng::gaussian_vec(&mut g, n);
    let e2 = rng::gaussian_vec(&mut g, n);
    let a = s11.sqrt();
    let b = s12 / a;
    let c = (s22 - b * b).sqrt();
    let r: Vec<f64> = x0.iter().zip(&e1).map(|(u, e)| u + a * e).collect();
    let z2: Vec<f64> = e1.iter().zip(&e2).map(|(x, y)| b * x + c * y).collect();
    let (out, div) = spec.denoise_with_divergence(&r, gamma, rng::derive(seed, 1))?;
    Ok(SteinCheck {
        lhs: div.value,
        rhs: dot(&out, &z2) / (n as f64 * s12),
    })
}
