//! The two-block VAMP iteration (LMMSE form).
//!
//! Each iteration runs the denoiser half
//!
//! ```text
//! x̂₁ = g₁(r₁, γ₁)   α₁ = ⟨∇g₁⟩   η₁ = γ₁/α₁   γ₂ = η₁ − γ₁
//! r₂ = (η₁ x̂₁ − γ₁ r₁)/γ₂
//! ```
//!
//! followed by the LMMSE half with `g₂(r₂, γ₂) = (γ_w AᵀA + γ₂ I)⁻¹(γ_w Aᵀy + γ₂ r₂)`
//! and the symmetric updates for `η₂`, `γ₁` and `r₁`. The LMMSE solve is
//! diagonal in the `V` basis of the operator's SVD, so it costs one
//! application of `V` and one of `Vᵀ`.

use std::sync::Arc;

use serde::Serialize;

use crate::denoisers::DenoiserSpec;
use crate::linalg::{all_finite, mse, norm_sq};
use crate::operators::SpectralOperator;
use crate::rng;
use crate::{Error, Result};

/// Bound on `α` away from 0 and 1 before the iteration is flagged
/// degenerate.
pub const ALPHA_EPS: f64 = 1e-8;

/// Generator for the true signal `x⁰`.
#[derive(Debug, Clone, PartialEq)]
pub enum X0Source {
    /// i.i.d. `ρ·N(0, σ²) + (1 − ρ)·δ₀`.
    BernoulliGaussian { rho: f64, sigma2: f64 },
    /// Rows of length `group_size` that are jointly zero or jointly
    /// `N(0, σ² I)`, active with probability `rho`.
    GroupRows { group_size: usize, rho: f64, sigma2: f64 },
    /// Stationary AR(1) sequence `x_n = a x_{n−1} + e_n` with unit marginal
    /// variance.
    StationaryAr { coef: f64 },
    /// A fixed signal, e.g. pixels read from an image file.
    Explicit(Vec<f64>),
    /// `vec(c bᵀ)` with `b ~ N(0, I_L)` and `c` exactly `k`-sparse with
    /// `N(0, 1)` nonzeros, stored column-major as `P × L`.
    RankOneLift { l: usize, p: usize, k: usize },
}

impl X0Source {
    pub fn draw(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        let mut g = rng::stream(seed, 0x5830);
        match self {
            X0Source::BernoulliGaussian { rho, sigma2 } => {
                check_prior(*rho, *sigma2)?;
                let sd = sigma2.sqrt();
                Ok((0..n)
                    .map(|_| {
                        let active = rand::Rng::random::<f64>(&mut g) < *rho;
                        let v = rng::gaussian(&mut g);
                        if active {
                            sd * v
                        } else {
                            0.0
                        }
                    })
                    .collect())
            }
            X0Source::GroupRows { group_size, rho, sigma2 } => {
                check_prior(*rho, *sigma2)?;
                if *group_size == 0 || n % group_size != 0 {
                    return Err(Error::InvalidDimension(format!(
                        "group size {group_size} does not divide N = {n}"
                    )));
                }
                let sd = sigma2.sqrt();
                let mut x = Vec::with_capacity(n);
                for _ in 0..n / group_size {
                    let active = rand::Rng::random::<f64>(&mut g) < *rho;
                    for _ in 0..*group_size {
                        let v = rng::gaussian(&mut g);
                        x.push(if active { sd * v } else { 0.0 });
                    }
                }
                Ok(x)
            }
            X0Source::StationaryAr { coef } => {
                if !(coef.abs() < 1.0) {
                    return Err(Error::InvalidParameter(format!("AR coefficient {coef} must satisfy |a| < 1")));
                }
                let innov = (1.0 - coef * coef).sqrt();
                let mut x = Vec::with_capacity(n);
                let mut prev = rng::gaussian(&mut g);
                for _ in 0..n {
                    x.push(prev);
                    prev = coef * prev + innov * rng::gaussian(&mut g);
                }
                Ok(x)
            }
            X0Source::Explicit(x) => {
                Error::check_len(n, x.len())?;
                Ok(x.clone())
            }
            X0Source::RankOneLift { l, p, k } => {
                Error::check_len(n, l * p)?;
                if *k > *p {
                    return Err(Error::InvalidDimension(format!("sparsity {k} exceeds P = {p}")));
                }
                let (b, c) = draw_rank_one_factors(*l, *p, *k, &mut g);
                Ok(outer_vec(&b, &c))
            }
        }
    }
}

fn check_prior(rho: f64, sigma2: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&rho) || !(sigma2 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "signal prior needs ρ ∈ [0,1], σ² > 0; got ρ={rho}, σ²={sigma2}"
        )));
    }
    Ok(())
}

/// `b ~ N(0, I_L)` and a `k`-sparse `c` with `N(0, 1)` nonzeros on a
/// uniformly random support.
pub(crate) fn draw_rank_one_factors<R: rand::Rng + ?Sized>(l: usize, p: usize, k: usize, g: &mut R) -> (Vec<f64>, Vec<f64>) {
    let b = rng::gaussian_vec(g, l);
    let support = rng::permutation(g, p);
    let mut c = vec![0.0; p];
    for &i in &support[..k] {
        c[i] = rng::gaussian(g);
    }
    (b, c)
}

/// `vec(c bᵀ)`, column-major `P × L`.
pub(crate) fn outer_vec(b: &[f64], c: &[f64]) -> Vec<f64> {
    b.iter().flat_map(|&bl| c.iter().map(move |&cp| bl * cp)).collect()
}

/// Measurement noise model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Noise {
    Noiseless,
    Precision(f64),
    /// `γ_w0` chosen so `10 log₁₀(‖A x⁰‖²/E‖w‖²)` equals the given value.
    SnrDb(f64),
}

/// `γ_w0 = M·10^(snr/10)/‖A x⁰‖²`.
pub fn gamma_w0_for_snr(snr_db: f64, ax0: &[f64]) -> f64 {
    ax0.len() as f64 * 10f64.powf(snr_db / 10.0) / norm_sq(ax0)
}

/// `y = A x⁰ + w` with its truth and noise precisions.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub x0: Vec<f64>,
    pub operator: Arc<SpectralOperator>,
    pub y: Vec<f64>,
    /// `f64::INFINITY` for noiseless data.
    pub gamma_w0: f64,
    /// Postulated precision used by the LMMSE half; may be infinite.
    pub gamma_w: f64,
}

impl ProblemInstance {
    /// Wraps explicit data after checking shapes and precisions.
    pub fn new(x0: Vec<f64>, operator: Arc<SpectralOperator>, y: Vec<f64>, gamma_w0: f64, gamma_w: f64) -> Result<Self> {
        Error::check_len(operator.cols(), x0.len())?;
        Error::check_len(operator.rows(), y.len())?;
        if !(gamma_w0 > 0.0) || !(gamma_w > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "noise precisions must be positive, got γ_w0={gamma_w0}, γ_w={gamma_w}"
            )));
        }
        Ok(ProblemInstance { x0, operator, y, gamma_w0, gamma_w })
    }

    pub fn n(&self) -> usize {
        self.operator.cols()
    }

    pub fn m(&self) -> usize {
        self.operator.rows()
    }

    /// `ξ = Uᵀ w`, padded to length `N`.
    pub fn noise_coordinates(&self) -> Vec<f64> {
        let ax0 = self.operator.forward(&self.x0);
        let w: Vec<f64> = self.y.iter().zip(&ax0).map(|(a, b)| a - b).collect();
        self.operator.data_coordinates(&w)
    }
}

/// Draws `x⁰` and noise. `gamma_w = None` uses the true precision.
pub fn make_instance(
    x0_source: &X0Source,
    operator: Arc<SpectralOperator>,
    noise: Noise,
    gamma_w: Option<f64>,
    seed: u64,
) -> Result<ProblemInstance> {
    let x0 = x0_source.draw(operator.cols(), rng::derive(seed, 0))?;
    make_instance_from(x0, operator, noise, gamma_w, seed)
}

/// As [`make_instance`] with a given `x⁰`.
pub fn make_instance_from(
    x0: Vec<f64>,
    operator: Arc<SpectralOperator>,
    noise: Noise,
    gamma_w: Option<f64>,
    seed: u64,
) -> Result<ProblemInstance> {
    Error::check_len(operator.cols(), x0.len())?;
    let mut y = operator.forward(&x0);
    let gamma_w0 = match noise {
        Noise::Noiseless => f64::INFINITY,
        Noise::Precision(g) => g,
        Noise::SnrDb(snr) => gamma_w0_for_snr(snr, &y),
    };
    if !(gamma_w0 > 0.0) || gamma_w0.is_nan() {
        return Err(Error::InvalidParameter(format!("noise precision {gamma_w0} must be positive")));
    }
    if gamma_w0.is_finite() {
        let sd = gamma_w0.sqrt().recip();
        let w = rng::gaussian_vec(&mut rng::stream(rng::derive(seed, 1), 0), y.len());
        y.iter_mut().zip(&w).for_each(|(v, e)| *v += sd * e);
    }
    ProblemInstance::new(x0, operator, y, gamma_w0, gamma_w.unwrap_or(gamma_w0))
}

/// The LMMSE half, with `Uᵀy` cached.
#[derive(Debug, Clone)]
pub struct Lmmse<'a> {
    operator: &'a SpectralOperator,
    y_tilde: Vec<f64>,
    gamma_w: f64,
}

impl<'a> Lmmse<'a> {
    pub fn new(instance: &'a ProblemInstance) -> Self {
        Lmmse {
            operator: &instance.operator,
            y_tilde: instance.operator.data_coordinates(&instance.y),
            gamma_w: instance.gamma_w,
        }
    }

    /// Returns `(x̂₂, α₂)`. With `γ_w = ∞` the solve is the exact limit:
    /// measured directions are fitted to the data, the others keep `r₂`.
    pub fn estimate(&self, r2: &[f64], gamma2: f64) -> Result<(Vec<f64>, f64)> {
        if !(gamma2 > 0.0) || !gamma2.is_finite() {
            return Err(Error::InvalidParameter(format!("γ₂ = {gamma2} must be positive and finite")));
        }
        Error::check_len(self.operator.cols(), r2.len())?;
        let q = self.operator.v().apply_transpose(r2);
        let s = self.operator.singular_values();
        let gw = self.gamma_w;
        let mut trace = 0.0;
        let z: Vec<f64> = q
            .iter()
            .zip(s)
            .zip(&self.y_tilde)
            .map(|((&qi, &si), &yi)| {
                if gw.is_infinite() && si > 0.0 {
                    yi / si
                } else if gw.is_infinite() {
                    trace += 1.0;
                    qi
                } else {
                    let d = gw * si * si + gamma2;
                    trace += gamma2 / d;
                    (gw * si * yi + gamma2 * qi) / d
                }
            })
            .collect();
        Ok((self.operator.v().apply(&z), trace / s.len() as f64))
    }
}

/// One-shot LMMSE estimate; see [`Lmmse::estimate`].
pub fn lmmse_estimate(r2: &[f64], gamma2: f64, instance: &ProblemInstance) -> Result<(Vec<f64>, f64)> {
    Lmmse::new(instance).estimate(r2, gamma2)
}

/// Starting point obtained by running the LMMSE half first from `r₂ = 0`
/// with `γ₂ = ‖A‖²_F/‖y‖²`, the inverse of the signal energy per entry
/// implied by the data. Returns the extrinsic `(r₁₀, γ₁₀)` to pair with
/// [`InitMode::Custom`].
///
/// Denoisers that map `r = 0` to `0` with zero divergence (the rank-one
/// product estimator, for one) report `α₁ = 0` at the zero start, which
/// sends `γ₂` to the clamp and leaves the run badly overconfident.
pub fn lmmse_warm_start(instance: &ProblemInstance) -> Result<(Vec<f64>, f64)> {
    let energy = norm_sq(&instance.y);
    if !(energy > 0.0) {
        return Err(Error::InvalidParameter("warm start needs nonzero measurements".into()));
    }
    let gamma2 = instance.operator.frobenius_sq() / energy;
    let (xhat2, alpha2) = lmmse_estimate(&vec![0.0; instance.n()], gamma2, instance)?;
    let alpha2 = alpha2.clamp(ALPHA_EPS, 1.0 - ALPHA_EPS);
    let r1 = xhat2.iter().map(|x| x / (1.0 - alpha2)).collect();
    Ok((r1, gamma2 * (1.0 / alpha2 - 1.0)))
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitMode {
    /// `r₁₀ = 0`.
    Zero,
    /// `r₁₀ = x⁰ + N(0, τ₁₀ I)`.
    SeOracle { tau10: f64 },
    Custom(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct VampConfig {
    pub iterations: usize,
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub init: InitMode,
    pub gamma10: f64,
    /// Master seed for the oracle init draw and Monte Carlo divergence
    /// probes; iteration `k` uses `rng::derive(seed, k)`.
    pub seed: u64,
    /// Optional damping factor in `(0, 1]` on `r₁` and `γ₁`. Off by default.
    pub damping: Option<f64>,
}

impl Default for VampConfig {
    fn default() -> Self {
        VampConfig {
            iterations: 20,
            gamma_min: 1e-11,
            gamma_max: 1e11,
            init: InitMode::Zero,
            gamma10: 1e-6,
            seed: 0,
            damping: None,
        }
    }
}

impl VampConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidParameter("iterations must be ≥ 1".into()));
        }
        if !(self.gamma_min > 0.0 && self.gamma_min < self.gamma_max) {
            return Err(Error::InvalidParameter("need 0 < gamma_min < gamma_max".into()));
        }
        if !(self.gamma10 >= 0.0) {
            return Err(Error::InvalidParameter("gamma10 must be ≥ 0".into()));
        }
        if let InitMode::SeOracle { tau10 } = self.init {
            if !(tau10 > 0.0) {
                return Err(Error::InvalidParameter("tau10 must be positive".into()));
            }
        }
        if let Some(d) = self.damping {
            if !(d > 0.0 && d <= 1.0) {
                return Err(Error::InvalidParameter("damping must lie in (0, 1]".into()));
            }
        }
        Ok(())
    }

    /// The initial `r₁₀` for an instance.
    pub fn initial_r1(&self, instance: &ProblemInstance) -> Result<Vec<f64>> {
        let n = instance.n();
        match &self.init {
            InitMode::Zero => Ok(vec![0.0; n]),
            InitMode::SeOracle { tau10 } => {
                let sd = tau10.sqrt();
                let z = rng::gaussian_vec(&mut rng::stream(self.seed, 0x1_0000_0000), n);
                Ok(instance.x0.iter().zip(&z).map(|(x, e)| x + sd * e).collect())
            }
            InitMode::Custom(r) => {
                Error::check_len(n, r.len())?;
                Ok(r.clone())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VampState {
    pub k: usize,
    pub r1: Vec<f64>,
    pub gamma1: f64,
    pub xhat1: Vec<f64>,
    pub alpha1: f64,
    pub eta1: f64,
    pub r2: Vec<f64>,
    pub gamma2: f64,
    pub xhat2: Vec<f64>,
    pub alpha2: f64,
    pub eta2: f64,
    /// Some precision was pulled into `[gamma_min, gamma_max]`.
    pub clamped: bool,
    /// Some divergence left `(ε, 1 − ε)` and was clipped.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryRow {
    pub k: usize,
    pub gamma1: f64,
    pub alpha1: f64,
    pub eta1: f64,
    pub gamma2: f64,
    pub alpha2: f64,
    pub eta2: f64,
    pub mse1: f64,
    pub mse2: f64,
    pub clamped_flag: bool,
}

#[derive(Debug, Clone)]
pub struct VampTrajectory {
    pub states: Vec<VampState>,
}

impl VampTrajectory {
    /// The returned estimate: `x̂₁` of the last iteration.
    pub fn xhat(&self) -> &[f64] {
        &self.states.last().expect("at least one iteration").xhat1
    }

    pub fn rows(&self, x0: &[f64]) -> Vec<TrajectoryRow> {
        self.states
            .iter()
            .map(|s| TrajectoryRow {
                k: s.k,
                gamma1: s.gamma1,
                alpha1: s.alpha1,
                eta1: s.eta1,
                gamma2: s.gamma2,
                alpha2: s.alpha2,
                eta2: s.eta2,
                mse1: mse(&s.xhat1, x0),
                mse2: mse(&s.xhat2, x0),
                clamped_flag: s.clamped || s.degenerate,
            })
            .collect()
    }

    /// `(1/N)‖x̂₁ₖ − x⁰‖²` for every iteration.
    pub fn mse1(&self, x0: &[f64]) -> Vec<f64> {
        self.states.iter().map(|s| mse(&s.xhat1, x0)).collect()
    }
}

fn clamp_alpha(alpha: f64, degenerate: &mut bool) -> f64 {
    if alpha < ALPHA_EPS || alpha > 1.0 - ALPHA_EPS {
        *degenerate = true;
        alpha.clamp(ALPHA_EPS, 1.0 - ALPHA_EPS)
    } else {
        alpha
    }
}

fn clamp_gamma(gamma: f64, config: &VampConfig, clamped: &mut bool) -> f64 {
    if gamma < config.gamma_min || gamma > config.gamma_max {
        *clamped = true;
        gamma.clamp(config.gamma_min, config.gamma_max)
    } else {
        gamma
    }
}

fn finite_or(k: usize, what: &str, v: &[f64]) -> Result<()> {
    if all_finite(v) {
        Ok(())
    } else {
        Err(Error::NonFiniteState {
            iteration: k,
            what: what.to_string(),
        })
    }
}

/// Runs `config.iterations` VAMP iterations and records every state.
pub fn vamp_run(instance: &ProblemInstance, denoiser: &DenoiserSpec, config: &VampConfig) -> Result<VampTrajectory> {
    config.validate()?;
    let lmmse = Lmmse::new(instance);
    let mut r1 = config.initial_r1(instance)?;
    let mut init_clamped = false;
    let mut gamma1 = clamp_gamma(config.gamma10, config, &mut init_clamped);
    let mut states = Vec::with_capacity(config.iterations);

    for k in 0..config.iterations {
        let mut clamped = init_clamped && k == 0;
        let mut degenerate = false;

        let (xhat1, div) = denoiser.denoise_with_divergence(&r1, gamma1, rng::derive(config.seed, k as u64))?;
        finite_or(k, "x̂₁", &xhat1)?;
        let alpha1 = clamp_alpha(div.value, &mut degenerate);
        let eta1 = gamma1 / alpha1;
        let gamma2_raw = eta1 - gamma1;
        let r2: Vec<f64> = xhat1
            .iter()
            .zip(&r1)
            .map(|(x, r)| (eta1 * x - gamma1 * r) / gamma2_raw)
            .collect();
        finite_or(k, "r₂", &r2)?;
        let gamma2 = clamp_gamma(gamma2_raw, config, &mut clamped);

        let (xhat2, a2) = lmmse.estimate(&r2, gamma2)?;
        finite_or(k, "x̂₂", &xhat2)?;
        let alpha2 = clamp_alpha(a2, &mut degenerate);
        let eta2 = gamma2 / alpha2;
        let gamma1_raw = eta2 - gamma2;
        let r1_next: Vec<f64> = xhat2
            .iter()
            .zip(&r2)
            .map(|(x, r)| (eta2 * x - gamma2 * r) / gamma1_raw)
            .collect();
        finite_or(k, "r₁", &r1_next)?;
        let mut gamma1_next = clamp_gamma(gamma1_raw, config, &mut clamped);

        let r1_prev = std::mem::replace(&mut r1, r1_next);
        if let Some(beta) = config.damping.filter(|b| *b < 1.0) {
            r1.iter_mut()
                .zip(&r1_prev)
                .for_each(|(new, old)| *new = beta * *new + (1.0 - beta) * old);
            gamma1_next = beta * gamma1_next + (1.0 - beta) * gamma1;
        }

        states.push(VampState {
            k,
            r1: r1_prev,
            gamma1,
            xhat1,
            alpha1,
            eta1,
            r2,
            gamma2,
            xhat2,
            alpha2,
            eta2,
            clamped,
            degenerate,
        });
        gamma1 = gamma1_next;
    }
    Ok(VampTrajectory { states })
}
