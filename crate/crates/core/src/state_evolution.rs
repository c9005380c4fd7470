//! State evolution for VAMP and the generalized two-map recursion.
//!
//! The SE recursion tracks scalar error variances `τ₁ₖ, τ₂ₖ` and the
//! precisions and sensitivities the algorithm would see in the large-system
//! limit:
//!
//! ```text
//! ᾱ₁ = A₁(γ̄₁, τ₁)   η̄₁ = γ̄₁/ᾱ₁   γ̄₂ = η̄₁ − γ̄₁   τ₂ = (E₁(γ̄₁, τ₁) − ᾱ₁² τ₁)/(1 − ᾱ₁)²
//! ᾱ₂ = A₂(γ̄₂)       η̄₂ = γ̄₂/ᾱ₂   γ̄₁' = η̄₂ − γ̄₂  τ₁' = (E₂(γ̄₂, τ₂) − ᾱ₂² τ₂)/(1 − ᾱ₂)²
//! ```
//!
//! The predicted MSE of `x̂ᵢ` is `1/η̄ᵢ`. The denoiser half (`E₁`, `A₁`) is
//! evaluated by Monte Carlo on a fixed `x⁰`; the LMMSE half has closed
//! forms over the zero-padded spectrum.
//!
//! Monte Carlo draws are common random numbers: trial `t` always uses the
//! same unit-variance vector `ξₜ`, scaled by `√τ₁`. Two evaluations with the
//! same seed and arguments are therefore bitwise equal, which keeps the
//! trajectory smooth in `τ` and lets the generalized SE reproduce `se_run`
//! exactly.

use serde::Serialize;

use crate::denoisers::DenoiserSpec;
use crate::linalg::{dot, mse, norm_sq};
use crate::operators::OrthogonalMap;
use crate::rng;
use crate::stats::{mean_stderr, moments};
use crate::vamp::{ProblemInstance, VampTrajectory, ALPHA_EPS};
use crate::{Error, Result};

/// Default number of Monte Carlo trials for `E₁`/`A₁`.
pub const DEFAULT_TRIALS: usize = 500;

/// `(1/N) Σᵢ (γ_w² sᵢ²/γ_w0 + γ₂² τ₂)/(γ_w sᵢ² + γ₂)²`.
///
/// Infinite `γ_w0` means noiseless data; infinite `γ_w` is the exact
/// interpolation limit of the LMMSE solve.
pub fn lmmse_error_e2(gamma2: f64, tau2: f64, s: &[f64], gamma_w: f64, gamma_w0: f64) -> f64 {
    let noise_var = if gamma_w0.is_infinite() { 0.0 } else { 1.0 / gamma_w0 };
    let total: f64 = s
        .iter()
        .map(|&si| {
            if gamma_w.is_infinite() {
                if si > 0.0 {
                    noise_var / (si * si)
                } else {
                    tau2
                }
            } else {
                let d = gamma_w * si * si + gamma2;
                (gamma_w * gamma_w * si * si * noise_var + gamma2 * gamma2 * tau2) / (d * d)
            }
        })
        .sum();
    total / s.len() as f64
}

/// `(1/N) Σᵢ γ₂/(γ_w sᵢ² + γ₂)`.
pub fn lmmse_sensitivity_a2(gamma2: f64, s: &[f64], gamma_w: f64) -> f64 {
    let total: f64 = s
        .iter()
        .map(|&si| {
            if gamma_w.is_infinite() {
                if si > 0.0 {
                    0.0
                } else {
                    1.0
                }
            } else {
                gamma2 / (gamma_w * si * si + gamma2)
            }
        })
        .sum();
    total / s.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
}

/// Monte Carlo `E₁` and `A₁` from the same draws:
/// `(1/N)‖g(x⁰ + z, γ₁) − x⁰‖²` and `⟨∇g(x⁰ + z, γ₁)⟩` with `z ~ N(0, τ₁ I)`.
pub fn denoiser_error_sensitivity(
    denoiser: &DenoiserSpec,
    x0: &[f64],
    gamma1: f64,
    tau1: f64,
    trials: usize,
    seed: u64,
) -> Result<(McEstimate, McEstimate)> {
    if !(tau1 > 0.0) || !tau1.is_finite() {
        return Err(Error::InvalidParameter(format!("τ₁ = {tau1} must be positive and finite")));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be ≥ 1".into()));
    }
    let sd = tau1.sqrt();
    let mut errors = Vec::with_capacity(trials);
    let mut divs = Vec::with_capacity(trials);
    let mut r = vec![0.0; x0.len()];
    for t in 0..trials {
        let mut g = rng::stream(seed, t as u64);
        for (ri, &x) in r.iter_mut().zip(x0) {
            *ri = x + sd * rng::gaussian(&mut g);
        }
        let (xhat, div) = denoiser.denoise_with_divergence(&r, gamma1, rng::derive(seed, 0x8000_0000 + t as u64))?;
        errors.push(mse(&xhat, x0));
        divs.push(div.value);
    }
    let (e, e_se) = mean_stderr(&errors);
    let (a, a_se) = mean_stderr(&divs);
    Ok((McEstimate { value: e, std_error: e_se }, McEstimate { value: a, std_error: a_se }))
}

pub fn denoiser_error_e1(denoiser: &DenoiserSpec, x0: &[f64], gamma1: f64, tau1: f64, trials: usize, seed: u64) -> Result<McEstimate> {
    Ok(denoiser_error_sensitivity(denoiser, x0, gamma1, tau1, trials, seed)?.0)
}

pub fn denoiser_sensitivity_a1(denoiser: &DenoiserSpec, x0: &[f64], gamma1: f64, tau1: f64, trials: usize, seed: u64) -> Result<McEstimate> {
    Ok(denoiser_error_sensitivity(denoiser, x0, gamma1, tau1, trials, seed)?.1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeConfig {
    pub tau10: f64,
    /// Floored to `gamma_min`.
    pub gbar10: f64,
    pub iterations: usize,
    pub trials: usize,
    pub seed: u64,
    pub gamma_min: f64,
}

impl SeConfig {
    pub fn new(tau10: f64, gbar10: f64, iterations: usize, seed: u64) -> Self {
        SeConfig {
            tau10,
            gbar10,
            iterations,
            trials: DEFAULT_TRIALS,
            seed,
            gamma_min: 1e-11,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeState {
    pub k: usize,
    pub tau1: f64,
    pub tau2: f64,
    pub gbar1: f64,
    pub gbar2: f64,
    pub abar1: f64,
    pub abar2: f64,
    pub ebar1: f64,
    pub ebar2: f64,
    pub mse1: f64,
    pub mse2: f64,
    pub e1_stderr: f64,
    pub a1_stderr: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeRow {
    pub k: usize,
    pub tau1: f64,
    pub tau2: f64,
    pub gbar1: f64,
    pub gbar2: f64,
    pub abar1: f64,
    pub abar2: f64,
    pub mse1_db: f64,
    pub mse2_db: f64,
    pub e1_stderr: f64,
    pub a1_stderr: f64,
}

/// A sensitivity left `(ε, 1 − ε)` or a variance stopped being positive;
/// the trajectory ends before iteration `k`'s offending half.
#[derive(Debug, Clone, PartialEq)]
pub struct SeViolation {
    pub k: usize,
    pub what: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeTrajectory {
    pub states: Vec<SeState>,
    pub violation: Option<SeViolation>,
}

impl SeTrajectory {
    pub fn rows(&self) -> Vec<SeRow> {
        self.states
            .iter()
            .map(|s| SeRow {
                k: s.k,
                tau1: s.tau1,
                tau2: s.tau2,
                gbar1: s.gbar1,
                gbar2: s.gbar2,
                abar1: s.abar1,
                abar2: s.abar2,
                mse1_db: crate::to_db(s.mse1),
                mse2_db: crate::to_db(s.mse2),
                e1_stderr: s.e1_stderr,
                a1_stderr: s.a1_stderr,
            })
            .collect()
    }
}

fn alpha_ok(alpha: f64) -> bool {
    alpha > ALPHA_EPS && alpha < 1.0 - ALPHA_EPS
}

fn violation(k: usize, what: impl Into<String>) -> Option<SeViolation> {
    Some(SeViolation { k, what: what.into() })
}

/// The VAMP SE trajectory for a fixed `x⁰`.
pub fn se_run(
    denoiser: &DenoiserSpec,
    x0: &[f64],
    s: &[f64],
    gamma_w: f64,
    gamma_w0: f64,
    config: &SeConfig,
) -> Result<SeTrajectory> {
    Error::check_len(x0.len(), s.len())?;
    if !(config.tau10 > 0.0) {
        return Err(Error::InvalidParameter("τ₁₀ must be positive".into()));
    }
    let mut tau1 = config.tau10;
    let mut gbar1 = config.gbar10.max(config.gamma_min);
    let mut states = Vec::with_capacity(config.iterations);
    for k in 0..config.iterations {
        let (e1, a1) = denoiser_error_sensitivity(denoiser, x0, gbar1, tau1, config.trials, config.seed)?;
        let abar1 = a1.value;
        if !alpha_ok(abar1) {
            return Ok(SeTrajectory { states, violation: violation(k, format!("ᾱ₁ = {abar1} outside (0, 1)")) });
        }
        let ebar1 = gbar1 / abar1;
        let gbar2 = ebar1 - gbar1;
        let tau2 = (e1.value - abar1 * abar1 * tau1) / ((1.0 - abar1) * (1.0 - abar1));
        if !(tau2 > 0.0) || !(gbar2 > 0.0) {
            return Ok(SeTrajectory { states, violation: violation(k, format!("τ₂ = {tau2}, γ̄₂ = {gbar2}")) });
        }

        let abar2 = lmmse_sensitivity_a2(gbar2, s, gamma_w);
        if !alpha_ok(abar2) {
            return Ok(SeTrajectory { states, violation: violation(k, format!("ᾱ₂ = {abar2} outside (0, 1)")) });
        }
        let ebar2 = gbar2 / abar2;
        let e2 = lmmse_error_e2(gbar2, tau2, s, gamma_w, gamma_w0);
        let tau1_next = (e2 - abar2 * abar2 * tau2) / ((1.0 - abar2) * (1.0 - abar2));
        states.push(SeState {
            k,
            tau1,
            tau2,
            gbar1,
            gbar2,
            abar1,
            abar2,
            ebar1,
            ebar2,
            mse1: 1.0 / ebar1,
            mse2: 1.0 / ebar2,
            e1_stderr: e1.std_error,
            a1_stderr: a1.std_error,
        });
        let gbar1_next = ebar2 - gbar2;
        if !(tau1_next > 0.0) || !(gbar1_next > 0.0) {
            return Ok(SeTrajectory { states, violation: violation(k + 1, format!("τ₁ = {tau1_next}, γ̄₁ = {gbar1_next}")) });
        }
        tau1 = tau1_next;
        gbar1 = gbar1_next;
    }
    Ok(SeTrajectory { states, violation: None })
}

/// Empirical error statistics at iteration `k`: `p = r₁ − x⁰` and
/// `q = Vᵀ(r₂ − x⁰)` next to the SE variances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianityRow {
    pub k: usize,
    pub var_p: f64,
    pub tau1: f64,
    pub kurt_p: f64,
    pub jb_p: f64,
    pub var_q: f64,
    pub tau2: f64,
    pub kurt_q: f64,
    pub jb_q: f64,
}

impl GaussianityRow {
    pub fn var_gap_p(&self) -> f64 {
        (self.var_p / self.tau1 - 1.0).abs()
    }

    pub fn var_gap_q(&self) -> f64 {
        (self.var_q / self.tau2 - 1.0).abs()
    }
}

/// Compares the VAMP error vectors with the SE variances. Variances are
/// second moments about zero.
pub fn gaussianity_diagnostics(trajectory: &VampTrajectory, instance: &ProblemInstance, se: &SeTrajectory) -> Result<Vec<GaussianityRow>> {
    let x0 = &instance.x0;
    if x0.is_empty() {
        return Err(Error::InvalidDimension("instance has no x⁰".into()));
    }
    let v = instance.operator.v();
    Ok(trajectory
        .states
        .iter()
        .zip(&se.states)
        .map(|(st, se)| {
            let p: Vec<f64> = st.r1.iter().zip(x0).map(|(a, b)| a - b).collect();
            let d: Vec<f64> = st.r2.iter().zip(x0).map(|(a, b)| a - b).collect();
            let q = v.apply_transpose(&d);
            let (mp, mq) = (moments(&p), moments(&q));
            GaussianityRow {
                k: st.k,
                var_p: norm_sq(&p) / p.len() as f64,
                tau1: se.tau1,
                kurt_p: mp.excess_kurtosis,
                jb_p: mp.jarque_bera,
                var_q: norm_sq(&q) / q.len() as f64,
                tau2: se.tau2,
                kurt_q: mq.excess_kurtosis,
                jb_q: mq.jarque_bera,
            }
        })
        .collect())
}

/// A vector map `f(x, γ)` of the generalized recursion, returned together
/// with its divergence `⟨∇f⟩`. `k` is the iteration index, available for
/// seeding stochastic divergence estimates.
pub trait UpdateMap {
    fn apply(&self, x: &[f64], gamma: f64, k: usize) -> Result<(Vec<f64>, f64)>;
}

/// Scalar rule `(γ, α) ↦ γ'` or `α ↦ C(α)`.
pub type PrecisionRule = Box<dyn Fn(f64, f64) -> f64>;
pub type ScaleRule = Box<dyn Fn(f64) -> f64>;

pub struct GenRecursionSpec<'a> {
    pub fp: Box<dyn UpdateMap + 'a>,
    pub fq: Box<dyn UpdateMap + 'a>,
    pub gamma1_rule: PrecisionRule,
    pub gamma2_rule: PrecisionRule,
    pub c1: ScaleRule,
    pub c2: ScaleRule,
    pub u0: Vec<f64>,
    pub gamma10: f64,
    pub v: OrthogonalMap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenRecursionState {
    pub k: usize,
    pub u: Vec<f64>,
    pub p: Vec<f64>,
    pub gamma1: f64,
    pub alpha1: f64,
    pub v: Vec<f64>,
    pub q: Vec<f64>,
    pub gamma2: f64,
    pub alpha2: f64,
}

/// Runs
///
/// ```text
/// pₖ = V uₖ          α₁ = ⟨∇f_p(pₖ, γ₁)⟩   γ₂ = Γ₁(γ₁, α₁)   vₖ = C₁(α₁)[f_p(pₖ, γ₁) − α₁ pₖ]
/// qₖ = Vᵀ vₖ         α₂ = ⟨∇f_q(qₖ, γ₂)⟩   γ₁' = Γ₂(γ₂, α₂)  uₖ₊₁ = C₂(α₂)[f_q(qₖ, γ₂) − α₂ qₖ]
/// ```
pub fn general_recursion_run(spec: &GenRecursionSpec<'_>, iterations: usize) -> Result<Vec<GenRecursionState>> {
    Error::check_len(spec.v.dim(), spec.u0.len())?;
    let mut u = spec.u0.clone();
    let mut gamma1 = spec.gamma10;
    let mut out = Vec::with_capacity(iterations);
    for k in 0..iterations {
        let p = spec.v.apply(&u);
        let (fp, alpha1) = spec.fp.apply(&p, gamma1, k)?;
        let gamma2 = (spec.gamma1_rule)(gamma1, alpha1);
        let c1 = (spec.c1)(alpha1);
        let v: Vec<f64> = fp.iter().zip(&p).map(|(f, x)| c1 * (f - alpha1 * x)).collect();
        let q = spec.v.apply_transpose(&v);
        let (fq, alpha2) = spec.fq.apply(&q, gamma2, k)?;
        let gamma1_next = (spec.gamma2_rule)(gamma2, alpha2);
        let c2 = (spec.c2)(alpha2);
        let u_next: Vec<f64> = fq.iter().zip(&q).map(|(f, x)| c2 * (f - alpha2 * x)).collect();
        if !crate::linalg::all_finite(&u_next) || !gamma1_next.is_finite() {
            return Err(Error::NonFiniteState { iteration: k, what: "generalized recursion iterate".into() });
        }
        out.push(GenRecursionState {
            k,
            u: std::mem::replace(&mut u, u_next),
            p,
            gamma1,
            alpha1,
            v,
            q,
            gamma2,
            alpha2,
        });
        gamma1 = gamma1_next;
    }
    Ok(out)
}

/// `f_p(p, γ₁) = g₁(p + x⁰, γ₁) − x⁰`.
pub struct DenoiserErrorMap<'a> {
    pub denoiser: &'a DenoiserSpec,
    pub x0: &'a [f64],
    /// Same master seed as the VAMP run being mirrored.
    pub seed: u64,
}

impl UpdateMap for DenoiserErrorMap<'_> {
    fn apply(&self, p: &[f64], gamma: f64, k: usize) -> Result<(Vec<f64>, f64)> {
        let r: Vec<f64> = p.iter().zip(self.x0).map(|(a, b)| a + b).collect();
        let (xhat, div) = self.denoiser.denoise_with_divergence(&r, gamma, rng::derive(self.seed, k as u64))?;
        Ok((xhat.iter().zip(self.x0).map(|(a, b)| a - b).collect(), div.value))
    }
}

/// `f_q(q, γ₂) = (γ_w s ξ + γ₂ q)/(γ_w s² + γ₂)` componentwise, with
/// `ξ = Uᵀ w`.
pub struct LmmseErrorMap {
    pub s: Vec<f64>,
    pub xi: Vec<f64>,
    pub gamma_w: f64,
}

impl UpdateMap for LmmseErrorMap {
    fn apply(&self, q: &[f64], gamma: f64, _k: usize) -> Result<(Vec<f64>, f64)> {
        let mut trace = 0.0;
        let out = q
            .iter()
            .zip(&self.s)
            .zip(&self.xi)
            .map(|((&qi, &si), &xi)| {
                let d = self.gamma_w * si * si + gamma;
                trace += gamma / d;
                (self.gamma_w * si * xi + gamma * qi) / d
            })
            .collect();
        Ok((out, trace / q.len() as f64))
    }
}

/// `Γ(γ, α) = γ(1/α − 1)`.
pub fn vamp_precision_rule(gamma: f64, alpha: f64) -> f64 {
    gamma * (1.0 / alpha - 1.0)
}

/// `C(α) = 1/(1 − α)`.
pub fn vamp_scale_rule(alpha: f64) -> f64 {
    1.0 / (1.0 - alpha)
}

/// The generalized recursion that reproduces VAMP's error vectors
/// `pₖ = r₁ₖ − x⁰` and `qₖ = Vᵀ(r₂ₖ − x⁰)` for a run started at `r₁₀`.
pub fn vamp_recursion_spec<'a>(
    instance: &'a ProblemInstance,
    denoiser: &'a DenoiserSpec,
    r10: &[f64],
    gamma10: f64,
    seed: u64,
) -> Result<GenRecursionSpec<'a>> {
    let op = &instance.operator;
    let d: Vec<f64> = r10.iter().zip(&instance.x0).map(|(a, b)| a - b).collect();
    Ok(GenRecursionSpec {
        fp: Box::new(DenoiserErrorMap { denoiser, x0: &instance.x0, seed }),
        fq: Box::new(LmmseErrorMap {
            s: op.singular_values().to_vec(),
            xi: instance.noise_coordinates(),
            gamma_w: instance.gamma_w,
        }),
        gamma1_rule: Box::new(vamp_precision_rule),
        gamma2_rule: Box::new(vamp_precision_rule),
        c1: Box::new(vamp_scale_rule),
        c2: Box::new(vamp_scale_rule),
        u0: op.v().apply_transpose(&d),
        gamma10,
        v: op.v().clone(),
    })
}

/// Scalar `(τ, γ) ↦ value` moment or sensitivity function.
pub type MomentFn<'a> = Box<dyn Fn(f64, f64) -> Result<f64> + 'a>;

pub struct GenSeSpec<'a> {
    /// `M_p(τ₁, γ₁) = lim (1/N)‖f_p(p)‖²`.
    pub mp: MomentFn<'a>,
    /// `A_p(τ₁, γ₁) = lim ⟨∇f_p(p)⟩`.
    pub ap: MomentFn<'a>,
    pub mq: MomentFn<'a>,
    pub aq: MomentFn<'a>,
    pub gamma1_rule: PrecisionRule,
    pub gamma2_rule: PrecisionRule,
    pub c1: ScaleRule,
    pub c2: ScaleRule,
    pub tau10: f64,
    pub gbar10: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenSeState {
    pub k: usize,
    pub tau1: f64,
    pub gbar1: f64,
    pub abar1: f64,
    pub tau2: f64,
    pub gbar2: f64,
    pub abar2: f64,
}

/// ```text
/// ᾱ₁ = A_p(τ₁, γ̄₁)   γ̄₂ = Γ₁(γ̄₁, ᾱ₁)   τ₂ = C₁(ᾱ₁)² [M_p(τ₁, γ̄₁) − ᾱ₁² τ₁]
/// ᾱ₂ = A_q(τ₂, γ̄₂)   γ̄₁' = Γ₂(γ̄₂, ᾱ₂)  τ₁' = C₂(ᾱ₂)² [M_q(τ₂, γ̄₂) − ᾱ₂² τ₂]
/// ```
pub fn general_se_run(spec: &GenSeSpec, iterations: usize) -> Result<Vec<GenSeState>> {
    let mut tau1 = spec.tau10;
    let mut gbar1 = spec.gbar10;
    let mut out = Vec::with_capacity(iterations);
    for k in 0..iterations {
        let abar1 = (spec.ap)(tau1, gbar1)?;
        let gbar2 = (spec.gamma1_rule)(gbar1, abar1);
        let c1 = (spec.c1)(abar1);
        let tau2 = c1 * c1 * ((spec.mp)(tau1, gbar1)? - abar1 * abar1 * tau1);
        let abar2 = (spec.aq)(tau2, gbar2)?;
        let gbar1_next = (spec.gamma2_rule)(gbar2, abar2);
        let c2 = (spec.c2)(abar2);
        let tau1_next = c2 * c2 * ((spec.mq)(tau2, gbar2)? - abar2 * abar2 * tau2);
        if ![tau2, gbar2, tau1_next, gbar1_next].iter().all(|v| v.is_finite()) {
            return Err(Error::NonFiniteState { iteration: k, what: "generalized SE".into() });
        }
        out.push(GenSeState { k, tau1, gbar1, abar1, tau2, gbar2, abar2 });
        tau1 = tau1_next;
        gbar1 = gbar1_next;
    }
    Ok(out)
}

/// The generalized SE functions of the VAMP instantiation: `M_p = E₁`,
/// `A_p = A₁` (Monte Carlo with the given streams) and the closed-form
/// `M_q = E₂`, `A_q = A₂`.
pub fn vamp_se_spec<'a>(
    denoiser: &'a DenoiserSpec,
    x0: &'a [f64],
    s: &'a [f64],
    gamma_w: f64,
    gamma_w0: f64,
    config: &SeConfig,
) -> GenSeSpec<'a> {
    let (trials, seed) = (config.trials, config.seed);
    GenSeSpec {
        mp: Box::new(move |tau, gamma| denoiser_error_e1(denoiser, x0, gamma, tau, trials, seed).map(|e| e.value)),
        ap: Box::new(move |tau, gamma| denoiser_sensitivity_a1(denoiser, x0, gamma, tau, trials, seed).map(|e| e.value)),
        mq: Box::new(move |tau, gamma| Ok(lmmse_error_e2(gamma, tau, s, gamma_w, gamma_w0))),
        aq: Box::new(move |_tau, gamma| Ok(lmmse_sensitivity_a2(gamma, s, gamma_w))),
        gamma1_rule: Box::new(vamp_precision_rule),
        gamma2_rule: Box::new(vamp_precision_rule),
        c1: Box::new(vamp_scale_rule),
        c2: Box::new(vamp_scale_rule),
        tau10: config.tau10,
        gbar10: config.gbar10.max(config.gamma_min),
    }
}

/// Stein cross-estimate of `A₁`: `g(x⁰ + z₁)ᵀ z₂ /(N S₁₂)` averaged over
/// trials with `z₂ = z₁`, so `S₁₂ = τ₁`.
pub fn stein_sensitivity(denoiser: &DenoiserSpec, x0: &[f64], gamma1: f64, tau1: f64, trials: usize, seed: u64) -> Result<McEstimate> {
    let sd = tau1.sqrt();
    let n = x0.len() as f64;
    let vals = (0..trials)
        .map(|t| {
            let z: Vec<f64> = rng::gaussian_vec(&mut rng::stream(seed, t as u64), x0.len()).iter().map(|e| sd * e).collect();
            let r: Vec<f64> = x0.iter().zip(&z).map(|(a, b)| a + b).collect();
            let g = denoiser.denoise(&r, gamma1)?;
            Ok(dot(&g, &z) / (n * tau1))
        })
        .collect::<Result<Vec<f64>>>()?;
    let (value, std_error) = mean_stderr(&vals);
    Ok(McEstimate { value, std_error })
}
