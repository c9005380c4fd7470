//! Flat TOML scenario configuration. Every key has a default and unknown
//! keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    SeValidate,
    ImageRecovery,
    CondSweep,
    RateSweep,
    CsmuSweep,
    SelfcalGrid,
    GenRecursionCheck,
}

impl Scenario {
    pub const ALL: [Scenario; 7] = [
        Scenario::SeValidate,
        Scenario::ImageRecovery,
        Scenario::CondSweep,
        Scenario::RateSweep,
        Scenario::CsmuSweep,
        Scenario::SelfcalGrid,
        Scenario::GenRecursionCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::SeValidate => "se-validate",
            Scenario::ImageRecovery => "image-recovery",
            Scenario::CondSweep => "cond-sweep",
            Scenario::RateSweep => "rate-sweep",
            Scenario::CsmuSweep => "csmu-sweep",
            Scenario::SelfcalGrid => "selfcal-grid",
            Scenario::GenRecursionCheck => "gen-recursion-check",
        }
    }

    pub fn parse(name: &str) -> Result<Self, CliError> {
        Self::ALL
            .into_iter()
            .find(|s| s.name() == name)
            .ok_or_else(|| CliError::Config(format!("unknown scenario `{name}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorChoice {
    DenseHaar,
    FastJphd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DenoiserChoice {
    SoftThreshold,
    BgMmse,
    GroupSoftThreshold,
    Fir,
    Svt,
    Cnn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdMode {
    /// `θ` used as given.
    Fixed,
    /// `θ = threshold/√γ`.
    NoiseScaled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DivergenceChoice {
    Analytic,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitChoice {
    /// Oracle start for `se-validate`, LMMSE warm start elsewhere.
    Auto,
    Zero,
    SeOracle,
    LmmseWarmStart,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ImageRoute {
    Wavelet,
    Direct,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LiftedStyle {
    Iid,
    Haar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Option<Scenario>,
    pub master_seed: u64,
    pub trials: usize,
    pub iterations: usize,
    pub out_dir: Option<PathBuf>,

    pub n: usize,
    /// Overrides `rate` when set.
    pub m: Option<usize>,
    pub rate: f64,
    pub operator: OperatorChoice,
    pub cond: f64,

    pub denoiser: DenoiserChoice,
    pub threshold: f64,
    pub threshold_mode: ThresholdMode,
    pub rho: f64,
    pub sigma2: f64,
    pub group_size: usize,
    pub fir_taps: Vec<f64>,
    pub svt_rows: usize,
    pub cnn_weights: Option<PathBuf>,
    pub divergence: DivergenceChoice,
    pub mc_probes: usize,

    /// Overrides `snr_db` and `gamma_w0`.
    pub noiseless: bool,
    /// Ignored when `gamma_w0` is set. Neither set means noiseless.
    pub snr_db: Option<f64>,
    pub gamma_w0: Option<f64>,
    /// Assumed noise precision; defaults to the true one.
    pub gamma_w: Option<f64>,

    pub init: InitChoice,
    pub tau10: f64,
    pub damping: Option<f64>,
    pub se_trials: usize,

    pub conds: Vec<f64>,
    pub amp_iterations: usize,
    pub amp_threshold: f64,

    pub rates: Vec<f64>,
    pub image: Option<PathBuf>,
    pub image_side: usize,
    pub wavelet_levels: Option<usize>,
    pub route: ImageRoute,

    pub l: usize,
    pub p: usize,
    pub k: usize,
    pub b1: f64,
    pub lifted_style: LiftedStyle,
    pub inner_iters: usize,
    pub m_values: Vec<usize>,
    pub snr_values: Vec<f64>,
    pub k_values: Vec<usize>,
    pub l_values: Vec<usize>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            scenario: None,
            master_seed: 0,
            trials: 10,
            iterations: 10,
            out_dir: None,
            n: 4096,
            m: None,
            rate: 0.5,
            operator: OperatorChoice::DenseHaar,
            cond: 1.0,
            denoiser: DenoiserChoice::BgMmse,
            threshold: 1.5,
            threshold_mode: ThresholdMode::NoiseScaled,
            rho: 0.1,
            sigma2: 1.0,
            group_size: 4,
            fir_taps: vec![0.25, 0.5, 0.25],
            svt_rows: 64,
            cnn_weights: None,
            divergence: DivergenceChoice::Analytic,
            mc_probes: 8,
            noiseless: false,
            snr_db: Some(40.0),
            gamma_w0: None,
            gamma_w: None,
            init: InitChoice::Auto,
            tau10: 0.1,
            damping: None,
            se_trials: 500,
            conds: vec![1.0, 10.0, 100.0, 1000.0],
            amp_iterations: 50,
            amp_threshold: 1.5,
            rates: vec![0.1, 0.2, 0.3, 0.4, 0.5],
            image: None,
            image_side: 64,
            wavelet_levels: None,
            route: ImageRoute::Both,
            l: 11,
            p: 64,
            k: 4,
            b1: 20f64.sqrt(),
            lifted_style: LiftedStyle::Iid,
            inner_iters: 5,
            m_values: vec![38],
            snr_values: vec![40.0],
            k_values: vec![2, 4, 8],
            l_values: vec![2, 4, 8],
        }
    }
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Number of measurements, from `m` or `rate·n`.
    pub fn measurements(&self) -> usize {
        self.m.unwrap_or_else(|| ((self.rate * self.n as f64).round() as usize).max(1))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: &str| Err(CliError::Config(msg.to_string()));
        if self.trials == 0 || self.iterations == 0 || self.amp_iterations == 0 {
            return bad("trials and iteration counts must be positive");
        }
        if self.n == 0 {
            return bad("n must be positive");
        }
        if self.m.is_none() && !(self.rate > 0.0 && self.rate <= 1.0) {
            return bad("rate must lie in (0, 1]");
        }
        if self.measurements() > self.n {
            return bad("m must not exceed n");
        }
        if !(self.cond >= 1.0) || self.conds.iter().any(|c| !(*c >= 1.0)) {
            return bad("condition numbers must be ≥ 1");
        }
        if self.rates.iter().any(|r| !(*r > 0.0 && *r <= 1.0)) {
            return bad("rates must lie in (0, 1]");
        }
        if !(self.rho > 0.0 && self.rho < 1.0) || !(self.sigma2 > 0.0) {
            return bad("need 0 < rho < 1 and sigma2 > 0");
        }
        if !(self.threshold >= 0.0) || !(self.amp_threshold >= 0.0) {
            return bad("thresholds must be non-negative");
        }
        if !(self.tau10 > 0.0) {
            return bad("tau10 must be positive");
        }
        if let Some(d) = self.damping {
            if !(d > 0.0 && d <= 1.0) {
                return bad("damping must lie in (0, 1]");
            }
        }
        if self.group_size == 0 || self.mc_probes == 0 || self.se_trials == 0 || self.inner_iters == 0 {
            return bad("group_size, mc_probes, se_trials and inner_iters must be positive");
        }
        if self.fir_taps.is_empty() {
            return bad("fir_taps must not be empty");
        }
        if self.denoiser == DenoiserChoice::Cnn && self.cnn_weights.is_none() {
            return bad("the cnn denoiser needs cnn_weights");
        }
        if self.denoiser == DenoiserChoice::Svt && (self.svt_rows == 0 || self.n % self.svt_rows != 0) {
            return bad("svt_rows must divide n");
        }
        if !self.image_side.is_power_of_two() || self.image_side < 2 {
            return bad("image_side must be a power of two ≥ 2");
        }
        if [self.l, self.p, self.k].contains(&0) || self.k > self.p {
            return bad("need positive l, p, k with k ≤ p");
        }
        if self.m_values.is_empty() || self.snr_values.is_empty() || self.k_values.is_empty() || self.l_values.is_empty() {
            return bad("sweep value lists must not be empty");
        }
        if self.conds.is_empty() || self.rates.is_empty() {
            return bad("sweep value lists must not be empty");
        }
        if let (Some(g), _) | (_, Some(g)) = (self.gamma_w0, self.gamma_w) {
            if !(g > 0.0) {
                return bad("noise precisions must be positive");
            }
        }
        Ok(())
    }
}
