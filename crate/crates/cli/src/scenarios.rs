//! The scenario runners. Each one expands its sweep into cells, runs the
//! cells on the work pool and returns the rows in cell order, so the output
//! does not depend on the number of threads.

use std::sync::Arc;
use std::time::Instant;

use pnpvamp::amp::{amp_run, AmpConfig};
use pnpvamp::denoisers::{CnnStack, DenoiserKind, DenoiserSpec, DivergenceMode, Fir, Threshold};
use pnpvamp::lifting::{make_csmu_instance, make_selfcal_instance, score_recovery, CsmuParams, LiftedInstance, OperatorStyle};
use pnpvamp::linalg::{mse, norm_sq};
use pnpvamp::operators::pgm::GrayImage;
use pnpvamp::operators::{build_operator, fast_jphd_with_spectrum, geometric_spectrum, SpectralOperator};
use pnpvamp::rng::derive;
use pnpvamp::state_evolution::{
    general_recursion_run, general_se_run, se_run, vamp_recursion_spec, vamp_se_spec, SeConfig,
};
use pnpvamp::vamp::{lmmse_warm_start, make_instance, vamp_run, InitMode, Noise, ProblemInstance, VampConfig, X0Source};
use pnpvamp::{to_db, Result as CoreResult};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{DenoiserChoice, DivergenceChoice, ImageRoute, InitChoice, LiftedStyle, OperatorChoice, Scenario, ScenarioConfig, ThresholdMode};
use crate::image::{recover, synthetic_image, Route};
use crate::output::{Artifacts, TimingRow};
use crate::CliError;

/// Derived per-trial seed; trial `t` of cell `c` uses `derive(master, c·2³² + t)`.
pub fn cell_seed(master: u64, cell: usize, trial: usize) -> u64 {
    derive(master, ((cell as u64) << 32) | trial as u64)
}

fn runtime_err(scenario: Scenario, coords: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(format!("{} [{coords}]: {e}", scenario.name()))
}

fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

pub fn build_measurement_operator(choice: OperatorChoice, n: usize, m: usize, cond: f64, seed: u64) -> CoreResult<SpectralOperator> {
    let spectrum = geometric_spectrum(m, n, cond)?;
    match choice {
        OperatorChoice::DenseHaar => build_operator(&spectrum, m, derive(seed, 0x5553), derive(seed, 0x5653)),
        OperatorChoice::FastJphd => fast_jphd_with_spectrum(&spectrum, m, derive(seed, 0x4650)),
    }
}

pub fn build_denoiser(cfg: &ScenarioConfig, n: usize) -> Result<DenoiserSpec, CliError> {
    let threshold = match cfg.threshold_mode {
        ThresholdMode::Fixed => Threshold::Fixed(cfg.threshold),
        ThresholdMode::NoiseScaled => Threshold::NoiseScaled(cfg.threshold),
    };
    let kind = match cfg.denoiser {
        DenoiserChoice::SoftThreshold => DenoiserKind::SoftThreshold(threshold),
        DenoiserChoice::BgMmse => DenoiserKind::BgMmse { rho: cfg.rho, sigma_x2: cfg.sigma2 },
        DenoiserChoice::GroupSoftThreshold => DenoiserKind::GroupSoftThreshold { group_size: cfg.group_size, threshold },
        DenoiserChoice::Fir => DenoiserKind::Fir(Fir::centered(cfg.fir_taps.clone())),
        DenoiserChoice::Svt => DenoiserKind::Svt { rows: cfg.svt_rows, cols: n / cfg.svt_rows },
        DenoiserChoice::Cnn => {
            let path = cfg.cnn_weights.as_ref().expect("validated");
            DenoiserKind::Cnn(CnnStack::read(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?)
        }
    };
    let spec = DenoiserSpec::with_default_mode(kind).map_err(|e| CliError::Config(e.to_string()))?;
    let spec = match cfg.divergence {
        DivergenceChoice::Analytic => Ok(spec),
        DivergenceChoice::MonteCarlo => spec.with_mode(DivergenceMode::MonteCarlo { probes: cfg.mc_probes, epsilon: None }),
    };
    spec.map_err(|e| CliError::Config(e.to_string()))
}

fn noise_model(cfg: &ScenarioConfig) -> Noise {
    if cfg.noiseless {
        return Noise::Noiseless;
    }
    match (cfg.gamma_w0, cfg.snr_db) {
        (Some(g), _) => Noise::Precision(g),
        (None, Some(snr)) => Noise::SnrDb(snr),
        (None, None) => Noise::Noiseless,
    }
}

fn vamp_config(cfg: &ScenarioConfig, inst: &ProblemInstance, oracle_default: bool, seed: u64) -> CoreResult<VampConfig> {
    let base = VampConfig {
        iterations: cfg.iterations,
        seed,
        damping: cfg.damping,
        ..VampConfig::default()
    };
    let oracle = VampConfig {
        init: InitMode::SeOracle { tau10: cfg.tau10 },
        gamma10: 1.0 / cfg.tau10,
        ..base.clone()
    };
    Ok(match cfg.init {
        InitChoice::Auto if oracle_default => oracle,
        InitChoice::SeOracle => oracle,
        InitChoice::Zero => base,
        InitChoice::Auto | InitChoice::LmmseWarmStart => {
            let (r10, gamma10) = lmmse_warm_start(inst)?;
            VampConfig {
                init: InitMode::Custom(r10),
                gamma10,
                ..base
            }
        }
    })
}

fn pool(threads: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        b = b.num_threads(t);
    }
    b.build().map_err(|e| CliError::Runtime(format!("thread pool: {e}")))
}

/// Runs the scenario, collecting its CSV artifacts in memory.
pub fn run(cfg: &ScenarioConfig, scenario: Scenario, threads: Option<usize>) -> Result<Artifacts, CliError> {
    let pool = pool(threads)?;
    pool.install(|| match scenario {
        Scenario::SeValidate => se_validate(cfg),
        Scenario::ImageRecovery => image_recovery(cfg),
        Scenario::CondSweep => cond_sweep(cfg),
        Scenario::RateSweep => rate_sweep(cfg),
        Scenario::CsmuSweep => csmu_sweep(cfg),
        Scenario::SelfcalGrid => selfcal_grid(cfg),
        Scenario::GenRecursionCheck => gen_recursion_check(cfg),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SeValidateRow {
    pub trial: usize,
    pub seed: u64,
    pub k: usize,
    pub mse_db: f64,
    pub se_prediction_db: f64,
    pub gap_db: f64,
    pub clamped: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeCsvRow {
    pub trial: usize,
    pub seed: u64,
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

fn x0_source(cfg: &ScenarioConfig) -> X0Source {
    X0Source::BernoulliGaussian { rho: cfg.rho, sigma2: cfg.sigma2 }
}

fn se_validate(cfg: &ScenarioConfig) -> Result<Artifacts, CliError> {
    let sc = Scenario::SeValidate;
    let (n, m) = (cfg.n, cfg.measurements());
    let den = build_denoiser(cfg, n)?;
    let cells: Vec<usize> = (0..cfg.trials).collect();
    let results = cells
        .par_iter()
        .map(|&t| {
            let seed = cell_seed(cfg.master_seed, 0, t);
            let start = Instant::now();
            let coords = format!("trial={t} seed={seed}");
            let out = (|| -> CoreResult<_> {
                let op = Arc::new(build_measurement_operator(cfg.operator, n, m, cfg.cond, seed)?);
                let inst = make_instance(&x0_source(cfg), op, noise_model(cfg), cfg.gamma_w, seed)?;
                let vc = vamp_config(cfg, &inst, true, seed)?;
                let traj = vamp_run(&inst, &den, &vc)?;
                let se_cfg = SeConfig {
                    trials: cfg.se_trials,
                    ..SeConfig::new(cfg.tau10, vc.gamma10, cfg.iterations, derive(seed, 0x5345))
                };
                let se = se_run(&den, &inst.x0, inst.operator.singular_values(), inst.gamma_w, inst.gamma_w0, &se_cfg)?;
                Ok((inst, traj, se))
            })()
            .map_err(|e| runtime_err(sc, &coords, e))?;
            let (inst, traj, se) = out;
            let mut rows = Vec::new();
            for (st, pred) in traj.states.iter().zip(&se.states) {
                let mse_db = to_db(mse(&st.xhat1, &inst.x0));
                let se_prediction_db = to_db(pred.mse1);
                rows.push(SeValidateRow {
                    trial: t,
                    seed,
                    k: st.k,
                    mse_db,
                    se_prediction_db,
                    gap_db: mse_db - se_prediction_db,
                    clamped: st.clamped,
                });
            }
            let se_rows: Vec<SeCsvRow> = se
                .rows()
                .into_iter()
                .map(|r| SeCsvRow {
                    trial: t,
                    seed,
                    k: r.k,
                    tau1: r.tau1,
                    tau2: r.tau2,
                    gbar1: r.gbar1,
                    gbar2: r.gbar2,
                    abar1: r.abar1,
                    abar2: r.abar2,
                    mse1_db: r.mse1_db,
                    mse2_db: r.mse2_db,
                    e1_stderr: r.e1_stderr,
                    a1_stderr: r.a1_stderr,
                })
                .collect();
            Ok((rows, se_rows, TimingRow::new(coords, seed, ms(start))))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut art = Artifacts::default();
    for (rows, se_rows, timing) in results {
        art.push_results(&rows)?;
        art.push_se(&se_rows)?;
        art.timing.push(timing);
    }
    art.seeds = cells.iter().map(|&t| cell_seed(cfg.master_seed, 0, t)).collect();
    Ok(art)
}

#[derive(Debug, Clone, Serialize)]
pub struct CondRow {
    pub cond: f64,
    pub algorithm: &'static str,
    pub seed: u64,
    pub iterations_run: usize,
    pub nmse_db: f64,
    pub diverged: bool,
}

fn nmse_db(xhat: &[f64], x0: &[f64]) -> f64 {
    let err: f64 = xhat.iter().zip(x0).map(|(a, b)| (a - b) * (a - b)).sum();
    to_db(err / norm_sq(x0))
}

fn cond_sweep(cfg: &ScenarioConfig) -> Result<Artifacts, CliError> {
    let sc = Scenario::CondSweep;
    let (n, m) = (cfg.n, cfg.measurements());
    let den = build_denoiser(cfg, n)?;
    let amp_den = DenoiserSpec::with_default_mode(DenoiserKind::SoftThreshold(Threshold::NoiseScaled(cfg.amp_threshold)))
        .map_err(|e| CliError::Config(e.to_string()))?;
    let cells: Vec<(usize, f64, usize)> = cfg
        .conds
        .iter()
        .enumerate()
        .flat_map(|(ci, &c)| (0..cfg.trials).map(move |t| (ci, c, t)))
        .collect();
    let results = cells
        .par_iter()
        .map(|&(ci, cond, t)| {
            let seed = cell_seed(cfg.master_seed, ci, t);
            let coords = format!("cond={cond} seed={seed}");
            let start = Instant::now();
            let rows = (|| -> CoreResult<Vec<CondRow>> {
                let op = Arc::new(build_measurement_operator(cfg.operator, n, m, cond, seed)?);
                let inst = make_instance(&x0_source(cfg), op, noise_model(cfg), cfg.gamma_w, seed)?;
                let amp = amp_run(&inst, &amp_den, &AmpConfig { iterations: cfg.amp_iterations, seed, ..AmpConfig::default() })?;
                let amp_nmse = if amp.diverged { f64::INFINITY } else { nmse_db(amp.xhat().unwrap_or(&[]), &inst.x0) };
                let vamp = vamp_run(&inst, &den, &vamp_config(cfg, &inst, false, seed)?)?;
                let vamp_nmse = nmse_db(vamp.xhat(), &inst.x0);
                Ok(vec![
                    CondRow { cond, algorithm: "amp", seed, iterations_run: amp.states.len(), nmse_db: amp_nmse, diverged: amp.diverged },
                    CondRow { cond, algorithm: "vamp", seed, iterations_run: vamp.states.len(), nmse_db: vamp_nmse, diverged: !vamp_nmse.is_finite() },
                ])
            })()
            .map_err(|e| runtime_err(sc, &coords, e))?;
            Ok((rows, TimingRow::new(coords, seed, ms(start))))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut art = Artifacts::default();
    for (rows, timing) in results {
        art.push_results(&rows)?;
        art.seeds.push(timing.seed);
        art.timing.push(timing);
    }
    Ok(art)
}

#[derive(Debug, Clone, Serialize)]
pub struct ImageRow {
    pub rate: f64,
    pub route: &'static str,
    pub seed: u64,
    pub psnr_db: f64,
    pub mse_db: f64,
}

fn routes(cfg: &ScenarioConfig) -> Vec<Route> {
    match cfg.route {
        ImageRoute::Wavelet => vec![Route::Wavelet],
        ImageRoute::Direct => vec![Route::Direct],
        ImageRoute::Both => vec![Route::Wavelet, Route::Direct],
    }
}

fn load_image(cfg: &ScenarioConfig) -> Result<GrayImage, CliError> {
    match &cfg.image {
        Some(path) => GrayImage::read(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display()))),
        None => Ok(synthetic_image(cfg.image_side, cfg.master_seed)),
    }
}

fn image_cells(cfg: &ScenarioConfig, sc: Scenario, image: &GrayImage, rates: &[f64]) -> Result<(Vec<(ImageRow, GrayImage)>, Vec<TimingRow>), CliError> {
    let n = image.pixels.len();
    let den = build_denoiser(cfg, n)?;
    let cells: Vec<(usize, f64, usize)> = rates
        .iter()
        .enumerate()
        .flat_map(|(ri, &r)| (0..cfg.trials).map(move |t| (ri, r, t)))
        .collect();
    let results = cells
        .par_iter()
        .map(|&(ri, rate, t)| {
            let seed = cell_seed(cfg.master_seed, ri, t);
            let coords = format!("rate={rate} seed={seed}");
            let start = Instant::now();
            let m = ((rate * n as f64).round() as usize).clamp(1, n);
            let op = build_measurement_operator(cfg.operator, n, m, cfg.cond, seed).map_err(|e| runtime_err(sc, &coords, e))?;
            let mut rows = Vec::new();
            for route in routes(cfg) {
                let out = recover(image, &op, noise_model(cfg), &den, route, cfg.wavelet_levels, cfg.iterations, seed)
                    .map_err(|e| runtime_err(sc, &format!("{coords} route={}", route.name()), e))?;
                rows.push((
                    ImageRow { rate, route: route.name(), seed, psnr_db: out.psnr_db, mse_db: out.mse_db },
                    out.image,
                ));
            }
            Ok((rows, TimingRow::new(coords, seed, ms(start))))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut rows = Vec::new();
    let mut timing = Vec::new();
    for (r, t) in results {
        rows.extend(r);
        timing.push(t);
    }
    Ok((rows, timing))
}

fn image_recovery(cfg: &ScenarioConfig) -> Result<Artifacts, CliError> {
    let image = load_image(cfg)?;
    let rate = cfg.m.map_or(cfg.rate, |m| m as f64 / image.pixels.len() as f64);
    let (rows, timing) = image_cells(cfg, Scenario::ImageRecovery, &image, &[rate])?;
    let mut art = Artifacts::default();
    art.images.push(("original.pgm".into(), image));
    for (row, img) in rows {
        art.images.push((format!("recovered_{}_{}.pgm", row.route, row.seed), img));
        art.push_results(&[row])?;
    }
    art.seeds = timing.iter().map(|t| t.seed).collect();
    art.timing = timing;
    Ok(art)
}

fn rate_sweep(cfg: &ScenarioConfig) -> Result<Artifacts, CliError> {
    let image = load_image(cfg)?;
    let (rows, timing) = image_cells(cfg, Scenario::RateSweep, &image, &cfg.rates)?;
    let mut art = Artifacts::default();
    for (row, _) in rows {
        art.push_results(&[row])?;
    }
    art.seeds = timing.iter().map(|t| t.seed).collect();
    art.timing = timing;
    Ok(art)
}

#[derive(Debug, Clone, Serialize)]
pub struct CsmuRow {
    pub m: usize,
    pub snr_db: f64,
    pub seed: u64,
    pub nmse_b_db: f64,
    pub nmse_c_db: f64,
    pub nmse_outer_db: f64,
    pub success: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelfcalRow {
    pub k: usize,
    pub l: usize,
    pub seed: u64,
    pub nmse_b_db: f64,
    pub nmse_c_db: f64,
    pub nmse_outer_db: f64,
    pub success: bool,
}

/// Lifted VAMP on one instance; the result is the recovery score.
pub fn solve_lifted(cfg: &ScenarioConfig, inst: &LiftedInstance, seed: u64) -> CoreResult<pnpvamp::lifting::RecoveryScore> {
    let den = inst.denoiser(cfg.inner_iters)?;
    let vc = vamp_config(cfg, &inst.problem, false, seed)?;
    let traj = vamp_run(&inst.problem, &den, &vc)?;
    score_recovery(traj.xhat(), inst)
}

fn csmu_sweep(cfg: &ScenarioConfig) -> Result<Artifacts, CliError> {
    let sc = Scenario::CsmuSweep;
    let cells: Vec<(usize, usize, f64, usize)> = cfg
        .m_values
        .iter()
        .flat_map(|&m| cfg.snr_values.iter().map(move |&s| (m, s)))
        .enumerate()
        .flat_map(|(ci, (m, s))| (0..cfg.trials).map(move |t| (ci, m, s, t)))
        .collect();
    let style = match cfg.lifted_style {
        LiftedStyle::Iid => OperatorStyle::IidGaussian,
        LiftedStyle::Haar => OperatorStyle::HaarGeometric { cond: cfg.cond },
    };
    let results = cells
        .par_iter()
        .map(|&(ci, m, snr, t)| {
            let seed = cell_seed(cfg.master_seed, ci, t);
            let coords = format!("m={m} snr_db={snr} seed={seed}");
            let start = Instant::now();
            let params = CsmuParams { l: cfg.l, p: cfg.p, k: cfg.k, m, b1: cfg.b1, style, snr_db: Some(snr) };
            let score = make_csmu_instance(&params, seed)
                .and_then(|inst| solve_lifted(cfg, &inst, seed))
                .map_err(|e| runtime_err(sc, &coords, e))?;
            let row = CsmuRow {
                m,
                snr_db: snr,
                seed,
                nmse_b_db: score.nmse_b_db,
                nmse_c_db: score.nmse_c_db,
                nmse_outer_db: score.nmse_outer_db,
                success: score.success,
            };
            Ok((row, TimingRow::new(coords, seed, ms(start))))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut art = Artifacts::default();
    for (row, timing) in results {
        art.push_results(&[row])?;
        art.seeds.push(timing.seed);
        art.timing.push(timing);
    }
    Ok(art)
}

fn selfcal_grid(cfg: &ScenarioConfig) -> Result<Artifacts, CliError> {
    let sc = Scenario::SelfcalGrid;
    let m = cfg.m.unwrap_or(128);
    let cells: Vec<(usize, usize, usize, usize)> = cfg
        .k_values
        .iter()
        .flat_map(|&k| cfg.l_values.iter().map(move |&l| (k, l)))
        .enumerate()
        .flat_map(|(ci, (k, l))| (0..cfg.trials).map(move |t| (ci, k, l, t)))
        .collect();
    let results = cells
        .par_iter()
        .map(|&(ci, k, l, t)| {
            let seed = cell_seed(cfg.master_seed, ci, t);
            let coords = format!("k={k} l={l} seed={seed}");
            let start = Instant::now();
            let score = make_selfcal_instance(l, cfg.p, k, m, seed)
                .and_then(|inst| solve_lifted(cfg, &inst, seed))
                .map_err(|e| runtime_err(sc, &coords, e))?;
            let row = SelfcalRow {
                k,
                l,
                seed,
                nmse_b_db: score.nmse_b_db,
                nmse_c_db: score.nmse_c_db,
                nmse_outer_db: score.nmse_outer_db,
                success: score.success,
            };
            Ok((row, TimingRow::new(coords, seed, ms(start))))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut art = Artifacts::default();
    for (row, timing) in results {
        art.push_results(&[row])?;
        art.seeds.push(timing.seed);
        art.timing.push(timing);
    }
    Ok(art)
}

#[derive(Debug, Clone, Serialize)]
pub struct GenRecursionRow {
    pub seed: u64,
    pub k: usize,
    pub p_max_err: f64,
    pub q_max_err: f64,
    pub se_max_rel_err: f64,
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn gen_recursion_check(cfg: &ScenarioConfig) -> Result<Artifacts, CliError> {
    let sc = Scenario::GenRecursionCheck;
    let (n, m) = (cfg.n, cfg.measurements());
    let den = build_denoiser(cfg, n)?;
    let cells: Vec<usize> = (0..cfg.trials).collect();
    let results = cells
        .par_iter()
        .map(|&t| {
            let seed = cell_seed(cfg.master_seed, 0, t);
            let coords = format!("trial={t} seed={seed}");
            let start = Instant::now();
            let rows = (|| -> CoreResult<Vec<GenRecursionRow>> {
                let op = Arc::new(build_measurement_operator(cfg.operator, n, m, cfg.cond, seed)?);
                let inst = make_instance(&x0_source(cfg), op, noise_model(cfg), cfg.gamma_w, seed)?;
                let vc = vamp_config(cfg, &inst, true, seed)?;
                let run = vamp_run(&inst, &den, &vc)?;
                let r10 = vc.initial_r1(&inst)?;
                let spec = vamp_recursion_spec(&inst, &den, &r10, vc.gamma10, seed)?;
                let gen = general_recursion_run(&spec, run.states.len())?;

                let s = inst.operator.singular_values();
                let se_cfg = SeConfig {
                    trials: cfg.se_trials,
                    ..SeConfig::new(cfg.tau10, 1.0 / cfg.tau10, cfg.iterations, derive(seed, 0x5345))
                };
                let direct = se_run(&den, &inst.x0, s, inst.gamma_w, inst.gamma_w0, &se_cfg)?;
                let general = general_se_run(&vamp_se_spec(&den, &inst.x0, s, inst.gamma_w, inst.gamma_w0, &se_cfg), direct.states.len())?;

                let mut rows = Vec::new();
                for (i, (st, g)) in run.states.iter().zip(&gen).enumerate() {
                    let p: Vec<f64> = st.r1.iter().zip(&inst.x0).map(|(a, b)| a - b).collect();
                    let d: Vec<f64> = st.r2.iter().zip(&inst.x0).map(|(a, b)| a - b).collect();
                    let q = inst.operator.v().apply_transpose(&d);
                    let se_err = match (direct.states.get(i), general.get(i)) {
                        (Some(a), Some(b)) => [(a.tau1, b.tau1), (a.tau2, b.tau2), (a.gbar1, b.gbar1), (a.gbar2, b.gbar2), (a.abar1, b.abar1), (a.abar2, b.abar2)]
                            .iter()
                            .map(|(x, y)| (x - y).abs() / x.abs().max(1.0))
                            .fold(0.0, f64::max),
                        _ => f64::NAN,
                    };
                    rows.push(GenRecursionRow {
                        seed,
                        k: st.k,
                        p_max_err: max_abs_diff(&p, &g.p),
                        q_max_err: max_abs_diff(&q, &g.q),
                        se_max_rel_err: se_err,
                    });
                }
                Ok(rows)
            })()
            .map_err(|e| runtime_err(sc, &coords, e))?;
            Ok((rows, TimingRow::new(coords, seed, ms(start))))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut art = Artifacts::default();
    for (rows, timing) in results {
        art.push_results(&rows)?;
        art.seeds.push(timing.seed);
        art.timing.push(timing);
    }
    Ok(art)
}
