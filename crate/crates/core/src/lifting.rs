//! Bilinear problems `y = (Σ_l b_l Φ_l) c + w` rewritten as linear problems
//! in the rank-one vector `x = vec(c bᵀ)`, with `A = [Φ₁ Φ₂ ⋯ Φ_L]`.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::denoisers::{DenoiserKind, DenoiserSpec, DivergenceMode, RankOneDenoiser};
use crate::linalg::{norm_sq, sub};
use crate::operators::{build_operator, geometric_spectrum, hadamard_entry, SpectralOperator};
use crate::rng;
use crate::vamp::{draw_rank_one_factors, make_instance_from, outer_vec, Noise, ProblemInstance};
use crate::{to_db, Error, Result};

/// Success threshold on `nmse_outer`, in dB.
pub const SUCCESS_DB: f64 = -60.0;

#[derive(Debug, Clone)]
pub struct LiftedInstance {
    pub l: usize,
    pub p: usize,
    pub k: usize,
    pub phis: Vec<DMatrix<f64>>,
    pub b0: Vec<f64>,
    pub c0: Vec<f64>,
    /// Known entries of `b`.
    pub clamp: Vec<Option<f64>>,
    pub snr_db: Option<f64>,
    /// The linear problem in `x⁰ = vec(c⁰ b⁰ᵀ)`.
    pub problem: ProblemInstance,
}

impl LiftedInstance {
    pub fn x0(&self) -> &[f64] {
        &self.problem.x0
    }

    /// The rank-one denoiser matched to the factor priors, with the
    /// instance's clamp applied and Monte Carlo divergence.
    pub fn denoiser(&self, inner_iters: usize) -> Result<DenoiserSpec> {
        let rho = (self.k as f64 / self.p as f64).clamp(1e-6, 1.0 - 1e-6);
        let mut d = RankOneDenoiser::new(self.l, self.p, rho, 1.0, inner_iters)?;
        for (i, v) in self.clamp.iter().enumerate() {
            if let Some(v) = v {
                d = d.with_known_b(i, *v)?;
            }
        }
        DenoiserSpec::new(DenoiserKind::LiftedRankOne(d), DivergenceMode::monte_carlo())
    }

    /// `Σ_l b_l Φ_l c`, evaluated directly from the blocks.
    pub fn bilinear(&self, b: &[f64], c: &[f64]) -> Vec<f64> {
        let m = self.phis[0].nrows();
        let mut out = nalgebra::DVector::zeros(m);
        let cv = nalgebra::DVector::from_column_slice(c);
        for (phi, bl) in self.phis.iter().zip(b) {
            out += phi * &cv * *bl;
        }
        out.as_slice().to_vec()
    }
}

/// Concatenates the blocks into `A = [Φ₁ ⋯ Φ_L]` and factors it once.
pub fn build_lifted_operator(phis: &[DMatrix<f64>]) -> Result<(DMatrix<f64>, SpectralOperator)> {
    let first = phis.first().ok_or_else(|| Error::InvalidDimension("no blocks".into()))?;
    let (m, p) = first.shape();
    if m == 0 || p == 0 {
        return Err(Error::InvalidDimension("empty block".into()));
    }
    if let Some(bad) = phis.iter().find(|phi| phi.shape() != (m, p)) {
        return Err(Error::InvalidDimension(format!(
            "block shape {:?} differs from {:?}",
            bad.shape(),
            (m, p)
        )));
    }
    let mut a = DMatrix::zeros(m, p * phis.len());
    for (l, phi) in phis.iter().enumerate() {
        a.view_mut((0, l * p), (m, p)).copy_from(phi);
    }
    let op = SpectralOperator::from_dense(&a)?;
    Ok((a, op))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OperatorStyle {
    /// Blocks with i.i.d. `N(0, 1/M)` entries.
    IidGaussian,
    /// `A` dense-Haar with a geometric spectrum, split into blocks.
    HaarGeometric { cond: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsmuParams {
    pub l: usize,
    pub p: usize,
    pub k: usize,
    pub m: usize,
    /// Value of the known first entry of `b`.
    pub b1: f64,
    pub style: OperatorStyle,
    /// `None` for noiseless data.
    pub snr_db: Option<f64>,
}

fn lifted_instance(
    l: usize,
    p: usize,
    k: usize,
    phis: Vec<DMatrix<f64>>,
    operator: Option<SpectralOperator>,
    b0: Vec<f64>,
    c0: Vec<f64>,
    clamp: Vec<Option<f64>>,
    snr_db: Option<f64>,
    seed: u64,
) -> Result<LiftedInstance> {
    let op = match operator {
        Some(op) => op,
        None => build_lifted_operator(&phis)?.1,
    };
    let x0 = outer_vec(&b0, &c0);
    let noise = snr_db.map_or(Noise::Noiseless, Noise::SnrDb);
    let problem = make_instance_from(x0, Arc::new(op), noise, None, seed)?;
    let inst = LiftedInstance { l, p, k, phis, b0, c0, clamp, snr_db, problem };
    check_lifting_identity(&inst)?;
    Ok(inst)
}

fn check_lifting_identity(inst: &LiftedInstance) -> Result<()> {
    let direct = inst.bilinear(&inst.b0, &inst.c0);
    let lifted = inst.problem.operator.forward(inst.x0());
    let scale = norm_sq(&direct).sqrt().max(1.0);
    let err = norm_sq(&sub(&direct, &lifted)).sqrt();
    if err > 1e-9 * scale {
        return Err(Error::NonFinite(format!("lifting identity violated by {err:e}")));
    }
    Ok(())
}

/// Compressed sensing with matrix uncertainty: `b₁` is known, the other
/// `b_l` are i.i.d. `N(0, 1)`, `c` is `k`-sparse.
pub fn make_csmu_instance(params: &CsmuParams, seed: u64) -> Result<LiftedInstance> {
    let CsmuParams { l, p, k, m, b1, style, snr_db } = *params;
    if l == 0 || p == 0 || m == 0 || k > p || m > l * p {
        return Err(Error::InvalidDimension(format!(
            "need K ≤ P and 1 ≤ M ≤ L·P; got L={l}, P={p}, K={k}, M={m}"
        )));
    }
    let mut g = rng::stream(seed, 0x4353_4d55);
    let (mut b0, c0) = draw_rank_one_factors(l, p, k, &mut g);
    b0[0] = b1;
    let (phis, operator) = match style {
        OperatorStyle::IidGaussian => {
            let sd = (m as f64).sqrt().recip();
            let phis = (0..l)
                .map(|_| DMatrix::from_vec(m, p, rng::gaussian_vec(&mut g, m * p)).scale(sd))
                .collect();
            (phis, None)
        }
        OperatorStyle::HaarGeometric { cond } => {
            let spectrum = geometric_spectrum(m, l * p, cond)?;
            let op = build_operator(&spectrum, m, rng::derive(seed, 10), rng::derive(seed, 11))?;
            let a = op.to_dense();
            let phis = (0..l).map(|i| a.columns(i * p, p).into_owned()).collect();
            (phis, Some(op))
        }
    };
    let mut clamp = vec![None; l];
    clamp[0] = Some(b1);
    lifted_instance(l, p, k, phis, operator, b0, c0, clamp, snr_db, rng::derive(seed, 1))
}

/// Self-calibration `y = Diag(H b) Ψ c` with `Φ_l = Diag(h_l) Ψ`: `Ψ`
/// i.i.d. `N(0, 1)`, `H` made of `L` distinct random columns of the `M × M`
/// Hadamard matrix (±1 entries), no noise.
pub fn make_selfcal_instance(l: usize, p: usize, k: usize, m: usize, seed: u64) -> Result<LiftedInstance> {
    if m == 0 || !m.is_power_of_two() {
        return Err(Error::InvalidDimension(format!("M = {m} is not a power of two")));
    }
    if l == 0 || l > m || p == 0 || k > p {
        return Err(Error::InvalidDimension(format!(
            "need 1 ≤ L ≤ M and K ≤ P; got L={l}, P={p}, K={k}, M={m}"
        )));
    }
    let mut g = rng::stream(seed, 0x5343_414c);
    let (b0, c0) = draw_rank_one_factors(l, p, k, &mut g);
    let psi = DMatrix::from_vec(m, p, rng::gaussian_vec(&mut g, m * p));
    let cols = rng::permutation(&mut g, m);
    let phis = cols[..l]
        .iter()
        .map(|&j| {
            let mut phi = psi.clone();
            for (i, mut row) in phi.row_iter_mut().enumerate() {
                row *= hadamard_entry(i, j);
            }
            phi
        })
        .collect();
    lifted_instance(l, p, k, phis, None, b0, c0, vec![None; l], None, rng::derive(seed, 1))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveryScore {
    pub nmse_b_db: f64,
    pub nmse_c_db: f64,
    pub nmse_outer_db: f64,
    pub success: bool,
}

/// Scores an estimate of `vec(c bᵀ)`. The factor pair is read from the
/// leading singular pair `σ u vᵀ` of the reshaped `P × L` estimate; each
/// factor is then aligned to the truth by least squares, which removes the
/// scale and sign ambiguity. `nmse_outer` compares `σ u vᵀ` with `c⁰ b⁰ᵀ`.
pub fn score_recovery(xhat: &[f64], inst: &LiftedInstance) -> Result<RecoveryScore> {
    let (l, p) = (inst.l, inst.p);
    Error::check_len(l * p, xhat.len())?;
    let (nb, nc) = (norm_sq(&inst.b0), norm_sq(&inst.c0));
    if nb == 0.0 || nc == 0.0 {
        return Err(Error::InvalidParameter("true factors have zero norm".into()));
    }
    if !crate::linalg::all_finite(xhat) {
        return Err(Error::NonFinite("estimate".into()));
    }
    let x = DMatrix::from_column_slice(p, l, xhat);
    let svd = x.svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let idx = svd.singular_values.imax();
    let sigma = svd.singular_values[idx];
    let uc: Vec<f64> = u.column(idx).iter().copied().collect();
    let vb: Vec<f64> = vt.row(idx).iter().copied().collect();

    let align = |dir: &[f64], truth: &[f64]| -> f64 {
        let coef = crate::linalg::dot(dir, truth);
        let fit: Vec<f64> = dir.iter().map(|d| coef * d).collect();
        norm_sq(&sub(&fit, truth)) / norm_sq(truth)
    };
    let rank_one: Vec<f64> = outer_vec(&vb, &uc).iter().map(|v| sigma * v).collect();
    let nmse_outer = norm_sq(&sub(&rank_one, inst.x0())) / (nb * nc);
    let nmse_outer_db = to_db(nmse_outer);
    Ok(RecoveryScore {
        nmse_b_db: to_db(align(&vb, &inst.b0)),
        nmse_c_db: to_db(align(&uc, &inst.c0)),
        nmse_outer_db,
        success: nmse_outer_db < SUCCESS_DB,
    })
}
