//! Measurement operators in SVD form `A = U·diag(s)·Vᵀ`.

mod hadamard;
mod jacobi;
mod orthogonal;
pub mod pgm;
mod spectrum;
pub mod wavelet;

use nalgebra::DMatrix;

pub use hadamard::{fwht_orthonormal, hadamard_entry};
pub use orthogonal::{haar_orthogonal, HouseholderProduct, OrthogonalMap};
pub use spectrum::{geometric_spectrum, Spectrum};
pub use wavelet::{haar_wavelet_2d, Direction, HaarWavelet2d};

use crate::rng;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    DenseHaar,
    FastJphd,
    Custom,
}

/// An `m × n` operator stored through its SVD. `s` always has `n` entries;
/// entries at index `≥ min(m, n)` are zero.
#[derive(Debug, Clone)]
pub struct SpectralOperator {
    m: usize,
    n: usize,
    s: Vec<f64>,
    u: OrthogonalMap,
    v: OrthogonalMap,
    kind: OperatorKind,
}

impl SpectralOperator {
    pub fn new(
        m: usize,
        s: Vec<f64>,
        u: OrthogonalMap,
        v: OrthogonalMap,
        kind: OperatorKind,
    ) -> Result<Self> {
        let n = v.dim();
        if m == 0 || n == 0 {
            return Err(Error::InvalidDimension("empty operator".into()));
        }
        Error::check_len(m, u.dim())?;
        Error::check_len(n, s.len())?;
        if s.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidSpectrum("negative or non-finite singular value".into()));
        }
        if s[m.min(n)..].iter().any(|v| *v != 0.0) {
            return Err(Error::InvalidSpectrum(
                "singular values beyond min(m, n) must be zero".into(),
            ));
        }
        Ok(SpectralOperator { m, n, s, u, v, kind })
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.s
    }

    pub fn u(&self) -> &OrthogonalMap {
        &self.u
    }

    pub fn v(&self) -> &OrthogonalMap {
        &self.v
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn s_max(&self) -> f64 {
        self.s.iter().copied().fold(0.0, f64::max)
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.s.iter().map(|s| s * s).sum()
    }

    /// `A x`.
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n, "forward input length");
        let t = self.v.apply_transpose(x);
        let mut z = vec![0.0; self.m];
        let k = self.m.min(self.n);
        for i in 0..k {
            z[i] = self.s[i] * t[i];
        }
        self.u.apply(&z)
    }

    /// `Aᵀ y`.
    pub fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.m, "adjoint input length");
        let t = self.u.apply_transpose(y);
        let mut z = vec![0.0; self.n];
        let k = self.m.min(self.n);
        for i in 0..k {
            z[i] = self.s[i] * t[i];
        }
        self.v.apply(&z)
    }

    /// `Uᵀ y` truncated or zero-padded to the `n` coordinates of the
    /// `V` basis.
    pub fn data_coordinates(&self, y: &[f64]) -> Vec<f64> {
        let mut t = self.u.apply_transpose(y);
        t.resize(self.n, 0.0);
        t
    }

    /// Dense `m × n` materialization; intended for checks at small sizes.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.m, self.n);
        let mut e = vec![0.0; self.n];
        for j in 0..self.n {
            e[j] = 1.0;
            a.column_mut(j).copy_from_slice(&self.forward(&e));
            e[j] = 0.0;
        }
        a
    }

    /// SVD of an explicit matrix. `V` is completed from the right singular
    /// vectors by Householder reflections, so no `n × n` factor is formed.
    pub fn from_dense(a: &DMatrix<f64>) -> Result<Self> {
        let (m, n) = a.shape();
        if m == 0 || n == 0 {
            return Err(Error::InvalidDimension("empty matrix".into()));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("dense operator".into()));
        }
        let (u, sv, v) = jacobi::thin_svd(a);
        let k = m.min(n);
        let mut s = vec![0.0; n];
        s[..k].copy_from_slice(&sv);
        // U is m × k; complete it when m > n.
        let u_map = if k == m {
            OrthogonalMap::Dense(u)
        } else {
            OrthogonalMap::Householder(HouseholderProduct::complete_orthonormal_columns(&u)?)
        };
        let v_map = if k == n {
            OrthogonalMap::Dense(v)
        } else {
            OrthogonalMap::Householder(HouseholderProduct::complete_orthonormal_columns(&v)?)
        };
        SpectralOperator::new(m, s, u_map, v_map, OperatorKind::Custom)
    }

    /// The operator `A·Q` for an orthogonal change of variables `x = Q c`,
    /// e.g. measuring wavelet coefficients through an image-domain operator.
    pub fn compose_synthesis(&self, q: OrthogonalMap) -> Result<Self> {
        Error::check_len(self.n, q.dim())?;
        // A·Q = U S Vᵀ Q = U S (Qᵀ V)ᵀ
        let v = OrthogonalMap::Product(vec![OrthogonalMap::Transposed(Box::new(q)), self.v.clone()]);
        SpectralOperator::new(self.m, self.s.clone(), self.u.clone(), v, self.kind)
    }
}

/// Dense-Haar operator with independent Haar `U` (`m × m`) and `V`
/// (`n × n`) and the given spectrum.
pub fn build_operator(spectrum: &Spectrum, m: usize, u_seed: u64, v_seed: u64) -> Result<SpectralOperator> {
    let n = spectrum.len();
    if spectrum.rank() > m {
        return Err(Error::InvalidDimension(format!(
            "spectrum rank {} exceeds m = {m}",
            spectrum.rank()
        )));
    }
    let u = haar_orthogonal(m, u_seed)?;
    let v = haar_orthogonal(n, v_seed)?;
    SpectralOperator::new(m, spectrum.values().to_vec(), u, v, OperatorKind::DenseHaar)
}

/// `A = J·P·H·D`: random ±1 diagonal, orthonormal Walsh–Hadamard transform,
/// random permutation and selection of the first `m` rows.
pub fn fast_jphd_operator(n: usize, m: usize, seed: u64) -> Result<SpectralOperator> {
    if m == 0 || m > n {
        return Err(Error::InvalidDimension(format!("need 1 ≤ m ≤ n, got m={m}, n={n}")));
    }
    let mut s = vec![0.0; n];
    s[..m].iter_mut().for_each(|v| *v = 1.0);
    let spectrum = Spectrum::from_values(s, m)?;
    fast_jphd_with_spectrum(&spectrum, m, seed)
}

/// `A = J·diag(s)·P·H·D`, the fast operator with a prescribed spectrum.
pub fn fast_jphd_with_spectrum(spectrum: &Spectrum, m: usize, seed: u64) -> Result<SpectralOperator> {
    let n = spectrum.len();
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::InvalidDimension(format!("n = {n} is not a power of two")));
    }
    if m == 0 || m > n || spectrum.rank() > m {
        return Err(Error::InvalidDimension(format!("bad row count m = {m} for n = {n}")));
    }
    let mut rng = rng::stream(seed, 0x4a50_4844);
    let signs = (0..n)
        .map(|_| if rand::Rng::random::<bool>(&mut rng) { 1.0 } else { -1.0 })
        .collect();
    let perm = rng::permutation(&mut rng, n);
    SpectralOperator::new(
        m,
        spectrum.values().to_vec(),
        OrthogonalMap::Identity(m),
        OrthogonalMap::SignedHadamard { signs, perm },
        OperatorKind::FastJphd,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dot, matvec, norm, sub};

    fn probe(n: usize, tag: u64) -> Vec<f64> {
        rng::gaussian_vec(&mut rng::stream(1234, tag), n)
    }

    #[test]
    fn identity_custom_operator() {
        let op = SpectralOperator::new(
            5,
            vec![1.0; 5],
            OrthogonalMap::Identity(5),
            OrthogonalMap::Identity(5),
            OperatorKind::Custom,
        )
        .unwrap();
        let x = probe(5, 0);
        assert_eq!(op.forward(&x), x);
    }

    #[test]
    fn dense_haar_matches_dense_product() {
        let spec = geometric_spectrum(6, 8, 10.0).unwrap();
        let op = build_operator(&spec, 6, 1, 2).unwrap();
        let u = op.u().to_dense();
        let v = op.v().to_dense();
        let mut s = DMatrix::zeros(6, 8);
        for i in 0..6 {
            s[(i, i)] = spec.values()[i];
        }
        let a = &u * s * v.transpose();
        let x = probe(8, 1);
        let err = norm(&sub(&op.forward(&x), &matvec(&a, &x)));
        assert!(err < 1e-10 * norm(&x));
        assert!((&a - op.to_dense()).abs().max() < 1e-12);
    }

    #[test]
    fn adjoint_consistency_and_norm_bound() {
        let spec = geometric_spectrum(20, 32, 100.0).unwrap();
        let op = build_operator(&spec, 20, 3, 4).unwrap();
        for t in 0..10 {
            let x = probe(32, 10 + t);
            let y = probe(20, 100 + t);
            let lhs = dot(&op.forward(&x), &y);
            let rhs = dot(&x, &op.adjoint(&y));
            assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0));
            assert!(norm(&op.forward(&x)) <= op.s_max() * norm(&x) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn jphd_orthonormal_rows() {
        let op = fast_jphd_operator(64, 64, 9).unwrap();
        let x = probe(64, 2);
        assert!((norm(&op.forward(&x)) - norm(&x)).abs() < 1e-10 * norm(&x));
        let op = fast_jphd_operator(64, 20, 9).unwrap();
        let y = probe(20, 3);
        let aat = op.forward(&op.adjoint(&y));
        assert!(norm(&sub(&aat, &y)) < 1e-10 * norm(&y));
    }

    #[test]
    fn jphd_matches_explicit_chain() {
        let (n, m) = (16, 6);
        let op = fast_jphd_operator(n, m, 21).unwrap();
        let OrthogonalMap::SignedHadamard { signs, perm } = op.v() else {
            panic!("unexpected V");
        };
        // J·P·H·D built entry by entry
        let scale = 1.0 / (n as f64).sqrt();
        let a = DMatrix::from_fn(m, n, |i, j| hadamard_entry(perm[i], j) * scale * signs[j]);
        assert!((a - op.to_dense()).abs().max() < 1e-12);
    }

    #[test]
    fn jphd_rejects_non_power_of_two() {
        assert!(matches!(fast_jphd_operator(24, 8, 0), Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn from_dense_roundtrip_wide_and_tall() {
        let mut r = rng::stream(5, 5);
        for &(m, n) in &[(5usize, 12usize), (12, 5), (7, 7)] {
            let a = DMatrix::from_fn(m, n, |_, _| rng::gaussian(&mut r));
            let op = SpectralOperator::from_dense(&a).unwrap();
            assert!((op.to_dense() - &a).abs().max() < 1e-12);
            assert!((op.frobenius_sq() - a.norm_squared()).abs() < 1e-9);
        }
    }

    #[test]
    fn wavelet_composition() {
        let w = HaarWavelet2d::full(4).unwrap();
        let spec = geometric_spectrum(8, 16, 1.0).unwrap();
        let op = build_operator(&spec, 8, 1, 1).unwrap();
        let composed = op.compose_synthesis(OrthogonalMap::WaveletSynthesis(w)).unwrap();
        let c = probe(16, 4);
        let want = op.forward(&w.inverse(&c));
        assert!(norm(&sub(&composed.forward(&c), &want)) < 1e-12);
    }
}
