//! Orthogonal maps in implicit form.

use nalgebra::DMatrix;
use rand::Rng;

use super::hadamard::fwht_orthonormal;
use super::wavelet::HaarWavelet2d;
use crate::rng;
use crate::{Error, Result};

/// An `n × n` orthogonal matrix `Q`, applied without materializing it
/// whenever a structured form is available.
#[derive(Debug, Clone)]
pub enum OrthogonalMap {
    Identity(usize),
    Dense(DMatrix<f64>),
    Householder(HouseholderProduct),
    /// `Q = D·H·Pᵀ`, so `Qᵀ = P·H·D` with `D` a ±1 diagonal, `H` the
    /// orthonormal Walsh–Hadamard matrix and `(P x)_i = x_{perm[i]}`.
    SignedHadamard { signs: Vec<f64>, perm: Vec<usize> },
    /// `Q = Ψᵀ` (wavelet synthesis); `Qᵀ` is the analysis transform.
    WaveletSynthesis(HaarWavelet2d),
    Transposed(Box<OrthogonalMap>),
    /// `Q = Q₀·Q₁·…·Q_{k−1}`.
    Product(Vec<OrthogonalMap>),
}

impl OrthogonalMap {
    pub fn dim(&self) -> usize {
        match self {
            OrthogonalMap::Identity(n) => *n,
            OrthogonalMap::Dense(q) => q.nrows(),
            OrthogonalMap::Householder(h) => h.n,
            OrthogonalMap::SignedHadamard { signs, .. } => signs.len(),
            OrthogonalMap::WaveletSynthesis(w) => w.len(),
            OrthogonalMap::Transposed(q) => q.dim(),
            OrthogonalMap::Product(qs) => qs.first().map_or(0, |q| q.dim()),
        }
    }

    /// `Q x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dim());
        match self {
            OrthogonalMap::Identity(_) => x.to_vec(),
            OrthogonalMap::Dense(q) => crate::linalg::matvec(q, x),
            OrthogonalMap::Householder(h) => h.apply(x),
            OrthogonalMap::SignedHadamard { signs, perm } => {
                let mut y = vec![0.0; x.len()];
                for (i, &p) in perm.iter().enumerate() {
                    y[p] = x[i];
                }
                fwht_orthonormal(&mut y);
                y.iter_mut().zip(signs).for_each(|(v, s)| *v *= s);
                y
            }
            OrthogonalMap::WaveletSynthesis(w) => w.inverse(x),
            OrthogonalMap::Transposed(q) => q.apply_transpose(x),
            OrthogonalMap::Product(qs) => qs
                .iter()
                .rev()
                .fold(x.to_vec(), |acc, q| q.apply(&acc)),
        }
    }

    /// `Qᵀ x`.
    pub fn apply_transpose(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dim());
        match self {
            OrthogonalMap::Identity(_) => x.to_vec(),
            OrthogonalMap::Dense(q) => crate::linalg::matvec_transpose(q, x),
            OrthogonalMap::Householder(h) => h.apply_transpose(x),
            OrthogonalMap::SignedHadamard { signs, perm } => {
                let mut y: Vec<f64> = x.iter().zip(signs).map(|(v, s)| v * s).collect();
                fwht_orthonormal(&mut y);
                perm.iter().map(|&p| y[p]).collect()
            }
            OrthogonalMap::WaveletSynthesis(w) => w.forward(x),
            OrthogonalMap::Transposed(q) => q.apply(x),
            OrthogonalMap::Product(qs) => qs
                .iter()
                .fold(x.to_vec(), |acc, q| q.apply_transpose(&acc)),
        }
    }

    /// Materializes `Q` column by column.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut q = DMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = self.apply(&e);
            q.column_mut(j).copy_from_slice(&col);
            e[j] = 0.0;
        }
        q
    }
}

/// `Q = H₀·H₁·…·H_{k−1}·D` where `H_j = I − 2 w_j w_jᵀ` acts on
/// coordinates `j..n` and `D` is a ±1 diagonal.
#[derive(Debug, Clone)]
pub struct HouseholderProduct {
    n: usize,
    /// Unit reflector vectors, reflector `j` occupying `n − j` entries.
    data: Vec<f64>,
    offsets: Vec<usize>,
    signs: Vec<f64>,
}

impl HouseholderProduct {
    fn reflector(&self, j: usize) -> &[f64] {
        &self.data[self.offsets[j]..self.offsets[j] + (self.n - j)]
    }

    fn reflect(w: &[f64], y: &mut [f64]) {
        let c = 2.0 * crate::linalg::dot(w, y);
        y.iter_mut().zip(w).for_each(|(v, wi)| *v -= c * wi);
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y: Vec<f64> = x.iter().zip(&self.signs).map(|(v, s)| v * s).collect();
        for j in (0..self.offsets.len()).rev() {
            Self::reflect(self.reflector(j), &mut y[j..]);
        }
        y
    }

    pub fn apply_transpose(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        for j in 0..self.offsets.len() {
            Self::reflect(self.reflector(j), &mut y[j..]);
        }
        y.iter_mut().zip(&self.signs).for_each(|(v, s)| *v *= s);
        y
    }

    /// Builds the reflector for column slice `x`, returning the unit vector
    /// and the resulting diagonal entry `R_jj = −sign(x₀)‖x‖`.
    fn householder_vector(x: &[f64]) -> (Vec<f64>, f64) {
        let norm = crate::linalg::norm(x);
        let sign = if x[0] >= 0.0 { 1.0 } else { -1.0 };
        let alpha = -sign * norm;
        let mut w = x.to_vec();
        w[0] -= alpha;
        let wn = crate::linalg::norm(&w);
        if wn > 0.0 {
            w.iter_mut().for_each(|v| *v /= wn);
        }
        (w, alpha)
    }

    /// Haar-distributed orthogonal matrix from the Householder QR of an
    /// i.i.d. standard normal matrix. By rotational invariance the trailing
    /// block seen by reflector `j` is again i.i.d. normal, so each reflector
    /// is built from a fresh Gaussian vector of length `n − j`. The sign of
    /// each `R_jj` is folded into column `j`.
    pub fn haar<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut data = Vec::with_capacity(n * (n + 1) / 2);
        let mut offsets = Vec::with_capacity(n);
        let mut signs = Vec::with_capacity(n);
        for j in 0..n {
            let g = rng::gaussian_vec(rng, n - j);
            let (w, r_jj) = Self::householder_vector(&g);
            offsets.push(data.len());
            data.extend_from_slice(&w);
            signs.push(if r_jj >= 0.0 { 1.0 } else { -1.0 });
        }
        HouseholderProduct {
            n,
            data,
            offsets,
            signs,
        }
    }

    /// Completes an `n × r` matrix with orthonormal columns to an orthogonal
    /// map whose first `r` columns reproduce it exactly.
    pub fn complete_orthonormal_columns(basis: &DMatrix<f64>) -> Result<Self> {
        let (n, r) = basis.shape();
        if r > n {
            return Err(Error::InvalidDimension(format!(
                "{r} orthonormal columns in dimension {n}"
            )));
        }
        let mut work = basis.clone();
        let mut data = Vec::new();
        let mut offsets = Vec::with_capacity(r);
        let mut signs = vec![1.0; n];
        for j in 0..r {
            let x: Vec<f64> = work.column(j).rows(j, n - j).iter().copied().collect();
            let (w, r_jj) = Self::householder_vector(&x);
            for c in j..r {
                let mut col: Vec<f64> = work.column(c).rows(j, n - j).iter().copied().collect();
                Self::reflect(&w, &mut col);
                work.column_mut(c).rows_mut(j, n - j).copy_from_slice(&col);
            }
            offsets.push(data.len());
            data.extend_from_slice(&w);
            signs[j] = if r_jj >= 0.0 { 1.0 } else { -1.0 };
        }
        Ok(HouseholderProduct {
            n,
            data,
            offsets,
            signs,
        })
    }
}

/// Samples an `n × n` Haar orthogonal map from `seed`.
pub fn haar_orthogonal(n: usize, seed: u64) -> Result<OrthogonalMap> {
    if n == 0 {
        return Err(Error::InvalidDimension("Haar sample needs n ≥ 1".into()));
    }
    let mut rng = rng::stream(seed, 0x4841_4152);
    Ok(OrthogonalMap::Householder(HouseholderProduct::haar(n, &mut rng)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dot, norm};

    fn probe(n: usize, seed: u64) -> Vec<f64> {
        rng::gaussian_vec(&mut rng::stream(seed, 99), n)
    }

    #[test]
    fn zero_dimension_rejected() {
        assert!(matches!(haar_orthogonal(0, 1), Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn one_by_one_is_plus_or_minus_one() {
        for seed in 0..20 {
            let q = haar_orthogonal(1, seed).unwrap().to_dense();
            assert_eq!(q[(0, 0)].abs(), 1.0);
        }
    }

    #[test]
    fn isometry_and_transpose_inverse() {
        for &n in &[2usize, 7, 64, 300] {
            let q = haar_orthogonal(n, n as u64).unwrap();
            let x = probe(n, 1);
            let qx = q.apply(&x);
            assert!((norm(&qx) - norm(&x)).abs() <= 1e-10 * norm(&x));
            let back = q.apply_transpose(&qx);
            let err = norm(&crate::linalg::sub(&back, &x));
            assert!(err <= 1e-10 * norm(&x));
        }
    }

    #[test]
    fn dense_materialization_is_orthogonal() {
        let q = haar_orthogonal(16, 5).unwrap().to_dense();
        let qtq = q.transpose() * &q;
        let err = (qtq - DMatrix::<f64>::identity(16, 16)).abs().max();
        assert!(err < 1e-12);
    }

    #[test]
    fn completion_reproduces_basis_columns() {
        let mut rng = rng::stream(11, 0);
        let g = DMatrix::from_fn(12, 4, |_, _| rng::gaussian(&mut rng));
        let basis = g.qr().q();
        let q = HouseholderProduct::complete_orthonormal_columns(&basis).unwrap();
        let dense = OrthogonalMap::Householder(q).to_dense();
        for j in 0..4 {
            let err = (dense.column(j) - basis.column(j)).abs().max();
            assert!(err < 1e-12, "column {j} off by {err}");
        }
        let qtq = dense.transpose() * &dense;
        assert!((qtq - DMatrix::<f64>::identity(12, 12)).abs().max() < 1e-12);
    }

    #[test]
    fn product_and_transpose_compose() {
        let a = haar_orthogonal(8, 1).unwrap();
        let b = haar_orthogonal(8, 2).unwrap();
        let dense = a.to_dense() * b.to_dense().transpose();
        let prod = OrthogonalMap::Product(vec![a, OrthogonalMap::Transposed(Box::new(b))]);
        let x = probe(8, 3);
        let want = crate::linalg::matvec(&dense, &x);
        let got = prod.apply(&x);
        assert!(norm(&crate::linalg::sub(&want, &got)) < 1e-12);
        let back = prod.apply_transpose(&got);
        assert!(dot(&back, &x) > 0.0);
        assert!(norm(&crate::linalg::sub(&back, &x)) < 1e-12);
    }
}
