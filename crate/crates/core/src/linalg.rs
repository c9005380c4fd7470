//! Small dense-vector helpers shared across modules.

use nalgebra::DMatrix;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

/// `(1/N)‖a − b‖²`.
pub fn mse(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len().max(1) as f64;
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / n
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], c: f64) -> Vec<f64> {
    a.iter().map(|x| c * x).collect()
}

pub fn all_finite(a: &[f64]) -> bool {
    a.iter().all(|x| x.is_finite())
}

/// Dense matrix–vector product.
pub fn matvec(a: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    let xv = nalgebra::DVectorView::from_slice(x, x.len());
    (a * xv).as_slice().to_vec()
}

pub fn matvec_transpose(a: &DMatrix<f64>, y: &[f64]) -> Vec<f64> {
    let yv = nalgebra::DVectorView::from_slice(y, y.len());
    a.tr_mul(&yv).as_slice().to_vec()
}
