//! Thin SVD through a QR step and one-sided Jacobi rotations on the square
//! triangular factor. Slower than the bidiagonal routine for large `k`, but
//! the factorization reproduces the input to a few ulps.

use nalgebra::DMatrix;

const MAX_SWEEPS: usize = 80;

/// `A = U·diag(s)·Vᵀ` with `U` of size `m × k`, `V` of size `n × k` and
/// `k = min(m, n)`. Singular values come out in decreasing order.
pub(crate) fn thin_svd(a: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let (m, n) = a.shape();
    let wide = m < n;
    let tall = if wide { a.transpose() } else { a.clone() };
    let qr = tall.qr();
    let (q, r) = (qr.q(), qr.r());
    let (w, rot) = one_sided_jacobi(r);
    let k = w.ncols();

    let sigma: Vec<f64> = (0..k).map(|j| w.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]));
    let floor = sigma.iter().copied().fold(0.0, f64::max) * f64::EPSILON * k as f64;

    let mut left = DMatrix::zeros(k, k);
    let mut right = DMatrix::zeros(k, k);
    let mut s = Vec::with_capacity(k);
    let mut deficient = Vec::new();
    for (dst, &src) in order.iter().enumerate() {
        right.set_column(dst, &rot.column(src));
        if sigma[src] > floor {
            left.set_column(dst, &(w.column(src) / sigma[src]));
            s.push(sigma[src]);
        } else {
            deficient.push(dst);
            s.push(0.0);
        }
    }
    complete_columns(&mut left, &deficient);

    let big = q * left;
    if wide {
        (right, s, big)
    } else {
        (big, s, right)
    }
}

/// Rotates column pairs of `w` until all are mutually orthogonal; returns
/// the rotated matrix and the accumulated rotation.
fn one_sided_jacobi(mut w: DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let k = w.ncols();
    let mut rot = DMatrix::identity(k, k);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..k {
            for j in i + 1..k {
                let alpha = w.column(i).norm_squared();
                let beta = w.column(j).norm_squared();
                let gamma = w.column(i).dot(&w.column(j));
                if gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut w, i, j, c, s);
                rotate(&mut rot, i, j, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    (w, rot)
}

fn rotate(x: &mut DMatrix<f64>, i: usize, j: usize, c: f64, s: f64) {
    for row in 0..x.nrows() {
        let (a, b) = (x[(row, i)], x[(row, j)]);
        x[(row, i)] = c * a - s * b;
        x[(row, j)] = s * a + c * b;
    }
}

/// Fills the listed (zero) columns with unit vectors orthogonal to every
/// other column, by Gram–Schmidt over the coordinate axes.
fn complete_columns(u: &mut DMatrix<f64>, missing: &[usize]) {
    let k = u.nrows();
    for &col in missing {
        let mut best: Option<nalgebra::DVector<f64>> = None;
        for axis in 0..k {
            let mut v = nalgebra::DVector::zeros(k);
            v[axis] = 1.0;
            for _ in 0..2 {
                for other in 0..u.ncols() {
                    if other != col {
                        let proj = u.column(other).dot(&v);
                        v -= u.column(other) * proj;
                    }
                }
            }
            if best.as_ref().is_none_or(|b| v.norm() > b.norm()) {
                best = Some(v);
            }
        }
        if let Some(v) = best {
            let norm = v.norm();
            u.set_column(col, &(v / norm));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn check(a: &DMatrix<f64>) {
        let (u, s, v) = thin_svd(a);
        let k = s.len();
        let rec = &u * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(s.clone())) * v.transpose();
        assert!((rec - a).norm() <= 1e-13 * a.norm().max(1.0));
        assert!((u.transpose() * &u - DMatrix::identity(k, k)).abs().max() < 1e-13);
        assert!((v.transpose() * &v - DMatrix::identity(k, k)).abs().max() < 1e-13);
        assert!(s.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn reconstructs_wide_tall_and_square() {
        let mut g = rng::stream(3, 0);
        for &(m, n) in &[(6usize, 15usize), (15, 6), (9, 9), (1, 4)] {
            check(&DMatrix::from_fn(m, n, |_, _| rng::gaussian(&mut g)));
        }
    }

    #[test]
    fn rank_deficient_input() {
        let mut g = rng::stream(3, 1);
        let left = DMatrix::from_fn(8, 2, |_, _| rng::gaussian(&mut g));
        let right = DMatrix::from_fn(2, 12, |_, _| rng::gaussian(&mut g));
        let a = left * right;
        check(&a);
        let (_, s, _) = thin_svd(&a);
        assert!(s[2..].iter().all(|v| *v < 1e-12 * s[0]));
        check(&DMatrix::zeros(4, 7));
    }
}
