/// Group-LASSO proximal map applied to consecutive groups of `k` entries:
/// each group `r_ℓ` maps to `r_ℓ·max(0, 1 − θ/‖r_ℓ‖)`.
pub fn group_soft_threshold(r: &[f64], k: usize, theta: f64) -> Vec<f64> {
    let mut out = vec![0.0; r.len()];
    for (row, dst) in r.chunks_exact(k).zip(out.chunks_exact_mut(k)) {
        let norm = crate::linalg::norm(row);
        if norm > theta {
            let shrink = 1.0 - theta / norm;
            dst.iter_mut().zip(row).for_each(|(d, v)| *d = shrink * v);
        }
    }
    out
}

/// `(1/N)·Σ_{ℓ: ‖r_ℓ‖>θ} [K − θ(K−1)/‖r_ℓ‖]`.
pub fn group_soft_threshold_divergence(r: &[f64], k: usize, theta: f64) -> f64 {
    let total: f64 = r
        .chunks_exact(k)
        .map(|row| {
            let norm = crate::linalg::norm(row);
            if norm > theta {
                k as f64 - theta * (k as f64 - 1.0) / norm
            } else {
                0.0
            }
        })
        .sum();
    total / r.len() as f64
}
