//! Separable scalar denoisers.

/// `sign(r)·max(|r| − θ, 0)`.
pub fn soft_threshold(r: f64, theta: f64) -> f64 {
    if r > theta {
        r - theta
    } else if r < -theta {
        r + theta
    } else {
        0.0
    }
}

/// Posterior mean of `x ~ ρ·N(0, σ²) + (1 − ρ)·δ₀` observed as
/// `r = x + N(0, 1/γ)`, together with its derivative in `r`.
///
/// The active-component responsibility is evaluated as a logistic function
/// of the log-likelihood ratio, which stays finite for very large `γ`.
pub fn bg_mmse_scalar(r: f64, gamma: f64, rho: f64, sigma_x2: f64) -> (f64, f64) {
    let noise_var = 1.0 / gamma;
    let total_var = sigma_x2 + noise_var;
    let gain = sigma_x2 / total_var;
    // 1/v − 1/(σ² + v)
    let curvature = gain * gamma;
    let llr = (rho / (1.0 - rho)).ln() + 0.5 * (noise_var / total_var).ln() + 0.5 * r * r * curvature;
    let active = logistic(llr);
    let inactive = logistic(-llr);
    let xhat = active * gain * r;
    let deriv = gain * active * (1.0 + inactive * r * r * curvature);
    (xhat, deriv)
}

fn logistic(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}
