use nalgebra::Complex;

/// Linear FIR smoother `g_n = Σ_k h_k r_{n−k+origin}`, truncated to the
/// first `N` samples. `origin = 0` is the causal filter `T_N(h * r)`;
/// other origins centre the taps.
#[derive(Debug, Clone, PartialEq)]
pub struct Fir {
    pub taps: Vec<f64>,
    pub origin: usize,
}

impl Fir {
    pub fn causal(taps: Vec<f64>) -> Self {
        Fir { taps, origin: 0 }
    }

    pub fn centered(taps: Vec<f64>) -> Self {
        let origin = taps.len() / 2;
        Fir { taps, origin }
    }

    pub fn apply(&self, r: &[f64]) -> Vec<f64> {
        let n = r.len() as isize;
        let origin = self.origin as isize;
        (0..n)
            .map(|i| {
                self.taps
                    .iter()
                    .enumerate()
                    .filter_map(|(k, h)| {
                        let j = i - k as isize + origin;
                        (0..n).contains(&j).then(|| h * r[j as usize])
                    })
                    .sum()
            })
            .collect()
    }

    /// Every diagonal entry of the convolution matrix is the lag-zero tap.
    pub fn divergence(&self) -> f64 {
        self.taps[self.origin]
    }

    /// `max_θ |Ĥ(e^{iθ})|` over `grid` equispaced frequencies.
    pub fn lipschitz_bound(&self, grid: usize) -> f64 {
        (0..grid)
            .map(|g| {
                let theta = 2.0 * std::f64::consts::PI * g as f64 / grid as f64;
                self.taps
                    .iter()
                    .enumerate()
                    .map(|(k, &h)| Complex::from_polar(h, -(k as f64) * theta))
                    .sum::<Complex<f64>>()
                    .norm()
            })
            .fold(0.0, f64::max)
    }
}
