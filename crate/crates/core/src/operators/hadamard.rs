/// In-place fast Walsh–Hadamard transform in natural (Sylvester) order,
/// scaled by `1/√n` so the transform is orthonormal and self-inverse.
///
/// `data.len()` must be a power of two.
pub fn fwht_orthonormal(data: &mut [f64]) {
    let n = data.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for block in data.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
    let scale = 1.0 / (n as f64).sqrt();
    data.iter_mut().for_each(|v| *v *= scale);
}

/// Entry `(i, j)` of the unnormalized Sylvester–Hadamard matrix.
pub fn hadamard_entry(i: usize, j: usize) -> f64 {
    if (i & j).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_sylvester_matrix() {
        let n = 16;
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            fwht_orthonormal(&mut e);
            for (i, v) in e.iter().enumerate() {
                assert!((v - hadamard_entry(i, j) / 4.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn self_inverse() {
        let x: Vec<f64> = (0..32).map(|i| (i as f64).sin()).collect();
        let mut y = x.clone();
        fwht_orthonormal(&mut y);
        fwht_orthonormal(&mut y);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}
