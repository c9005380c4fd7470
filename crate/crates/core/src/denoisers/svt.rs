use nalgebra::DMatrix;

/// Singular-value soft-thresholding of `r` viewed column-major as a
/// `rows × cols` matrix: `Σ (σ_i − threshold)₊ u_i v_iᵀ`.
pub fn svt(r: &[f64], rows: usize, cols: usize, threshold: f64) -> Vec<f64> {
    let m = DMatrix::from_column_slice(rows, cols, r);
    let mut svd = m.svd(true, true);
    svd.singular_values
        .iter_mut()
        .for_each(|s| *s = (*s - threshold).max(0.0));
    let out = svd.recompose().expect("both factors requested");
    out.as_slice().to_vec()
}
