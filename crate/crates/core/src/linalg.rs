//! Dense complex linear algebra helpers.

use nalgebra::DMatrix;

use crate::C64;

/// Moore-Penrose pseudo-inverse via SVD with its numerical rank.
///
/// Singular values at or below `rtol · σ_max` are treated as zero.
pub fn pseudo_inverse(m: &DMatrix<C64>, rtol: f64) -> (DMatrix<C64>, usize) {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return (DMatrix::zeros(cols, rows), 0);
    }
    let svd = m.clone().svd(true, true);
    let (u, v_t) = (svd.u.expect("requested U"), svd.v_t.expect("requested V^H"));
    let sigma_max = svd.singular_values.max();
    let cutoff = rtol * sigma_max;
    let mut out = DMatrix::zeros(cols, rows);
    let mut rank = 0;
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s <= cutoff || s == 0.0 {
            continue;
        }
        rank += 1;
        let vk = v_t.row(k).adjoint();
        let uk = u.column(k).adjoint();
        out += (vk * uk) * C64::from(1.0 / s);
    }
    (out, rank)
}
