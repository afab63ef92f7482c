//! Small dense helpers on top of nalgebra.

use alloc::vec::Vec;


use crate::{Error, Matrix, Result, Vector};

/// Ascending eigenpairs of a symmetric matrix. Each eigenvector is flipped
/// so its first component with magnitude above `1e-12` is positive.
pub(crate) fn sym_eigen_sorted(m: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let n = m.nrows();
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        let v = eig.eigenvectors.column(i);
        let sign = v
            .iter()
            .find(|x| x.abs() > 1e-12)
            .map_or(1.0, |x| x.signum());
        vectors.set_column(col, &(v * sign));
    }
    Ok((values, vectors))
}

/// Solves `a x = b` by LU with partial pivoting, rejecting systems whose
/// pivot ratio signals numerical singularity.
pub(crate) fn lu_solve(a: &Matrix, b: &Vector) -> Result<Vector> {
    let lu = a.clone().lu();
    let u = lu.u();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..u.nrows() {
        let p = u[(i, i)].abs();
        lo = lo.min(p);
        hi = hi.max(p);
    }
    if !(lo > 1e-14 * hi) {
        return Err(Error::IllConditioned(if lo > 0.0 { hi / lo } else { f64::INFINITY }));
    }
    lu.solve(b).ok_or(Error::IllConditioned(f64::INFINITY))
}

/// Least-squares line `y = slope * x + intercept` and its R².
pub(crate) fn linear_regression(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
        syy += (b - my) * (b - my);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    } else {
        1.0
    };
    (slope, intercept, r2)
}
