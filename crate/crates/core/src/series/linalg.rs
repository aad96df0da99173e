//! Small dense least squares for the ADF and AR regressions.

/// Result of an ordinary least-squares solve.
#[derive(Debug, Clone)]
pub(crate) struct OlsFit {
    /// One entry per design column; dropped columns get 0.
    pub coef: Vec<f64>,
    /// Diagonal of `(X'X)^-1` over retained columns, `None` for dropped ones.
    pub inv_gram_diag: Vec<Option<f64>>,
    pub dropped: Vec<usize>,
    pub rss: f64,
    pub nobs: usize,
    pub rank: usize,
}

/// Relative tolerance below which a column counts as linearly dependent on
/// the ones before it.
const DEPENDENCE_TOL: f64 = 1e-9;

/// Least squares via modified Gram-Schmidt with one re-orthogonalization pass.
///
/// `columns[j]` is design column `j`, all of length `y.len()`. Columns that
/// are numerically dependent on earlier ones are dropped rather than
/// failing; callers decide whether that is acceptable.
pub(crate) fn ols(columns: &[Vec<f64>], y: &[f64]) -> OlsFit {
    let n = y.len();
    let p = columns.len();
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(p);
    // r[k][m]: entry of R at (retained k, retained m), filled column by column.
    let mut r: Vec<Vec<f64>> = Vec::with_capacity(p);
    let mut kept = Vec::with_capacity(p);
    let mut dropped = Vec::new();

    for (j, col) in columns.iter().enumerate() {
        debug_assert_eq!(col.len(), n);
        let norm0 = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut v = col.clone();
        let mut coeffs = vec![0.0; q.len()];
        for _pass in 0..2 {
            for (k, qk) in q.iter().enumerate() {
                let dot: f64 = qk.iter().zip(&v).map(|(a, b)| a * b).sum();
                coeffs[k] += dot;
                for (vi, qi) in v.iter_mut().zip(qk) {
                    *vi -= dot * qi;
                }
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm0 == 0.0 || norm <= DEPENDENCE_TOL * norm0 {
            dropped.push(j);
            continue;
        }
        for vi in &mut v {
            *vi /= norm;
        }
        for (rk, c) in r.iter_mut().zip(&coeffs) {
            rk.push(*c);
        }
        let mut row = vec![0.0; kept.len()];
        row.push(norm);
        r.push(row);
        q.push(v);
        kept.push(j);
    }

    let rank = kept.len();
    // Upper-triangular R as dense rank x rank.
    let rmat = |i: usize, j: usize| -> f64 { r[i][j] };

    let qty: Vec<f64> = q.iter().map(|qk| qk.iter().zip(y).map(|(a, b)| a * b).sum()).collect();
    let mut beta = vec![0.0; rank];
    for i in (0..rank).rev() {
        let mut acc = qty[i];
        for j in i + 1..rank {
            acc -= rmat(i, j) * beta[j];
        }
        beta[i] = acc / rmat(i, i);
    }

    // R^-1 by back substitution, column by column.
    let mut rinv = vec![vec![0.0; rank]; rank];
    for c in 0..rank {
        for i in (0..=c).rev() {
            let mut acc = if i == c { 1.0 } else { 0.0 };
            for j in i + 1..=c {
                acc -= rmat(i, j) * rinv[j][c];
            }
            rinv[i][c] = acc / rmat(i, i);
        }
    }
    // (X'X)^-1 = R^-1 R^-T, diagonal entry i = sum_c rinv[i][c]^2.
    let diag: Vec<f64> = (0..rank).map(|i| rinv[i].iter().map(|v| v * v).sum()).collect();

    let mut coef = vec![0.0; p];
    let mut inv_gram_diag = vec![None; p];
    for (k, &j) in kept.iter().enumerate() {
        coef[j] = beta[k];
        inv_gram_diag[j] = Some(diag[k]);
    }
    let rss = (0..n)
        .map(|t| {
            let fitted: f64 = columns.iter().zip(&coef).map(|(col, b)| col[t] * b).sum();
            let e = y[t] - fitted;
            e * e
        })
        .sum();

    OlsFit {
        coef,
        inv_gram_diag,
        dropped,
        rss,
        nobs: n,
        rank,
    }
}
