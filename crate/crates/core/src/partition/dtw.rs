use serde::Serialize;

use crate::error::{Error, Result};

/// Dynamic time warping cost with `|a_i - b_j|` local cost and no band.
/// Paths start at `(0, 0)` and end at `(len_a - 1, len_b - 1)`.
pub fn dtw_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("DTW needs two non-empty sequences"));
    }
    let m = b.len();
    let mut prev = vec![f64::INFINITY; m + 1];
    let mut curr = vec![f64::INFINITY; m + 1];
    prev[0] = 0.0;
    for &ai in a {
        curr[0] = f64::INFINITY;
        for j in 1..=m {
            let best = prev[j - 1].min(prev[j]).min(curr[j - 1]);
            curr[j] = (ai - b[j - 1]).abs() + best;
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    Ok(prev[m])
}

/// Optimal warping path and its cost.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DtwAlignment {
    pub cost: f64,
    /// `(i, j)` index pairs from `(0, 0)` to the end.
    pub path: Vec<(usize, usize)>,
}

/// Full-matrix DTW with backtracking. Ties prefer the diagonal step.
pub fn dtw_path(a: &[f64], b: &[f64]) -> Result<DtwAlignment> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("DTW needs two non-empty sequences"));
    }
    let (n, m) = (a.len(), b.len());
    let mut acc = vec![vec![f64::INFINITY; m + 1]; n + 1];
    acc[0][0] = 0.0;
    for i in 1..=n {
        for j in 1..=m {
            let best = acc[i - 1][j - 1].min(acc[i - 1][j]).min(acc[i][j - 1]);
            acc[i][j] = (a[i - 1] - b[j - 1]).abs() + best;
        }
    }
    let mut path = vec![(n - 1, m - 1)];
    let (mut i, mut j) = (n, m);
    while (i, j) != (1, 1) {
        let diag = acc[i - 1][j - 1];
        let up = acc[i - 1][j];
        let left = acc[i][j - 1];
        if diag <= up && diag <= left {
            i -= 1;
            j -= 1;
        } else if up <= left {
            i -= 1;
        } else {
            j -= 1;
        }
        path.push((i - 1, j - 1));
    }
    path.reverse();
    Ok(DtwAlignment { cost: acc[n][m], path })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_computed_cases() {
        assert_eq!(dtw_distance(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert_eq!(dtw_distance(&[1.0, 2.0, 3.0], &[1.0, 2.0, 2.0, 3.0]).unwrap(), 0.0);
        assert_eq!(dtw_distance(&[0.0, 1.0], &[1.0, 0.0]).unwrap(), 2.0);
    }

    #[test]
    fn empty_rejected() {
        assert!(dtw_distance(&[], &[1.0]).is_err());
        assert!(dtw_path(&[1.0], &[]).is_err());
    }

    #[test]
    fn path_cost_matches_distance() {
        let a = [0.0, 2.0, 1.0, 3.0, 3.0];
        let b = [0.5, 1.0, 3.0];
        let al = dtw_path(&a, &b).unwrap();
        assert_eq!(al.cost, dtw_distance(&a, &b).unwrap());
        assert_eq!(al.path.first(), Some(&(0, 0)));
        assert_eq!(al.path.last(), Some(&(4, 2)));
        let summed: f64 = al.path.iter().map(|&(i, j)| (a[i] - b[j]).abs()).sum();
        assert!((summed - al.cost).abs() < 1e-12);
        for w in al.path.windows(2) {
            let (di, dj) = (w[1].0 - w[0].0, w[1].1 - w[0].1);
            assert!(di <= 1 && dj <= 1 && di + dj >= 1);
        }
    }

    proptest! {
        #[test]
        fn symmetric_and_nonnegative(
            a in prop::collection::vec(-5f64..5.0, 1..12),
            b in prop::collection::vec(-5f64..5.0, 1..12),
        ) {
            let ab = dtw_distance(&a, &b).unwrap();
            let ba = dtw_distance(&b, &a).unwrap();
            prop_assert!(ab >= 0.0);
            prop_assert!((ab - ba).abs() <= 1e-12 * ab.max(1.0));
            prop_assert_eq!(dtw_distance(&a, &a).unwrap(), 0.0);
        }
    }
}
