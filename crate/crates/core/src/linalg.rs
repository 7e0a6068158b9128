//! Small dense helpers not covered by nalgebra's public API.

use nalgebra::{DMatrix, DVector};

/// Rank test by column-pivoted Householder QR. A pivot whose remaining
/// column norm is at most `rel_tol` times the first pivot's ends the
/// factorization; the columns not yet pivoted in are returned (original
/// indices, ascending).
pub(crate) fn dependent_columns(a: &DMatrix<f64>, rel_tol: f64) -> Vec<usize> {
    let (n, k) = a.shape();
    let mut r = a.clone();
    let mut perm: Vec<usize> = (0..k).collect();
    let mut rank = 0;
    let mut first = 0.0;
    for s in 0..n.min(k) {
        let norm_of = |r: &DMatrix<f64>, j: usize| r.view((s, j), (n - s, 1)).norm();
        let (best, best_norm) = (s..k)
            .map(|j| (j, norm_of(&r, j)))
            .fold((s, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if s == 0 {
            first = best_norm;
        }
        if best_norm <= rel_tol * first || best_norm == 0.0 {
            break;
        }
        r.swap_columns(s, best);
        perm.swap(s, best);

        let x: DVector<f64> = r.view((s, s), (n - s, 1)).column(0).into_owned();
        let alpha = if x[0] >= 0.0 { -best_norm } else { best_norm };
        let mut v = x;
        v[0] -= alpha;
        let vnorm = v.norm();
        if vnorm > 0.0 {
            v /= vnorm;
            for j in s..k {
                let mut c = r.view_mut((s, j), (n - s, 1));
                let d = v.dot(&c.column(0));
                c.column_mut(0).axpy(-2.0 * d, &v, 1.0);
            }
        }
        rank = s + 1;
    }
    let mut dependent: Vec<usize> = perm[rank..].to_vec();
    dependent.sort_unstable();
    dependent
}

/// Inverse of a symmetric positive-definite matrix, or `None` when the
/// Cholesky factorization fails.
pub(crate) fn spd_inverse(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let inv = a.clone().cholesky()?.inverse();
    Some(symmetrize(inv))
}

pub(crate) fn symmetrize(a: DMatrix<f64>) -> DMatrix<f64> {
    (&a + a.transpose()) * 0.5
}
