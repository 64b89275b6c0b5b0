use super::{stable_norm, DenseMatrix};
use crate::error::{Error, Result};

/// Relative threshold on `|R_ii|` below which the system is rank deficient.
const RANK_EPS: f64 = 1e-13;

/// Least-squares solution of `D z ≈ b` by Householder QR.
///
/// `D` is copied into column-major storage; each reflector is applied to the
/// trailing columns and to `b` as it is formed, so `Q` is never built.
pub fn qr_least_squares(d: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let (m, n) = (d.rows(), d.cols());
    if n == 0 || m < n {
        return Err(Error::Parameter(format!("least squares needs m >= N >= 1, got {m} x {n}")));
    }
    if b.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: b.len() });
    }

    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| (0..m).map(|i| d[(i, j)]).collect()).collect();
    let mut rhs = b.to_vec();
    let mut diag = vec![0.0; n];

    for j in 0..n {
        let (head, tail) = cols.split_at_mut(j + 1);
        let v = &mut head[j][j..];
        let norm = stable_norm(v);
        if norm == 0.0 {
            diag[j] = 0.0;
            continue;
        }
        let alpha = if v[0] >= 0.0 { -norm } else { norm };
        v[0] -= alpha;
        // v^T v = 2 norm (norm + |x_0|), computed without cancellation.
        let vtv = -2.0 * alpha * v[0];
        diag[j] = alpha;
        let apply = |x: &mut [f64]| {
            let s: f64 = v.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
            let f = 2.0 * s / vtv;
            for (xi, vi) in x.iter_mut().zip(v.iter()) {
                *xi -= f * vi;
            }
        };
        for col in tail.iter_mut() {
            apply(&mut col[j..]);
        }
        apply(&mut rhs[j..]);
    }

    let rmax = diag.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if let Some(column) = diag.iter().position(|r| r.abs() <= RANK_EPS * rmax) {
        return Err(Error::RankDeficient { column });
    }

    let mut z = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = rhs[i];
        for (k, zk) in z.iter().enumerate().skip(i + 1) {
            s -= cols[k][i] * zk;
        }
        z[i] = s / diag[i];
    }
    Ok(z)
}
