use super::DenseMatrix;
use crate::error::{Error, Result};

/// Condition number reported when the smallest eigenvalue is numerically
/// zero or negative.
pub const COND_SENTINEL: f64 = 1e300;

const MAX_SWEEPS: usize = 50;
const OFF_TOL: f64 = 1e-14;
const ASYMMETRY_TOL: f64 = 1e-12;
const LAMBDA_ABS_FLOOR: f64 = 1e-300;
const LAMBDA_REL_FLOOR: f64 = 1e-16;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDiagnostics {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// `lambda_max / lambda_min`, or [`COND_SENTINEL`].
    pub cond: f64,
    /// `max_i |lambda_i - 1|`, the spectral distance to the identity.
    pub dist_to_identity: f64,
}

impl SpectralDiagnostics {
    pub fn from_eigenvalues(mut eigenvalues: Vec<f64>) -> Self {
        eigenvalues.sort_by(f64::total_cmp);
        let lo = eigenvalues.first().copied().unwrap_or(0.0);
        let hi = eigenvalues.last().copied().unwrap_or(0.0);
        let cond = if hi <= 0.0 || lo <= LAMBDA_ABS_FLOOR.max(LAMBDA_REL_FLOOR * hi) {
            COND_SENTINEL
        } else {
            (hi / lo).min(COND_SENTINEL)
        };
        let dist_to_identity = eigenvalues.iter().fold(0.0f64, |m, l| m.max((l - 1.0).abs()));
        Self {
            eigenvalues,
            cond,
            dist_to_identity,
        }
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(f64::NAN)
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(f64::NAN)
    }

    pub fn is_saturated(&self) -> bool {
        self.cond >= COND_SENTINEL
    }
}

/// Eigen-decomposition `A = V diag(values) V^T`, columns of `vectors` are the
/// eigenvectors, values ascending.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

pub fn sym_eigs(a: &DenseMatrix) -> Result<SpectralDiagnostics> {
    let (values, _) = jacobi(a, false)?;
    Ok(SpectralDiagnostics::from_eigenvalues(values))
}

pub fn jacobi_eigen(a: &DenseMatrix) -> Result<SymmetricEigen> {
    let (values, vectors) = jacobi(a, true)?;
    let vectors = vectors.expect("vectors requested");
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut sorted = DenseMatrix::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        for r in 0..n {
            sorted[(r, new)] = vectors[(r, old)];
        }
    }
    Ok(SymmetricEigen {
        values: order.iter().map(|&i| values[i]).collect(),
        vectors: sorted,
    })
}

fn off_norm(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            s += a[i * n + j] * a[i * n + j];
        }
    }
    (2.0 * s).sqrt()
}

// Cyclic Jacobi with the stable rotation of Rutishauser; rotations whose
// off-diagonal entry is negligible against both diagonal entries just zero it.
fn jacobi(a_in: &DenseMatrix, want_vectors: bool) -> Result<(Vec<f64>, Option<DenseMatrix>)> {
    if !a_in.is_square() {
        return Err(Error::Parameter(format!(
            "eigensolver needs a square matrix, got {}x{}",
            a_in.rows(),
            a_in.cols()
        )));
    }
    let n = a_in.rows();
    let norm = a_in.frobenius_norm();
    for i in 0..n {
        for j in i + 1..n {
            if (a_in[(i, j)] - a_in[(j, i)]).abs() > ASYMMETRY_TOL * norm {
                return Err(Error::Parameter(format!("matrix is not symmetric at ({i}, {j})")));
            }
        }
    }
    let mut a: Vec<f64> = a_in.as_slice().to_vec();
    // Work on the symmetrized matrix.
    for i in 0..n {
        for j in i + 1..n {
            let s = 0.5 * (a[i * n + j] + a[j * n + i]);
            a[i * n + j] = s;
            a[j * n + i] = s;
        }
    }
    let mut v = want_vectors.then(|| DenseMatrix::identity(n));
    let target = OFF_TOL * norm;

    let mut sweeps = 0;
    loop {
        let off = off_norm(&a, n);
        if off <= target || norm == 0.0 {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps, off_norm: off });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let g = 100.0 * apq.abs();
                if sweeps > 3 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    continue;
                }
                let h = aqq - app;
                let t = if h.abs() + g == h.abs() {
                    apq / h
                } else {
                    let theta = 0.5 * h / apq;
                    let t = 1.0 / (theta.abs() + (1.0 + theta * theta).sqrt());
                    if theta < 0.0 {
                        -t
                    } else {
                        t
                    }
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = a[r * n + p];
                    let arq = a[r * n + q];
                    let new_rp = arp - s * (arq + tau * arp);
                    let new_rq = arq + s * (arp - tau * arq);
                    a[r * n + p] = new_rp;
                    a[p * n + r] = new_rp;
                    a[r * n + q] = new_rq;
                    a[q * n + r] = new_rq;
                }
                if let Some(v) = v.as_mut() {
                    for r in 0..n {
                        let vrp = v[(r, p)];
                        let vrq = v[(r, q)];
                        v[(r, p)] = vrp - s * (vrq + tau * vrp);
                        v[(r, q)] = vrq + s * (vrp - tau * vrq);
                    }
                }
            }
        }
    }
    let values = (0..n).map(|i| a[i * n + i]).collect();
    Ok((values, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::SampleRng;
    use approx::assert_relative_eq;

    fn random_symmetric(n: usize, rng: &mut SampleRng) -> DenseMatrix {
        let mut a = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = rng.uniform_sym();
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
        a
    }

    // Determinant by Gaussian elimination with partial pivoting.
    fn lu_det(a: &DenseMatrix) -> f64 {
        let n = a.rows();
        let mut m: Vec<Vec<f64>> = (0..n).map(|i| a.row(i).to_vec()).collect();
        let mut det = 1.0;
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs())).unwrap();
            if p != k {
                m.swap(p, k);
                det = -det;
            }
            det *= m[k][k];
            for i in k + 1..n {
                let f = m[i][k] / m[k][k];
                for j in k..n {
                    m[i][j] -= f * m[k][j];
                }
            }
        }
        det
    }

    #[test]
    fn identity_and_diagonal() {
        let d = sym_eigs(&DenseMatrix::identity(5)).unwrap();
        assert_eq!(d.cond, 1.0);
        assert_eq!(d.dist_to_identity, 0.0);
        let d = sym_eigs(&DenseMatrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 8.0]]).unwrap()).unwrap();
        assert_eq!(d.cond, 4.0);
        assert_eq!(d.eigenvalues, vec![2.0, 8.0]);
    }

    #[test]
    fn trace_and_determinant() {
        let mut rng = SampleRng::new(99);
        for _ in 0..50 {
            let a = random_symmetric(6, &mut rng);
            let d = sym_eigs(&a).unwrap();
            let trace: f64 = (0..6).map(|i| a[(i, i)]).sum();
            assert!((d.eigenvalues.iter().sum::<f64>() - trace).abs() < 1e-10);
            let det = lu_det(&a);
            let prod: f64 = d.eigenvalues.iter().product();
            assert_relative_eq!(prod, det, max_relative = 1e-8);
            assert!(d.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn reconstruction() {
        let mut rng = SampleRng::new(5);
        for n in [1, 2, 7, 20] {
            let a = random_symmetric(n, &mut rng);
            let e = jacobi_eigen(&a).unwrap();
            let mut lam_vt = e.vectors.transpose();
            for (i, l) in e.values.iter().enumerate() {
                lam_vt.row_mut(i).iter_mut().for_each(|v| *v *= l);
            }
            let back = e.vectors.matmul(&lam_vt);
            let err: Vec<f64> = back.as_slice().iter().zip(a.as_slice()).map(|(x, y)| x - y).collect();
            assert!(crate::linalg::stable_norm(&err) <= 1e-10 * a.frobenius_norm());
        }
    }

    #[test]
    fn singular_gets_sentinel() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let d = sym_eigs(&a).unwrap();
        assert_eq!(d.cond, COND_SENTINEL);
        assert!(d.is_saturated());
    }

    #[test]
    fn asymmetric_rejected() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        assert!(sym_eigs(&a).is_err());
    }
}
