//! Dense and banded linear algebra kernels: banded Cholesky factorization
//! for the shift-invert solves and a cyclic Jacobi eigensolver used as the
//! dense validation oracle.

use crate::error::{Error, Result};
use crate::operator::Csr;

/// Cholesky factor of a symmetric positive definite banded matrix.
/// Row-major band storage: entry (i, j) with i-bw <= j <= i lives at
/// `l[i*(bw+1) + bw - (i-j)]`.
pub struct BandedCholesky {
    n: usize,
    bw: usize,
    l: Vec<f64>,
}

impl BandedCholesky {
    /// Factors A - shift*I where A is given in CSR form with half
    /// bandwidth `bw`. Fails if the shifted matrix is not positive definite.
    pub fn factor(a: &Csr, shift: f64, bw: usize) -> Result<Self> {
        let n = a.n;
        let width = bw + 1;
        let mut band = vec![0.0f64; n * width];
        for r in 0..n {
            for (c, v) in a.row(r) {
                if c <= r {
                    debug_assert!(r - c <= bw, "entry outside declared bandwidth");
                    band[r * width + bw - (r - c)] = v - if c == r { shift } else { 0.0 };
                }
            }
        }
        let mut l = band;
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let mut s = l[i * width + bw - (i - j)];
                let kstart = lo.max(j.saturating_sub(bw));
                for k in kstart..j {
                    s -= l[i * width + bw - (i - k)] * l[j * width + bw - (j - k)];
                }
                if j < i {
                    l[i * width + bw - (i - j)] = s / l[j * width + bw];
                } else {
                    if s <= 0.0 {
                        return Err(Error::InvalidConfig(format!(
                            "shifted operator not positive definite at pivot {i} (value {s:e})"
                        )));
                    }
                    l[i * width + bw] = s.sqrt();
                }
            }
        }
        Ok(BandedCholesky { n, bw, l })
    }

    /// Solves (L L^T) x = b.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, bw) = (self.n, self.bw);
        let width = bw + 1;
        let mut y = vec![0.0; n];
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let mut s = b[i];
            for k in lo..i {
                s -= self.l[i * width + bw - (i - k)] * y[k];
            }
            y[i] = s / self.l[i * width + bw];
        }
        let mut x = y;
        for i in (0..n).rev() {
            let hi = (i + bw).min(n - 1);
            let mut s = x[i];
            for k in i + 1..=hi {
                s -= self.l[k * width + bw - (k - i)] * x[k];
            }
            x[i] = s / self.l[i * width + bw];
        }
        x
    }
}

/// All eigenvalues of a dense symmetric matrix by cyclic Jacobi rotations,
/// ascending. `a` is row-major n*n and is consumed as workspace.
pub fn jacobi_eigenvalues(mut a: Vec<f64>, n: usize) -> Vec<f64> {
    debug_assert_eq!(a.len(), n * n);
    if n == 1 {
        return vec![a[0]];
    }
    let norm: f64 = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let tol = 1e-15 * norm.max(f64::MIN_POSITIVE);
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if (2.0 * off).sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Update rows/columns p and q.
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eig
}

/// Full eigen-decomposition of a small dense symmetric matrix by cyclic
/// Jacobi with accumulated rotations: ascending eigenvalues and
/// orthonormal eigenvectors (column j of the returned row-major matrix
/// belongs to eigenvalue j). Used for the Rayleigh-Ritz blocks.
pub fn jacobi_eigen_full(mut a: Vec<f64>, n: usize) -> (Vec<f64>, Vec<f64>) {
    debug_assert_eq!(a.len(), n * n);
    let mut v = vec![0.0f64; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let norm: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let tol = 1e-15 * norm.max(f64::MIN_POSITIVE);
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if (2.0 * off).sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let tau = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| a[i * n + i].partial_cmp(&a[j * n + j]).unwrap());
    let vals: Vec<f64> = idx.iter().map(|&i| a[i * n + i]).collect();
    let mut vecs = vec![0.0f64; n * n];
    for (new_col, &old_col) in idx.iter().enumerate() {
        for k in 0..n {
            vecs[k * n + new_col] = v[k * n + old_col];
        }
    }
    (vals, vecs)
}
