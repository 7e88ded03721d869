//! Minimal CSR sparse machinery: matrix-vector products, a symmetric
//! Gauss-Seidel preconditioner, and preconditioned BiCGSTAB.
//!
//! The Shortley-Weller operator is nonsymmetric near the boundary, so the
//! Krylov method must not assume symmetry; SSOR-type sweeps on the actual
//! matrix serve as the preconditioner.

use crate::error::{Error, Result};

/// Compressed sparse row matrix with column-sorted rows.
#[derive(Debug, Clone)]
pub struct Csr {
    pub n: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub data: Vec<f64>,
}

impl Csr {
    /// Assemble from triplets; duplicate entries sum.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Csr {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(r, c, v) in triplets {
            rows[r].push((c, v));
        }
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::new();
        let mut data = Vec::new();
        indptr.push(0);
        for row in &mut rows {
            row.sort_by_key(|&(c, _)| c);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for &(c, v) in row.iter() {
                match merged.last_mut() {
                    Some((lc, lv)) if *lc == c => *lv += v,
                    _ => merged.push((c, v)),
                }
            }
            for (c, v) in merged {
                indices.push(c);
                data.push(v);
            }
            indptr.push(indices.len());
        }
        Csr {
            n,
            indptr,
            indices,
            data,
        }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for r in 0..self.n {
            let mut acc = 0.0;
            for k in self.indptr[r]..self.indptr[r + 1] {
                acc += self.data[k] * x[self.indices[k]];
            }
            y[r] = acc;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for r in 0..self.n {
            for k in self.indptr[r]..self.indptr[r + 1] {
                if self.indices[k] == r {
                    d[r] = self.data[k];
                }
            }
        }
        d
    }

    /// A copy with `shift[i]` added to each diagonal entry.
    pub fn with_diagonal_shift(&self, shift: &[f64]) -> Csr {
        let mut out = self.clone();
        for r in 0..out.n {
            for k in out.indptr[r]..out.indptr[r + 1] {
                if out.indices[k] == r {
                    out.data[k] += shift[r];
                }
            }
        }
        out
    }
}

/// Symmetric Gauss-Seidel preconditioner `(D+L) D^{-1} (D+U)`.
#[derive(Debug, Clone)]
pub struct SymGaussSeidel {
    diag: Vec<f64>,
}

impl SymGaussSeidel {
    pub fn new(a: &Csr) -> Result<Self> {
        let diag = a.diagonal();
        if diag.iter().any(|&d| d == 0.0) {
            return Err(Error::SolverStalled {
                residual: f64::NAN,
                iterations: 0,
            });
        }
        Ok(Self { diag })
    }

    /// z = M^{-1} r via one forward and one backward triangular solve.
    pub fn apply(&self, a: &Csr, r: &[f64], z: &mut [f64]) {
        let n = a.n;
        // (D + L) y = r
        for i in 0..n {
            let mut acc = r[i];
            for k in a.indptr[i]..a.indptr[i + 1] {
                let c = a.indices[k];
                if c < i {
                    acc -= a.data[k] * z[c];
                }
            }
            z[i] = acc / self.diag[i];
        }
        // (D + U) z = D y
        for i in (0..n).rev() {
            let mut acc = self.diag[i] * z[i];
            for k in a.indptr[i]..a.indptr[i + 1] {
                let c = a.indices[k];
                if c > i {
                    acc -= a.data[k] * z[c];
                }
            }
            z[i] = acc / self.diag[i];
        }
    }
}

pub struct SolveStats {
    pub iterations: usize,
    pub residual_inf: f64,
}

/// Preconditioned BiCGSTAB, converging on the max-norm of the true residual
/// relative to the max-norm of `b`. `x` carries the initial guess in and the
/// solution out.
pub fn bicgstab(
    a: &Csr,
    b: &[f64],
    x: &mut [f64],
    tol_rel: f64,
    max_iterations: usize,
) -> Result<SolveStats> {
    let n = a.n;
    let precond = SymGaussSeidel::new(a)?;
    let b_inf = inf_norm(b);
    if b_inf == 0.0 {
        x.fill(0.0);
        return Ok(SolveStats {
            iterations: 0,
            residual_inf: 0.0,
        });
    }
    let tol_abs = tol_rel * b_inf;

    let mut r = vec![0.0; n];
    a.matvec(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let r0 = r.clone();
    let mut rho = 1.0f64;
    let mut alpha = 1.0f64;
    let mut omega = 1.0f64;
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut p_hat = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut s_hat = vec![0.0; n];
    let mut t = vec![0.0; n];

    let mut res = inf_norm(&r);
    if res <= tol_abs {
        return Ok(SolveStats {
            iterations: 0,
            residual_inf: res,
        });
    }

    for it in 1..=max_iterations {
        let rho_new = dot(&r0, &r);
        if rho_new.abs() < 1e-300 {
            return Err(Error::SolverStalled {
                residual: res,
                iterations: it,
            });
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        precond.apply(a, &p, &mut p_hat);
        a.matvec(&p_hat, &mut v);
        let denom = dot(&r0, &v);
        if denom.abs() < 1e-300 {
            return Err(Error::SolverStalled {
                residual: res,
                iterations: it,
            });
        }
        alpha = rho / denom;
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if inf_norm(&s) <= tol_abs {
            for i in 0..n {
                x[i] += alpha * p_hat[i];
            }
            a.matvec(x, &mut r);
            for i in 0..n {
                r[i] = b[i] - r[i];
            }
            res = inf_norm(&r);
            if res <= tol_abs {
                return Ok(SolveStats {
                    iterations: it,
                    residual_inf: res,
                });
            }
            continue;
        }
        precond.apply(a, &s, &mut s_hat);
        a.matvec(&s_hat, &mut t);
        let tt = dot(&t, &t);
        if tt == 0.0 {
            return Err(Error::SolverStalled {
                residual: res,
                iterations: it,
            });
        }
        omega = dot(&t, &s) / tt;
        if omega == 0.0 {
            return Err(Error::SolverStalled {
                residual: res,
                iterations: it,
            });
        }
        for i in 0..n {
            x[i] += alpha * p_hat[i] + omega * s_hat[i];
            r[i] = s[i] - omega * t[i];
        }
        res = inf_norm(&r);
        if res <= tol_abs {
            // confirm with the true residual before declaring victory
            a.matvec(x, &mut r);
            for i in 0..n {
                r[i] = b[i] - r[i];
            }
            res = inf_norm(&r);
            if res <= tol_abs {
                return Ok(SolveStats {
                    iterations: it,
                    residual_inf: res,
                });
            }
        }
    }
    Err(Error::SolverStalled {
        residual: res,
        iterations: max_iterations,
    })
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, &x| m.max(x.abs()))
}
