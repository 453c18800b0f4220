use rayon::prelude::*;

use super::sparse::{dot, norm2, CsrMatrix};
use crate::{Error, Result};

/// Block-Jacobi preconditioner whose blocks are the vertical grid lines.
///
/// Nodes are stored with the vertical index fastest, so each line is a
/// contiguous run of `line_len` unknowns and its block is tridiagonal.
pub struct LinePreconditioner {
    line_len: usize,
    // Thomas factors per node: modified super-diagonal and pivot inverse
    sub: Vec<f64>,
    upper: Vec<f64>,
    pivot_inv: Vec<f64>,
}

impl LinePreconditioner {
    pub fn new(matrix: &CsrMatrix, line_len: usize) -> Self {
        let n = matrix.dim();
        let mut sub = vec![0.0; n];
        let mut upper = vec![0.0; n];
        let mut pivot_inv = vec![0.0; n];
        for start in (0..n).step_by(line_len) {
            let mut prev_upper = 0.0;
            for j in 0..line_len {
                let i = start + j;
                let a = if j > 0 { matrix.get(i, i - 1) } else { 0.0 };
                let b = matrix.get(i, i);
                let c = if j + 1 < line_len { matrix.get(i, i + 1) } else { 0.0 };
                let pivot = b - a * prev_upper;
                let inv = if pivot.abs() > 0.0 { 1.0 / pivot } else { 1.0 };
                sub[i] = a;
                pivot_inv[i] = inv;
                upper[i] = c * inv;
                prev_upper = upper[i];
            }
        }
        LinePreconditioner {
            line_len,
            sub,
            upper,
            pivot_inv,
        }
    }

    pub fn apply(&self, r: &[f64], z: &mut [f64]) {
        let len = self.line_len;
        z.par_chunks_mut(len).enumerate().for_each(|(line, zl)| {
            let start = line * len;
            let mut prev = 0.0;
            for j in 0..len {
                let i = start + j;
                prev = (r[i] - self.sub[i] * prev) * self.pivot_inv[i];
                zl[j] = prev;
            }
            for j in (0..len.saturating_sub(1)).rev() {
                let i = start + j;
                zl[j] -= self.upper[i] * zl[j + 1];
            }
        });
    }
}

#[derive(Clone, Debug)]
pub struct KrylovOutcome {
    pub solution: Vec<f64>,
    pub iterations: usize,
    /// `‖b − A x‖ / reference`, with the reference `‖b‖` (or `‖r₀‖` when b = 0).
    pub relative_residual: f64,
}

fn initial_residual(a: &CsrMatrix, b: &[f64], x: &[f64]) -> Vec<f64> {
    let ax = a.matvec(x);
    b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect()
}

/// Preconditioned conjugate gradients for a symmetric positive definite `a`.
pub fn pcg(
    a: &CsrMatrix,
    precond: &LinePreconditioner,
    b: &[f64],
    x0: Option<&[f64]>,
    tol: f64,
    max_iters: usize,
) -> Result<KrylovOutcome> {
    let n = b.len();
    let mut x = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    let mut r = initial_residual(a, b, &x);
    let r0 = norm2(&r);
    let reference = {
        let nb = norm2(b);
        if nb > 0.0 { nb } else { r0 }
    };
    if r0 == 0.0 {
        return Ok(KrylovOutcome {
            solution: x,
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let mut z = vec![0.0; n];
    precond.apply(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut rel = r0 / reference;
    for k in 1..=max_iters {
        a.matvec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::NotConverged {
                solver: "conjugate gradients (indefinite direction)",
                iterations: k,
                residual: rel,
            });
        }
        let step = rz / pap;
        x.par_iter_mut().zip(&p).for_each(|(xi, pi)| *xi += step * pi);
        r.par_iter_mut().zip(&ap).for_each(|(ri, api)| *ri -= step * api);
        rel = norm2(&r) / reference;
        if rel <= tol {
            return Ok(KrylovOutcome {
                solution: x,
                iterations: k,
                relative_residual: rel,
            });
        }
        precond.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p.par_iter_mut().zip(&z).for_each(|(pi, zi)| *pi = zi + beta * *pi);
    }
    Err(Error::NotConverged {
        solver: "conjugate gradients",
        iterations: max_iters,
        residual: rel,
    })
}

/// Preconditioned BiCGSTAB for general nonsymmetric systems.
pub fn bicgstab(
    a: &CsrMatrix,
    precond: &LinePreconditioner,
    b: &[f64],
    tol: f64,
    max_iters: usize,
) -> Result<KrylovOutcome> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let reference = norm2(b);
    if reference == 0.0 {
        return Ok(KrylovOutcome {
            solution: x,
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let mut r = b.to_vec();
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut zs = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut rel = 1.0;
    for k in 1..=max_iters {
        let rho_new = dot(&r_hat, &r);
        if rho_new == 0.0 {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        p.par_iter_mut()
            .zip(&r)
            .zip(&v)
            .for_each(|((pi, ri), vi)| *pi = ri + beta * (*pi - omega * vi));
        precond.apply(&p, &mut y);
        a.matvec_into(&y, &mut v);
        alpha = rho / dot(&r_hat, &v);
        s.par_iter_mut()
            .zip(&r)
            .zip(&v)
            .for_each(|((si, ri), vi)| *si = ri - alpha * vi);
        if norm2(&s) / reference <= tol {
            x.par_iter_mut().zip(&y).for_each(|(xi, yi)| *xi += alpha * yi);
            rel = norm2(&s) / reference;
            return Ok(KrylovOutcome {
                solution: x,
                iterations: k,
                relative_residual: rel,
            });
        }
        precond.apply(&s, &mut zs);
        a.matvec_into(&zs, &mut t);
        omega = dot(&t, &s) / dot(&t, &t);
        x.par_iter_mut()
            .zip(&y)
            .zip(&zs)
            .for_each(|((xi, yi), zi)| *xi += alpha * yi + omega * zi);
        r.par_iter_mut()
            .zip(&s)
            .zip(&t)
            .for_each(|((ri, si), ti)| *ri = si - omega * ti);
        rel = norm2(&r) / reference;
        if rel <= tol {
            return Ok(KrylovOutcome {
                solution: x,
                iterations: k,
                relative_residual: rel,
            });
        }
        if omega == 0.0 {
            break;
        }
    }
    Err(Error::NotConverged {
        solver: "BiCGSTAB",
        iterations: max_iters,
        residual: rel,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poisson_2d(n: usize) -> CsrMatrix {
        let idx = |i: usize, j: usize| i * n + j;
        let mut rows = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let mut row = vec![(idx(i, j), 4.0)];
                if i > 0 { row.push((idx(i - 1, j), -1.0)); }
                if i + 1 < n { row.push((idx(i + 1, j), -1.0)); }
                if j > 0 { row.push((idx(i, j - 1), -1.0)); }
                if j + 1 < n { row.push((idx(i, j + 1), -1.0)); }
                rows.push(row);
            }
        }
        CsrMatrix::from_rows(rows)
    }

    #[test]
    fn pcg_and_bicgstab_agree() {
        let a = poisson_2d(12);
        let b: Vec<f64> = (0..144).map(|i| ((i * 7) % 13) as f64 - 6.0).collect();
        let pc = LinePreconditioner::new(&a, 12);
        let x1 = pcg(&a, &pc, &b, None, 1e-12, 500).unwrap();
        let x2 = bicgstab(&a, &pc, &b, 1e-12, 500).unwrap();
        let diff = x1.solution.iter().zip(&x2.solution).fold(0.0f64, |m, (u, v)| m.max((u - v).abs()));
        assert!(diff < 1e-9);
        let res = initial_residual(&a, &b, &x1.solution);
        assert!(norm2(&res) <= 1e-11 * norm2(&b));
    }

    #[test]
    fn line_preconditioner_is_exact_in_one_dimension() {
        let rows = (0..20)
            .map(|i| {
                let mut r = vec![(i, 2.5)];
                if i > 0 { r.push((i - 1, -1.0)); }
                if i < 19 { r.push((i + 1, -1.2)); }
                r
            })
            .collect();
        let a = CsrMatrix::from_rows(rows);
        let b = vec![1.0; 20];
        let pc = LinePreconditioner::new(&a, 20);
        let mut z = vec![0.0; 20];
        pc.apply(&b, &mut z);
        let az = a.matvec(&z);
        assert!(az.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn zero_rhs_returns_zero_immediately() {
        let a = poisson_2d(4);
        let pc = LinePreconditioner::new(&a, 4);
        let out = pcg(&a, &pc, &vec![0.0; 16], None, 1e-10, 10).unwrap();
        assert_eq!(out.iterations, 0);
        assert!(out.solution.iter().all(|&v| v == 0.0));
    }
}
