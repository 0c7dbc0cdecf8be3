//! Lowest eigenpair of a real symmetric operator.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{EmberError, Result};
use crate::linalg::eigh;

pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    fn diagonal(&self) -> Vec<f64>;
    /// `y = A x`; `y` arrives zeroed.
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct DavidsonOptions {
    /// Residual norm ‖Ax − θx‖ at convergence.
    pub tol: f64,
    pub max_iter: usize,
    pub max_subspace: usize,
    /// Operators up to this dimension are diagonalized densely.
    pub dense_threshold: usize,
}

impl Default for DavidsonOptions {
    fn default() -> Self {
        DavidsonOptions { tol: 1e-9, max_iter: 200, max_subspace: 30, dense_threshold: 512 }
    }
}

#[derive(Clone, Debug)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

pub fn dense_matrix<A: LinearOperator + ?Sized>(op: &A) -> DMatrix<f64> {
    let n = op.dim();
    let mut m = DMatrix::zeros(n, n);
    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];
    for j in 0..n {
        x[j] = 1.0;
        y.iter_mut().for_each(|v| *v = 0.0);
        op.apply(&x, &mut y);
        for i in 0..n {
            m[(i, j)] = y[i];
        }
        x[j] = 0.0;
    }
    m
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Fix the sign so the largest-magnitude component is positive.
fn canonical_sign(v: &mut [f64]) {
    let mut best = 0.0f64;
    let mut sign = 1.0;
    for &x in v.iter() {
        if x.abs() > best + 1e-14 {
            best = x.abs();
            sign = x.signum();
        }
    }
    if sign < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

pub fn davidson_lowest<A: LinearOperator + ?Sized>(op: &A, opts: &DavidsonOptions) -> Result<Eigenpair> {
    let n = op.dim();
    if n == 0 {
        return Err(EmberError::Invalid("empty operator".into()));
    }
    if n <= opts.dense_threshold {
        let (w, v) = eigh(&dense_matrix(op));
        let mut vector: Vec<f64> = v.column(0).iter().copied().collect();
        canonical_sign(&mut vector);
        return Ok(Eigenpair { value: w[0], vector, residual: 0.0, iterations: 0 });
    }

    let diag = op.diagonal();
    let start = (0..n).min_by(|&a, &b| diag[a].total_cmp(&diag[b])).unwrap_or(0);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut images: Vec<Vec<f64>> = Vec::new();
    let mut next = vec![0.0; n];
    next[start] = 1.0;
    let mut best = f64::INFINITY;
    let mut prev_ritz: Option<Vec<f64>> = None;

    for iter in 1..=opts.max_iter {
        let mut y = vec![0.0; n];
        op.apply(&next, &mut y);
        basis.push(next);
        images.push(y);

        // Rayleigh–Ritz in the current subspace
        let m = basis.len();
        let mut hs = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..=i {
                let v = dot(&basis[i], &images[j]);
                hs[(i, j)] = v;
                hs[(j, i)] = v;
            }
        }
        let (w, c) = eigh(&hs);
        let theta = w[0];
        let coef: DVector<f64> = c.column(0).clone_owned();
        let mut u = vec![0.0; n];
        let mut au = vec![0.0; n];
        for k in 0..m {
            axpy(coef[k], &basis[k], &mut u);
            axpy(coef[k], &images[k], &mut au);
        }
        let mut r = au.clone();
        axpy(-theta, &u, &mut r);
        let rnorm = dot(&r, &r).sqrt();
        best = best.min(rnorm);
        if rnorm < opts.tol {
            normalize(&mut u);
            canonical_sign(&mut u);
            return Ok(Eigenpair { value: theta, vector: u, residual: rnorm, iterations: iter });
        }

        // diagonal preconditioner with the Olsen correction, which keeps the
        // update from collapsing onto u when θ approaches a diagonal entry
        let inv: Vec<f64> = diag
            .iter()
            .map(|&di| {
                let d = theta - di;
                1.0 / if d.abs() < 1e-8 { 1e-8f64.copysign(d) } else { d }
            })
            .collect();
        let mr: Vec<f64> = r.iter().zip(&inv).map(|(a, b)| a * b).collect();
        let mu: Vec<f64> = u.iter().zip(&inv).map(|(a, b)| a * b).collect();
        let denom = dot(&u, &mu);
        let eps = if denom.abs() > 1e-300 { dot(&u, &mr) / denom } else { 0.0 };
        let mut t: Vec<f64> = mr.iter().zip(&mu).map(|(a, b)| a - eps * b).collect();

        if m >= opts.max_subspace {
            // thick restart on the current and previous Ritz vectors
            let mut keep = vec![u.clone()];
            if let Some(prev) = prev_ritz.take() {
                let mut pv = vec![0.0; n];
                for b in &basis {
                    axpy(dot(b, &prev), b, &mut pv);
                }
                keep.push(pv);
            }
            basis.clear();
            images.clear();
            for mut v in keep {
                for _ in 0..2 {
                    for b in &basis {
                        let o = dot(b, &v);
                        axpy(-o, b, &mut v);
                    }
                }
                if normalize(&mut v) > 1e-10 {
                    // fresh images: recombined ones drift over many restarts
                    let mut av = vec![0.0; n];
                    op.apply(&v, &mut av);
                    basis.push(v);
                    images.push(av);
                }
            }
        }
        prev_ritz = Some(u);

        for _ in 0..2 {
            for b in &basis {
                let o = dot(b, &t);
                axpy(-o, b, &mut t);
            }
        }
        if normalize(&mut t) < 1e-12 {
            // preconditioned residual collapsed into the subspace; use the bare residual
            t = r;
            for _ in 0..2 {
                for b in &basis {
                    let o = dot(b, &t);
                    axpy(-o, b, &mut t);
                }
            }
            if normalize(&mut t) < 1e-14 {
                break;
            }
        }
        next = t;
    }
    Err(EmberError::NoConvergence { what: "Davidson", iterations: opts.max_iter, residual: best })
}

/// Explicit dense symmetric matrix as an operator (tests and small problems).
pub struct DenseOperator(pub DMatrix<f64>);

impl LinearOperator for DenseOperator {
    fn dim(&self) -> usize {
        self.0.nrows()
    }
    fn diagonal(&self) -> Vec<f64> {
        self.0.diagonal().iter().copied().collect()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                for (yi, a) in y.iter_mut().zip(self.0.column(j).iter()) {
                    *yi += a * xj;
                }
            }
        }
    }
}

/// Sparse symmetric matrix from CSR rows.
pub struct SparseOperator(pub super::strings::Csr);

impl LinearOperator for SparseOperator {
    fn dim(&self) -> usize {
        self.0.n_rows()
    }
    fn diagonal(&self) -> Vec<f64> {
        self.0.diagonal()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        crate::par::for_each_chunk_mut(y, 256, |chunk, out| {
            for (k, yi) in out.iter_mut().enumerate() {
                let (c, v) = self.0.row(chunk * 256 + k);
                *yi += c.iter().zip(v).map(|(&c, &v)| v * x[c as usize]).sum::<f64>();
            }
        });
    }
}
