//! Block preconditioned eigensolver (LOBPCG) for the smallest eigenvalues of a
//! real symmetric operator.
//!
//! The trial basis `[X, W, P]` is orthonormalized with SVQB (eigen-decomposition
//! of the scaled Gram matrix, dropping numerically dependent directions) before
//! every Rayleigh-Ritz step, which keeps the iteration stable close to machine
//! precision.

use nalgebra::{DMatrix, SymmetricEigen};

pub trait SymOp {
    fn dim(&self) -> usize;
    fn apply(&mut self, x: &[f64], out: &mut [f64]);
}

pub trait Precond {
    fn apply(&mut self, r: &[f64], out: &mut [f64]);
}

pub struct LobpcgOptions {
    pub block: usize,
    /// Leading eigenpairs that must converge.
    pub wanted: usize,
    /// Absolute residual target for unit vectors.
    pub tol: f64,
    pub max_iter: usize,
    /// Pairs whose Ritz value exceeds this threshold by more than their
    /// residual stop being tracked once `min_iter` iterations have run.
    pub cutoff: Option<f64>,
    pub min_iter: usize,
}

pub struct LobpcgResult {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    let mut s3 = 0.0;
    let chunks = a.len() / 4;
    for k in 0..chunks {
        let i = 4 * k;
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    for i in 4 * chunks..a.len() {
        s0 += a[i] * b[i];
    }
    (s0 + s1) + (s2 + s3)
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `sum_j cols[j] * coef[(j, c)]` for each output column `c`.
fn combine(cols: &[Vec<f64>], coef: &DMatrix<f64>, ncols: usize) -> Vec<Vec<f64>> {
    let n = cols.first().map_or(0, |c| c.len());
    (0..ncols)
        .map(|c| {
            let mut out = vec![0.0; n];
            for (j, col) in cols.iter().enumerate() {
                let w = coef[(j, c)];
                if w != 0.0 {
                    out.iter_mut().zip(col).for_each(|(o, v)| *o += w * v);
                }
            }
            out
        })
        .collect()
}

fn gram(cols: &[Vec<f64>]) -> DMatrix<f64> {
    let q = cols.len();
    let mut g = DMatrix::zeros(q, q);
    for i in 0..q {
        for j in i..q {
            let v = dot(&cols[i], &cols[j]);
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    g
}

/// Orthonormalizes the span of `cols`, discarding directions whose scaled
/// Gram eigenvalue falls below `drop`. Two passes restore orthogonality lost
/// to ill-conditioning.
fn svqb(mut cols: Vec<Vec<f64>>, drop: f64) -> Vec<Vec<f64>> {
    for _ in 0..2 {
        cols.retain(|c| norm(c) > 0.0);
        if cols.is_empty() {
            return cols;
        }
        let g = gram(&cols);
        let q = cols.len();
        let d: Vec<f64> = (0..q).map(|i| 1.0 / g[(i, i)].sqrt()).collect();
        let scaled = DMatrix::from_fn(q, q, |i, j| g[(i, j)] * d[i] * d[j]);
        let eig = SymmetricEigen::new(scaled);
        let max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
        let keep: Vec<usize> = (0..q).filter(|&k| eig.eigenvalues[k] > drop * max).collect();
        let coef = DMatrix::from_fn(q, keep.len(), |i, c| {
            let k = keep[c];
            d[i] * eig.eigenvectors[(i, k)] / eig.eigenvalues[k].sqrt()
        });
        cols = combine(&cols, &coef, keep.len());
    }
    cols
}

/// Rayleigh-Ritz on an orthonormal basis; returns ascending values and the
/// coefficient matrix.
fn rayleigh_ritz<A: SymOp>(op: &mut A, basis: &[Vec<f64>]) -> (Vec<f64>, DMatrix<f64>, Vec<Vec<f64>>) {
    let n = op.dim();
    let ab: Vec<Vec<f64>> = basis
        .iter()
        .map(|q| {
            let mut out = vec![0.0; n];
            op.apply(q, &mut out);
            out
        })
        .collect();
    let q = basis.len();
    let mut h = DMatrix::zeros(q, q);
    for i in 0..q {
        for j in i..q {
            let v = 0.5 * (dot(&basis[i], &ab[j]) + dot(&basis[j], &ab[i]));
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..q).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let coef = DMatrix::from_fn(q, q, |i, c| eig.eigenvectors[(i, order[c])]);
    (values, coef, ab)
}

pub fn lobpcg<A: SymOp, T: Precond>(
    op: &mut A,
    precond: &mut T,
    initial: Vec<Vec<f64>>,
    opts: &LobpcgOptions,
) -> LobpcgResult {
    let n = op.dim();
    let m = opts.block;
    let drop = 1e-13;

    let mut x = svqb(initial, drop);
    assert!(x.len() >= m, "initial block is rank deficient");
    x.truncate(m);
    let (mut theta, coef, ax_all) = rayleigh_ritz(op, &x);
    let mut ax = combine(&ax_all, &coef, m);
    x = combine(&x, &coef, m);
    theta.truncate(m);
    let mut p: Vec<Vec<f64>> = Vec::new();

    let mut residuals = vec![f64::INFINITY; m];
    let mut iterations = 0;
    let mut converged = false;
    loop {
        let r: Vec<Vec<f64>> = (0..m)
            .map(|i| ax[i].iter().zip(&x[i]).map(|(a, v)| a - theta[i] * v).collect())
            .collect();
        for i in 0..m {
            residuals[i] = norm(&r[i]);
        }
        let settled = |i: usize| -> bool {
            residuals[i] < opts.tol
                || matches!(opts.cutoff, Some(c) if iterations >= opts.min_iter && theta[i] - residuals[i] > c)
        };
        if (0..opts.wanted.min(m)).all(settled) {
            converged = true;
            break;
        }
        if iterations >= opts.max_iter {
            break;
        }
        iterations += 1;

        let active: Vec<usize> = (0..m).filter(|&i| residuals[i] >= opts.tol).collect();
        let w: Vec<Vec<f64>> = active
            .iter()
            .map(|&i| {
                let mut out = vec![0.0; n];
                precond.apply(&r[i], &mut out);
                out
            })
            .collect();

        let mut basis = x.clone();
        basis.extend(w);
        basis.extend(p.iter().filter(|v| norm(v) > 1e-14).cloned());
        let basis = svqb(basis, drop);
        if basis.len() <= m {
            break;
        }
        let (vals, coef, ab) = rayleigh_ritz(op, &basis);
        let x_new = combine(&basis, &coef, m);
        let ax_new = combine(&ab, &coef, m);

        // Search directions: the part of the new iterate outside the old block.
        p = x_new
            .iter()
            .map(|xn| {
                let mut d = xn.clone();
                for xo in &x {
                    let c = dot(xo, xn);
                    d.iter_mut().zip(xo).for_each(|(a, b)| *a -= c * b);
                }
                d
            })
            .collect();

        x = x_new;
        ax = ax_new;
        theta = vals[..m].to_vec();
    }

    LobpcgResult { values: theta, vectors: x, residuals, iterations, converged }
}
