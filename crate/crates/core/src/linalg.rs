//! Dense complex matrices, an LU direct solver and restarted GMRES.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::vector::{C64, ZERO};

/// A square linear map applied without materializing its matrix.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;

    /// y ← A x.
    fn apply(&self, x: &[C64], y: &mut [C64]);
}

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(invalid(format!("expected {} entries, got {}", rows * cols, data.len())));
        }
        Ok(Self { rows, cols, data })
    }

    /// Materializes a matrix-free operator column by column.
    pub fn from_operator(op: &dyn LinearOperator) -> Self {
        let n = op.dim();
        let mut m = Self::zeros(n, n);
        let mut e = vec![ZERO; n];
        let mut col = vec![ZERO; n];
        for j in 0..n {
            e[j] = C64::new(1.0, 0.0);
            op.apply(&e, &mut col);
            e[j] = ZERO;
            for i in 0..n {
                m[(i, j)] = col[i];
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [C64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub(crate) fn rows_mut_par(&mut self) -> rayon::slice::ChunksMut<'_, C64> {
        self.data.par_chunks_mut(self.cols)
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![ZERO; self.rows];
        self.matvec_into(x, &mut y);
        y
    }

    fn matvec_into(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.cols);
        y.par_iter_mut().enumerate().for_each(|(i, yi)| {
            *yi = self.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
        });
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl LinearOperator for CMatrix {
    fn dim(&self) -> usize {
        self.rows
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        self.matvec_into(x, y);
    }
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Hermitian inner product ⟨a, b⟩ = Σ conj(aᵢ) bᵢ.
fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// |Ax − b| / |b|, or |Ax| when b = 0.
pub fn relative_residual(op: &dyn LinearOperator, x: &[C64], b: &[C64]) -> f64 {
    let mut ax = vec![ZERO; b.len()];
    op.apply(x, &mut ax);
    let r: Vec<C64> = ax.iter().zip(b).map(|(a, b)| a - b).collect();
    let nb = norm(b);
    if nb == 0.0 {
        norm(&r)
    } else {
        norm(&r) / nb
    }
}

/// Gaussian elimination with partial pivoting.
pub fn solve_direct(a: &CMatrix, b: &[C64]) -> Result<Vec<C64>> {
    let n = a.rows;
    if a.cols != n {
        return Err(invalid(format!("matrix is {}x{}, not square", a.rows, a.cols)));
    }
    if b.len() != n {
        return Err(invalid(format!("right-hand side has length {}, expected {n}", b.len())));
    }
    let row_max: Vec<f64> = (0..n).map(|i| a.row(i).iter().map(|z| z.norm()).fold(0.0, f64::max)).collect();
    let mut lu = a.clone();
    let mut x = b.to_vec();
    let mut scale = row_max;
    for col in 0..n {
        let (piv, piv_abs) = (col..n)
            .map(|i| (i, lu[(i, col)].norm()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if !(piv_abs > 1e-13 * scale[piv]) || scale[piv] == 0.0 {
            return Err(Error::SingularMatrix { column: col, pivot: piv_abs.max(0.0) });
        }
        if piv != col {
            for j in 0..n {
                lu.data.swap(col * n + j, piv * n + j);
            }
            x.swap(col, piv);
            scale.swap(col, piv);
        }
        let pivot = lu[(col, col)];
        let (top, bottom) = lu.data.split_at_mut((col + 1) * n);
        let prow = &top[col * n..];
        let xc = x[col];
        let updates: Vec<C64> = bottom
            .par_chunks_mut(n)
            .map(|row| {
                let f = row[col] / pivot;
                if f != ZERO {
                    for j in col..n {
                        row[j] -= f * prow[j];
                    }
                }
                f * xc
            })
            .collect();
        for (i, u) in updates.into_iter().enumerate() {
            x[col + 1 + i] -= u;
        }
    }
    for i in (0..n).rev() {
        let s: C64 = (i + 1..n).map(|j| lu[(i, j)] * x[j]).sum();
        x[i] = (x[i] - s) / lu[(i, i)];
    }
    Ok(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GmresOptions {
    pub tol: f64,
    pub restart: usize,
    pub max_iter: usize,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self { tol: 1e-10, restart: 50, max_iter: 1000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// Recomputed |Ax − b|/|b| for the returned x.
    pub final_residual: f64,
    pub converged: bool,
    /// Least-squares residual estimate after each inner iteration.
    #[serde(skip)]
    pub history: Vec<f64>,
}

impl SolveReport {
    /// Report for a vector that was not produced by a solve.
    pub fn trivial() -> Self {
        Self { iterations: 0, final_residual: 0.0, converged: true, history: vec![] }
    }

    pub fn ensure_converged(&self) -> Result<()> {
        if self.converged {
            Ok(())
        } else {
            Err(Error::NotConverged { iterations: self.iterations, residual: self.final_residual })
        }
    }
}

/// Restarted GMRES with modified Gram–Schmidt and Givens rotations,
/// starting from x = 0.
///
/// Non-convergence is reported through `SolveReport::converged`.
pub fn solve_gmres(op: &dyn LinearOperator, b: &[C64], opts: GmresOptions) -> Result<(Vec<C64>, SolveReport)> {
    let n = op.dim();
    if b.len() != n {
        return Err(invalid(format!("right-hand side has length {}, expected {n}", b.len())));
    }
    if !(opts.tol > 0.0) || opts.restart == 0 {
        return Err(invalid("GMRES needs tol > 0 and restart >= 1"));
    }
    let mut x = vec![ZERO; n];
    let bnorm = norm(b);
    if bnorm == 0.0 {
        let report = SolveReport { iterations: 0, final_residual: 0.0, converged: true, history: vec![] };
        return Ok((x, report));
    }
    let m = opts.restart.min(n);
    let mut iterations = 0;
    let mut history = Vec::new();
    let mut r = vec![ZERO; n];
    let mut w = vec![ZERO; n];

    while iterations < opts.max_iter {
        op.apply(&x, &mut r);
        r.iter_mut().zip(b).for_each(|(ri, bi)| *ri = bi - *ri);
        let beta = norm(&r);
        if beta / bnorm <= opts.tol {
            break;
        }
        let mut v: Vec<Vec<C64>> = Vec::with_capacity(m + 1);
        v.push(r.iter().map(|z| z / beta).collect());
        let mut h = vec![vec![ZERO; m]; m + 1];
        let mut cs = vec![0.0f64; m];
        let mut sn = vec![ZERO; m];
        let mut g = vec![ZERO; m + 1];
        g[0] = C64::new(beta, 0.0);
        let mut k_used = 0;

        for j in 0..m {
            if iterations >= opts.max_iter {
                break;
            }
            op.apply(&v[j], &mut w);
            for i in 0..=j {
                let hij = inner(&v[i], &w);
                h[i][j] = hij;
                w.iter_mut().zip(&v[i]).for_each(|(wk, vk)| *wk -= hij * vk);
            }
            let hn = norm(&w);
            h[j + 1][j] = C64::new(hn, 0.0);
            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i].conj() * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let (c, s) = givens(h[j][j], h[j + 1][j]);
            cs[j] = c;
            sn[j] = s;
            h[j][j] = c * h[j][j] + s * h[j + 1][j];
            h[j + 1][j] = ZERO;
            g[j + 1] = -s.conj() * g[j];
            g[j] *= c;
            iterations += 1;
            k_used = j + 1;
            let est = g[j + 1].norm() / bnorm;
            history.push(est);
            if est <= opts.tol || hn == 0.0 {
                break;
            }
            v.push(w.iter().map(|z| z / hn).collect());
        }

        let mut y = vec![ZERO; k_used];
        for i in (0..k_used).rev() {
            let s: C64 = (i + 1..k_used).map(|l| h[i][l] * y[l]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        for (yi, vi) in y.iter().zip(&v) {
            x.par_iter_mut().zip(vi.par_iter()).for_each(|(xk, vk)| *xk += yi * vk);
        }
        if history.last().is_some_and(|&e| e <= opts.tol) {
            // Confirm with a true residual before leaving the outer loop.
            if relative_residual(op, &x, b) <= opts.tol {
                break;
            }
        }
    }
    let final_residual = relative_residual(op, &x, b);
    let report = SolveReport { iterations, final_residual, converged: final_residual <= opts.tol, history };
    Ok((x, report))
}

/// Rotation (c, s) with c real such that [c s; −s̄ c]·[a; b] = [ρ; 0].
fn givens(a: C64, b: C64) -> (f64, C64) {
    let (na, nb) = (a.norm(), b.norm());
    if nb == 0.0 {
        return (1.0, ZERO);
    }
    if na == 0.0 {
        return (0.0, b.conj() / nb);
    }
    let t = na.hypot(nb);
    let c = na / t;
    let s = (a / na) * b.conj() / t;
    (c, s)
}
