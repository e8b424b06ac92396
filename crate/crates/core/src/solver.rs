//! Solvers for the reduced symmetric positive definite systems.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::{Par, Side};

use crate::assembly::{CsrMatrix, DofMap, SparseSystem};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolverMethod {
    /// Sparse Cholesky with fill-reducing ordering.
    Direct,
    /// Jacobi-preconditioned conjugate gradients.
    Cg { rel_tol: f64, max_iter: usize },
}

impl SolverMethod {
    pub fn cg(rel_tol: f64) -> Self {
        SolverMethod::Cg {
            rel_tol,
            max_iter: 100_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub x: Vec<f64>,
    /// `‖Ax - b‖ / ‖b‖`, or `‖Ax‖` when `b = 0`.
    pub relative_residual: f64,
    pub iterations: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct DiscreteSolution {
    pub dof_map: DofMap,
    /// Values of the free DoFs; constrained DoFs are zero.
    pub free: Vec<f64>,
    pub relative_residual: f64,
    pub iterations: Option<usize>,
}

impl DiscreteSolution {
    pub fn global_coefficients(&self) -> Vec<f64> {
        self.dof_map.expand(&self.free)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn residual_norm(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let mut ax = vec![0.0; a.n];
    a.matvec(x, &mut ax);
    ax.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt()
}

fn relative_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let r = residual_norm(a, x, b);
    let nb = norm(b);
    if nb > 0.0 {
        r / nb
    } else {
        r
    }
}

pub fn solve_csr(a: &CsrMatrix, b: &[f64], method: SolverMethod) -> Result<SolveReport> {
    assert_eq!(a.n, b.len());
    if b.iter().all(|&v| v == 0.0) {
        return Ok(SolveReport {
            x: vec![0.0; a.n],
            relative_residual: 0.0,
            iterations: Some(0),
        });
    }
    match method {
        SolverMethod::Direct => cholesky(a, b),
        SolverMethod::Cg { rel_tol, max_iter } => pcg(a, b, rel_tol, max_iter),
    }
}

pub fn solve_spd(system: &SparseSystem, method: SolverMethod) -> Result<DiscreteSolution> {
    let report = solve_csr(&system.matrix, &system.rhs, method)?;
    Ok(DiscreteSolution {
        dof_map: system.dof_map.clone(),
        free: report.x,
        relative_residual: report.relative_residual,
        iterations: report.iterations,
    })
}

fn cholesky(a: &CsrMatrix, b: &[f64]) -> Result<SolveReport> {
    // keep the factorization single-threaded so results are bit-reproducible
    faer::set_global_parallelism(Par::Seq);
    // symmetric: the CSR arrays are also the CSC arrays
    let symbolic = SymbolicSparseColMatRef::new_checked(a.n, a.n, &a.row_ptr, None, &a.col_idx);
    let mat = SparseColMatRef::new(symbolic, &a.values);
    let llt = mat.sp_cholesky(Side::Lower).map_err(|e| {
        let diag = a.diagonal();
        let min_diag = diag.iter().copied().fold(f64::INFINITY, f64::min);
        Error::Factorization(format!(
            "{e:?} (n = {}, nnz = {}, min diagonal = {min_diag:e})",
            a.n,
            a.nnz()
        ))
    })?;
    let mut rhs = faer::Col::<f64>::from_fn(a.n, |i| b[i]);
    llt.solve_in_place(rhs.as_mat_mut());
    let x: Vec<f64> = (0..a.n).map(|i| rhs[i]).collect();
    let relative_residual = relative_residual(a, &x, b);
    Ok(SolveReport {
        x,
        relative_residual,
        iterations: None,
    })
}

fn pcg(a: &CsrMatrix, b: &[f64], rel_tol: f64, max_iter: usize) -> Result<SolveReport> {
    let n = a.n;
    let inv_diag: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let nb = norm(b);
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);

    for it in 1..=max_iter {
        a.matvec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::Factorization(format!(
                "matrix is not positive definite (pᵀAp = {pap:e} at iteration {it})"
            )));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if norm(&r) <= rel_tol * nb {
            // confirm with the true residual; recurrences drift
            let rel = relative_residual(a, &x, b);
            if rel <= rel_tol {
                return Ok(SolveReport {
                    x,
                    relative_residual: rel,
                    iterations: Some(it),
                });
            }
            a.matvec(&x, &mut ap);
            for i in 0..n {
                r[i] = b[i] - ap[i];
            }
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::CgNotConverged {
        iterations: max_iter,
        residual: relative_residual(a, &x, b),
    })
}
