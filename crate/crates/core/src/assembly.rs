//! Global DoF numbering, element matrices and the reduced stiffness system.
//!
//! Global unknowns are the vertex values followed by one unknown per face: the
//! centroid value (`H1`) or the centroid normal derivative along the canonical face
//! normal (`H2`). For `H2`, local face functions refer to the cell-outward normal,
//! so the local coefficient equals `s · global` with `s = n_out · n_face = ±1`.
//! Boundary vertices and faces are eliminated (homogeneous Dirichlet data).

use std::io::Write;

use nalgebra::Point3;
use rayon::prelude::*;

use crate::element_h1::build_h1_basis;
use crate::element_h2::build_h2_basis;
use crate::frame::CellFrame;
use crate::lambda_poly::{Jet2, JetOrder, LambdaPoly};
use crate::mesh::PrismMesh;
use crate::quadrature::prism_rule;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementKind {
    H1,
    H2,
}

impl ElementKind {
    /// Order of the differential operator the element discretizes.
    pub fn order(self) -> usize {
        match self {
            ElementKind::H1 => 1,
            ElementKind::H2 => 2,
        }
    }

    fn jet_order(self) -> JetOrder {
        match self {
            ElementKind::H1 => JetOrder::Gradient,
            ElementKind::H2 => JetOrder::Hessian,
        }
    }
}

/// The 11 shape functions of `kind` on a cell.
pub fn local_basis(frame: &CellFrame, kind: ElementKind) -> [LambdaPoly; 11] {
    match kind {
        ElementKind::H1 => build_h1_basis(frame).phi,
        ElementKind::H2 => build_h2_basis(frame).psi,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    pub kind: ElementKind,
    pub n_vertices: usize,
    pub n_faces: usize,
    /// Global DoF of each local DoF, per cell.
    pub cell_dofs: Vec<[usize; 11]>,
    /// `+1` everywhere except `H2` face DoFs, where it is `n_out · n_face`.
    pub cell_signs: Vec<[f64; 11]>,
    pub constrained: Vec<bool>,
    /// Position among the free DoFs, `None` for constrained ones.
    pub free_index: Vec<Option<usize>>,
    pub n_free: usize,
}

impl DofMap {
    pub fn n_total(&self) -> usize {
        self.n_vertices + self.n_faces
    }

    pub fn vertex_dof(&self, v: usize) -> usize {
        v
    }

    pub fn face_dof(&self, f: usize) -> usize {
        self.n_vertices + f
    }

    /// Full global vector with zeros at constrained DoFs.
    pub fn expand(&self, free: &[f64]) -> Vec<f64> {
        assert_eq!(free.len(), self.n_free);
        self.free_index.iter().map(|fi| fi.map_or(0.0, |k| free[k])).collect()
    }

    /// Local basis coefficients of a global function on `cell`.
    pub fn gather(&self, cell: usize, global: &[f64]) -> [f64; 11] {
        let dofs = &self.cell_dofs[cell];
        let signs = &self.cell_signs[cell];
        std::array::from_fn(|i| signs[i] * global[dofs[i]])
    }
}

pub fn build_dof_map(mesh: &PrismMesh, kind: ElementKind) -> DofMap {
    let nv = mesh.num_vertices();
    let nf = mesh.num_faces();
    let mut constrained = mesh.boundary_vertex.clone();
    constrained.extend(mesh.faces.iter().map(|f| f.is_boundary));

    let mut free_index = vec![None; nv + nf];
    let mut n_free = 0;
    for (g, c) in constrained.iter().enumerate() {
        if !c {
            free_index[g] = Some(n_free);
            n_free += 1;
        }
    }

    let mut cell_dofs = Vec::with_capacity(mesh.num_cells());
    let mut cell_signs = Vec::with_capacity(mesh.num_cells());
    for cell in &mesh.cells {
        let dofs = std::array::from_fn(|i| {
            if i < 6 {
                cell.vertices[i]
            } else {
                nv + cell.faces[i - 6]
            }
        });
        let mut signs = [1.0; 11];
        if kind == ElementKind::H2 {
            let pts = cell.vertices.map(|v| mesh.vertices[v]);
            for lf in 0..5 {
                let face = &mesh.faces[cell.faces[lf]];
                let outward = outward_normal(&pts, lf);
                signs[6 + lf] = if outward.dot(&face.normal) >= 0.0 { 1.0 } else { -1.0 };
            }
        }
        cell_dofs.push(dofs);
        cell_signs.push(signs);
    }

    DofMap {
        kind,
        n_vertices: nv,
        n_faces: nf,
        cell_dofs,
        cell_signs,
        constrained,
        free_index,
        n_free,
    }
}

/// Outward direction of local face `lf`, from the vertex positions alone.
fn outward_normal(p: &[Point3<f64>; 6], lf: usize) -> nalgebra::Vector3<f64> {
    match lf {
        3 => -nalgebra::Vector3::z(),
        4 => nalgebra::Vector3::z(),
        i => {
            let (j, k) = crate::frame::side_pair(i);
            let e = p[k] - p[j];
            let n = nalgebra::Vector3::new(e.y, -e.x, 0.0);
            // orient away from the opposite vertex
            if n.dot(&(p[j] - p[i])) >= 0.0 {
                n
            } else {
                -n
            }
        }
    }
}

/// Symmetric matrix in compressed sparse row form, both triangles stored.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds the full symmetric matrix from lower-triangle triplets `(row ≥ col)`.
    /// Duplicates are summed in input order.
    pub fn from_lower_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut lower: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len() / 2);
        for (r, c, v) in triplets {
            debug_assert!(r >= c && r < n);
            match lower.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => lower.push((r, c, v)),
            }
        }

        let mut counts = vec![0usize; n];
        for &(r, c, _) in &lower {
            counts[r] += 1;
            if r != c {
                counts[c] += 1;
            }
        }
        let mut row_ptr = vec![0; n + 1];
        for i in 0..n {
            row_ptr[i + 1] = row_ptr[i] + counts[i];
        }
        let nnz = row_ptr[n];
        let mut col_idx = vec![0; nnz];
        let mut values = vec![0.0; nnz];
        let mut next = row_ptr.clone();
        // Entries of row r: first the mirrored (c > r) ones come later in `lower`
        // order, so fill the lower part first, then the mirrored upper part.
        for &(r, c, v) in &lower {
            col_idx[next[r]] = c;
            values[next[r]] = v;
            next[r] += 1;
        }
        for &(r, c, v) in &lower {
            if r != c {
                col_idx[next[c]] = r;
                values[next[c]] = v;
                next[c] += 1;
            }
        }
        // lower part of each row is sorted, mirrored part is sorted by r, and every
        // mirrored column exceeds every lower column, so rows are already sorted
        CsrMatrix {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()]
            .iter()
            .copied()
            .zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().enumerate().for_each(|(i, yi)| {
            *yi = self.row(i).map(|(j, a)| a * x[j]).sum();
        });
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for (i, row) in d.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        d
    }

    /// One `row col value` line per stored entry, zero-based.
    pub fn write_coordinate(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "% {} {} {}", self.n, self.n, self.nnz())?;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                writeln!(w, "{i} {j} {v:e}")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SparseSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub dof_map: DofMap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadDegrees {
    pub stiffness: usize,
    pub load: usize,
}

impl Default for QuadDegrees {
    fn default() -> Self {
        QuadDegrees { stiffness: 6, load: 8 }
    }
}

pub type LocalMatrix = [[f64; 11]; 11];

/// Jets of the 11 shape functions at each quadrature point.
pub fn basis_jets(
    basis: &[LambdaPoly; 11],
    frame: &CellFrame,
    points: &[Point3<f64>],
    order: JetOrder,
) -> Vec<[Jet2; 11]> {
    let grads = frame.lambda_gradients();
    points
        .iter()
        .map(|p| {
            let lam = frame.lambda_values(p);
            std::array::from_fn(|i| basis[i].evaluate_lambdas(&lam, &grads, order))
        })
        .collect()
}

fn energy_density(kind: ElementKind, a: &Jet2, b: &Jet2) -> f64 {
    match kind {
        ElementKind::H1 => a.gradient.dot(&b.gradient),
        ElementKind::H2 => a.hessian.frobenius_dot(&b.hessian),
    }
}

/// `∫_K ∇φi·∇φj` (`H1`) or `∫_K ∇²ψi : ∇²ψj` (`H2`).
pub fn local_matrix(frame: &CellFrame, kind: ElementKind, degree: usize) -> Result<LocalMatrix> {
    let basis = local_basis(frame, kind);
    let rule = prism_rule(frame, degree)?;
    let jets = basis_jets(&basis, frame, &rule.points, kind.jet_order());
    Ok(integrate_pairs(kind, &jets, &rule.weights))
}

fn integrate_pairs(kind: ElementKind, jets: &[[Jet2; 11]], weights: &[f64]) -> LocalMatrix {
    let mut a = [[0.0; 11]; 11];
    for (jet, w) in jets.iter().zip(weights) {
        for i in 0..11 {
            for j in i..11 {
                a[i][j] += w * energy_density(kind, &jet[i], &jet[j]);
            }
        }
    }
    for i in 0..11 {
        for j in 0..i {
            a[i][j] = a[j][i];
        }
    }
    a
}

/// Independent local matrix: derivatives by central differences of basis values
/// (fourth-order stencil for gradients, second differences for Hessians).
pub fn local_matrix_oracle(frame: &CellFrame, kind: ElementKind, degree: usize) -> Result<LocalMatrix> {
    let basis = local_basis(frame, kind);
    let rule = prism_rule(frame, degree)?;
    let diam = frame.edge_lengths.iter().fold(frame.height, |a, &b| a.max(b));
    // both stencils are exact for cubics, so only roundoff limits the step
    let h = 1e-3 * diam;
    let e = [nalgebra::Vector3::x(), nalgebra::Vector3::y(), nalgebra::Vector3::z()];
    let jets: Vec<[Jet2; 11]> = rule
        .points
        .iter()
        .map(|x| {
            std::array::from_fn(|i| {
                let v = |p: Point3<f64>| basis[i].value_at(frame, &p);
                let mut jet = Jet2 {
                    value: v(*x),
                    ..Jet2::ZERO
                };
                for k in 0..3 {
                    let d = e[k] * h;
                    jet.gradient[k] = (8.0 * (v(x + d) - v(x - d)) - v(x + d * 2.0) + v(x - d * 2.0)) / (12.0 * h);
                }
                if kind == ElementKind::H2 {
                    jet.hessian = crate::lambda_poly::SymMat3::from_fn(|k, l| {
                        if k == l {
                            (v(x + e[k] * h) - 2.0 * v(*x) + v(x - e[k] * h)) / (h * h)
                        } else {
                            let (a, b) = (e[k] * h, e[l] * h);
                            (v(x + a + b) - v(x + a - b) - v(x - a + b) + v(x - a - b)) / (4.0 * h * h)
                        }
                    });
                }
                jet
            })
        })
        .collect();
    Ok(integrate_pairs(kind, &jets, &rule.weights))
}

/// `∫_K f φi` for the 11 shape functions.
pub fn local_load(
    frame: &CellFrame,
    basis: &[LambdaPoly; 11],
    f: &(dyn Fn(&Point3<f64>) -> f64 + Sync),
    degree: usize,
) -> Result<[f64; 11]> {
    let rule = prism_rule(frame, degree)?;
    let jets = basis_jets(basis, frame, &rule.points, JetOrder::Value);
    let mut out = [0.0; 11];
    for ((jet, p), w) in jets.iter().zip(&rule.points).zip(&rule.weights) {
        let fw = w * f(p);
        for i in 0..11 {
            out[i] += fw * jet[i].value;
        }
    }
    Ok(out)
}

/// Assembles the reduced system for the operator of order `order` with source `f`.
pub fn assemble(
    mesh: &PrismMesh,
    frames: &[CellFrame],
    kind: ElementKind,
    order: usize,
    f: &(dyn Fn(&Point3<f64>) -> f64 + Sync),
    degrees: QuadDegrees,
) -> Result<SparseSystem> {
    if kind.order() != order {
        return Err(Error::ElementOrderMismatch { kind, order });
    }
    let dof_map = build_dof_map(mesh, kind);

    let locals: Vec<(LocalMatrix, [f64; 11])> = frames
        .par_iter()
        .map(|frame| {
            let basis = local_basis(frame, kind);
            let rule = prism_rule(frame, degrees.stiffness)?;
            let jets = basis_jets(&basis, frame, &rule.points, kind.jet_order());
            let a = integrate_pairs(kind, &jets, &rule.weights);
            let b = local_load(frame, &basis, f, degrees.load)?;
            Ok((a, b))
        })
        .collect::<Result<_>>()?;

    let mut triplets = Vec::with_capacity(locals.len() * 66);
    let mut rhs = vec![0.0; dof_map.n_free];
    for (cell, (a, b)) in locals.iter().enumerate() {
        let dofs = &dof_map.cell_dofs[cell];
        let signs = &dof_map.cell_signs[cell];
        for i in 0..11 {
            let Some(ri) = dof_map.free_index[dofs[i]] else {
                continue;
            };
            rhs[ri] += signs[i] * b[i];
            for j in 0..11 {
                let Some(rj) = dof_map.free_index[dofs[j]] else {
                    continue;
                };
                if ri >= rj {
                    triplets.push((ri, rj, signs[i] * signs[j] * a[i][j]));
                }
            }
        }
    }
    let matrix = CsrMatrix::from_lower_triplets(dof_map.n_free, triplets);
    Ok(SparseSystem { matrix, rhs, dof_map })
}

/// Global interpolant of a smooth function: values at vertices and, per face, the
/// centroid value (`H1`) or the derivative along the canonical normal (`H2`).
pub fn global_interpolant(
    mesh: &PrismMesh,
    dof_map: &DofMap,
    value: impl Fn(&Point3<f64>) -> f64,
    gradient: impl Fn(&Point3<f64>) -> nalgebra::Vector3<f64>,
) -> Vec<f64> {
    let mut g: Vec<f64> = mesh.vertices.iter().map(&value).collect();
    g.extend(mesh.faces.iter().map(|face| match dof_map.kind {
        ElementKind::H1 => value(&face.centroid),
        ElementKind::H2 => gradient(&face.centroid).dot(&face.normal),
    }));
    g
}
