//! Broken Sobolev error norms and observed convergence orders.

use rayon::prelude::*;

use crate::assembly::{basis_jets, local_basis, DofMap, ElementKind};
use crate::frame::CellFrame;
use crate::lambda_poly::{Jet2, JetOrder};
use crate::problems::ExactSolution;
use crate::quadrature::prism_rule;
use crate::{Error, Result};

/// `‖u - u_h‖` in `L²`, the broken `H¹` seminorm and (for `H2`) the broken `H²` seminorm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    pub l2: f64,
    pub h1: f64,
    pub h2: Option<f64>,
}

/// Value, gradient and Hessian of the discrete function on one cell at the
/// quadrature points of `rule`.
fn discrete_jets(
    frame: &CellFrame,
    kind: ElementKind,
    coeffs: &[f64; 11],
    points: &[nalgebra::Point3<f64>],
) -> Vec<Jet2> {
    let basis = local_basis(frame, kind);
    let order = match kind {
        ElementKind::H1 => JetOrder::Gradient,
        ElementKind::H2 => JetOrder::Hessian,
    };
    basis_jets(&basis, frame, points, order)
        .iter()
        .map(|jets| {
            let mut out = Jet2::ZERO;
            for (c, j) in coeffs.iter().zip(jets) {
                out.axpy(*c, j);
            }
            out
        })
        .collect()
}

/// Error of the discrete function with full global coefficient vector `global`.
///
/// Cell contributions are computed in parallel and summed in cell order.
pub fn error_norms(
    frames: &[CellFrame],
    dof_map: &DofMap,
    global: &[f64],
    exact: &dyn ExactSolution,
    degree: usize,
) -> Result<ErrorNorms> {
    let kind = dof_map.kind;
    let per_cell: Vec<[f64; 3]> = frames
        .par_iter()
        .enumerate()
        .map(|(cell, frame)| {
            let rule = prism_rule(frame, degree)?;
            let coeffs = dof_map.gather(cell, global);
            let uh = discrete_jets(frame, kind, &coeffs, &rule.points);
            let mut acc = [0.0; 3];
            for ((p, w), jh) in rule.points.iter().zip(&rule.weights).zip(&uh) {
                let u = exact.jet(p);
                acc[0] += w * (u.value - jh.value).powi(2);
                acc[1] += w * (u.gradient - jh.gradient).norm_squared();
                if kind == ElementKind::H2 {
                    acc[2] += w * (u.hessian - jh.hessian).frobenius_norm_sq();
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;

    let mut total = [0.0; 3];
    for c in &per_cell {
        for k in 0..3 {
            total[k] += c[k];
        }
    }
    Ok(ErrorNorms {
        l2: total[0].sqrt(),
        h1: total[1].sqrt(),
        h2: (kind == ElementKind::H2).then(|| total[2].sqrt()),
    })
}

/// `log2(e_k / e_{k+1})` for consecutive errors on meshes with halved size.
pub fn convergence_orders(errors: &[f64]) -> Result<Vec<f64>> {
    if let Some(bad) = errors.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
        return Err(Error::InvalidErrors(format!(
            "errors must be positive and finite, got {bad}"
        )));
    }
    Ok(errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect())
}
