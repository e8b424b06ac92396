//! Per-cell affine coordinates and geometric data.
//!
//! For a right prism with bottom triangle `V1V2V3` at height `zb` and top at `zt`
//! (`H = zt - zb`):
//!
//! - `λ1, λ2, λ3` are the barycentric coordinates of `(x1, x2)` in the bottom triangle,
//! - `λ4 = 2(x3 - zb)/H` vanishes on `F4` and equals 1 at the side-face centroids,
//! - `λ5 = 2(x3 - zt)/H` vanishes on `F5` and equals -1 at the side-face centroids,
//! - `λ0 = 2(x3 - (zb + zt)/2)/H` vanishes at mid-height, `λ0(V1) = -1`, `λ0(V4) = 1`.

use nalgebra::{Point3, Vector3};

use crate::mesh::{PrismMesh, LOCAL_FACES};
use crate::{Error, Result};

/// `x ↦ gradient · x + offset`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineFn {
    pub gradient: Vector3<f64>,
    pub offset: f64,
}

impl AffineFn {
    pub fn eval(&self, p: &Point3<f64>) -> f64 {
        self.gradient.dot(&p.coords) + self.offset
    }

    /// The affine function with the given gradient taking `value` at `p`.
    fn through(gradient: Vector3<f64>, p: &Point3<f64>, value: f64) -> Self {
        AffineFn {
            gradient,
            offset: value - gradient.dot(&p.coords),
        }
    }

    fn sub(&self, other: &AffineFn) -> AffineFn {
        AffineFn {
            gradient: self.gradient - other.gradient,
            offset: self.offset - other.offset,
        }
    }
}

/// For side face `Fi` (`i = 0, 1, 2` zero-based), the other two vertex indices `(j, k)`
/// in cyclic order: `F1 ↔ (V2, V3)`, `F2 ↔ (V3, V1)`, `F3 ↔ (V1, V2)`.
pub const fn side_pair(i: usize) -> (usize, usize) {
    ((i + 1) % 3, (i + 2) % 3)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellFrame {
    pub vertices: [Point3<f64>; 6],
    /// `λ0, ..., λ5`
    pub lambda: [AffineFn; 6],
    /// Face centroids `M1..M5`.
    pub centroids: [Point3<f64>; 5],
    /// Outward unit normals of `F1..F5`.
    pub normals: [Vector3<f64>; 5],
    /// Unit tangent of side face `Fi` pointing from `Vj` to `Vk`.
    pub tangents: [Vector3<f64>; 3],
    /// Midpoints of the bottom edges `VjVk` opposite `Vi`.
    pub edge_midpoints: [Point3<f64>; 3],
    /// `|VjVk|` for the bottom edge opposite `Vi`.
    pub edge_lengths: [f64; 3],
    /// `|VjV(j+3)|`; equal to the cell height for right prisms.
    pub height: f64,
    pub base_area: f64,
    pub face_areas: [f64; 5],
    pub volume: f64,
    /// `ξi = λk - λj`, equal to -1 on the edge through `Vj` and 1 on the one through `Vk`.
    pub xi: [AffineFn; 3],
    /// `ηi = λ0`, equal to -1 on the bottom and 1 on the top edge of `Fi`.
    pub eta: [AffineFn; 3],
}

impl CellFrame {
    /// Frame of a right prism given by its six vertices in local order.
    ///
    /// Only the bottom triangle and the two cap heights are used; the caller is
    /// expected to have validated the geometry.
    pub fn from_vertices(v: &[Point3<f64>; 6], cell: usize) -> Result<Self> {
        let degenerate = |reason: &str| Error::DegenerateCell {
            cell,
            reason: reason.to_string(),
        };
        let (a, b, c) = (v[0], v[1], v[2]);
        let det = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
        let scale = [b - a, c - b, a - c]
            .iter()
            .map(|e| e.xy().norm_squared())
            .fold(0.0, f64::max);
        if !(det.abs() > 1e-14 * scale) || !det.is_finite() {
            return Err(degenerate("bottom triangle has zero area"));
        }
        let zb = (v[0].z + v[1].z + v[2].z) / 3.0;
        let zt = (v[3].z + v[4].z + v[5].z) / 3.0;
        let height = zt - zb;
        if !(height > 0.0) {
            return Err(degenerate("prism has non-positive height"));
        }

        let bary = |i: usize| {
            let (j, k) = side_pair(i);
            let (pj, pk) = (v[j], v[k]);
            let g = Vector3::new(pj.y - pk.y, pk.x - pj.x, 0.0) / det;
            AffineFn::through(g, &v[i], 1.0)
        };
        let gz = Vector3::new(0.0, 0.0, 2.0 / height);
        let at_height = |z: f64, value: f64| AffineFn::through(gz, &Point3::new(0.0, 0.0, z), value);
        let lambda = [
            at_height(0.5 * (zb + zt), 0.0),
            bary(0),
            bary(1),
            bary(2),
            at_height(zb, 0.0),
            at_height(zt, 0.0),
        ];

        let centroids = std::array::from_fn(|f| {
            let local = LOCAL_FACES[f];
            let sum = local.iter().fold(Vector3::zeros(), |acc, &l| acc + v[l].coords);
            Point3::from(sum / local.len() as f64)
        });
        let normals = std::array::from_fn(|f| match f {
            0..=2 => -lambda[f + 1].gradient.normalize(),
            3 => -Vector3::z(),
            _ => Vector3::z(),
        });
        let tangents = std::array::from_fn(|i| {
            let (j, k) = side_pair(i);
            let mut t = v[k] - v[j];
            t.z = 0.0;
            t.normalize()
        });
        let edge_midpoints = std::array::from_fn(|i| {
            let (j, k) = side_pair(i);
            Point3::from((v[j].coords + v[k].coords) * 0.5)
        });
        let edge_lengths = std::array::from_fn(|i| {
            let (j, k) = side_pair(i);
            (v[k] - v[j]).xy().norm()
        });
        let base_area = 0.5 * det.abs();
        let face_areas = [
            edge_lengths[0] * height,
            edge_lengths[1] * height,
            edge_lengths[2] * height,
            base_area,
            base_area,
        ];
        let xi = std::array::from_fn(|i| {
            let (j, k) = side_pair(i);
            lambda[k + 1].sub(&lambda[j + 1])
        });
        let eta = [lambda[0]; 3];

        Ok(CellFrame {
            vertices: *v,
            lambda,
            centroids,
            normals,
            tangents,
            edge_midpoints,
            edge_lengths,
            height,
            base_area,
            face_areas,
            volume: base_area * height,
            xi,
            eta,
        })
    }

    /// The prism `{(0,0),(1,0),(0,1)} × [0,1]`.
    pub fn reference() -> Self {
        Self::from_vertices(&reference_prism(), 0).expect("reference prism is valid")
    }

    pub fn lambda_values(&self, p: &Point3<f64>) -> [f64; 6] {
        self.lambda.map(|l| l.eval(p))
    }

    pub fn lambda_gradients(&self) -> [Vector3<f64>; 6] {
        self.lambda.map(|l| l.gradient)
    }

    pub fn grad_norm(&self, m: usize) -> f64 {
        self.lambda[m].gradient.norm()
    }

    /// Point of the bottom (`top = false`) or top cap with the given barycentric
    /// coordinates.
    pub fn cap_point(&self, bary: [f64; 3], top: bool) -> Point3<f64> {
        let off = if top { 3 } else { 0 };
        let sum = (0..3).fold(Vector3::zeros(), |acc, i| acc + self.vertices[i + off].coords * bary[i]);
        Point3::from(sum)
    }

    /// Point of side face `Fi` at parameters `s, t ∈ [0, 1]` along `VjVk` and upward.
    pub fn side_point(&self, i: usize, s: f64, t: f64) -> Point3<f64> {
        let (j, k) = side_pair(i);
        let bottom = self.vertices[j].coords * (1.0 - s) + self.vertices[k].coords * s;
        Point3::from(bottom + Vector3::z() * (t * self.height))
    }
}

pub fn reference_prism() -> [Point3<f64>; 6] {
    [
        Point3::new(0.0, 0.0, 0.0),
        Point3::new(1.0, 0.0, 0.0),
        Point3::new(0.0, 1.0, 0.0),
        Point3::new(0.0, 0.0, 1.0),
        Point3::new(1.0, 0.0, 1.0),
        Point3::new(0.0, 1.0, 1.0),
    ]
}

pub fn compute_frame(mesh: &PrismMesh, cell: usize) -> Result<CellFrame> {
    CellFrame::from_vertices(&mesh.cell_points(cell), cell)
}

/// Frames of all cells, in cell order.
pub fn compute_frames(mesh: &PrismMesh) -> Result<Vec<CellFrame>> {
    use rayon::prelude::*;
    (0..mesh.num_cells())
        .into_par_iter()
        .map(|c| compute_frame(mesh, c))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-14
    }

    #[test]
    fn reference_coordinates() {
        let f = CellFrame::reference();
        for &(x, y, z) in &[(0.2, 0.3, 0.4), (0.7, 0.1, 0.9), (-1.0, 2.0, 3.0)] {
            let l = f.lambda_values(&Point3::new(x, y, z));
            assert!(close(l[1], 1.0 - x - y));
            assert!(close(l[2], x));
            assert!(close(l[3], y));
            assert!(close(l[0], 2.0 * z - 1.0));
            assert!(close(l[4], 2.0 * z));
            assert!(close(l[5], 2.0 * z - 2.0));
        }
    }

    #[test]
    fn reference_centroids_and_gradient() {
        let f = CellFrame::reference();
        assert!((f.centroids[0] - Point3::new(0.5, 0.5, 0.5)).norm() < 1e-15);
        assert!((f.centroids[3] - Point3::new(1.0 / 3.0, 1.0 / 3.0, 0.0)).norm() < 1e-15);
        assert!(close(f.grad_norm(0), 2.0));
        assert!(close(f.face_areas[0], 2f64.sqrt()));
    }

    #[test]
    fn outward_normals_point_away_from_centroid() {
        let f = CellFrame::reference();
        let center = Point3::from(f.vertices.iter().fold(Vector3::zeros(), |a, p| a + p.coords) / 6.0);
        for k in 0..5 {
            assert!(f.normals[k].dot(&(f.centroids[k] - center)) > 0.0);
        }
    }

    #[test]
    fn degenerate_cells_are_rejected() {
        let mut v = reference_prism();
        v[2] = Point3::new(2.0, 0.0, 0.0);
        v[5] = Point3::new(2.0, 0.0, 1.0);
        assert!(matches!(
            CellFrame::from_vertices(&v, 7),
            Err(Error::DegenerateCell { cell: 7, .. })
        ));
        let mut v = reference_prism();
        for p in &mut v[3..] {
            p.z = 0.0;
        }
        assert!(CellFrame::from_vertices(&v, 0).is_err());
    }
}
