//! Structured triangular-prism meshes of the unit cube.
//!
//! A mesh is the product of a 2D triangulation of `[0,1]²` with a uniform subdivision
//! of `[0,1]` in `x3`. The 2D triangulation comes from an `n × n` grid whose interior
//! points in column `i` are shifted vertically by `(-1)^i θ/n`, giving trapezoids with
//! vertical parallel sides; each trapezoid is cut along its lower-left to upper-right
//! diagonal.
//!
//! Cell vertex order follows the element convention: `V1 V2 V3` is the bottom triangle
//! (counterclockwise seen from `+x3`) and `V(i+3)` sits vertically above `Vi`. Local
//! faces are `F1 = V2V3V6V5`, `F2 = V3V1V4V6`, `F3 = V1V2V5V4` (side quads, `Fi`
//! opposite `Vi`), `F4 = V1V2V3` (bottom) and `F5 = V4V5V6` (top).
//!
//! # Dump format
//!
//! [`PrismMesh::write_dump`] writes one line per vertex, `v x1 x2 x3`, followed by one
//! line per cell, `p i1 i2 i3 i4 i5 i6`, with zero-based vertex indices in local
//! order. Lines starting with `#` are comments.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};

use nalgebra::{Point3, Vector3};

use crate::{Error, Result};

/// Local vertex indices of the five faces of a prism.
pub const LOCAL_FACES: [&[usize]; 5] = [&[1, 2, 5, 4], &[2, 0, 3, 5], &[0, 1, 4, 3], &[0, 1, 2], &[3, 4, 5]];

const TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeshPattern {
    /// Shifted grid with offset `theta` in `[0, 0.5)`.
    Trapezoid { theta: f64 },
    /// Plain lattice, right triangles.
    Uniform,
}

impl Default for MeshPattern {
    fn default() -> Self {
        MeshPattern::Trapezoid { theta: 0.2 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrismCell {
    pub vertices: [usize; 6],
    pub faces: [usize; 5],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceKind {
    SideQuad,
    HorizontalTri,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    pub kind: FaceKind,
    pub vertices: Vec<usize>,
    pub centroid: Point3<f64>,
    /// Canonical unit normal, independent of which cell is traversed first.
    pub normal: Vector3<f64>,
    /// Adjacent cells with the local face index in each.
    pub cells: Vec<(usize, usize)>,
    pub is_boundary: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrismMesh {
    pub vertices: Vec<Point3<f64>>,
    pub cells: Vec<PrismCell>,
    pub faces: Vec<Face>,
    pub boundary_vertex: Vec<bool>,
}

/// Orients a unit normal so that `(n1, n2)` is lexicographically positive; purely
/// vertical normals point to `+x3`.
pub fn canonical_normal(n: Vector3<f64>) -> Vector3<f64> {
    let flip = if n[0].abs() > TOL {
        n[0] < 0.0
    } else if n[1].abs() > TOL {
        n[1] < 0.0
    } else {
        n[2] < 0.0
    };
    if flip {
        -n
    } else {
        n
    }
}

/// Newell normal of a planar polygon (unnormalized, length = 2 · area for planar input).
fn newell(points: &[Point3<f64>]) -> Vector3<f64> {
    let mut n = Vector3::zeros();
    for (a, b) in points.iter().zip(points.iter().cycle().skip(1)) {
        n += a.coords.cross(&b.coords);
    }
    n
}

fn centroid(points: &[Point3<f64>]) -> Point3<f64> {
    let sum = points.iter().fold(Vector3::zeros(), |acc, p| acc + p.coords);
    Point3::from(sum / points.len() as f64)
}

/// Structured mesh of `[0,1]³` with `2n³` prisms.
pub fn build_structured_mesh(n: usize, pattern: MeshPattern) -> Result<PrismMesh> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::InvalidMeshParameter(format!(
            "n must be even and at least 2, got {n}"
        )));
    }
    let theta = match pattern {
        MeshPattern::Trapezoid { theta } => {
            if !(0.0..0.5).contains(&theta) {
                return Err(Error::InvalidMeshParameter(format!(
                    "theta must lie in [0, 0.5), got {theta}"
                )));
            }
            theta
        }
        MeshPattern::Uniform => 0.0,
    };

    let h = 1.0 / n as f64;
    let plane = (n + 1) * (n + 1);
    let id2 = |i: usize, j: usize| i * (n + 1) + j;

    let mut vertices = Vec::with_capacity(plane * (n + 1));
    for k in 0..=n {
        for i in 0..=n {
            for j in 0..=n {
                let shift = if j == 0 || j == n {
                    0.0
                } else if i % 2 == 0 {
                    theta * h
                } else {
                    -theta * h
                };
                vertices.push(Point3::new(i as f64 * h, j as f64 * h + shift, k as f64 * h));
            }
        }
    }

    let mut triangles = Vec::with_capacity(2 * n * n);
    for i in 0..n {
        for j in 0..n {
            triangles.push([id2(i, j), id2(i + 1, j), id2(i + 1, j + 1)]);
            triangles.push([id2(i, j), id2(i + 1, j + 1), id2(i, j + 1)]);
        }
    }

    let mut cells = Vec::with_capacity(triangles.len() * n);
    for k in 0..n {
        for t in &triangles {
            let b = k * plane;
            let top = (k + 1) * plane;
            cells.push([b + t[0], b + t[1], b + t[2], top + t[0], top + t[1], top + t[2]]);
        }
    }
    PrismMesh::from_cells(vertices, cells)
}

impl PrismMesh {
    /// Builds face connectivity for the given cells.
    pub fn from_cells(vertices: Vec<Point3<f64>>, cell_vertices: Vec<[usize; 6]>) -> Result<Self> {
        let nv = vertices.len();
        let mut faces: Vec<Face> = Vec::new();
        let mut lookup: HashMap<[usize; 4], usize> = HashMap::new();
        let mut cells = Vec::with_capacity(cell_vertices.len());

        for (c, vs) in cell_vertices.iter().enumerate() {
            if let Some(&bad) = vs.iter().find(|&&v| v >= nv) {
                return Err(Error::InvalidMeshParameter(format!(
                    "cell {c} references vertex {bad} but there are only {nv} vertices"
                )));
            }
            let mut face_ids = [0; 5];
            for (lf, local) in LOCAL_FACES.iter().enumerate() {
                let ids: Vec<usize> = local.iter().map(|&l| vs[l]).collect();
                let mut key = [usize::MAX; 4];
                key[..ids.len()].copy_from_slice(&ids);
                key.sort_unstable();
                let fid = *lookup.entry(key).or_insert_with(|| {
                    let pts: Vec<_> = ids.iter().map(|&v| vertices[v]).collect();
                    let kind = if ids.len() == 4 {
                        FaceKind::SideQuad
                    } else {
                        FaceKind::HorizontalTri
                    };
                    let n = newell(&pts);
                    let n = if n.norm() > 0.0 { n.normalize() } else { n };
                    faces.push(Face {
                        kind,
                        vertices: ids.clone(),
                        centroid: centroid(&pts),
                        normal: canonical_normal(n),
                        cells: Vec::with_capacity(2),
                        is_boundary: false,
                    });
                    faces.len() - 1
                });
                let face = &mut faces[fid];
                if face.cells.len() == 2 {
                    return Err(Error::InvalidMeshParameter(format!(
                        "face {fid} is shared by more than two cells"
                    )));
                }
                face.cells.push((c, lf));
                face_ids[lf] = fid;
            }
            cells.push(PrismCell {
                vertices: *vs,
                faces: face_ids,
            });
        }

        let mut boundary_vertex = vec![false; nv];
        for f in &mut faces {
            f.is_boundary = f.cells.len() == 1;
            if f.is_boundary {
                for &v in &f.vertices {
                    boundary_vertex[v] = true;
                }
            }
        }
        Ok(PrismMesh {
            vertices,
            cells,
            faces,
            boundary_vertex,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn count_faces(&self, kind: FaceKind) -> usize {
        self.faces.iter().filter(|f| f.kind == kind).count()
    }

    pub fn cell_points(&self, cell: usize) -> [Point3<f64>; 6] {
        self.cells[cell].vertices.map(|v| self.vertices[v])
    }

    pub fn write_dump(&self, mut w: impl Write) -> Result<()> {
        writeln!(
            w,
            "# prism mesh: {} vertices, {} cells",
            self.num_vertices(),
            self.num_cells()
        )?;
        for v in &self.vertices {
            writeln!(w, "v {} {} {}", v.x, v.y, v.z)?;
        }
        for c in &self.cells {
            let v = c.vertices;
            writeln!(w, "p {} {} {} {} {} {}", v[0], v[1], v[2], v[3], v[4], v[5])?;
        }
        Ok(())
    }

    pub fn read_dump(r: impl BufRead) -> Result<Self> {
        let mut vertices = Vec::new();
        let mut cells = Vec::new();
        for (ln, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut tok = line.split_whitespace();
            let bad = |reason: String| Error::MeshDump { line: ln + 1, reason };
            match tok.next() {
                Some("v") => {
                    let xs: Vec<f64> = tok
                        .map(|t| t.parse::<f64>().map_err(|e| bad(e.to_string())))
                        .collect::<Result<_>>()?;
                    if xs.len() != 3 {
                        return Err(bad(format!("expected 3 coordinates, got {}", xs.len())));
                    }
                    vertices.push(Point3::new(xs[0], xs[1], xs[2]));
                }
                Some("p") => {
                    let ids: Vec<usize> = tok
                        .map(|t| t.parse::<usize>().map_err(|e| bad(e.to_string())))
                        .collect::<Result<_>>()?;
                    let ids: [usize; 6] = ids
                        .try_into()
                        .map_err(|v: Vec<usize>| bad(format!("expected 6 indices, got {}", v.len())))?;
                    cells.push(ids);
                }
                Some(other) => return Err(bad(format!("unknown record `{other}`"))),
                None => unreachable!(),
            }
        }
        PrismMesh::from_cells(vertices, cells)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NonPlanarFace { cell: usize, face: usize },
    SideFaceNotVertical { cell: usize, face: usize },
    CapNotHorizontal { cell: usize, face: usize },
    TopBelowBottom { cell: usize },
    DegenerateBase { cell: usize },
    ClockwiseBase { cell: usize },
    BadAdjacency { face: usize, reason: String },
    BadNormal { face: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonPlanarFace { cell, face } => write!(f, "cell {cell}: face {face} is not planar"),
            Violation::SideFaceNotVertical { cell, face } => {
                write!(f, "cell {cell}: side face {face} is not parallel to the x3-axis")
            }
            Violation::CapNotHorizontal { cell, face } => {
                write!(f, "cell {cell}: face {face} is not parallel to the x1-x2 plane")
            }
            Violation::TopBelowBottom { cell } => write!(f, "cell {cell}: top face is not above the bottom face"),
            Violation::DegenerateBase { cell } => write!(f, "cell {cell}: bottom triangle is degenerate"),
            Violation::ClockwiseBase { cell } => write!(f, "cell {cell}: bottom triangle is clockwise"),
            Violation::BadAdjacency { face, reason } => write!(f, "face {face}: {reason}"),
            Violation::BadNormal { face } => write!(f, "face {face}: normal is not a canonical unit vector"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn names_face(&self, face: usize) -> bool {
        self.violations.iter().any(|v| match v {
            Violation::NonPlanarFace { face: f, .. }
            | Violation::SideFaceNotVertical { face: f, .. }
            | Violation::CapNotHorizontal { face: f, .. }
            | Violation::BadAdjacency { face: f, .. }
            | Violation::BadNormal { face: f } => *f == face,
            _ => false,
        })
    }

    pub fn names_cell(&self, cell: usize) -> bool {
        self.violations.iter().any(|v| match v {
            Violation::NonPlanarFace { cell: c, .. }
            | Violation::SideFaceNotVertical { cell: c, .. }
            | Violation::CapNotHorizontal { cell: c, .. }
            | Violation::TopBelowBottom { cell: c }
            | Violation::DegenerateBase { cell: c }
            | Violation::ClockwiseBase { cell: c } => *c == cell,
            _ => false,
        })
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks the geometric and topological preconditions of the prism elements.
pub fn validate_mesh(mesh: &PrismMesh) -> ValidationReport {
    let mut out = Vec::new();

    for (c, cell) in mesh.cells.iter().enumerate() {
        let p = mesh.cell_points(c);
        let diam = p
            .iter()
            .flat_map(|a| p.iter().map(move |b| (a - b).norm()))
            .fold(0.0, f64::max);
        let tol = TOL * diam.max(1.0);

        for lf in 3..5 {
            let base = &LOCAL_FACES[lf];
            let z = p[base[0]].z;
            if base.iter().any(|&l| (p[l].z - z).abs() > tol) {
                out.push(Violation::CapNotHorizontal {
                    cell: c,
                    face: cell.faces[lf],
                });
            }
        }
        if p[3].z + p[4].z + p[5].z <= p[0].z + p[1].z + p[2].z {
            out.push(Violation::TopBelowBottom { cell: c });
        }

        let e1 = p[1] - p[0];
        let e2 = p[2] - p[0];
        let twice_area = e1.x * e2.y - e1.y * e2.x;
        if twice_area.abs() <= tol * diam {
            out.push(Violation::DegenerateBase { cell: c });
        } else if twice_area < 0.0 {
            out.push(Violation::ClockwiseBase { cell: c });
        }

        for lf in 0..3 {
            let pts: Vec<_> = LOCAL_FACES[lf].iter().map(|&l| p[l]).collect();
            let n = newell(&pts);
            if n.norm() == 0.0 {
                out.push(Violation::NonPlanarFace {
                    cell: c,
                    face: cell.faces[lf],
                });
                continue;
            }
            let n = n.normalize();
            let ctr = centroid(&pts);
            if pts.iter().any(|q| n.dot(&(q - ctr)).abs() > tol) {
                out.push(Violation::NonPlanarFace {
                    cell: c,
                    face: cell.faces[lf],
                });
            } else if n.z.abs() > TOL {
                out.push(Violation::SideFaceNotVertical {
                    cell: c,
                    face: cell.faces[lf],
                });
            }
        }
    }

    for (fid, face) in mesh.faces.iter().enumerate() {
        let expected_boundary = face.cells.len() == 1;
        if face.cells.is_empty() || face.cells.len() > 2 {
            out.push(Violation::BadAdjacency {
                face: fid,
                reason: format!("adjacent to {} cells", face.cells.len()),
            });
        }
        if face.is_boundary != expected_boundary {
            out.push(Violation::BadAdjacency {
                face: fid,
                reason: "boundary flag disagrees with adjacency".into(),
            });
        }
        for &(c, lf) in &face.cells {
            if mesh.cells.get(c).map(|cell| cell.faces[lf]) != Some(fid) {
                out.push(Violation::BadAdjacency {
                    face: fid,
                    reason: format!("lists cell {c} which does not list it back"),
                });
            }
        }
        let n = face.normal;
        if (n.norm() - 1.0).abs() > TOL || canonical_normal(n) != n {
            out.push(Violation::BadNormal { face: fid });
        }
    }

    ValidationReport { violations: out }
}
