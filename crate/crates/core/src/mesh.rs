//! Structured triangulations of axis-aligned rectangles.
//!
//! Every grid cell is split along the same diagonal (lower-left to
//! upper-right), so vertex and triangle numbering are fully determined by
//! `(nx, ny)`. Triangles are stored counter-clockwise.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Axis-aligned rectangle `(x0, y0)–(x1, y1)`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub const UNIT: Rect = Rect { x0: 0.0, y0: 0.0, x1: 1.0, y1: 1.0 };

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    /// True when `p` lies on the rectangle boundary within `tol`.
    pub fn on_boundary(&self, p: [f64; 2], tol: f64) -> bool {
        (p[0] - self.x0).abs() <= tol
            || (p[0] - self.x1).abs() <= tol
            || (p[1] - self.y0).abs() <= tol
            || (p[1] - self.y1).abs() <= tol
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundaryTag {
    Dirichlet,
}

impl BoundaryTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundaryTag::Dirichlet => "dirichlet",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub tag: BoundaryTag,
}

/// Conforming triangulation with edge connectivity.
#[derive(Clone, Debug)]
pub struct Mesh {
    pub rect: Rect,
    pub vertices: Vec<[f64; 2]>,
    /// Counter-clockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
    /// Unique edges as `(lo, hi)` vertex pairs.
    pub edges: Vec<[usize; 2]>,
    /// Per triangle, the edge ids of local edges `(v0,v1)`, `(v1,v2)`, `(v2,v0)`.
    pub triangle_edges: Vec<[usize; 3]>,
    pub h_max: f64,
    pub h_min: f64,
}

impl Mesh {
    fn from_parts(rect: Rect, vertices: Vec<[f64; 2]>, triangles: Vec<[usize; 3]>) -> Self {
        let mut edge_ids: HashMap<[usize; 2], usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut edge_count = Vec::new();
        let mut triangle_edges = Vec::with_capacity(triangles.len());
        for t in &triangles {
            let mut te = [0usize; 3];
            for (e, slot) in te.iter_mut().enumerate() {
                let (a, b) = (t[e], t[(e + 1) % 3]);
                let key = [a.min(b), a.max(b)];
                let id = *edge_ids.entry(key).or_insert_with(|| {
                    edges.push(key);
                    edge_count.push(0usize);
                    edges.len() - 1
                });
                edge_count[id] += 1;
                *slot = id;
            }
            triangle_edges.push(te);
        }
        // Boundary edges keep the orientation of their single owning triangle.
        let mut boundary_edges = Vec::new();
        for (t, te) in triangles.iter().zip(&triangle_edges) {
            for e in 0..3 {
                if edge_count[te[e]] == 1 {
                    boundary_edges.push(BoundaryEdge {
                        vertices: [t[e], t[(e + 1) % 3]],
                        tag: BoundaryTag::Dirichlet,
                    });
                }
            }
        }
        let diameters: Vec<f64> = triangles
            .iter()
            .map(|t| diameter(&vertices, t))
            .collect();
        let h_max = diameters.iter().cloned().fold(0.0, f64::max);
        let h_min = diameters.iter().cloned().fold(f64::INFINITY, f64::min);
        Mesh {
            rect,
            vertices,
            triangles,
            boundary_edges,
            edges,
            triangle_edges,
            h_max,
            h_min,
        }
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn triangle_coords(&self, t: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Signed area, positive for counter-clockwise triangles.
    pub fn signed_area(&self, t: usize) -> f64 {
        let [p0, p1, p2] = self.triangle_coords(t);
        0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]))
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.signed_area(t)).sum()
    }

    /// Number of triangles sharing each edge.
    pub fn edge_valence(&self) -> Vec<usize> {
        let mut count = vec![0; self.edges.len()];
        for te in &self.triangle_edges {
            for &e in te {
                count[e] += 1;
            }
        }
        count
    }

    /// Checks orientation and the edge-manifold property.
    pub fn validate(&self) -> Result<()> {
        for t in 0..self.n_triangles() {
            if self.signed_area(t) <= 0.0 {
                return Err(Error::InvalidMesh(format!("triangle {t} is not counter-clockwise")));
            }
        }
        let valence = self.edge_valence();
        for (e, &v) in valence.iter().enumerate() {
            let [a, b] = self.edges[e];
            let on_boundary = self.rect.on_boundary(midpoint(self.vertices[a], self.vertices[b]), 1e-12)
                && self.rect.on_boundary(self.vertices[a], 1e-12)
                && self.rect.on_boundary(self.vertices[b], 1e-12);
            let expected = if on_boundary { 1 } else { 2 };
            if v != expected {
                return Err(Error::InvalidMesh(format!(
                    "edge {e} ({a},{b}) shared by {v} triangles, expected {expected}"
                )));
            }
        }
        if self.boundary_edges.len() != valence.iter().filter(|&&v| v == 1).count() {
            return Err(Error::InvalidMesh("boundary edge list out of sync".into()));
        }
        Ok(())
    }

    /// Writes `vertices.csv`, `triangles.csv` and `boundary.csv` into `dir`.
    pub fn write_csv(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut f = std::io::BufWriter::new(std::fs::File::create(dir.join("vertices.csv"))?);
        writeln!(f, "index,x,y")?;
        for (i, p) in self.vertices.iter().enumerate() {
            writeln!(f, "{i},{:.16e},{:.16e}", p[0], p[1])?;
        }
        let mut f = std::io::BufWriter::new(std::fs::File::create(dir.join("triangles.csv"))?);
        writeln!(f, "index,v0,v1,v2")?;
        for (i, t) in self.triangles.iter().enumerate() {
            writeln!(f, "{i},{},{},{}", t[0], t[1], t[2])?;
        }
        let mut f = std::io::BufWriter::new(std::fs::File::create(dir.join("boundary.csv"))?);
        writeln!(f, "v0,v1,tag")?;
        for e in &self.boundary_edges {
            writeln!(f, "{},{},{}", e.vertices[0], e.vertices[1], e.tag.as_str())?;
        }
        Ok(())
    }
}

fn midpoint(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
}

fn diameter(vertices: &[[f64; 2]], t: &[usize; 3]) -> f64 {
    let d = |a: usize, b: usize| {
        let (p, q) = (vertices[a], vertices[b]);
        ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
    };
    d(t[0], t[1]).max(d(t[1], t[2])).max(d(t[2], t[0]))
}

/// Uniform `nx × ny` grid of `rect`, each cell split into two triangles
/// along its lower-left/upper-right diagonal.
pub fn build_rect_mesh(nx: usize, ny: usize, rect: Rect) -> Result<Mesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidInput(format!("mesh needs nx, ny >= 1 (got {nx}x{ny})")));
    }
    if !(rect.x1 > rect.x0 && rect.y1 > rect.y0) || !rect.area().is_finite() {
        return Err(Error::InvalidInput(format!("degenerate rectangle {rect:?}")));
    }
    let dx = (rect.x1 - rect.x0) / nx as f64;
    let dy = (rect.y1 - rect.y0) / ny as f64;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            // Pin the last row/column to the exact rectangle bounds.
            let x = if i == nx { rect.x1 } else { rect.x0 + i as f64 * dx };
            let y = if j == ny { rect.y1 } else { rect.y0 + j as f64 * dy };
            vertices.push([x, y]);
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (v00, v10, v01, v11) = (id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1));
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }
    Ok(Mesh::from_parts(rect, vertices, triangles))
}

/// Red refinement: every triangle is split into four congruent children
/// through its edge midpoints.
pub fn refine_uniform(mesh: &Mesh) -> Mesh {
    let mut vertices = mesh.vertices.clone();
    let mut mid = vec![usize::MAX; mesh.n_edges()];
    for (e, &[a, b]) in mesh.edges.iter().enumerate() {
        mid[e] = vertices.len();
        vertices.push(midpoint(mesh.vertices[a], mesh.vertices[b]));
    }
    let mut triangles = Vec::with_capacity(4 * mesh.n_triangles());
    for (t, te) in mesh.triangles.iter().zip(&mesh.triangle_edges) {
        let [v0, v1, v2] = *t;
        let (m01, m12, m20) = (mid[te[0]], mid[te[1]], mid[te[2]]);
        triangles.push([v0, m01, m20]);
        triangles.push([m01, v1, m12]);
        triangles.push([m20, m12, v2]);
        triangles.push([m01, m12, m20]);
    }
    Mesh::from_parts(mesh.rect, vertices, triangles)
}
