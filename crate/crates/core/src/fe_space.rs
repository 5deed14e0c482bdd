//! Continuous Lagrange spaces and the Taylor–Hood pair.
//!
//! Global DOF numbering: mesh vertices first, then `l - 1` DOFs per edge
//! (ordered from the lower to the higher vertex id), then cell-interior
//! DOFs. Vector-valued velocity DOFs are component-blocked: all x-components
//! followed by all y-components.

use std::io::{BufRead, Read, Write};
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lagrange::LagrangeElement;
use crate::mesh::{build_rect_mesh, Mesh, Rect};
use crate::quadrature::TriangleQuadrature;

/// Affine map from the reference triangle to a mesh triangle.
#[derive(Clone, Copy, Debug)]
pub struct CellGeometry {
    pub origin: [f64; 2],
    pub jac: [[f64; 2]; 2],
    pub det: f64,
}

impl CellGeometry {
    pub fn new(p: [[f64; 2]; 3]) -> Self {
        let jac = [
            [p[1][0] - p[0][0], p[2][0] - p[0][0]],
            [p[1][1] - p[0][1], p[2][1] - p[0][1]],
        ];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        CellGeometry { origin: p[0], jac, det }
    }

    pub fn map(&self, r: [f64; 2]) -> [f64; 2] {
        [
            self.origin[0] + self.jac[0][0] * r[0] + self.jac[0][1] * r[1],
            self.origin[1] + self.jac[1][0] * r[0] + self.jac[1][1] * r[1],
        ]
    }

    /// Physical gradient from a reference gradient (`J^{-T} g`).
    pub fn grad(&self, g: [f64; 2]) -> [f64; 2] {
        let j = &self.jac;
        [
            (j[1][1] * g[0] - j[1][0] * g[1]) / self.det,
            (-j[0][1] * g[0] + j[0][0] * g[1]) / self.det,
        ]
    }
}

/// Basis values and reference gradients at the points of a quadrature rule.
#[derive(Clone, Debug)]
pub struct Tabulation {
    pub rule: TriangleQuadrature,
    /// `values[q][i]`
    pub values: Vec<Vec<f64>>,
    /// `grads[q][i]`, reference coordinates
    pub grads: Vec<Vec<[f64; 2]>>,
}

impl Tabulation {
    pub fn new(element: &LagrangeElement, rule: TriangleQuadrature) -> Self {
        let n = element.n_local();
        let mut values = Vec::with_capacity(rule.len());
        let mut grads = Vec::with_capacity(rule.len());
        for p in &rule.points {
            let mut v = vec![0.0; n];
            let mut g = vec![[0.0; 2]; n];
            element.eval(p[0], p[1], &mut v, &mut g);
            values.push(v);
            grads.push(g);
        }
        Tabulation { rule, values, grads }
    }
}

/// Scalar continuous Lagrange space of degree `l` on a mesh.
#[derive(Clone, Debug)]
pub struct ScalarSpace {
    pub mesh: Arc<Mesh>,
    pub element: LagrangeElement,
    pub n_dofs: usize,
    pub dof_coords: Vec<[f64; 2]>,
    cell_dofs: Vec<usize>,
    pub boundary_dofs: Vec<usize>,
    is_boundary: Vec<bool>,
}

impl ScalarSpace {
    pub fn new(mesh: Arc<Mesh>, degree: usize) -> Result<Self> {
        if !(1..=3).contains(&degree) {
            return Err(Error::InvalidInput(format!("Lagrange degree {degree} not supported (1..=3)")));
        }
        let element = LagrangeElement::new(degree);
        let l = degree;
        let per_edge = l - 1;
        let per_cell = element.n_interior();
        let nv = mesh.n_vertices();
        let ne = mesh.n_edges();
        let nt = mesh.n_triangles();
        let n_dofs = nv + per_edge * ne + per_cell * nt;
        let nl = element.n_local();

        let mut dof_coords = vec![[0.0; 2]; n_dofs];
        let mut cell_dofs = vec![0usize; nt * nl];
        for t in 0..nt {
            let tri = mesh.triangles[t];
            let geo = CellGeometry::new(mesh.triangle_coords(t));
            let local = &mut cell_dofs[t * nl..(t + 1) * nl];
            local[..3].copy_from_slice(&tri);
            let mut slot = 3;
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let e = mesh.triangle_edges[t][k];
                for m in 1..l {
                    // position counted from the lower vertex id
                    let s = if a < b { m - 1 } else { l - 1 - m };
                    local[slot] = nv + per_edge * e + s;
                    slot += 1;
                }
            }
            for s in 0..per_cell {
                local[slot] = nv + per_edge * ne + per_cell * t + s;
                slot += 1;
            }
            for (i, &d) in local.iter().enumerate() {
                dof_coords[d] = geo.map(element.node_ref_coords(i));
            }
        }

        let mut is_boundary = vec![false; n_dofs];
        for be in &mesh.boundary_edges {
            let [a, b] = be.vertices;
            is_boundary[a] = true;
            is_boundary[b] = true;
            let e = mesh
                .edges
                .iter()
                .position(|&ed| ed == [a.min(b), a.max(b)])
                .expect("boundary edge present in edge list");
            for s in 0..per_edge {
                is_boundary[nv + per_edge * e + s] = true;
            }
        }
        let boundary_dofs = (0..n_dofs).filter(|&d| is_boundary[d]).collect();
        Ok(ScalarSpace {
            mesh,
            element,
            n_dofs,
            dof_coords,
            cell_dofs,
            boundary_dofs,
            is_boundary,
        })
    }

    pub fn degree(&self) -> usize {
        self.element.degree
    }

    pub fn n_local(&self) -> usize {
        self.element.n_local()
    }

    pub fn cell_dofs(&self, t: usize) -> &[usize] {
        let nl = self.n_local();
        &self.cell_dofs[t * nl..(t + 1) * nl]
    }

    pub fn is_boundary_dof(&self, d: usize) -> bool {
        self.is_boundary[d]
    }

    /// Nodal interpolant of a scalar field.
    pub fn interpolate(&self, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
        self.dof_coords.iter().map(|&p| f(p)).collect()
    }

    /// `‖v - f‖₀` by quadrature of degree `quad_degree`.
    pub fn l2_error(&self, v: &[f64], f: impl Fn([f64; 2]) -> f64, quad_degree: usize) -> f64 {
        let tab = Tabulation::new(&self.element, TriangleQuadrature::for_degree(quad_degree));
        let mut acc = 0.0;
        for t in 0..self.mesh.n_triangles() {
            let geo = CellGeometry::new(self.mesh.triangle_coords(t));
            let dofs = self.cell_dofs(t);
            for (q, p) in tab.rule.points.iter().enumerate() {
                let uh: f64 = dofs.iter().zip(&tab.values[q]).map(|(&d, &phi)| v[d] * phi).sum();
                let diff = uh - f(geo.map(*p));
                acc += tab.rule.weights[q] * geo.det.abs() * diff * diff;
            }
        }
        acc.sqrt()
    }
}

/// Inf-sup stable pair: velocity of degree `l`, pressure of degree `l - 1`.
#[derive(Clone, Debug)]
pub struct TaylorHoodSpace {
    pub mesh: Arc<Mesh>,
    /// Scalar space for each velocity component.
    pub velocity: ScalarSpace,
    pub pressure: ScalarSpace,
    /// Pressure lives in L²₀ (zero mean).
    pub zero_mean_pressure: bool,
}

impl TaylorHoodSpace {
    pub fn degree(&self) -> usize {
        self.velocity.degree()
    }

    /// Scalar DOFs per velocity component.
    pub fn n_scalar(&self) -> usize {
        self.velocity.n_dofs
    }

    /// Total velocity DOFs (both components).
    pub fn n_velocity(&self) -> usize {
        2 * self.velocity.n_dofs
    }

    pub fn n_pressure(&self) -> usize {
        self.pressure.n_dofs
    }

    /// Indices into a velocity vector that carry Dirichlet values.
    pub fn velocity_boundary_dofs(&self) -> Vec<usize> {
        let n = self.n_scalar();
        let mut v: Vec<usize> = self.velocity.boundary_dofs.clone();
        v.extend(self.velocity.boundary_dofs.iter().map(|d| d + n));
        v
    }

    /// Velocity indices without Dirichlet constraint, increasing.
    pub fn velocity_free_dofs(&self) -> Vec<usize> {
        let n = self.n_scalar();
        (0..2 * n).filter(|&d| !self.velocity.is_boundary_dof(d % n)).collect()
    }

    /// Component-blocked nodal interpolant of a vector field.
    pub fn interpolate_velocity(&self, f: impl Fn([f64; 2], f64) -> [f64; 2], t: f64) -> FeFunction {
        let n = self.n_scalar();
        let mut values = vec![0.0; 2 * n];
        for (d, &p) in self.velocity.dof_coords.iter().enumerate() {
            let u = f(p, t);
            values[d] = u[0];
            values[d + n] = u[1];
        }
        FeFunction::new(values)
    }

    /// Zeroes the Dirichlet DOFs of a velocity vector.
    pub fn apply_homogeneous_dirichlet(&self, u: &mut FeFunction) {
        let n = self.n_scalar();
        for &d in &self.velocity.boundary_dofs {
            u.values[d] = 0.0;
            u.values[d + n] = 0.0;
        }
    }
}

pub fn build_taylor_hood(mesh: Arc<Mesh>, degree: usize) -> Result<TaylorHoodSpace> {
    if degree < 2 {
        return Err(Error::InvalidInput(format!(
            "Taylor-Hood pair needs velocity degree >= 2 (got {degree})"
        )));
    }
    if degree > 3 {
        return Err(Error::InvalidInput(format!("velocity degree {degree} not supported (2 or 3)")));
    }
    let velocity = ScalarSpace::new(mesh.clone(), degree)?;
    let pressure = ScalarSpace::new(mesh.clone(), degree - 1)?;
    Ok(TaylorHoodSpace { mesh, velocity, pressure, zero_mean_pressure: true })
}

/// Serializable recipe for a Taylor–Hood space on a structured mesh.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SpaceSpec {
    pub nx: usize,
    pub ny: usize,
    pub rect: Rect,
    pub degree: usize,
}

impl SpaceSpec {
    pub fn unit_square(n: usize, degree: usize) -> Self {
        SpaceSpec { nx: n, ny: n, rect: Rect::UNIT, degree }
    }

    pub fn build(&self) -> Result<TaylorHoodSpace> {
        let mesh = build_rect_mesh(self.nx, self.ny, self.rect)?;
        build_taylor_hood(Arc::new(mesh), self.degree)
    }
}

/// Coefficient vector of a finite-element function.
#[derive(Clone, Debug, PartialEq)]
pub struct FeFunction {
    pub values: Vec<f64>,
}

const BINARY_MAGIC: &[u8; 8] = b"PODLABFE";

impl FeFunction {
    pub fn new(values: Vec<f64>) -> Self {
        FeFunction { values }
    }

    pub fn zeros(n: usize) -> Self {
        FeFunction { values: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Little-endian binary: 8-byte magic `PODLABFE`, `u64` DOF count, then
    /// the `f64` payload.
    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        w.write_all(BINARY_MAGIC)?;
        w.write_all(&(self.values.len() as u64).to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_binary(path: &Path) -> Result<Self> {
        let bad = |reason: &str| Error::Format { path: path.display().to_string(), reason: reason.into() };
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        if bytes.len() < 16 || &bytes[..8] != BINARY_MAGIC {
            return Err(bad("missing PODLABFE header"));
        }
        let n = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
        if bytes.len() != 16 + 8 * n {
            return Err(bad(&format!("expected {n} values, file has {} payload bytes", bytes.len() - 16)));
        }
        let values = bytes[16..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(FeFunction { values })
    }

    /// CSV with header `dof,value`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "dof,value")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(w, "{i},{v:.16e}")?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let bad = |reason: String| Error::Format { path: path.display().to_string(), reason };
        let r = std::io::BufReader::new(std::fs::File::open(path)?);
        let mut values = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            if lineno == 0 {
                if line.trim() != "dof,value" {
                    return Err(bad(format!("unexpected header {line:?}")));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let (i, v) = line.split_once(',').ok_or_else(|| bad(format!("line {}: no comma", lineno + 1)))?;
            let i: usize = i.trim().parse().map_err(|_| bad(format!("line {}: bad index", lineno + 1)))?;
            if i != values.len() {
                return Err(bad(format!("line {}: dof {i} out of order", lineno + 1)));
            }
            let v: f64 = v.trim().parse().map_err(|_| bad(format!("line {}: bad value", lineno + 1)))?;
            values.push(v);
        }
        Ok(FeFunction { values })
    }
}
