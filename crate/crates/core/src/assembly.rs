//! Finite-element operators for the Taylor–Hood pair.
//!
//! All velocity operators (mass, stiffness, grad-div, convection and its
//! Jacobian) share one sparsity pattern covering the full 2×2 component
//! block structure, so they can be combined entrywise.

use crate::error::Result;
use crate::fe_space::{CellGeometry, FeFunction, SpaceSpec, TaylorHoodSpace, Tabulation};
use crate::quadrature::TriangleQuadrature;
use crate::sparse::SparseOperator;

/// Data at one quadrature point of a velocity field.
#[derive(Clone, Copy, Debug)]
pub struct QuadPoint {
    pub cell: usize,
    pub x: [f64; 2],
    /// Physical weight (reference weight times `|det J|`).
    pub weight: f64,
    pub value: [f64; 2],
    /// `grad[d][c] = ∂_c u_d`
    pub grad: [[f64; 2]; 2],
}

/// The `(M, A, G, B)` operators and the pressure mean functional.
#[derive(Clone, Debug)]
pub struct BilinearForms {
    pub mass: SparseOperator,
    pub stiffness: SparseOperator,
    pub grad_div: SparseOperator,
    /// `B_{qj} = (q, ∇·φ_j)`
    pub div: SparseOperator,
    /// `m_q = ∫ q`
    pub pressure_mean: Vec<f64>,
}

/// A Taylor–Hood space with cached geometry, tabulations and operators.
#[derive(Clone, Debug)]
pub struct Discretization {
    pub space: TaylorHoodSpace,
    pub forms: BilinearForms,
    vtab: Tabulation,
    ptab: Tabulation,
    load_tab: Tabulation,
    geometry: Vec<CellGeometry>,
    /// Physical velocity-basis gradients, `[(t * nq + q) * nl + i]`.
    grads: Vec<[f64; 2]>,
    /// Index of local column `j` within the scalar pattern row of local row `i`.
    local_pos: Vec<usize>,
    scalar_row_len: Vec<usize>,
    template: SparseOperator,
}

impl Discretization {
    pub fn new(space: TaylorHoodSpace) -> Self {
        let l = space.degree();
        let rule = TriangleQuadrature::for_degree(3 * l - 1);
        let vtab = Tabulation::new(&space.velocity.element, rule.clone());
        let ptab = Tabulation::new(&space.pressure.element, rule);
        let load_tab = Tabulation::new(&space.velocity.element, TriangleQuadrature::for_degree(2 * l + 4));
        let mesh = space.mesh.clone();
        let nt = mesh.n_triangles();
        let nl = space.velocity.n_local();
        let nq = vtab.rule.len();
        let n = space.n_scalar();

        let geometry: Vec<CellGeometry> = (0..nt).map(|t| CellGeometry::new(mesh.triangle_coords(t))).collect();
        let mut grads = Vec::with_capacity(nt * nq * nl);
        for geo in &geometry {
            for q in 0..nq {
                for i in 0..nl {
                    grads.push(geo.grad(vtab.grads[q][i]));
                }
            }
        }

        let mut scalar_pattern: Vec<Vec<usize>> = vec![Vec::new(); n];
        for t in 0..nt {
            let dofs = space.velocity.cell_dofs(t);
            for &a in dofs {
                scalar_pattern[a].extend_from_slice(dofs);
            }
        }
        for row in &mut scalar_pattern {
            row.sort_unstable();
            row.dedup();
        }
        let mut local_pos = Vec::with_capacity(nt * nl * nl);
        for t in 0..nt {
            let dofs = space.velocity.cell_dofs(t);
            for &a in dofs {
                for &b in dofs {
                    local_pos.push(scalar_pattern[a].binary_search(&b).unwrap());
                }
            }
        }
        let scalar_row_len: Vec<usize> = scalar_pattern.iter().map(Vec::len).collect();
        let velocity_pattern: Vec<Vec<usize>> = (0..2 * n)
            .map(|r| {
                let row = &scalar_pattern[r % n];
                row.iter().copied().chain(row.iter().map(|b| b + n)).collect()
            })
            .collect();
        let template = SparseOperator::from_pattern(2 * n, &velocity_pattern);

        let mut disc = Discretization {
            forms: BilinearForms {
                mass: template.clone(),
                stiffness: template.clone(),
                grad_div: template.clone(),
                div: SparseOperator::from_pattern(0, &[]),
                pressure_mean: Vec::new(),
            },
            space,
            vtab,
            ptab,
            load_tab,
            geometry,
            grads,
            local_pos,
            scalar_row_len,
            template,
        };
        disc.forms = disc.assemble_forms();
        disc
    }

    pub fn from_spec(spec: &SpaceSpec) -> Result<Self> {
        Ok(Discretization::new(spec.build()?))
    }

    pub fn n_velocity(&self) -> usize {
        self.space.n_velocity()
    }

    pub fn n_pressure(&self) -> usize {
        self.space.n_pressure()
    }

    /// Zero operator on the shared velocity pattern.
    pub fn velocity_template(&self) -> &SparseOperator {
        &self.template
    }

    fn n_local(&self) -> usize {
        self.space.velocity.n_local()
    }

    fn nq(&self) -> usize {
        self.vtab.rule.len()
    }

    fn grad(&self, t: usize, q: usize, i: usize) -> [f64; 2] {
        let nl = self.n_local();
        self.grads[(t * self.nq() + q) * nl + i]
    }

    fn weight(&self, t: usize, q: usize) -> f64 {
        self.vtab.rule.weights[q] * self.geometry[t].det.abs()
    }

    /// Position of the `(comp_row, a) × (comp_col, b)` entry for local indices.
    fn slot(&self, t: usize, i: usize, j: usize, comp_row: usize, comp_col: usize) -> usize {
        let nl = self.n_local();
        let n = self.space.n_scalar();
        let a = self.space.velocity.cell_dofs(t)[i];
        let k = self.local_pos[(t * nl + i) * nl + j];
        self.template.row_ptr[comp_row * n + a] + comp_col * self.scalar_row_len[a] + k
    }

    fn assemble_forms(&self) -> BilinearForms {
        let nl = self.n_local();
        let nq = self.nq();
        let n = self.space.n_scalar();
        let np = self.n_pressure();
        let mut mass = self.template.clone();
        let mut stiffness = self.template.clone();
        let mut grad_div = self.template.clone();
        let mut pressure_mean = vec![0.0; np];

        let pspace = &self.space.pressure;
        let mut div_pattern: Vec<Vec<usize>> = vec![Vec::new(); np];
        for t in 0..self.geometry.len() {
            let vd = self.space.velocity.cell_dofs(t);
            for &p in pspace.cell_dofs(t) {
                div_pattern[p].extend(vd.iter().copied().chain(vd.iter().map(|b| b + n)));
            }
        }
        for row in &mut div_pattern {
            row.sort_unstable();
            row.dedup();
        }
        let mut div = SparseOperator::from_pattern(2 * n, &div_pattern);

        let mut m_loc = vec![0.0; nl * nl];
        let mut a_loc = vec![0.0; nl * nl];
        let mut g_loc = vec![[[0.0; 2]; 2]; nl * nl];
        for t in 0..self.geometry.len() {
            m_loc.fill(0.0);
            a_loc.fill(0.0);
            g_loc.fill([[0.0; 2]; 2]);
            let vd = self.space.velocity.cell_dofs(t);
            let pd = pspace.cell_dofs(t);
            for q in 0..nq {
                let w = self.weight(t, q);
                let vals = &self.vtab.values[q];
                for i in 0..nl {
                    let gi = self.grad(t, q, i);
                    for j in 0..nl {
                        let gj = self.grad(t, q, j);
                        m_loc[i * nl + j] += w * vals[i] * vals[j];
                        a_loc[i * nl + j] += w * (gi[0] * gj[0] + gi[1] * gj[1]);
                        for c in 0..2 {
                            for d in 0..2 {
                                g_loc[i * nl + j][c][d] += w * gi[c] * gj[d];
                            }
                        }
                    }
                }
                for (k, &p) in pd.iter().enumerate() {
                    let psi = self.ptab.values[q][k];
                    pressure_mean[p] += w * psi;
                    for (j, &b) in vd.iter().enumerate() {
                        let gj = self.grad(t, q, j);
                        div.add(p, b, w * psi * gj[0]);
                        div.add(p, b + n, w * psi * gj[1]);
                    }
                }
            }
            for i in 0..nl {
                for j in 0..nl {
                    for c in 0..2 {
                        let s = self.slot(t, i, j, c, c);
                        mass.values[s] += m_loc[i * nl + j];
                        stiffness.values[s] += a_loc[i * nl + j];
                        for d in 0..2 {
                            let s = self.slot(t, i, j, c, d);
                            grad_div.values[s] += g_loc[i * nl + j][c][d];
                        }
                    }
                }
            }
        }
        BilinearForms { mass, stiffness, grad_div, div, pressure_mean }
    }

    /// Value and gradient of a velocity field at quadrature point `q` of cell `t`.
    fn eval_at(&self, u: &[f64], t: usize, q: usize) -> ([f64; 2], [[f64; 2]; 2]) {
        let n = self.space.n_scalar();
        let mut val = [0.0; 2];
        let mut grad = [[0.0; 2]; 2];
        for (i, &a) in self.space.velocity.cell_dofs(t).iter().enumerate() {
            let phi = self.vtab.values[q][i];
            let g = self.grad(t, q, i);
            for d in 0..2 {
                let ud = u[d * n + a];
                val[d] += ud * phi;
                grad[d][0] += ud * g[0];
                grad[d][1] += ud * g[1];
            }
        }
        (val, grad)
    }

    /// Visits every quadrature point of the operator rule with the field's
    /// value and gradient.
    pub fn for_each_quad_point(&self, u: &[f64], mut f: impl FnMut(&QuadPoint)) {
        assert_eq!(u.len(), self.n_velocity());
        for t in 0..self.geometry.len() {
            for q in 0..self.nq() {
                let (value, grad) = self.eval_at(u, t, q);
                f(&QuadPoint {
                    cell: t,
                    x: self.geometry[t].map(self.vtab.rule.points[q]),
                    weight: self.weight(t, q),
                    value,
                    grad,
                });
            }
        }
    }

    /// `b_h(u, v, w) = ((u·∇)v, w) + ½((∇·u) v, w)` by quadrature.
    pub fn trilinear_form(&self, u: &[f64], v: &[f64], w: &[f64]) -> f64 {
        let mut acc = 0.0;
        for t in 0..self.geometry.len() {
            for q in 0..self.nq() {
                let (uq, gu) = self.eval_at(u, t, q);
                let (vq, gv) = self.eval_at(v, t, q);
                let (wq, _) = self.eval_at(w, t, q);
                let div_u = gu[0][0] + gu[1][1];
                let mut s = 0.0;
                for d in 0..2 {
                    let conv = uq[0] * gv[d][0] + uq[1] * gv[d][1];
                    s += (conv + 0.5 * div_u * vq[d]) * wq[d];
                }
                acc += self.weight(t, q) * s;
            }
        }
        acc
    }

    /// `N(u)_{ij} = b_h(u, φ_j, φ_i)`.
    pub fn assemble_convection(&self, u: &[f64]) -> SparseOperator {
        let mut out = self.template.clone();
        self.add_convection(u, 1.0, &mut out);
        out
    }

    /// Adds `scale · N(u)` into an operator on the velocity pattern.
    pub fn add_convection(&self, u: &[f64], scale: f64, out: &mut SparseOperator) {
        assert!(out.same_pattern(&self.template));
        let nl = self.n_local();
        let mut loc = vec![0.0; nl * nl];
        for t in 0..self.geometry.len() {
            loc.fill(0.0);
            for q in 0..self.nq() {
                let (uq, gu) = self.eval_at(u, t, q);
                let w = scale * self.weight(t, q);
                let half_div = 0.5 * (gu[0][0] + gu[1][1]);
                let vals = &self.vtab.values[q];
                for j in 0..nl {
                    let gj = self.grad(t, q, j);
                    let adv = w * (uq[0] * gj[0] + uq[1] * gj[1] + half_div * vals[j]);
                    for i in 0..nl {
                        loc[i * nl + j] += adv * vals[i];
                    }
                }
            }
            for i in 0..nl {
                for j in 0..nl {
                    for c in 0..2 {
                        out.values[self.slot(t, i, j, c, c)] += loc[i * nl + j];
                    }
                }
            }
        }
    }

    /// Derivative of `v ↦ b_h(v, u, ·)`, the second half of the convective
    /// Jacobian: entry `((d,a),(c,b)) = b_h(ψ_b e_c, u, ψ_a e_d)`.
    pub fn assemble_convection_jacobian(&self, u: &[f64]) -> SparseOperator {
        let mut out = self.template.clone();
        self.add_convection_jacobian(u, 1.0, &mut out);
        out
    }

    pub fn add_convection_jacobian(&self, u: &[f64], scale: f64, out: &mut SparseOperator) {
        assert!(out.same_pattern(&self.template));
        let nl = self.n_local();
        let mut loc = vec![[[0.0; 2]; 2]; nl * nl];
        for t in 0..self.geometry.len() {
            loc.fill([[0.0; 2]; 2]);
            for q in 0..self.nq() {
                let (uq, gu) = self.eval_at(u, t, q);
                let w = scale * self.weight(t, q);
                let vals = &self.vtab.values[q];
                for j in 0..nl {
                    let gj = self.grad(t, q, j);
                    for i in 0..nl {
                        let wi = w * vals[i];
                        let e = &mut loc[i * nl + j];
                        for d in 0..2 {
                            for c in 0..2 {
                                e[d][c] += wi * (vals[j] * gu[d][c] + 0.5 * gj[c] * uq[d]);
                            }
                        }
                    }
                }
            }
            for i in 0..nl {
                for j in 0..nl {
                    for d in 0..2 {
                        for c in 0..2 {
                            out.values[self.slot(t, i, j, d, c)] += loc[i * nl + j][d][c];
                        }
                    }
                }
            }
        }
    }

    /// `N(u) u`, the convective term tested against every basis function.
    pub fn convection_vector(&self, u: &[f64]) -> Vec<f64> {
        self.convection_vector_pair(u, u)
    }

    /// Vector with entries `b_h(u, v, φ_i)`.
    pub fn convection_vector_pair(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let n = self.space.n_scalar();
        let mut out = vec![0.0; 2 * n];
        for t in 0..self.geometry.len() {
            let dofs = self.space.velocity.cell_dofs(t);
            for q in 0..self.nq() {
                let (uq, gu) = self.eval_at(u, t, q);
                let (vq, gv) = self.eval_at(v, t, q);
                let w = self.weight(t, q);
                let half_div = 0.5 * (gu[0][0] + gu[1][1]);
                for d in 0..2 {
                    let r = w * (uq[0] * gv[d][0] + uq[1] * gv[d][1] + half_div * vq[d]);
                    for (i, &a) in dofs.iter().enumerate() {
                        out[d * n + a] += r * self.vtab.values[q][i];
                    }
                }
            }
        }
        out
    }

    /// `L_i = (f(·, t), φ_i)`.
    pub fn assemble_load(&self, f: impl Fn([f64; 2], f64) -> [f64; 2], time: f64) -> Vec<f64> {
        let n = self.space.n_scalar();
        let mut out = vec![0.0; 2 * n];
        let tab = &self.load_tab;
        for (t, geo) in self.geometry.iter().enumerate() {
            let dofs = self.space.velocity.cell_dofs(t);
            for (q, p) in tab.rule.points.iter().enumerate() {
                let w = tab.rule.weights[q] * geo.det.abs();
                let fq = f(geo.map(*p), time);
                for (i, &a) in dofs.iter().enumerate() {
                    let s = w * tab.values[q][i];
                    out[a] += s * fq[0];
                    out[n + a] += s * fq[1];
                }
            }
        }
        out
    }

    /// `‖u - g‖₀` and `|u - g|₁` against an analytic field with gradient,
    /// evaluated with the load rule.
    pub fn error_against(
        &self,
        u: &[f64],
        exact: impl Fn([f64; 2]) -> ([f64; 2], [[f64; 2]; 2]),
    ) -> (f64, f64) {
        let n = self.space.n_scalar();
        let tab = &self.load_tab;
        let nl = self.n_local();
        let (mut e0, mut e1) = (0.0, 0.0);
        for (t, geo) in self.geometry.iter().enumerate() {
            let dofs = self.space.velocity.cell_dofs(t);
            for (q, p) in tab.rule.points.iter().enumerate() {
                let w = tab.rule.weights[q] * geo.det.abs();
                let mut val = [0.0; 2];
                let mut grad = [[0.0; 2]; 2];
                for i in 0..nl {
                    let g = geo.grad(tab.grads[q][i]);
                    for d in 0..2 {
                        let c = u[d * n + dofs[i]];
                        val[d] += c * tab.values[q][i];
                        grad[d][0] += c * g[0];
                        grad[d][1] += c * g[1];
                    }
                }
                let (ev, eg) = exact(geo.map(*p));
                for d in 0..2 {
                    e0 += w * (val[d] - ev[d]).powi(2);
                    e1 += w * ((grad[d][0] - eg[d][0]).powi(2) + (grad[d][1] - eg[d][1]).powi(2));
                }
            }
        }
        (e0.sqrt(), e1.sqrt())
    }

    /// `‖u‖_M = √(uᵀ M u)`.
    pub fn l2_norm(&self, u: &[f64]) -> f64 {
        self.forms.mass.bilinear(u, u).max(0.0).sqrt()
    }

    /// `|u|₁ = √(uᵀ A u)`.
    pub fn h1_seminorm(&self, u: &[f64]) -> f64 {
        self.forms.stiffness.bilinear(u, u).max(0.0).sqrt()
    }

    /// Velocity interpolant with homogeneous Dirichlet values enforced.
    pub fn interpolate(&self, f: impl Fn([f64; 2], f64) -> [f64; 2], t: f64) -> FeFunction {
        let mut u = self.space.interpolate_velocity(f, t);
        self.space.apply_homogeneous_dirichlet(&mut u);
        u
    }
}

/// The four bilinear operators of a Taylor–Hood space.
pub fn assemble_bilinear_forms(space: &TaylorHoodSpace) -> BilinearForms {
    Discretization::new(space.clone()).forms
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fe_space::build_taylor_hood;
    use crate::mesh::{build_rect_mesh, Rect};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn disc(n: usize, l: usize) -> Discretization {
        let mesh = Arc::new(build_rect_mesh(n, n, Rect::UNIT).unwrap());
        Discretization::new(build_taylor_hood(mesh, l).unwrap())
    }

    fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn mass_row_sums_give_area() {
        for l in [2, 3] {
            let d = disc(3, l);
            let n = d.space.n_scalar();
            let ones: Vec<f64> = (0..2 * n).map(|i| if i < n { 1.0 } else { 0.0 }).collect();
            let row_sums = d.forms.mass.matvec(&ones);
            let total: f64 = row_sums[..n].iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
            assert!(row_sums[n..].iter().all(|&v| v == 0.0));
            let pm: f64 = d.forms.pressure_mean.iter().sum();
            assert!((pm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn constants_in_stiffness_kernel() {
        let d = disc(4, 2);
        let c = d.space.interpolate_velocity(|_, _| [2.0, -1.5], 0.0);
        let r = d.forms.stiffness.matvec(&c.values);
        assert!(r.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn rotation_field_is_divergence_free() {
        for l in [2, 3] {
            let d = disc(3, l);
            let u = d.space.interpolate_velocity(|x, _| [x[1], -x[0]], 0.0);
            let gu = d.forms.grad_div.matvec(&u.values);
            let bu = d.forms.div.matvec(&u.values);
            assert!(gu.iter().chain(&bu).all(|v| v.abs() < 1e-10));
        }
    }

    #[test]
    fn divergence_against_analytic_field() {
        // (q, ∇·u) for u = (x², xy), ∇·u = 3x, with q ≡ 1: ∫ 3x = 3/2
        let d = disc(4, 2);
        let u = d.space.interpolate_velocity(|x, _| [x[0] * x[0], x[0] * x[1]], 0.0);
        let bu = d.forms.div.matvec(&u.values);
        let ones = vec![1.0; d.n_pressure()];
        let total: f64 = bu.iter().zip(&ones).map(|(a, b)| a * b).sum();
        assert!((total - 1.5).abs() < 1e-12);
    }

    #[test]
    fn operators_are_symmetric() {
        let d = disc(4, 2);
        assert!(d.forms.mass.symmetry_defect() < 1e-12);
        assert!(d.forms.stiffness.symmetry_defect() < 1e-12);
        assert!(d.forms.grad_div.symmetry_defect() < 1e-12);
    }

    #[test]
    fn mass_is_positive_definite() {
        let d = disc(3, 2);
        let m = &d.forms.mass;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let v = random_vec(&mut rng, m.rows);
            assert!(m.bilinear(&v, &v) > 0.0);
        }
    }

    #[test]
    fn grad_div_bounded_by_stiffness() {
        let d = disc(3, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let v = random_vec(&mut rng, d.n_velocity());
            let g = d.forms.grad_div.bilinear(&v, &v);
            let a = d.forms.stiffness.bilinear(&v, &v);
            assert!(g <= a * (1.0 + 1e-12), "{g} > {a}");
        }
    }

    #[test]
    fn trilinear_hand_value() {
        let d = disc(2, 2);
        let u = d.space.interpolate_velocity(|_, _| [1.0, 0.0], 0.0);
        let v = d.space.interpolate_velocity(|x, _| [x[0], 0.0], 0.0);
        let w = u.clone();
        assert!((d.trilinear_form(&u.values, &v.values, &w.values) - 1.0).abs() < 1e-10);
        let zero = vec![0.0; d.n_velocity()];
        assert_eq!(d.trilinear_form(&zero, &v.values, &w.values), 0.0);
    }

    #[test]
    fn convection_matches_trilinear_form() {
        let d = disc(3, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = d.n_velocity();
        for _ in 0..10 {
            let (u, v, w) = (random_vec(&mut rng, n), random_vec(&mut rng, n), random_vec(&mut rng, n));
            let nu = d.assemble_convection(&u);
            let direct = d.trilinear_form(&u, &v, &w);
            assert!((nu.bilinear(&w, &v) - direct).abs() < 1e-11 * (1.0 + direct.abs()));
            let mut v0 = FeFunction::new(v.clone());
            d.space.apply_homogeneous_dirichlet(&mut v0);
            assert!(nu.bilinear(&v0.values, &v0.values).abs() < 1e-11);
            let pair = d.convection_vector_pair(&u, &v);
            let via_vec: f64 = pair.iter().zip(&w).map(|(a, b)| a * b).sum();
            assert!((via_vec - direct).abs() < 1e-11 * (1.0 + direct.abs()));
            let jac = d.assemble_convection_jacobian(&v);
            assert!((jac.bilinear(&w, &u) - direct).abs() < 1e-11 * (1.0 + direct.abs()));
        }
        assert_eq!(d.assemble_convection(&vec![0.0; n]).max_abs(), 0.0);
    }

    #[test]
    fn newton_jacobian_matches_finite_difference() {
        let d = disc(2, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = d.n_velocity();
        let u = random_vec(&mut rng, n);
        let du = random_vec(&mut rng, n);
        let eps = 1e-6;
        let up: Vec<f64> = u.iter().zip(&du).map(|(a, b)| a + eps * b).collect();
        let um: Vec<f64> = u.iter().zip(&du).map(|(a, b)| a - eps * b).collect();
        let (fp, fm) = (d.convection_vector(&up), d.convection_vector(&um));
        let jac = SparseOperator::linear_combination(&[
            (1.0, &d.assemble_convection(&u)),
            (1.0, &d.assemble_convection_jacobian(&u)),
        ]);
        let jdu = jac.matvec(&du);
        for i in 0..n {
            let fd = (fp[i] - fm[i]) / (2.0 * eps);
            assert!((fd - jdu[i]).abs() < 1e-7, "row {i}: {fd} vs {}", jdu[i]);
        }
    }

    #[test]
    fn load_vectors() {
        let d = disc(3, 2);
        let n = d.space.n_scalar();
        assert!(d.assemble_load(|_, _| [0.0, 0.0], 0.0).iter().all(|&v| v == 0.0));
        let l = d.assemble_load(|_, _| [1.0, 0.0], 0.0);
        let mut ones = vec![0.0; 2 * n];
        ones[..n].fill(1.0);
        let rows = d.forms.mass.matvec(&ones);
        for i in 0..2 * n {
            assert!((l[i] - rows[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn error_against_exact_interpolant() {
        let d = disc(4, 2);
        let u = d.space.interpolate_velocity(|x, _| [x[0] * x[1], x[1] * x[1]], 0.0);
        let (e0, e1) = d.error_against(&u.values, |x| ([x[0] * x[1], x[1] * x[1]], [[x[1], x[0]], [0.0, 2.0 * x[1]]]));
        assert!(e0 < 1e-13 && e1 < 1e-12);
    }
}
