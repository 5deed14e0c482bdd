//! Sparse direct solves of the velocity–pressure saddle system.
//!
//! Unknowns are the non-Dirichlet velocity DOFs, all pressure DOFs and one
//! multiplier enforcing `∫ p = 0`:
//!
//! ```text
//! [  J_ff  -B_fᵀ  0 ] [x]   [r]
//! [ -B_f    0     m ] [p] = [g]
//! [  0      mᵀ    0 ] [λ]   [0]
//! ```
//!
//! The pattern is fixed per discretization, so the symbolic factorization is
//! computed once and reused for every numeric factorization.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{Argsort, Pair, SparseColMat, SymbolicSparseColMat};
use faer::{Mat, Par};

use crate::assembly::Discretization;
use crate::error::{Error, Result};
use crate::sparse::SparseOperator;

/// Switches the factorization kernels to a single thread, which makes all
/// results bit-reproducible.
pub fn use_single_thread() {
    faer::set_global_parallelism(Par::Seq);
}

pub struct SaddleSystem {
    n_velocity: usize,
    n_pressure: usize,
    free: Vec<usize>,
    /// Positions in the velocity-pattern value array of the free×free block,
    /// in the order the indices were handed to the symbolic builder.
    j_positions: Vec<usize>,
    /// Values of the constraint entries, appended after the `J` values.
    tail: Vec<f64>,
    symbolic: SymbolicSparseColMat<usize>,
    argsort: Argsort<usize>,
    lu_symbolic: SymbolicLu<usize>,
    div: SparseOperator,
    pressure_mean: Vec<f64>,
}

pub struct SaddleFactor {
    lu: Lu<usize, f64>,
    jacobian: SparseOperator,
}

impl SaddleSystem {
    pub fn new(disc: &Discretization) -> Result<Self> {
        let nv = disc.n_velocity();
        let np = disc.n_pressure();
        let free = disc.space.velocity_free_dofs();
        let mut free_index = vec![usize::MAX; nv];
        for (k, &d) in free.iter().enumerate() {
            free_index[d] = k;
        }
        let nf = free.len();
        let dim = nf + np + 1;

        let template = disc.velocity_template();
        let mut pairs = Vec::new();
        let mut j_positions = Vec::new();
        for r in 0..nv {
            if free_index[r] == usize::MAX {
                continue;
            }
            for k in template.row_ptr[r]..template.row_ptr[r + 1] {
                let c = template.col_idx[k];
                if free_index[c] != usize::MAX {
                    pairs.push(Pair::new(free_index[r], free_index[c]));
                    j_positions.push(k);
                }
            }
        }
        let div = disc.forms.div.clone();
        let mut tail = Vec::new();
        for q in 0..np {
            for (c, v) in div.row(q) {
                if free_index[c] != usize::MAX {
                    pairs.push(Pair::new(nf + q, free_index[c]));
                    pairs.push(Pair::new(free_index[c], nf + q));
                    tail.push(-v);
                    tail.push(-v);
                }
            }
        }
        let pressure_mean = disc.forms.pressure_mean.clone();
        for (q, &m) in pressure_mean.iter().enumerate() {
            pairs.push(Pair::new(nf + q, nf + np));
            pairs.push(Pair::new(nf + np, nf + q));
            tail.push(m);
            tail.push(m);
        }
        let (symbolic, argsort) = SymbolicSparseColMat::try_new_from_indices(dim, dim, &pairs)
            .map_err(|e| Error::SingularSystem(format!("saddle pattern: {e:?}")))?;
        let lu_symbolic = SymbolicLu::try_new(symbolic.as_ref())
            .map_err(|e| Error::SingularSystem(format!("symbolic LU: {e:?}")))?;
        Ok(SaddleSystem {
            n_velocity: nv,
            n_pressure: np,
            free,
            j_positions,
            tail,
            symbolic,
            argsort,
            lu_symbolic,
            div,
            pressure_mean,
        })
    }

    pub fn dim(&self) -> usize {
        self.free.len() + self.n_pressure + 1
    }

    /// Numeric factorization for a velocity block `J` on the shared pattern.
    pub fn factor(&self, jacobian: &SparseOperator) -> Result<SaddleFactor> {
        let mut vals = Vec::with_capacity(self.j_positions.len() + self.tail.len());
        vals.extend(self.j_positions.iter().map(|&k| jacobian.values[k]));
        vals.extend_from_slice(&self.tail);
        let mat = SparseColMat::new_from_argsort(self.symbolic.clone(), &self.argsort, &vals)
            .map_err(|e| Error::SingularSystem(format!("saddle matrix: {e:?}")))?;
        let lu = Lu::try_new_with_symbolic(self.lu_symbolic.clone(), mat.as_ref())
            .map_err(|e| Error::SingularSystem(format!("numeric LU: {e:?}")))?;
        Ok(SaddleFactor { lu, jacobian: jacobian.clone() })
    }

    /// Solves for velocity (full length, zero on the Dirichlet boundary) and
    /// pressure. `rhs_velocity` has full velocity length; its Dirichlet entries
    /// are ignored. `rhs_div` is the right-hand side of the `-B x` rows.
    pub fn solve(&self, factor: &SaddleFactor, rhs_velocity: &[f64], rhs_div: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        assert_eq!(rhs_velocity.len(), self.n_velocity);
        assert_eq!(rhs_div.len(), self.n_pressure);
        let nf = self.free.len();
        let mut b = vec![0.0; self.dim()];
        for (k, &d) in self.free.iter().enumerate() {
            b[k] = rhs_velocity[d];
        }
        b[nf..nf + self.n_pressure].copy_from_slice(rhs_div);
        let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));

        let mut x = self.solve_raw(factor, &b);
        for _ in 0..3 {
            let r = self.residual(factor, &x, &b);
            let rnorm = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if !rnorm.is_finite() {
                return Err(Error::SingularSystem("non-finite solution of saddle system".into()));
            }
            if rnorm <= 1e-13 * scale.max(f64::MIN_POSITIVE) {
                break;
            }
            let dx = self.solve_raw(factor, &r);
            for (xi, di) in x.iter_mut().zip(&dx) {
                *xi += di;
            }
        }
        let r = self.residual(factor, &x, &b);
        let rnorm = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !rnorm.is_finite() || rnorm > 1e-6 * scale.max(1.0) {
            return Err(Error::SingularSystem(format!("saddle residual {rnorm:.3e} after refinement")));
        }

        let mut u = vec![0.0; self.n_velocity];
        for (k, &d) in self.free.iter().enumerate() {
            u[d] = x[k];
        }
        Ok((u, x[nf..nf + self.n_pressure].to_vec()))
    }

    fn solve_raw(&self, factor: &SaddleFactor, b: &[f64]) -> Vec<f64> {
        let rhs = Mat::<f64>::from_fn(b.len(), 1, |i, _| b[i]);
        let sol = factor.lu.solve(&rhs);
        (0..b.len()).map(|i| sol[(i, 0)]).collect()
    }

    /// `b - K x` for the saddle matrix `K`.
    fn residual(&self, factor: &SaddleFactor, x: &[f64], b: &[f64]) -> Vec<f64> {
        let nf = self.free.len();
        let np = self.n_pressure;
        let mut u = vec![0.0; self.n_velocity];
        for (k, &d) in self.free.iter().enumerate() {
            u[d] = x[k];
        }
        let p = &x[nf..nf + np];
        let lambda = x[nf + np];
        let ju = factor.jacobian.matvec(&u);
        let btp = self.div.matvec_transpose(p);
        let bu = self.div.matvec(&u);
        let mut r = b.to_vec();
        for (k, &d) in self.free.iter().enumerate() {
            r[k] -= ju[d] - btp[d];
        }
        for q in 0..np {
            r[nf + q] -= -bu[q] + lambda * self.pressure_mean[q];
        }
        r[nf + np] -= p.iter().zip(&self.pressure_mean).map(|(a, b)| a * b).sum::<f64>();
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fe_space::build_taylor_hood;
    use crate::mesh::{build_rect_mesh, Rect};
    use std::sync::Arc;

    fn disc(n: usize) -> Discretization {
        let mesh = Arc::new(build_rect_mesh(n, n, Rect::UNIT).unwrap());
        Discretization::new(build_taylor_hood(mesh, 2).unwrap())
    }

    #[test]
    fn stokes_solution_satisfies_constraints() {
        let d = disc(4);
        let sys = SaddleSystem::new(&d).unwrap();
        let j = SparseOperator::linear_combination(&[(1.0, &d.forms.stiffness), (0.5, &d.forms.mass)]);
        let f = d.assemble_load(|x, _| [x[1] - 0.5, (3.0 * x[0]).sin()], 0.0);
        let fac = sys.factor(&j).unwrap();
        let (u, p) = sys.solve(&fac, &f, &vec![0.0; d.n_pressure()]).unwrap();
        let bu = d.forms.div.matvec(&u);
        assert!(bu.iter().all(|v| v.abs() < 1e-12));
        let mean: f64 = p.iter().zip(&d.forms.pressure_mean).map(|(a, b)| a * b).sum();
        assert!(mean.abs() < 1e-13);
        // momentum rows on free DOFs
        let r: Vec<f64> = j
            .matvec(&u)
            .iter()
            .zip(d.forms.div.matvec_transpose(&p))
            .zip(&f)
            .map(|((a, b), c)| a - b - c)
            .collect();
        for dof in d.space.velocity_free_dofs() {
            assert!(r[dof].abs() < 1e-12);
        }
        for dof in d.space.velocity_boundary_dofs() {
            assert_eq!(u[dof], 0.0);
        }
    }

    #[test]
    fn refactoring_reuses_pattern() {
        let d = disc(3);
        let sys = SaddleSystem::new(&d).unwrap();
        let rhs = d.assemble_load(|_, _| [1.0, 0.0], 0.0);
        let zero = vec![0.0; d.n_pressure()];
        let mut prev = None;
        for s in [1.0, 2.0] {
            let j = SparseOperator::linear_combination(&[(s, &d.forms.stiffness)]);
            let (u, _) = sys.solve(&sys.factor(&j).unwrap(), &rhs, &zero).unwrap();
            if let Some(p) = prev {
                let p: Vec<f64> = p;
                for (a, b) in p.iter().zip(&u) {
                    assert!((a - 2.0 * b).abs() < 1e-12);
                }
            }
            prev = Some(u);
        }
    }
}
