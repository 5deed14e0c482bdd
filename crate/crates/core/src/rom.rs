//! Grad-div stabilized POD Galerkin reduced-order model.
//!
//! Reduced states are `u_r = ū + Σ a_k φ_k`, where `ū` is the basis offset
//! (zero when the basis carries none). Each step solves the `r` equations
//! `(αu_r − h, φ_i) + ν(∇u_r, ∇φ_i) + μ(∇·u_r, ∇·φ_i) + b_h(u_r, u_r, φ_i) = (f, φ_i)`.

use std::io::Write;
use std::path::Path;

use faer::linalg::solvers::Solve;
use faer::Mat;

use crate::assembly::Discretization;
use crate::error::{Error, Result};
use crate::fe_space::FeFunction;
use crate::fom::{bdf_weights, FomConfig, Forcing, Integrator, Trajectory};
use crate::pod::{dot, PodBasis};
use crate::sparse::SparseOperator;

/// Galerkin compressions of the full-order operators onto a POD basis.
#[derive(Clone, Debug)]
pub struct RomOperators {
    pub r: usize,
    pub mass: Mat<f64>,
    pub stiffness: Mat<f64>,
    pub grad_div: Mat<f64>,
    /// `T[(i * r + j) * r + k] = b_h(φ_j, φ_k, φ_i)`
    pub tensor: Vec<f64>,
    pub offset: Option<OffsetTerms>,
}

/// Terms generated by a fixed offset `ū`.
#[derive(Clone, Debug)]
pub struct OffsetTerms {
    /// `b_h(ū, φ_k, φ_i) + b_h(φ_k, ū, φ_i)`
    pub convection_linear: Mat<f64>,
    /// `(∇ū, ∇φ_i)`
    pub stiffness: Vec<f64>,
    /// `(∇·ū, ∇·φ_i)`
    pub grad_div: Vec<f64>,
    /// `b_h(ū, ū, φ_i)`
    pub convection: Vec<f64>,
}

fn compress(vectors: &[FeFunction], op: &SparseOperator) -> Mat<f64> {
    let r = vectors.len();
    let ops: Vec<Vec<f64>> = vectors.iter().map(|v| op.matvec(&v.values)).collect();
    Mat::from_fn(r, r, |i, j| dot(&vectors[i].values, &ops[j]))
}

fn test_against(vectors: &[FeFunction], v: &[f64]) -> Vec<f64> {
    vectors.iter().map(|phi| dot(&phi.values, v)).collect()
}

pub fn build_rom_operators(basis: &PodBasis, disc: &Discretization) -> Result<RomOperators> {
    let r = basis.r;
    let n = disc.n_velocity();
    if basis.vectors.iter().any(|v| v.len() != n) || basis.offset.as_ref().is_some_and(|o| o.len() != n) {
        return Err(Error::DimensionMismatch(format!("basis vectors do not match the velocity space ({n} DOFs)")));
    }
    let phis = &basis.vectors;
    let mut tensor = vec![0.0; r * r * r];
    for j in 0..r {
        let nj = disc.assemble_convection(&phis[j].values);
        for k in 0..r {
            let y = nj.matvec(&phis[k].values);
            for i in 0..r {
                tensor[(i * r + j) * r + k] = dot(&phis[i].values, &y);
            }
        }
    }
    let offset = basis.offset.as_ref().map(|ubar| {
        let u = &ubar.values;
        let mut lin = disc.assemble_convection(u);
        disc.add_convection_jacobian(u, 1.0, &mut lin);
        OffsetTerms {
            convection_linear: compress(phis, &lin),
            stiffness: test_against(phis, &disc.forms.stiffness.matvec(u)),
            grad_div: test_against(phis, &disc.forms.grad_div.matvec(u)),
            convection: test_against(phis, &disc.convection_vector(u)),
        }
    });
    Ok(RomOperators {
        r,
        mass: compress(phis, &disc.forms.mass),
        stiffness: compress(phis, &disc.forms.stiffness),
        grad_div: compress(phis, &disc.forms.grad_div),
        tensor,
        offset,
    })
}

fn matvec(a: &Mat<f64>, x: &[f64]) -> Vec<f64> {
    (0..a.nrows()).map(|i| (0..a.ncols()).map(|j| a[(i, j)] * x[j]).sum()).collect()
}

fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

impl RomOperators {
    /// `C(a)_i = Σ_{j,k} T_ijk a_j a_k`
    pub fn convection(&self, a: &[f64]) -> Vec<f64> {
        let r = self.r;
        (0..r)
            .map(|i| {
                let block = &self.tensor[i * r * r..(i + 1) * r * r];
                (0..r).map(|j| a[j] * (0..r).map(|k| block[j * r + k] * a[k]).sum::<f64>()).sum()
            })
            .collect()
    }

    /// `∂C_i/∂a_m = Σ_k T_imk a_k + Σ_j T_ijm a_j`
    pub fn convection_jacobian(&self, a: &[f64]) -> Mat<f64> {
        let r = self.r;
        Mat::from_fn(r, r, |i, m| {
            let block = &self.tensor[i * r * r..(i + 1) * r * r];
            (0..r).map(|k| block[m * r + k] * a[k] + block[k * r + m] * a[k]).sum()
        })
    }

    /// `‖Σ a_k φ_k‖₀`
    pub fn l2_norm(&self, a: &[f64]) -> f64 {
        dot(a, &matvec(&self.mass, a)).max(0.0).sqrt()
    }
}

/// Settings of the reduced time stepper.
#[derive(Clone, Debug, PartialEq)]
pub struct RomConfig {
    pub nu: f64,
    pub mu: f64,
    pub dt: f64,
    pub t_final: f64,
    pub integrator: Integrator,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
}

impl From<&FomConfig> for RomConfig {
    fn from(c: &FomConfig) -> Self {
        RomConfig {
            nu: c.nu,
            mu: c.mu,
            dt: c.dt,
            t_final: c.t_final,
            integrator: c.integrator,
            newton_tol: 1e-12,
            newton_max_iter: 30,
        }
    }
}

impl RomConfig {
    pub fn fom_config(&self) -> FomConfig {
        FomConfig {
            nu: self.nu,
            mu: self.mu,
            dt: self.dt,
            t_final: self.t_final,
            integrator: self.integrator,
            ..FomConfig::default()
        }
    }
}

/// `t ↦ ((f(t), φ_i))_i`
pub type ReducedLoad<'a> = Box<dyn Fn(f64) -> Vec<f64> + Send + Sync + 'a>;

/// Reduced load obtained by assembling the full load and testing it
/// against every mode.
pub fn reduced_load<'a>(disc: &'a Discretization, basis: &'a PodBasis, forcing: Forcing<'a>) -> ReducedLoad<'a> {
    Box::new(move |t| test_against(&basis.vectors, &disc.assemble_load(&forcing, t)))
}

#[derive(Clone, Debug)]
pub struct RomStepOutcome {
    pub coords: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

pub struct RomSolver<'a> {
    pub ops: &'a RomOperators,
    pub cfg: RomConfig,
    load: Option<ReducedLoad<'a>>,
    /// `νA_r + μG_r` plus the offset's linear convection
    linear: Mat<f64>,
    /// `ν(∇ū, ∇φ_i) + μ(∇·ū, ∇·φ_i) + b_h(ū, ū, φ_i)`
    constant: Vec<f64>,
}

impl<'a> RomSolver<'a> {
    pub fn new(ops: &'a RomOperators, cfg: RomConfig, load: Option<ReducedLoad<'a>>) -> Result<Self> {
        cfg.fom_config().validate()?;
        let r = ops.r;
        let mut linear = Mat::from_fn(r, r, |i, j| cfg.nu * ops.stiffness[(i, j)] + cfg.mu * ops.grad_div[(i, j)]);
        let mut constant = vec![0.0; r];
        if let Some(off) = &ops.offset {
            linear += &off.convection_linear;
            for i in 0..r {
                constant[i] = cfg.nu * off.stiffness[i] + cfg.mu * off.grad_div[i] + off.convection[i];
            }
        }
        Ok(RomSolver { ops, cfg, load, linear, constant })
    }

    pub fn load(&self, t: f64) -> Vec<f64> {
        match &self.load {
            Some(f) => f(t),
            None => vec![0.0; self.ops.r],
        }
    }

    /// `αM_r a + (νA_r + μG_r + L)a + c + C(a) − rhs`
    pub fn residual(&self, alpha: f64, rhs: &[f64], a: &[f64]) -> Vec<f64> {
        let ma = matvec(&self.ops.mass, a);
        let la = matvec(&self.linear, a);
        let ca = self.ops.convection(a);
        (0..self.ops.r).map(|i| alpha * ma[i] + la[i] + self.constant[i] + ca[i] - rhs[i]).collect()
    }

    /// Newton iteration for the reduced system with right-hand side `rhs`.
    pub fn solve_nonlinear(&self, alpha: f64, rhs: &[f64], guess: &[f64]) -> Result<RomStepOutcome> {
        let r = self.ops.r;
        let mut a = guess.to_vec();
        let rhs_norm = norm(rhs).max(norm(&self.constant));
        let mut history = Vec::new();
        for it in 0..=self.cfg.newton_max_iter {
            let res = self.residual(alpha, rhs, &a);
            let rn = norm(&res);
            history.push(rn);
            let scale = rhs_norm.max(alpha * self.ops.l2_norm(&a)).max(f64::MIN_POSITIVE);
            if (it > 0 || rn == 0.0) && rn <= self.cfg.newton_tol * scale {
                return Ok(RomStepOutcome { coords: a, iterations: it, residual: rn });
            }
            if !rn.is_finite() || it == self.cfg.newton_max_iter {
                break;
            }
            let mut jac = Mat::from_fn(r, r, |i, j| alpha * self.ops.mass[(i, j)] + self.linear[(i, j)]);
            jac += self.ops.convection_jacobian(&a);
            let lu = jac.partial_piv_lu();
            let delta = lu.solve(Mat::from_fn(r, 1, |i, _| -res[i]));
            if (0..r).any(|i| !delta[(i, 0)].is_finite()) {
                return Err(Error::SingularSystem("reduced Jacobian is singular".into()));
            }
            for i in 0..r {
                a[i] += delta[(i, 0)];
            }
        }
        Err(Error::NewtonDivergence { iterations: history.len() - 1, residual: *history.last().unwrap(), history })
    }

    /// Advances to `t_new`; `step` is the 1-based index of the new state.
    pub fn step(&self, step: usize, prev: &[f64], prev2: Option<&[f64]>, t_new: f64) -> Result<RomStepOutcome> {
        let (alpha, w) = bdf_weights(self.cfg.integrator, if prev2.is_some() { step } else { 1 }, self.cfg.dt);
        let mut hist: Vec<f64> = prev.iter().map(|v| w[0] * v).collect();
        let mut guess = prev.to_vec();
        if let (Some(p2), true) = (prev2, w[1] != 0.0) {
            for i in 0..hist.len() {
                hist[i] += w[1] * p2[i];
                guess[i] = 2.0 * prev[i] - p2[i];
            }
        }
        let mut rhs = matvec(&self.ops.mass, &hist);
        if self.load.is_some() {
            for (r, f) in rhs.iter_mut().zip(self.load(t_new)) {
                *r += f;
            }
        }
        self.solve_nonlinear(alpha, &rhs, &guess)
    }

    pub fn run(&self, a0: &[f64]) -> Result<RomTrajectory> {
        if a0.len() != self.ops.r {
            return Err(Error::DimensionMismatch(format!("initial coordinates have length {}, rank is {}", a0.len(), self.ops.r)));
        }
        let m = self.cfg.fom_config().n_steps();
        let mut out = RomTrajectory { times: vec![0.0], coords: vec![a0.to_vec()], iterations: vec![0] };
        for j in 1..=m {
            let t = j as f64 * self.cfg.dt;
            let prev2 = if j >= 2 { Some(out.coords[j - 2].as_slice()) } else { None };
            let step = self
                .step(j, &out.coords[j - 1], prev2, t)
                .map_err(|e| Error::StepFailed { step: j, time: t, source: Box::new(e) })?;
            out.times.push(t);
            out.coords.push(step.coords);
            out.iterations.push(step.iterations);
        }
        Ok(out)
    }
}

/// X-projection of `u0 − ū` onto the basis.
pub fn initial_coords(basis: &PodBasis, disc: &Discretization, u0: &[f64]) -> Vec<f64> {
    match &basis.offset {
        Some(off) => {
            let shifted: Vec<f64> = u0.iter().zip(&off.values).map(|(a, b)| a - b).collect();
            basis.coords(disc, &shifted)
        }
        None => basis.coords(disc, u0),
    }
}

/// Offline and online stages in one call; starts from the projection of `u0`.
pub fn run_rom(
    basis: &PodBasis,
    disc: &Discretization,
    cfg: &RomConfig,
    u0: &[f64],
    forcing: Option<Forcing<'_>>,
) -> Result<RomTrajectory> {
    let ops = build_rom_operators(basis, disc)?;
    let load = forcing.map(|f| reduced_load(disc, basis, f));
    let solver = RomSolver::new(&ops, cfg.clone(), load)?;
    solver.run(&initial_coords(basis, disc, u0))
}

/// Reduced coordinates over time.
#[derive(Clone, Debug, PartialEq)]
pub struct RomTrajectory {
    pub times: Vec<f64>,
    pub coords: Vec<Vec<f64>>,
    /// Newton iterations per step (0 for the initial state).
    pub iterations: Vec<usize>,
}

impl RomTrajectory {
    pub fn n_steps(&self) -> usize {
        self.times.len() - 1
    }

    /// Full-order fields `ū + Σ a_k φ_k`.
    pub fn lift(&self, basis: &PodBasis) -> Vec<FeFunction> {
        self.coords
            .iter()
            .map(|a| {
                let mut u = basis.combine(a);
                if let Some(off) = &basis.offset {
                    for (x, o) in u.iter_mut().zip(&off.values) {
                        *x += o;
                    }
                }
                FeFunction::new(u)
            })
            .collect()
    }

    /// Lifted fields as a velocity-only trajectory.
    pub fn to_trajectory(&self, basis: &PodBasis, cfg: &RomConfig, label: &str) -> Trajectory {
        Trajectory {
            config: cfg.fom_config(),
            space: basis.space,
            label: label.to_string(),
            times: self.times.clone(),
            velocities: self.lift(basis),
            pressures: Vec::new(),
            derivatives: Vec::new(),
        }
    }

    /// CSV with header `t,a_1,…,a_r`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        let r = self.coords.first().map_or(0, Vec::len);
        let header: Vec<String> = std::iter::once("t".to_string()).chain((1..=r).map(|k| format!("a_{k}"))).collect();
        writeln!(w, "{}", header.join(","))?;
        for (t, a) in self.times.iter().zip(&self.coords) {
            let row: Vec<String> = std::iter::once(*t).chain(a.iter().copied()).map(|v| format!("{v:.16e}")).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let bad = |reason: String| Error::Format { path: path.display().to_string(), reason };
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty file".into()))?;
        let width = header.split(',').count();
        if !header.starts_with('t') || width < 2 {
            return Err(bad(format!("unexpected header {header:?}")));
        }
        let mut out = RomTrajectory { times: Vec::new(), coords: Vec::new(), iterations: Vec::new() };
        for (i, line) in lines.enumerate() {
            let vals = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| bad(format!("line {}: {e}", i + 2)))?;
            if vals.len() != width {
                return Err(bad(format!("line {}: expected {width} fields, found {}", i + 2, vals.len())));
            }
            out.times.push(vals[0]);
            out.coords.push(vals[1..].to_vec());
            out.iterations.push(0);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fe_space::SpaceSpec;
    use crate::fom::run_fom;
    use crate::manufactured::Problem;
    use crate::pod::{compute_pod_basis, InnerProduct, PodOptions};
    use crate::snapshots::{build_snapshot_set, temporal_mean, SnapshotVariant};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn disc() -> Discretization {
        Discretization::from_spec(&SpaceSpec::unit_square(4, 2)).unwrap()
    }

    fn decay_trajectory(d: &Discretization, integrator: Integrator) -> Trajectory {
        let cfg = FomConfig { dt: 0.05, t_final: 0.5, integrator, nu: 0.01, ..FomConfig::default() };
        let u0 = d.interpolate(|x, _| Problem::FreeDecay.initial_velocity(x), 0.0);
        run_fom(d, &cfg, &u0.values, None).unwrap()
    }

    fn basis(d: &Discretization, traj: &Trajectory, x: InnerProduct, r: usize) -> PodBasis {
        let set = build_snapshot_set(traj, SnapshotVariant::InitialPlusDerivatives, traj.t_final()).unwrap();
        compute_pod_basis(&set, d, x, PodOptions::rank(r)).unwrap()
    }

    #[test]
    fn reduced_operators_are_compressions() {
        let d = disc();
        let traj = decay_trajectory(&d, Integrator::Bdf2);
        for x in [InnerProduct::L2, InnerProduct::H1] {
            let b = basis(&d, &traj, x, 4);
            let ops = build_rom_operators(&b, &d).unwrap();
            let gram = if x == InnerProduct::L2 { &ops.mass } else { &ops.stiffness };
            for i in 0..4 {
                for j in 0..4 {
                    let delta = if i == j { 1.0 } else { 0.0 };
                    assert!((gram[(i, j)] - delta).abs() < 1e-8);
                    assert!((ops.mass[(i, j)] - ops.mass[(j, i)]).abs() < 1e-10);
                    assert!((ops.stiffness[(i, j)] - ops.stiffness[(j, i)]).abs() < 1e-10);
                    assert!((ops.grad_div[(i, j)] - ops.grad_div[(j, i)]).abs() < 1e-10);
                    let direct = d.forms.grad_div.bilinear(&b.vectors[i].values, &b.vectors[j].values);
                    assert!((ops.grad_div[(i, j)] - direct).abs() < 1e-11);
                }
            }
        }
    }

    #[test]
    fn tensor_matches_trilinear_form() {
        let d = disc();
        let traj = decay_trajectory(&d, Integrator::Bdf2);
        let b = basis(&d, &traj, InnerProduct::L2, 5);
        let ops = build_rom_operators(&b, &d).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let phi = |k: usize| b.vectors[k].values.as_slice();
        for _ in 0..50 {
            let (i, j, k) = (rng.gen_range(0..5), rng.gen_range(0..5), rng.gen_range(0..5));
            let direct = d.trilinear_form(phi(j), phi(k), phi(i));
            assert!((ops.tensor[(i * 5 + j) * 5 + k] - direct).abs() < 1e-10);
        }
        for _ in 0..20 {
            let a: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let c: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut s = 0.0;
            for i in 0..5 {
                for j in 0..5 {
                    for k in 0..5 {
                        s += a[j] * c[i] * c[k] * ops.tensor[(i * 5 + j) * 5 + k];
                    }
                }
            }
            assert!(s.abs() < 1e-10);
        }
    }

    #[test]
    fn convection_jacobian_matches_differences() {
        let d = disc();
        let traj = decay_trajectory(&d, Integrator::Bdf2);
        let b = basis(&d, &traj, InnerProduct::H1, 4);
        let ops = build_rom_operators(&b, &d).unwrap();
        let a = [0.3, -0.2, 0.1, 0.05];
        let jac = ops.convection_jacobian(&a);
        let h = 1e-6;
        for m in 0..4 {
            let mut ap = a;
            let mut am = a;
            ap[m] += h;
            am[m] -= h;
            let (cp, cm) = (ops.convection(&ap), ops.convection(&am));
            for i in 0..4 {
                assert!(((cp[i] - cm[i]) / (2.0 * h) - jac[(i, m)]).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn zero_state_is_fixed_and_energy_decays() {
        let d = disc();
        let traj = decay_trajectory(&d, Integrator::Bdf2);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for x in [InnerProduct::L2, InnerProduct::H1] {
            let b = basis(&d, &traj, x, 6);
            let ops = build_rom_operators(&b, &d).unwrap();
            let cfg = RomConfig { integrator: Integrator::ImplicitEuler, ..RomConfig::from(&traj.config) };
            let solver = RomSolver::new(&ops, cfg, None).unwrap();
            assert_eq!(solver.step(1, &[0.0; 6], None, 0.05).unwrap().coords, vec![0.0; 6]);
            for _ in 0..10 {
                let a: Vec<f64> = (0..6).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let next = solver.step(1, &a, None, 0.05).unwrap().coords;
                assert!(ops.l2_norm(&next) <= ops.l2_norm(&a) * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn reduced_residual_is_tested_full_residual() {
        let d = disc();
        let traj = decay_trajectory(&d, Integrator::Bdf2);
        let ubar = temporal_mean(&traj.velocities);
        let b = basis(&d, &traj, InnerProduct::L2, 5).with_offset(Some(ubar.clone()));
        let ops = build_rom_operators(&b, &d).unwrap();
        let cfg = RomConfig::from(&traj.config);
        let solver = RomSolver::new(&ops, cfg.clone(), None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let alpha = 20.0;
        for _ in 0..5 {
            let a: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let h: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let rhs = matvec(&ops.mass, &h);
            let reduced = solver.residual(alpha, &rhs, &a);
            // full residual of u = ū + Φa against history ū + Φh/α, tested with each φ_i
            let u: Vec<f64> = b.combine(&a).iter().zip(&ubar.values).map(|(x, o)| x + o).collect();
            let hist: Vec<f64> = b.combine(&h).iter().zip(&ubar.values).map(|(x, o)| x + alpha * o).collect();
            let time: Vec<f64> = u.iter().zip(&hist).map(|(x, y)| alpha * x - y).collect();
            let mut full = d.forms.mass.matvec(&time);
            let au = d.forms.stiffness.matvec(&u);
            let gu = d.forms.grad_div.matvec(&u);
            let nu = d.convection_vector(&u);
            for i in 0..full.len() {
                full[i] += cfg.nu * au[i] + cfg.mu * gu[i] + nu[i];
            }
            for (i, phi) in b.vectors.iter().enumerate() {
                assert!((dot(&phi.values, &full) - reduced[i]).abs() < 1e-10, "mode {i}");
            }
        }
    }

    #[test]
    fn full_rank_rom_tracks_fom() {
        let d = disc();
        let traj = decay_trajectory(&d, Integrator::ImplicitEuler);
        let set = build_snapshot_set(&traj, SnapshotVariant::RawVelocities, 1.0).unwrap();
        let b = compute_pod_basis(&set, &d, InnerProduct::L2, PodOptions::full()).unwrap();
        let cfg = RomConfig::from(&traj.config);
        let rom = run_rom(&b, &d, &cfg, &traj.velocities[0].values, None).unwrap();
        let lifted = rom.lift(&b);
        let scale = traj.velocities.iter().map(|u| d.l2_norm(&u.values)).fold(0.0, f64::max);
        for (u, v) in traj.velocities.iter().zip(&lifted) {
            let diff: Vec<f64> = u.values.iter().zip(&v.values).map(|(a, b)| a - b).collect();
            assert!(d.l2_norm(&diff) < 1e-6 * scale);
        }
    }

    #[test]
    fn empty_and_zero_runs() {
        let d = disc();
        let traj = decay_trajectory(&d, Integrator::Bdf2);
        let b = basis(&d, &traj, InnerProduct::L2, 3);
        let ops = build_rom_operators(&b, &d).unwrap();
        let cfg = RomConfig { t_final: 0.0, ..RomConfig::from(&traj.config) };
        let out = RomSolver::new(&ops, cfg, None).unwrap().run(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(out.n_steps(), 0);
        let cfg = RomConfig::from(&traj.config);
        let out = RomSolver::new(&ops, cfg, None).unwrap().run(&[0.0; 3]).unwrap();
        assert!(out.coords.iter().all(|a| a.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn csv_round_trip() {
        let out = RomTrajectory {
            times: vec![0.0, 0.1, 0.2],
            coords: vec![vec![1.0, -2.5e-17], vec![0.1, 1.0 / 3.0], vec![std::f64::consts::PI, 0.0]],
            iterations: vec![0, 0, 0],
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rom.csv");
        out.write_csv(&path).unwrap();
        assert_eq!(RomTrajectory::read_csv(&path).unwrap(), out);
        assert!(std::fs::read_to_string(&path).unwrap().starts_with("t,a_1,a_2\n"));
    }
}
