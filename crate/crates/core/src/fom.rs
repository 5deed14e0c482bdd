//! Full-order grad-div stabilized Taylor–Hood model.
//!
//! Each step solves
//! `M(αu − h) + νAu + μGu + N(u)u − Bᵀp = F(t)`, `Bu = 0`, `∫p = 0`,
//! with `α = 1/Δt, h = u¹/Δt` for implicit Euler and
//! `α = 3/(2Δt), h = (4u¹ − u²)/(2Δt)` for BDF2.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::assembly::Discretization;
use crate::error::{Error, Result};
use crate::fe_space::{FeFunction, SpaceSpec};
use crate::linsolve::{SaddleFactor, SaddleSystem};
use crate::sparse::SparseOperator;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    ImplicitEuler,
    Bdf2,
}

impl Integrator {
    pub fn as_str(&self) -> &'static str {
        match self {
            Integrator::ImplicitEuler => "implicit_euler",
            Integrator::Bdf2 => "bdf2",
        }
    }
}

impl std::str::FromStr for Integrator {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "implicit_euler" | "ie" => Ok(Integrator::ImplicitEuler),
            "bdf2" => Ok(Integrator::Bdf2),
            other => Err(format!("unknown integrator {other:?}")),
        }
    }
}

/// Time-stepping weights `α` and history combination for the step that
/// produces index `step` (1-based).
pub fn bdf_weights(integrator: Integrator, step: usize, dt: f64) -> (f64, [f64; 2]) {
    match (integrator, step) {
        (Integrator::Bdf2, s) if s >= 2 => (1.5 / dt, [2.0 / dt, -0.5 / dt]),
        _ => (1.0 / dt, [1.0 / dt, 0.0]),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FomConfig {
    pub nu: f64,
    pub mu: f64,
    pub dt: f64,
    pub t_final: f64,
    pub integrator: Integrator,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
}

impl Default for FomConfig {
    fn default() -> Self {
        FomConfig {
            nu: 1e-2,
            mu: 0.01,
            dt: 1e-2,
            t_final: 1.0,
            integrator: Integrator::Bdf2,
            newton_tol: 1e-11,
            newton_max_iter: 20,
        }
    }
}

impl FomConfig {
    /// Checks the parameters and returns the number of steps `T/Δt`.
    pub fn validate(&self) -> Result<usize> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return bad(format!("viscosity must be positive (got {})", self.nu));
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return bad(format!("grad-div parameter must be non-negative (got {})", self.mu));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("time step must be positive (got {})", self.dt));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return bad(format!("final time must be non-negative (got {})", self.t_final));
        }
        if !(self.newton_tol > 0.0) || self.newton_max_iter == 0 {
            return bad("Newton tolerance and iteration limit must be positive".into());
        }
        let m = (self.t_final / self.dt).round();
        if (m * self.dt - self.t_final).abs() > 1e-9 * self.t_final.max(self.dt) {
            return bad(format!("final time {} is not a multiple of the step {}", self.t_final, self.dt));
        }
        Ok(m as usize)
    }

    pub fn n_steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }
}

pub type Forcing<'a> = Box<dyn Fn([f64; 2], f64) -> [f64; 2] + Send + Sync + 'a>;

/// Outcome of one nonlinear solve.
#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub velocity: Vec<f64>,
    pub pressure: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
    pub used_picard: bool,
}

pub struct FomSolver<'a> {
    pub disc: &'a Discretization,
    pub cfg: FomConfig,
    forcing: Option<Forcing<'a>>,
    saddle: SaddleSystem,
    mass_factor: SaddleFactor,
    /// `νA + μG`
    viscous: SparseOperator,
    free: Vec<usize>,
}

impl<'a> FomSolver<'a> {
    /// `forcing = None` means `f ≡ 0`.
    pub fn new(disc: &'a Discretization, cfg: FomConfig, forcing: Option<Forcing<'a>>) -> Result<Self> {
        cfg.validate()?;
        let saddle = SaddleSystem::new(disc)?;
        let mass_factor = saddle.factor(&disc.forms.mass)?;
        let viscous = SparseOperator::linear_combination(&[(cfg.nu, &disc.forms.stiffness), (cfg.mu, &disc.forms.grad_div)]);
        let free = disc.space.velocity_free_dofs();
        Ok(FomSolver { disc, cfg, forcing, saddle, mass_factor, viscous, free })
    }

    pub fn load(&self, t: f64) -> Vec<f64> {
        match &self.forcing {
            Some(f) => self.disc.assemble_load(f, t),
            None => vec![0.0; self.disc.n_velocity()],
        }
    }

    /// Mass-orthogonal projection onto the discretely divergence-free
    /// velocities with homogeneous boundary values.
    pub fn leray_project(&self, u: &[f64]) -> Result<Vec<f64>> {
        let rhs = self.disc.forms.mass.matvec(u);
        let (w, _) = self.saddle.solve(&self.mass_factor, &rhs, &vec![0.0; self.disc.n_pressure()])?;
        Ok(w)
    }

    /// Galerkin time derivative `u_t` at `u` and the matching pressure.
    pub fn time_derivative(&self, u: &[f64], t: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut rhs = self.load(t);
        let vu = self.viscous.matvec(u);
        let nu = self.disc.convection_vector(u);
        for i in 0..rhs.len() {
            rhs[i] -= vu[i] + nu[i];
        }
        self.saddle.solve(&self.mass_factor, &rhs, &vec![0.0; self.disc.n_pressure()])
    }

    fn free_norm(&self, r: &[f64]) -> f64 {
        self.free.iter().map(|&d| r[d] * r[d]).sum::<f64>().sqrt()
    }

    /// Solves `αMu + (νA + μG)u + N(u)u − Bᵀp = rhs`, `Bu = 0` from `guess`.
    pub fn solve_nonlinear(&self, alpha: f64, rhs: &[f64], guess: &[f64]) -> Result<StepOutcome> {
        match self.iterate(alpha, rhs, guess, true, self.cfg.newton_max_iter) {
            Ok(out) => Ok(out),
            Err(Error::NewtonDivergence { history: newton_history, .. }) => {
                match self.iterate(alpha, rhs, guess, false, 5 * self.cfg.newton_max_iter) {
                    Ok(mut out) => {
                        out.used_picard = true;
                        Ok(out)
                    }
                    Err(Error::NewtonDivergence { iterations, residual, history }) => {
                        let mut all = newton_history;
                        all.extend(history);
                        Err(Error::NewtonDivergence { iterations: iterations + self.cfg.newton_max_iter, residual, history: all })
                    }
                    Err(e) => Err(e),
                }
            }
            Err(e) => Err(e),
        }
    }

    fn iterate(&self, alpha: f64, rhs: &[f64], guess: &[f64], newton: bool, max_iter: usize) -> Result<StepOutcome> {
        let disc = self.disc;
        let np = disc.n_pressure();
        let base = SparseOperator::linear_combination(&[(alpha, &disc.forms.mass), (1.0, &self.viscous)]);
        let rhs_norm = self.free_norm(rhs);
        let mut u = guess.to_vec();
        let mut p = vec![0.0; np];
        let mut history = Vec::new();
        for it in 0..=max_iter {
            // residual without the pressure term; the pressure is recomputed by each solve
            let mut r0 = base.matvec(&u);
            let nu = disc.convection_vector(&u);
            for i in 0..r0.len() {
                r0[i] += nu[i] - rhs[i];
            }
            let btp = disc.forms.div.matvec_transpose(&p);
            let full: Vec<f64> = r0.iter().zip(&btp).map(|(a, b)| a - b).collect();
            let rn = self.free_norm(&full);
            history.push(rn);
            let scale = rhs_norm.max(alpha * disc.l2_norm(&u)).max(f64::MIN_POSITIVE);
            if it > 0 || rn == 0.0 {
                if rn <= self.cfg.newton_tol * scale {
                    return Ok(StepOutcome { velocity: u, pressure: p, iterations: it, residual: rn, used_picard: !newton });
                }
            }
            if !rn.is_finite() || (it > 2 && rn > 1e6 * history[0].max(f64::MIN_POSITIVE)) || it == max_iter {
                break;
            }
            let mut jac = base.clone();
            disc.add_convection(&u, 1.0, &mut jac);
            if newton {
                disc.add_convection_jacobian(&u, 1.0, &mut jac);
            }
            let factor = self.saddle.factor(&jac)?;
            let neg: Vec<f64> = r0.iter().map(|v| -v).collect();
            let bu = disc.forms.div.matvec(&u);
            let (du, p_new) = self.saddle.solve(&factor, &neg, &bu)?;
            for (ui, di) in u.iter_mut().zip(&du) {
                *ui += di;
            }
            p = p_new;
        }
        Err(Error::NewtonDivergence { iterations: history.len() - 1, residual: *history.last().unwrap(), history })
    }

    /// Advances to `t_new` from `prev` (and `prev2` for BDF2 beyond the
    /// first step). `step` is the 1-based index of the new state.
    pub fn step(&self, step: usize, prev: &[f64], prev2: Option<&[f64]>, t_new: f64) -> Result<StepOutcome> {
        let (alpha, w) = bdf_weights(self.cfg.integrator, if prev2.is_some() { step } else { 1 }, self.cfg.dt);
        let mut hist: Vec<f64> = prev.iter().map(|v| w[0] * v).collect();
        let mut guess = prev.to_vec();
        if let (Some(p2), true) = (prev2, w[1] != 0.0) {
            for i in 0..hist.len() {
                hist[i] += w[1] * p2[i];
                guess[i] = 2.0 * prev[i] - p2[i];
            }
        }
        let mut rhs = self.disc.forms.mass.matvec(&hist);
        if self.forcing.is_some() {
            for (r, f) in rhs.iter_mut().zip(self.load(t_new)) {
                *r += f;
            }
        }
        self.solve_nonlinear(alpha, &rhs, &guess)
    }

    /// Steps from the projected initial field without storing the
    /// trajectory; `observe(j, t_j, u_j)` sees every state including `j = 0`.
    pub fn integrate(&self, u0: &[f64], mut observe: impl FnMut(usize, f64, &[f64])) -> Result<Vec<f64>> {
        let dt = self.cfg.dt;
        let mut prev2: Option<Vec<f64>> = None;
        let mut prev = self.leray_project(u0)?;
        observe(0, 0.0, &prev);
        for j in 1..=self.cfg.n_steps() {
            let t = j as f64 * dt;
            let out = self
                .step(j, &prev, prev2.as_deref(), t)
                .map_err(|e| Error::StepFailed { step: j, time: t, source: Box::new(e) })?;
            observe(j, t, &out.velocity);
            prev2 = Some(std::mem::replace(&mut prev, out.velocity));
        }
        Ok(prev)
    }

    /// Full run from the nodal values of the initial field; the initial
    /// state is projected onto the discretely divergence-free space.
    pub fn run(&self, u0: &[f64]) -> Result<Trajectory> {
        let m = self.cfg.n_steps();
        let dt = self.cfg.dt;
        let u_init = self.leray_project(u0)?;
        let (w0, p0) = self.time_derivative(&u_init, 0.0)?;
        let mut traj = Trajectory {
            config: self.cfg.clone(),
            space: None,
            label: String::new(),
            times: vec![0.0],
            velocities: vec![FeFunction::new(u_init)],
            pressures: vec![FeFunction::new(p0)],
            derivatives: vec![FeFunction::new(w0)],
        };
        for j in 1..=m {
            let t = j as f64 * dt;
            let wrap = |e: Error| Error::StepFailed { step: j, time: t, source: Box::new(e) };
            let prev2 = if j >= 2 { Some(traj.velocities[j - 2].values.as_slice()) } else { None };
            let out = self.step(j, &traj.velocities[j - 1].values, prev2, t).map_err(wrap)?;
            let (w, _) = self.time_derivative(&out.velocity, t).map_err(wrap)?;
            traj.times.push(t);
            traj.velocities.push(FeFunction::new(out.velocity));
            traj.pressures.push(FeFunction::new(out.pressure));
            traj.derivatives.push(FeFunction::new(w));
        }
        Ok(traj)
    }
}

/// Convenience wrapper: build a solver and run it.
pub fn run_fom(disc: &Discretization, cfg: &FomConfig, u0: &[f64], forcing: Option<Forcing<'_>>) -> Result<Trajectory> {
    FomSolver::new(disc, cfg.clone(), forcing)?.run(u0)
}

/// Time series of full-order states.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub config: FomConfig,
    pub space: Option<SpaceSpec>,
    pub label: String,
    pub times: Vec<f64>,
    pub velocities: Vec<FeFunction>,
    pub pressures: Vec<FeFunction>,
    /// Galerkin time derivatives `u_{h,t}^j`.
    pub derivatives: Vec<FeFunction>,
}

#[derive(Serialize, Deserialize)]
struct TrajectoryMeta {
    format: String,
    label: String,
    config: FomConfig,
    space: Option<SpaceSpec>,
    times: Vec<f64>,
    n_velocity: usize,
    n_pressure: usize,
    has_pressure: bool,
    has_derivatives: bool,
}

const TRAJECTORY_FORMAT: &str = "podlab-trajectory-1";

impl Trajectory {
    /// Number of time steps `M` (states are indexed `0..=M`).
    pub fn n_steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn dt(&self) -> f64 {
        self.config.dt
    }

    pub fn t_final(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Writes `meta.json` and `u_XXXXX.bin`, `p_XXXXX.bin`, `ut_XXXXX.bin`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let meta = TrajectoryMeta {
            format: TRAJECTORY_FORMAT.into(),
            label: self.label.clone(),
            config: self.config.clone(),
            space: self.space,
            times: self.times.clone(),
            n_velocity: self.velocities.first().map_or(0, FeFunction::len),
            n_pressure: self.pressures.first().map_or(0, FeFunction::len),
            has_pressure: !self.pressures.is_empty(),
            has_derivatives: !self.derivatives.is_empty(),
        };
        std::fs::write(dir.join("meta.json"), serde_json::to_string_pretty(&meta)?)?;
        for (j, u) in self.velocities.iter().enumerate() {
            u.write_binary(&dir.join(format!("u_{j:05}.bin")))?;
        }
        for (j, p) in self.pressures.iter().enumerate() {
            p.write_binary(&dir.join(format!("p_{j:05}.bin")))?;
        }
        for (j, w) in self.derivatives.iter().enumerate() {
            w.write_binary(&dir.join(format!("ut_{j:05}.bin")))?;
        }
        Ok(())
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let meta_path = dir.join("meta.json");
        let meta: TrajectoryMeta = serde_json::from_str(&std::fs::read_to_string(&meta_path)?)?;
        if meta.format != TRAJECTORY_FORMAT {
            return Err(Error::Format {
                path: meta_path.display().to_string(),
                reason: format!("unsupported format tag {:?}", meta.format),
            });
        }
        let n = meta.times.len();
        let load = |prefix: &str, len: usize| -> Result<Vec<FeFunction>> {
            (0..n)
                .map(|j| {
                    let path = dir.join(format!("{prefix}_{j:05}.bin"));
                    let f = FeFunction::read_binary(&path)?;
                    if f.len() != len {
                        return Err(Error::Format {
                            path: path.display().to_string(),
                            reason: format!("expected {len} values, found {}", f.len()),
                        });
                    }
                    Ok(f)
                })
                .collect()
        };
        let velocities = load("u", meta.n_velocity)?;
        let pressures = if meta.has_pressure { load("p", meta.n_pressure)? } else { Vec::new() };
        let derivatives = if meta.has_derivatives { load("ut", meta.n_velocity)? } else { Vec::new() };
        Ok(Trajectory {
            config: meta.config,
            space: meta.space,
            label: meta.label,
            times: meta.times,
            velocities,
            pressures,
            derivatives,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manufactured::Problem;

    fn disc(n: usize) -> Discretization {
        Discretization::from_spec(&SpaceSpec::unit_square(n, 2)).unwrap()
    }

    fn cfg(dt: f64, t_final: f64, integrator: Integrator) -> FomConfig {
        FomConfig { dt, t_final, integrator, nu: 0.01, ..FomConfig::default() }
    }

    #[test]
    fn config_validation() {
        assert_eq!(cfg(0.1, 1.0, Integrator::Bdf2).validate().unwrap(), 10);
        assert!(cfg(0.3, 1.0, Integrator::Bdf2).validate().is_err());
        assert!(FomConfig { nu: 0.0, ..FomConfig::default() }.validate().is_err());
        assert!(FomConfig { mu: -1.0, ..FomConfig::default() }.validate().is_err());
        assert_eq!(cfg(0.1, 0.0, Integrator::Bdf2).validate().unwrap(), 0);
    }

    #[test]
    fn zero_is_a_fixed_point() {
        let d = disc(3);
        let solver = FomSolver::new(&d, cfg(0.1, 0.3, Integrator::Bdf2), None).unwrap();
        let traj = solver.run(&vec![0.0; d.n_velocity()]).unwrap();
        assert_eq!(traj.velocities.len(), 4);
        for f in traj.velocities.iter().chain(&traj.pressures).chain(&traj.derivatives) {
            assert!(f.values.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn zero_steps_keeps_initial_state() {
        let d = disc(3);
        let u0 = d.interpolate(|x, _| Problem::MultiVortex.initial_velocity(x), 0.0);
        let traj = run_fom(&d, &cfg(0.1, 0.0, Integrator::Bdf2), &u0.values, None).unwrap();
        assert_eq!(traj.n_steps(), 0);
        assert_eq!(traj.derivatives.len(), 1);
    }

    #[test]
    fn free_decay_is_energy_stable_and_divergence_free() {
        let d = disc(4);
        let u0 = d.interpolate(|x, _| Problem::FreeDecay.initial_velocity(x), 0.0);
        let traj = run_fom(&d, &cfg(0.05, 0.5, Integrator::ImplicitEuler), &u0.values, None).unwrap();
        let norms: Vec<f64> = traj.velocities.iter().map(|u| d.l2_norm(&u.values)).collect();
        for w in norms.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{norms:?}");
        }
        for f in traj.velocities.iter().chain(&traj.derivatives) {
            let bu = d.forms.div.matvec(&f.values);
            let scale = d.l2_norm(&f.values).max(1.0);
            assert!(bu.iter().all(|v| v.abs() <= 1e-10 * scale));
        }
    }

    #[test]
    fn integrate_reproduces_run() {
        let d = disc(3);
        let problem = Problem::MultiVortex;
        let u0 = d.interpolate(|x, _| problem.initial_velocity(x), 0.0);
        let c = cfg(0.05, 0.2, Integrator::Bdf2);
        let traj = run_fom(&d, &c, &u0.values, Some(Box::new(problem.forcing(c.nu)))).unwrap();
        let solver = FomSolver::new(&d, c.clone(), Some(Box::new(problem.forcing(c.nu)))).unwrap();
        let mut seen = Vec::new();
        let last = solver.integrate(&u0.values, |j, t, u| seen.push((j, t, u.to_vec()))).unwrap();
        assert_eq!(seen.len(), traj.velocities.len());
        for (j, t, u) in &seen {
            assert_eq!((*t, u), (traj.times[*j], &traj.velocities[*j].values));
        }
        assert_eq!(last, traj.velocities[4].values);
    }

    #[test]
    fn implicit_euler_derivative_matches_difference_quotient() {
        let d = disc(4);
        let problem = Problem::MultiVortex;
        let u0 = d.interpolate(|x, _| problem.initial_velocity(x), 0.0);
        let c = cfg(0.02, 0.1, Integrator::ImplicitEuler);
        let traj = run_fom(&d, &c, &u0.values, Some(Box::new(problem.forcing(c.nu)))).unwrap();
        for j in 1..=traj.n_steps() {
            let dq: Vec<f64> = traj.velocities[j]
                .values
                .iter()
                .zip(&traj.velocities[j - 1].values)
                .map(|(a, b)| (a - b) / c.dt)
                .collect();
            let diff: Vec<f64> = dq.iter().zip(&traj.derivatives[j].values).map(|(a, b)| a - b).collect();
            assert!(d.l2_norm(&diff) < 1e-8 * d.l2_norm(&dq));
        }
    }

    #[test]
    fn leray_projection_is_idempotent() {
        let d = disc(3);
        let solver = FomSolver::new(&d, FomConfig::default(), None).unwrap();
        let u = d.interpolate(|x, _| [x[0] * (1.0 - x[0]), x[1] * x[0] * (1.0 - x[1])], 0.0);
        let p1 = solver.leray_project(&u.values).unwrap();
        let p2 = solver.leray_project(&p1).unwrap();
        let diff: Vec<f64> = p1.iter().zip(&p2).map(|(a, b)| a - b).collect();
        assert!(d.l2_norm(&diff) < 1e-12 * d.l2_norm(&p1));
        assert!(d.forms.div.matvec(&p1).iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn trajectory_round_trip() {
        let d = disc(2);
        let u0 = d.interpolate(|x, _| Problem::FreeDecay.initial_velocity(x), 0.0);
        let mut traj = run_fom(&d, &cfg(0.1, 0.2, Integrator::Bdf2), &u0.values, None).unwrap();
        traj.space = Some(SpaceSpec::unit_square(2, 2));
        traj.label = "decay".into();
        let dir = tempfile::tempdir().unwrap();
        traj.write(dir.path()).unwrap();
        assert_eq!(Trajectory::read(dir.path()).unwrap(), traj);
        std::fs::remove_file(dir.path().join("u_00001.bin")).unwrap();
        assert!(Trajectory::read(dir.path()).is_err());
    }
}
