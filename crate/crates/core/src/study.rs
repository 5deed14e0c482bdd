//! Multi-run pipelines: convergence studies, snapshot-set comparison and
//! invariant reports.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::assembly::Discretization;
use crate::config::RunConfig;
use crate::diagnostics::{
    compute_error_norms, pointwise_bound_check, project_series, projection_error_trajectory, tail_consistency_check,
    write_singular_values_csv, Anchor, ErrorReport, NormSelection, RateLevel, ReportRow,
};
use crate::error::{Error, Result};
use crate::fe_space::FeFunction;
use crate::fom::{FomConfig, FomSolver, Forcing, Trajectory};
use crate::pod::{compute_pod_basis, pod_gram_matrices, projection_error_curve, InnerProduct, PodBasis, PodOptions};
use crate::rom::{build_rom_operators, initial_coords, reduced_load, RomConfig, RomSolver};
use crate::snapshots::{build_snapshot_set, temporal_mean, SnapshotSet, SnapshotVariant};

/// A configuration bound to one mesh level.
pub struct Setup {
    pub cfg: RunConfig,
    pub level: usize,
    pub disc: Discretization,
}

impl Setup {
    pub fn new(cfg: &RunConfig, level: usize) -> Result<Self> {
        cfg.validate()?;
        let disc = Discretization::from_spec(&cfg.space_spec(level))?;
        Ok(Setup { cfg: cfg.clone(), level, disc })
    }

    pub fn forcing(&self) -> Option<Forcing<'static>> {
        self.cfg.problem.has_forcing().then(|| Box::new(self.cfg.problem.forcing(self.cfg.nu)) as Forcing<'static>)
    }

    /// Nodal interpolant of the initial velocity (before projection).
    pub fn initial_velocity(&self) -> Vec<f64> {
        let p = self.cfg.problem;
        self.disc.interpolate(|x, _| p.initial_velocity(x), 0.0).values
    }

    pub fn solver(&self, fom: FomConfig) -> Result<FomSolver<'_>> {
        FomSolver::new(&self.disc, fom, self.forcing())
    }

    pub fn run_fom(&self) -> Result<Trajectory> {
        let mut traj = self.solver(self.cfg.fom_config())?.run(&self.initial_velocity())?;
        traj.space = Some(self.cfg.space_spec(self.level));
        traj.label = format!("{}-n{}", self.cfg.problem.as_str(), self.cfg.space_spec(self.level).nx);
        Ok(traj)
    }
}

/// Final-time errors against the analytic solution on `levels` successively
/// refined meshes. `h_or_dt` is the grid spacing `1/nx` scaled to the domain.
pub fn spatial_convergence(cfg: &RunConfig) -> Result<Vec<RateLevel>> {
    let exact = cfg
        .problem
        .exact()
        .ok_or_else(|| Error::InvalidInput(format!("problem {} has no analytic solution", cfg.problem.as_str())))?;
    let t = cfg.t_final;
    (0..cfg.mesh.levels)
        .map(|level| {
            let setup = Setup::new(cfg, level)?;
            let u = setup.solver(cfg.fom_config())?.integrate(&setup.initial_velocity(), |_, _, _| {})?;
            let (l2, h1) = setup.disc.error_against(&u, |x| (exact.velocity(x, t), exact.gradient(x, t)));
            let spec = cfg.space_spec(level);
            Ok(RateLevel { level, h_or_dt: (spec.rect.x1 - spec.rect.x0) / spec.nx as f64, error_l2: l2, error_h1: h1 })
        })
        .collect()
}

fn check_nested(dts: &[f64], reference_dt: f64, t_final: f64) -> Result<Vec<usize>> {
    let coarse = dts.iter().copied().fold(0.0, f64::max);
    let ratio = |a: f64, b: f64| {
        let q = (a / b).round();
        ((q * b - a).abs() <= 1e-9 * a && q >= 1.0).then_some(q as usize)
    };
    if ratio(t_final, coarse).is_none() {
        return Err(Error::InvalidInput(format!("final time {t_final} is not a multiple of {coarse}")));
    }
    dts.iter()
        .chain(std::iter::once(&reference_dt))
        .map(|&dt| ratio(coarse, dt).ok_or_else(|| Error::InvalidInput(format!("step {dt} does not divide {coarse}"))))
        .collect()
}

/// Max-in-time errors on the coarsest grid against a run with
/// `reference_dt`, on a fixed mesh (`level`).
pub fn temporal_convergence(cfg: &RunConfig, level: usize, dts: &[f64], reference_dt: f64) -> Result<Vec<RateLevel>> {
    let strides = check_nested(dts, reference_dt, cfg.t_final)?;
    let setup = Setup::new(cfg, level)?;
    let u0 = setup.initial_velocity();
    let sample = |dt: f64, stride: usize| -> Result<Vec<Vec<f64>>> {
        let fom = FomConfig { dt, ..cfg.fom_config() };
        let mut states = Vec::new();
        setup.solver(fom)?.integrate(&u0, |j, _, u| {
            if j % stride == 0 {
                states.push(u.to_vec());
            }
        })?;
        Ok(states)
    };
    let reference = sample(reference_dt, *strides.last().unwrap())?;
    let d = &setup.disc;
    dts.iter()
        .zip(&strides)
        .enumerate()
        .map(|(level, (&dt, &stride))| {
            let states = sample(dt, stride)?;
            let (mut l2, mut h1) = (0.0f64, 0.0f64);
            for (a, b) in states.iter().zip(&reference) {
                let e: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
                l2 = l2.max(d.l2_norm(&e));
                h1 = h1.max(d.h1_seminorm(&e));
            }
            Ok(RateLevel { level, h_or_dt: dt, error_l2: l2, error_h1: h1 })
        })
        .collect()
}

/// Same study for the reduced model on a fixed basis.
pub fn rom_temporal_convergence(
    cfg: &RunConfig,
    disc: &Discretization,
    basis: &PodBasis,
    dts: &[f64],
    reference_dt: f64,
) -> Result<Vec<RateLevel>> {
    let strides = check_nested(dts, reference_dt, cfg.t_final)?;
    let ops = build_rom_operators(basis, disc)?;
    let u0 = disc.interpolate(|x, _| cfg.problem.initial_velocity(x), 0.0);
    let a0 = initial_coords(basis, disc, &u0.values);
    let sample = |dt: f64, stride: usize| -> Result<Vec<Vec<f64>>> {
        let rc = RomConfig { dt, ..RomConfig::from(&cfg.fom_config()) };
        let load = cfg.problem.has_forcing().then(|| reduced_load(disc, basis, Box::new(cfg.problem.forcing(cfg.nu))));
        let run = RomSolver::new(&ops, rc, load)?.run(&a0)?;
        Ok(run.coords.into_iter().step_by(stride).collect())
    };
    let reference = sample(reference_dt, *strides.last().unwrap())?;
    let quad = |m: &faer::Mat<f64>, e: &[f64]| {
        let r = e.len();
        (0..r).map(|i| (0..r).map(|j| e[i] * m[(i, j)] * e[j]).sum::<f64>()).sum::<f64>().max(0.0).sqrt()
    };
    dts.iter()
        .zip(&strides)
        .enumerate()
        .map(|(level, (&dt, &stride))| {
            let states = sample(dt, stride)?;
            let (mut l2, mut h1) = (0.0f64, 0.0f64);
            for (a, b) in states.iter().zip(&reference) {
                let e: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
                l2 = l2.max(quad(&ops.mass, &e));
                h1 = h1.max(quad(&ops.stiffness, &e));
            }
            Ok(RateLevel { level, h_or_dt: dt, error_l2: l2, error_h1: h1 })
        })
        .collect()
}

/// Snapshot data sets compared against each other.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SetCase {
    /// Velocity fluctuations, reduced model offset by the mean.
    Fluctuations,
    /// `{√N (u⁰ − ū), τ u_t^j}`, offset by the mean.
    GalerkinDerivatives,
    /// `{√N ū, τ u_t^j}` built from the fluctuations (zero anchor), offset by the mean.
    MeanDerivativesOfFluctuations,
    /// `{τ (u^j − u^{j−1})/Δt}`, offset by the mean.
    DifferenceQuotients,
}

impl SetCase {
    pub const ALL: [SetCase; 4] =
        [SetCase::Fluctuations, SetCase::GalerkinDerivatives, SetCase::MeanDerivativesOfFluctuations, SetCase::DifferenceQuotients];

    pub fn as_str(&self) -> &'static str {
        match self {
            SetCase::Fluctuations => "fluctuations",
            SetCase::GalerkinDerivatives => "galerkin_derivatives",
            SetCase::MeanDerivativesOfFluctuations => "mean_derivatives_fluctuations",
            SetCase::DifferenceQuotients => "difference_quotients",
        }
    }

    pub fn uses_derivatives(&self) -> bool {
        *self != SetCase::Fluctuations
    }

    /// Snapshot set and the offset the reduced model uses with it.
    pub fn build(&self, traj: &Trajectory, tau: f64) -> Result<(SnapshotSet, Option<FeFunction>)> {
        let mean = || Some(temporal_mean(&traj.velocities));
        Ok(match self {
            SetCase::Fluctuations => (build_snapshot_set(traj, SnapshotVariant::Fluctuations, tau)?, mean()),
            SetCase::GalerkinDerivatives => {
                (build_snapshot_set(&traj.fluctuations(), SnapshotVariant::InitialPlusDerivatives, tau)?, mean())
            }
            SetCase::MeanDerivativesOfFluctuations => {
                (build_snapshot_set(&traj.fluctuations(), SnapshotVariant::MeanPlusDerivatives, tau)?, mean())
            }
            SetCase::DifferenceQuotients => (build_snapshot_set(traj, SnapshotVariant::DifferenceQuotients, tau)?, mean()),
        })
    }
}

/// Outcome for one `(X, set, r)` combination.
#[derive(Clone, Debug, Serialize)]
pub struct CaseResult {
    pub inner_product: InnerProduct,
    pub case: SetCase,
    pub d_v: usize,
    pub r: usize,
    pub tail: f64,
    pub projection: ErrorReport,
    pub rom: ErrorReport,
    /// `Σ_{j≥1} Δt ‖u_r^j − u_h^j‖₀²`
    pub rom_accumulated_l2: f64,
}

impl CaseResult {
    pub fn max_rom_l2(&self) -> f64 {
        self.rom.l2.as_ref().map_or(f64::NAN, |s| s.max_relative())
    }

    pub fn max_rom_h1(&self) -> f64 {
        self.rom.h1.as_ref().map_or(f64::NAN, |s| s.max_relative())
    }
}

/// Full-rank bases of one case.
pub struct CaseBasis {
    pub inner_product: InnerProduct,
    pub case: SetCase,
    pub basis: PodBasis,
}

pub fn case_bases(traj: &Trajectory, disc: &Discretization, tau: f64, xs: &[InnerProduct]) -> Result<Vec<CaseBasis>> {
    let mut out = Vec::new();
    for &x in xs {
        for case in SetCase::ALL {
            let (set, offset) = case.build(traj, tau)?;
            let basis = compute_pod_basis(&set, disc, x, PodOptions::full())?.with_offset(offset);
            out.push(CaseBasis { inner_product: x, case, basis });
        }
    }
    Ok(out)
}

/// Projection and reduced-model errors relative to the full-order
/// velocities, for the leading `r` modes of `basis`.
pub fn evaluate_case(
    cfg: &RunConfig,
    traj: &Trajectory,
    disc: &Discretization,
    cb: &CaseBasis,
    r: usize,
) -> Result<CaseResult> {
    let basis = cb.basis.truncate(r)?;
    let projection = compute_error_norms(&traj.velocities, &project_series(&basis, disc, &traj.velocities), disc, NormSelection::Both)?;
    let ops = build_rom_operators(&basis, disc)?;
    let load = cfg.problem.has_forcing().then(|| reduced_load(disc, &basis, Box::new(cfg.problem.forcing(cfg.nu))));
    let rom_cfg = RomConfig::from(&traj.config);
    let run = RomSolver::new(&ops, rom_cfg, load)?.run(&initial_coords(&basis, disc, &traj.velocities[0].values))?;
    let rom = compute_error_norms(&traj.velocities, &run.lift(&basis), disc, NormSelection::Both)?;
    let rom_accumulated_l2 = rom.l2.as_ref().unwrap().accumulated(traj.dt());
    Ok(CaseResult {
        inner_product: cb.inner_product,
        case: cb.case,
        d_v: cb.basis.d_v,
        r,
        tail: cb.basis.tail(r),
        projection,
        rom,
        rom_accumulated_l2,
    })
}

/// Largest rank every case supports whose relative singular values all
/// pass the threshold of `x`.
pub fn common_threshold_rank(bases: &[CaseBasis], x: InnerProduct, threshold: f64) -> usize {
    bases
        .iter()
        .filter(|b| b.inner_product == x)
        .map(|b| b.basis.relative_singular_values().iter().take(b.basis.d_v).take_while(|&&s| s >= threshold).count().max(1))
        .min()
        .unwrap_or(1)
}

pub struct CompareSets {
    pub trajectory: Trajectory,
    pub bases: Vec<CaseBasis>,
    pub results: Vec<CaseResult>,
}

fn write_error_rows(w: &mut impl Write, r: usize, times: &[f64], rep: &ErrorReport) -> Result<()> {
    let (l2, h1) = (rep.l2.as_ref().unwrap(), rep.h1.as_ref().unwrap());
    for (j, t) in times.iter().enumerate() {
        writeln!(w, "{r},{j},{t:.16e},{:.16e},{:.16e}", l2.relative[j], h1.relative[j])?;
    }
    Ok(())
}

/// Runs the full-order model once, builds every snapshot set in both inner
/// products and evaluates projection and reduced-model errors at each rank
/// in `ranks` (or at the common threshold rank when `ranks` is empty).
/// With `out`, writes one directory per `(X, set)` holding
/// `singular_values.csv`, `projection_errors.csv` and `rom_errors.csv`, and
/// a `summary.csv` at the top.
pub fn compare_sets(cfg: &RunConfig, ranks: &[usize], out: Option<&Path>) -> Result<CompareSets> {
    let setup = Setup::new(cfg, 0)?;
    let traj = setup.run_fom()?;
    let disc = &setup.disc;
    let bases = case_bases(&traj, disc, cfg.tau(), &[InnerProduct::L2, InnerProduct::H1])?;
    let mut results = Vec::new();
    for x in [InnerProduct::L2, InnerProduct::H1] {
        let ranks_x: Vec<usize> = if ranks.is_empty() {
            vec![cfg.rank.unwrap_or_else(|| common_threshold_rank(&bases, x, cfg.threshold.unwrap_or(x.default_threshold())))]
        } else {
            ranks.to_vec()
        };
        for cb in bases.iter().filter(|b| b.inner_product == x) {
            let dir = out.map(|o| o.join(x.as_str()).join(cb.case.as_str()));
            let mut writers = None;
            if let Some(dir) = &dir {
                std::fs::create_dir_all(dir)?;
                write_singular_values_csv(&dir.join("singular_values.csv"), &cb.basis)?;
                let mut p = std::io::BufWriter::new(std::fs::File::create(dir.join("projection_errors.csv"))?);
                let mut q = std::io::BufWriter::new(std::fs::File::create(dir.join("rom_errors.csv"))?);
                writeln!(p, "r,j,t,error_L2,error_H1")?;
                writeln!(q, "r,j,t,error_L2,error_H1")?;
                writers = Some((p, q));
            }
            for &r in ranks_x.iter().filter(|&&r| r <= cb.basis.d_v) {
                let res = evaluate_case(cfg, &traj, disc, cb, r)?;
                if let Some((p, q)) = writers.as_mut() {
                    write_error_rows(p, r, &traj.times, &res.projection)?;
                    write_error_rows(q, r, &traj.times, &res.rom)?;
                }
                results.push(res);
            }
            if let Some((mut p, mut q)) = writers {
                p.flush()?;
                q.flush()?;
            }
        }
    }
    if let Some(o) = out {
        let mut w = std::io::BufWriter::new(std::fs::File::create(o.join("summary.csv"))?);
        writeln!(w, "x,set,d_v,r,tail,max_projection_L2,max_projection_H1,max_rom_L2,max_rom_H1,rom_accumulated_L2")?;
        for res in &results {
            let p = &res.projection;
            writeln!(
                w,
                "{},{},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                res.inner_product.as_str(),
                res.case.as_str(),
                res.d_v,
                res.r,
                res.tail,
                p.l2.as_ref().unwrap().max_relative(),
                p.h1.as_ref().unwrap().max_relative(),
                res.max_rom_l2(),
                res.max_rom_h1(),
                res.rom_accumulated_l2
            )?;
        }
        w.flush()?;
    }
    Ok(CompareSets { trajectory: traj, bases, results })
}

/// Mean-square projection error against the eigenvalue tail for every
/// `r = 1..d_v`; differences are measured relative to the trace.
pub fn tail_identity_rows(set: &SnapshotSet, basis: &PodBasis, disc: &Discretization, tol: f64) -> Vec<ReportRow> {
    let full = basis.truncate(basis.d_v.min(basis.r)).expect("basis has at least one mode");
    let curve = projection_error_curve(set, &full, disc);
    let trace = basis.trace();
    curve
        .iter()
        .enumerate()
        .map(|(k, &lhs)| {
            let rhs = basis.tail(k + 1);
            let margin = tol * trace - (lhs - rhs).abs();
            ReportRow { check_id: format!("tail_identity_r{}", k + 1), time_index: 0, lhs, rhs, margin, pass: margin >= 0.0 }
        })
        .collect()
}

/// `max |(φ_i, φ_j)_X − δ_ij|` against `tol`.
pub fn orthonormality_row(basis: &PodBasis, tol: f64) -> ReportRow {
    let g = match basis.inner_product {
        InnerProduct::L2 => &basis.mass_gram,
        InnerProduct::H1 => &basis.stiffness_gram,
    };
    let mut lhs = 0.0f64;
    for (i, row) in g.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            lhs = lhs.max((v - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    ReportRow { check_id: "orthonormality".into(), time_index: 0, lhs, rhs: tol, margin: tol - lhs, pass: lhs < tol }
}

/// Largest `‖∇v‖₀²/‖v‖₀²` over `samples` random members of the span against
/// `‖S^v‖₂` when `X = L²` and `‖(M^v)^{-1}‖₂` when `X = H¹₀`.
pub fn inverse_inequality_row(basis: &PodBasis, disc: &Discretization, samples: usize, seed: u64) -> Result<ReportRow> {
    use rand::{Rng, SeedableRng};
    let rep = pod_gram_matrices(basis)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut lhs = 0.0f64;
    for _ in 0..samples {
        let a: Vec<f64> = (0..basis.r).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v = basis.combine(&a);
        lhs = lhs.max(disc.forms.stiffness.bilinear(&v, &v) / disc.forms.mass.bilinear(&v, &v));
    }
    let (id, rhs) = match basis.inner_product {
        InnerProduct::L2 => ("inverse_inequality_stiffness", rep.stiffness_norm),
        InnerProduct::H1 => ("inverse_inequality_inverse_mass", rep.inv_mass_norm),
    };
    Ok(ReportRow { check_id: id.into(), time_index: 0, lhs, rhs, margin: rhs - lhs, pass: lhs <= rhs })
}

/// Pointwise bounds for `z = P_r u − u` at each rank, both anchors.
pub fn pointwise_rows(traj: &Trajectory, basis: &PodBasis, disc: &Discretization, ranks: &[usize]) -> Result<Vec<ReportRow>> {
    let mut rows = Vec::new();
    let op = basis.inner_product.operator(disc);
    for &r in ranks.iter().filter(|&&r| r <= basis.r) {
        let b = basis.truncate(r)?;
        let (z, zt) = projection_error_trajectory(traj, &b, disc)?;
        for anchor in [Anchor::Initial, Anchor::Mean] {
            let check = pointwise_bound_check(&z, &zt, op, traj.dt(), anchor)?;
            rows.push(check.row(&format!("pointwise_{}_{}_r{r}", anchor.as_str(), basis.inner_product.as_str())));
        }
    }
    Ok(rows)
}

/// Every basis-level check for one trajectory and configuration.
pub fn invariant_report(cfg: &RunConfig, traj: &Trajectory, disc: &Discretization) -> Result<(PodBasis, Vec<ReportRow>)> {
    let set = build_snapshot_set(traj, cfg.variant, cfg.tau())?;
    let full = compute_pod_basis(&set, disc, cfg.inner_product, PodOptions::full())?;
    let mut rows = tail_identity_rows(&set, &full, disc, 1e-8);
    let basis = match cfg.pod_options().truncation {
        crate::pod::Truncation::Rank(r) => full.truncate(r.min(full.d_v))?,
        crate::pod::Truncation::Threshold(_) => compute_pod_basis(&set, disc, cfg.inner_product, cfg.pod_options())?,
    };
    rows.push(orthonormality_row(&basis, 1e-8));
    rows.push(inverse_inequality_row(&basis, disc, 200, cfg.seed)?);
    if traj.n_steps() >= 2 && traj.derivatives.len() == traj.velocities.len() {
        rows.extend(pointwise_rows(traj, &full, disc, &[2, 4, 8])?);
        if cfg.variant == SnapshotVariant::InitialPlusDerivatives {
            let t = tail_consistency_check(traj, &basis, disc)?;
            rows.push(ReportRow { check_id: "tail_consistency".into(), time_index: 0, lhs: t.lhs, rhs: t.rhs, margin: t.margin, pass: t.pass });
        }
    }
    let n = disc.n_velocity() as f64;
    for (j, u) in traj.velocities.iter().enumerate() {
        let bu = disc.forms.div.matvec(&u.values);
        let lhs = bu.iter().map(|v| v * v).sum::<f64>().sqrt();
        let rhs = 1e-8 * (disc.l2_norm(&u.values) * n.sqrt()).max(f64::MIN_POSITIVE);
        rows.push(ReportRow { check_id: "discrete_divergence".into(), time_index: j, lhs, rhs, margin: rhs - lhs, pass: lhs <= rhs });
    }
    Ok((basis, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::MeshConfig;
    use crate::manufactured::Problem;

    fn small() -> RunConfig {
        RunConfig {
            problem: Problem::MultiVortex,
            mesh: MeshConfig { nx: 4, ny: 4, levels: 2, ..MeshConfig::default() },
            dt: 0.05,
            t_final: 0.5,
            ..RunConfig::default()
        }
    }

    #[test]
    fn nested_steps() {
        assert_eq!(check_nested(&[0.1, 0.05], 0.025, 1.0).unwrap(), vec![1, 2, 4]);
        assert!(check_nested(&[0.1, 0.03], 0.01, 1.0).is_err());
        assert!(check_nested(&[0.3], 0.1, 1.0).is_err());
    }

    #[test]
    fn compare_sets_writes_one_curve_per_set() {
        let dir = tempfile::tempdir().unwrap();
        let cs = compare_sets(&small(), &[2, 3], Some(dir.path())).unwrap();
        for x in ["L2", "H1"] {
            for case in SetCase::ALL {
                let sub = dir.path().join(x).join(case.as_str());
                let sv = std::fs::read_to_string(sub.join("singular_values.csv")).unwrap();
                let d_v = cs.bases.iter().find(|b| b.inner_product.as_str() == x && b.case == case).unwrap().basis.d_v;
                assert_eq!(sv.lines().count(), d_v + 1);
                let rom = std::fs::read_to_string(sub.join("rom_errors.csv")).unwrap();
                assert_eq!(rom.lines().count(), 1 + 2 * 11);
            }
        }
        assert_eq!(cs.results.len(), 2 * 4 * 2);
        assert!(cs.results.iter().all(|r| r.max_rom_l2().is_finite()));
    }

    #[test]
    fn invariant_report_passes_on_small_run() {
        let cfg = RunConfig { rank: Some(4), ..small() };
        let setup = Setup::new(&cfg, 0).unwrap();
        let traj = setup.run_fom().unwrap();
        let (basis, rows) = invariant_report(&cfg, &traj, &setup.disc).unwrap();
        assert_eq!(basis.r, 4);
        for row in &rows {
            assert!(row.pass, "{row:?}");
        }
        assert!(rows.iter().any(|r| r.check_id.starts_with("pointwise_mean")));
    }
}
