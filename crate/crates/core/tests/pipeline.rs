use podlab::config::{MeshConfig, RunConfig};
use podlab::diagnostics::{compute_error_norms, NormSelection};
use podlab::fom::{Integrator, Trajectory};
use podlab::manufactured::Problem;
use podlab::pod::{compute_pod_basis, InnerProduct, PodBasis, PodOptions};
use podlab::rom::{run_rom, RomConfig};
use podlab::snapshots::{build_snapshot_set, SnapshotVariant};
use podlab::study::Setup;

fn config(problem: Problem, integrator: Integrator) -> RunConfig {
    RunConfig {
        problem,
        mesh: MeshConfig { nx: 6, ny: 6, levels: 1, ..MeshConfig::default() },
        dt: 0.02,
        t_final: 0.4,
        integrator,
        ..RunConfig::default()
    }
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[test]
fn galerkin_derivative_matches_the_integrator_difference() {
    for integrator in [Integrator::ImplicitEuler, Integrator::Bdf2] {
        let cfg = config(Problem::MultiVortex, integrator);
        let setup = Setup::new(&cfg, 0).unwrap();
        let traj = setup.run_fom().unwrap();
        let (d, dt, u) = (&setup.disc, traj.dt(), &traj.velocities);
        for n in 2..u.len() {
            let diff: Vec<f64> = match integrator {
                Integrator::ImplicitEuler => sub(&u[n].values, &u[n - 1].values).iter().map(|v| v / dt).collect(),
                Integrator::Bdf2 => (0..u[n].len())
                    .map(|i| (3.0 * u[n].values[i] - 4.0 * u[n - 1].values[i] + u[n - 2].values[i]) / (2.0 * dt))
                    .collect(),
            };
            let gap = d.l2_norm(&sub(&traj.derivatives[n].values, &diff));
            assert!(gap <= 1e-7 * d.l2_norm(&diff), "{integrator:?} step {n}: {gap:e}");
        }
    }
}

#[test]
fn galerkin_derivative_approximates_the_analytic_one() {
    let cfg = RunConfig { mesh: MeshConfig { nx: 12, ny: 12, levels: 1, ..MeshConfig::default() }, ..config(Problem::TaylorGreen, Integrator::Bdf2) };
    let setup = Setup::new(&cfg, 0).unwrap();
    let traj = setup.run_fom().unwrap();
    let exact = cfg.problem.exact().unwrap();
    let j = traj.times.len() - 1;
    let t = traj.times[j];
    let reference = setup.disc.interpolate(|x, t| exact.time_derivative(x, t), t);
    let err = setup.disc.l2_norm(&sub(&traj.derivatives[j].values, &reference.values));
    assert!(err < 2e-2 * setup.disc.l2_norm(&reference.values), "{err:e}");
}

#[test]
fn stored_artifacts_reproduce_the_in_memory_pipeline() {
    let cfg = config(Problem::MultiVortex, Integrator::Bdf2);
    let setup = Setup::new(&cfg, 0).unwrap();
    let traj = setup.run_fom().unwrap();
    let dir = tempfile::tempdir().unwrap();
    traj.write(&dir.path().join("traj")).unwrap();
    let back = Trajectory::read(&dir.path().join("traj")).unwrap();
    assert_eq!(back.velocities, traj.velocities);
    assert_eq!(back.derivatives, traj.derivatives);

    let disc = &setup.disc;
    let set = build_snapshot_set(&back, SnapshotVariant::InitialPlusDerivatives, cfg.tau()).unwrap();
    let basis = compute_pod_basis(&set, disc, InnerProduct::H1, PodOptions::rank(5)).unwrap();
    basis.write(&dir.path().join("basis")).unwrap();
    let stored = PodBasis::read(&dir.path().join("basis")).unwrap();

    let rom_cfg = RomConfig::from(&traj.config);
    let forcing = || Some(Box::new(cfg.problem.forcing(cfg.nu)) as podlab::fom::Forcing<'static>);
    let a = run_rom(&basis, disc, &rom_cfg, &traj.velocities[0].values, forcing()).unwrap();
    let b = run_rom(&stored, disc, &rom_cfg, &traj.velocities[0].values, forcing()).unwrap();
    assert_eq!(a.coords, b.coords);

    let rep = compute_error_norms(&traj.velocities, &a.lift(&basis), disc, NormSelection::Both).unwrap();
    assert!(rep.l2.unwrap().max_relative() < 0.2);
}
