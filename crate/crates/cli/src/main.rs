use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use podlab::config::RunConfig;
use podlab::diagnostics::{
    compute_error_norms, constants_report, write_rates_csv, write_report_csv, write_singular_values_csv, NormSelection,
    RateLevel,
};
use podlab::fe_space::FeFunction;
use podlab::fom::{Integrator, Trajectory};
use podlab::manufactured::Problem;
use podlab::pod::{compute_pod_basis, InnerProduct, PodBasis};
use podlab::rom::{run_rom, RomConfig};
use podlab::snapshots::{build_snapshot_set, temporal_mean, SnapshotVariant};
use podlab::study::{self, Setup};
use podlab::Error;

const OUTPUT_ROOT_ENV: &str = "PODLAB_OUTPUT_ROOT";

#[derive(Parser)]
#[command(name = "podlab", version, about = "Navier-Stokes snapshots, POD bases and reduced-order models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full-order solves.
    Fom {
        #[command(subcommand)]
        action: FomAction,
    },
    /// POD basis construction.
    Pod {
        #[command(subcommand)]
        action: PodAction,
    },
    /// Reduced-order solves.
    Rom {
        #[command(subcommand)]
        action: RomAction,
    },
    /// Multi-run studies.
    Study {
        #[command(subcommand)]
        action: StudyAction,
    },
    /// Numerical checks on a trajectory and its basis.
    Check {
        #[command(subcommand)]
        action: CheckAction,
    },
    /// Summarize the CSV reports under a directory.
    Report {
        /// Directory to scan (defaults to the output root).
        #[arg(long)]
        dir: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum FomAction {
    /// Solve and write a trajectory directory.
    Run(Common),
}

#[derive(Subcommand)]
enum PodAction {
    /// Build a basis from a stored trajectory.
    Build {
        #[arg(long)]
        traj: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum RomAction {
    /// Integrate the reduced model on a stored basis.
    Run {
        #[arg(long)]
        basis: PathBuf,
        /// Full-order trajectory supplying the initial state and the reference for errors.
        #[arg(long)]
        traj: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ConvergenceKind {
    Space,
    Time,
    Both,
}

#[derive(Subcommand)]
enum StudyAction {
    /// Spatial and temporal convergence rates.
    Convergence {
        #[arg(long, value_enum, default_value = "both")]
        kind: ConvergenceKind,
        /// Time steps of the temporal study (default: dt, dt/2, dt/4).
        #[arg(long, value_delimiter = ',')]
        dts: Vec<f64>,
        /// Step of the temporal reference run (default: smallest step / 8).
        #[arg(long)]
        reference_dt: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Compare snapshot sets in both inner products.
    CompareSets {
        /// Ranks to evaluate (default: the common threshold rank).
        #[arg(long, value_delimiter = ',')]
        ranks: Vec<usize>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum CheckAction {
    /// Tail identity, orthonormality, inverse inequalities, pointwise bounds
    /// and divergence; writes report.csv and constants.json.
    Invariants {
        /// Stored trajectory (solved from the configuration when absent).
        #[arg(long)]
        traj: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

/// Configuration file plus overrides; flags win over the file.
#[derive(Args, Clone, Default)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: config, then $PODLAB_OUTPUT_ROOT, then ./output).
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    problem: Option<Problem>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    degree: Option<usize>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long = "t-final")]
    t_final: Option<f64>,
    #[arg(long)]
    integrator: Option<Integrator>,
    #[arg(long)]
    variant: Option<SnapshotVariant>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long = "x")]
    inner_product: Option<InnerProduct>,
    #[arg(long = "r")]
    rank: Option<usize>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn resolve(&self) -> Result<(RunConfig, PathBuf)> {
        let mut c = match &self.config {
            Some(p) => RunConfig::from_json_file(p).with_context(|| format!("reading config {}", p.display()))?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($src:ident => $($dst:ident).+),* $(,)?) => {
                $(if let Some(v) = self.$src.clone() { c.$($dst).+ = v; })*
            };
        }
        set!(problem => problem, nx => mesh.nx, ny => mesh.ny, levels => mesh.levels, degree => degree, nu => nu, mu => mu,
             dt => dt, t_final => t_final, integrator => integrator, variant => variant, inner_product => inner_product, seed => seed);
        if self.tau.is_some() {
            c.tau = self.tau;
        }
        if self.rank.is_some() {
            c.rank = self.rank;
        }
        if self.threshold.is_some() {
            c.threshold = self.threshold;
        }
        if self.output.is_some() {
            c.output = self.output.clone();
        }
        c.validate()?;
        let out = c
            .output
            .clone()
            .or_else(|| std::env::var_os(OUTPUT_ROOT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("output"));
        std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
        Ok((c, out))
    }
}

fn save_config(cfg: &RunConfig, out: &Path) -> Result<()> {
    std::fs::write(out.join("config.json"), cfg.to_json()?)?;
    Ok(())
}

fn fom_run(common: &Common) -> Result<()> {
    let (cfg, out) = common.resolve()?;
    let setup = Setup::new(&cfg, 0)?;
    let traj = setup.run_fom().context("full-order solve")?;
    let dir = out.join("trajectory");
    traj.write(&dir)?;
    save_config(&cfg, &out)?;
    println!("wrote {} states to {}", traj.velocities.len(), dir.display());
    Ok(())
}

/// Offset used with sets whose span need not contain the states.
fn offset_for(variant: SnapshotVariant, traj: &Trajectory) -> Option<FeFunction> {
    matches!(variant, SnapshotVariant::Fluctuations | SnapshotVariant::DifferenceQuotients).then(|| temporal_mean(&traj.velocities))
}

fn pod_build(traj_dir: &Path, common: &Common) -> Result<()> {
    let (cfg, out) = common.resolve()?;
    let traj = Trajectory::read(traj_dir).with_context(|| format!("reading trajectory {}", traj_dir.display()))?;
    let spec = traj.space.context("trajectory does not record its finite element space")?;
    let disc = podlab::assembly::Discretization::from_spec(&spec)?;
    let set = build_snapshot_set(&traj, cfg.variant, cfg.tau())?;
    let basis = compute_pod_basis(&set, &disc, cfg.inner_product, cfg.pod_options())?.with_offset(offset_for(cfg.variant, &traj));
    let dir = out.join("basis");
    basis.write(&dir)?;
    write_singular_values_csv(&out.join("singular_values.csv"), &basis)?;
    save_config(&cfg, &out)?;
    println!("wrote basis with r = {} (d_v = {}) to {}", basis.r, basis.d_v, dir.display());
    Ok(())
}

fn rom_cmd(basis_dir: &Path, traj_dir: Option<&Path>, common: &Common) -> Result<()> {
    let (cfg, out) = common.resolve()?;
    let basis = PodBasis::read(basis_dir).with_context(|| format!("reading basis {}", basis_dir.display()))?;
    let spec = basis.space.context("basis does not record its finite element space")?;
    let disc = podlab::assembly::Discretization::from_spec(&spec)?;
    let traj = traj_dir.map(|d| Trajectory::read(d).with_context(|| format!("reading trajectory {}", d.display()))).transpose()?;
    let (rom_cfg, u0) = match &traj {
        Some(t) => (RomConfig::from(&t.config), t.velocities[0].values.clone()),
        None => {
            let p = cfg.problem;
            (RomConfig::from(&cfg.fom_config()), disc.interpolate(|x, _| p.initial_velocity(x), 0.0).values)
        }
    };
    let forcing = cfg.problem.has_forcing().then(|| Box::new(cfg.problem.forcing(rom_cfg.nu)) as podlab::fom::Forcing<'_>);
    let run = run_rom(&basis, &disc, &rom_cfg, &u0, forcing).context("reduced-order solve")?;
    run.write_csv(&out.join("rom_coefficients.csv"))?;
    if let Some(t) = &traj {
        if t.velocities.len() != run.coords.len() {
            bail!("trajectory has {} states, reduced run {}", t.velocities.len(), run.coords.len());
        }
        let rep = compute_error_norms(&t.velocities, &run.lift(&basis), &disc, NormSelection::Both)?;
        let (l2, h1) = (rep.l2.unwrap(), rep.h1.unwrap());
        let mut text = String::from("j,t,error_L2,error_H1\n");
        for (j, time) in run.times.iter().enumerate() {
            text.push_str(&format!("{j},{time:.16e},{:.16e},{:.16e}\n", l2.relative[j], h1.relative[j]));
        }
        std::fs::write(out.join("rom_errors.csv"), text)?;
        println!("max relative error: L2 {:.6e}, H1 {:.6e}", l2.max_relative(), h1.max_relative());
    }
    save_config(&cfg, &out)?;
    println!("wrote {} reduced states to {}", run.coords.len(), out.display());
    Ok(())
}

fn convergence(kind: ConvergenceKind, dts: &[f64], reference_dt: Option<f64>, common: &Common) -> Result<()> {
    let (cfg, out) = common.resolve()?;
    let print = |name: &str, levels: &[RateLevel]| {
        println!("{name}:");
        for l in levels {
            println!("  {:>10.4e}  L2 {:.6e}  H1 {:.6e}", l.h_or_dt, l.error_l2, l.error_h1);
        }
    };
    if matches!(kind, ConvergenceKind::Space | ConvergenceKind::Both) {
        let levels = study::spatial_convergence(&cfg)?;
        write_rates_csv(&out.join("rates_space.csv"), &levels)?;
        print("space", &levels);
    }
    if matches!(kind, ConvergenceKind::Time | ConvergenceKind::Both) {
        let dts = if dts.is_empty() { vec![cfg.dt, cfg.dt / 2.0, cfg.dt / 4.0] } else { dts.to_vec() };
        let smallest = dts.iter().copied().fold(f64::INFINITY, f64::min);
        let levels = study::temporal_convergence(&cfg, 0, &dts, reference_dt.unwrap_or(smallest / 8.0))?;
        write_rates_csv(&out.join("rates_time.csv"), &levels)?;
        print("time", &levels);
    }
    save_config(&cfg, &out)?;
    Ok(())
}

fn compare_sets(ranks: &[usize], common: &Common) -> Result<()> {
    let (cfg, out) = common.resolve()?;
    let dir = out.join("compare_sets");
    std::fs::create_dir_all(&dir)?;
    let cs = study::compare_sets(&cfg, ranks, Some(&dir))?;
    save_config(&cfg, &out)?;
    for r in &cs.results {
        println!(
            "{:>2} {:<30} d_v {:>3}  r {:>2}  ROM L2 {:.4e}  H1 {:.4e}",
            r.inner_product.as_str(),
            r.case.as_str(),
            r.d_v,
            r.r,
            r.max_rom_l2(),
            r.max_rom_h1()
        );
    }
    println!("wrote {}", dir.display());
    Ok(())
}

fn invariants(traj_dir: Option<&Path>, common: &Common) -> Result<bool> {
    let (cfg, out) = common.resolve()?;
    let (traj, disc) = match traj_dir {
        Some(d) => {
            let traj = Trajectory::read(d).with_context(|| format!("reading trajectory {}", d.display()))?;
            let spec = traj.space.context("trajectory does not record its finite element space")?;
            (traj, podlab::assembly::Discretization::from_spec(&spec)?)
        }
        None => {
            let setup = Setup::new(&cfg, 0)?;
            (setup.run_fom()?, setup.disc)
        }
    };
    let (basis, rows) = study::invariant_report(&cfg, &traj, &disc)?;
    write_report_csv(&out.join("report.csv"), &rows)?;
    let constants = constants_report(&traj, &basis, &disc, traj.config.mu)?;
    std::fs::write(out.join("constants.json"), serde_json::to_string_pretty(&constants)?)?;
    save_config(&cfg, &out)?;
    let failed: Vec<_> = rows.iter().filter(|r| !r.pass).collect();
    println!("{} checks, {} failed", rows.len(), failed.len());
    for r in &failed {
        println!("  FAIL {} (index {}): lhs {:.6e} rhs {:.6e}", r.check_id, r.time_index, r.lhs, r.rhs);
    }
    Ok(failed.is_empty())
}

fn find_csvs(dir: &Path, name: &str, found: &mut Vec<PathBuf>) -> Result<()> {
    let mut entries: Vec<_> = std::fs::read_dir(dir)?.collect::<std::io::Result<_>>()?;
    entries.sort_by_key(|e| e.path());
    for e in entries {
        let p = e.path();
        if p.is_dir() {
            find_csvs(&p, name, found)?;
        } else if p.file_name().is_some_and(|n| n == name) {
            found.push(p);
        }
    }
    Ok(())
}

fn report(dir: Option<&Path>) -> Result<()> {
    let root = match dir {
        Some(d) => d.to_path_buf(),
        None => std::env::var_os(OUTPUT_ROOT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("output")),
    };
    if !root.is_dir() {
        bail!("{} is not a directory", root.display());
    }
    let mut reports = Vec::new();
    find_csvs(&root, "report.csv", &mut reports)?;
    for p in &reports {
        let text = std::fs::read_to_string(p)?;
        let mut lines = text.lines();
        if lines.next() != Some("check_id,time_index,lhs,rhs,margin,pass") {
            bail!("{}: unexpected header", p.display());
        }
        let (mut total, mut failed) = (0, 0);
        for line in lines {
            total += 1;
            failed += usize::from(line.rsplit(',').next() != Some("true"));
        }
        println!("{}: {total} checks, {failed} failed", p.display());
    }
    let mut summaries = Vec::new();
    find_csvs(&root, "summary.csv", &mut summaries)?;
    for p in &summaries {
        println!("{}:", p.display());
        for line in std::fs::read_to_string(p)?.lines() {
            println!("  {}", line.replace(',', "  "));
        }
    }
    if reports.is_empty() && summaries.is_empty() {
        bail!("no report.csv or summary.csv under {}", root.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Fom { action: FomAction::Run(c) } => fom_run(&c)?,
        Command::Pod { action: PodAction::Build { traj, common } } => pod_build(&traj, &common)?,
        Command::Rom { action: RomAction::Run { basis, traj, common } } => rom_cmd(&basis, traj.as_deref(), &common)?,
        Command::Study { action: StudyAction::Convergence { kind, dts, reference_dt, common } } => {
            convergence(kind, &dts, reference_dt, &common)?
        }
        Command::Study { action: StudyAction::CompareSets { ranks, common } } => compare_sets(&ranks, &common)?,
        Command::Check { action: CheckAction::Invariants { traj, common } } => return invariants(traj.as_deref(), &common),
        Command::Report { dir } => report(dir.as_deref())?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    podlab::linsolve::use_single_thread();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            let numerical = e.chain().any(|c| c.downcast_ref::<Error>().is_some_and(Error::is_numerical));
            ExitCode::from(if numerical { 2 } else { 1 })
        }
    }
}
