//! Error norms, inequality checks, a priori constants and rate extraction.
//!
//! Sup-norms are computable surrogates: nodal maxima for velocities and
//! quadrature-point maxima for gradients.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::assembly::Discretization;
use crate::error::{Error, Result};
use crate::fe_space::FeFunction;
use crate::fom::Trajectory;
use crate::pod::PodBasis;
use crate::sparse::SparseOperator;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormSelection {
    L2,
    H1,
    Both,
}

/// Errors of one series against a reference, in one norm.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorSeries {
    pub absolute: Vec<f64>,
    /// `‖b_j − a_j‖ / ‖a_j‖`, or the absolute error where `‖a_j‖ = 0`.
    pub relative: Vec<f64>,
    pub zero_denominator: Vec<bool>,
}

impl ErrorSeries {
    pub fn max_relative(&self) -> f64 {
        self.relative.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_absolute(&self) -> f64 {
        self.absolute.iter().copied().fold(0.0, f64::max)
    }

    /// `Σ_{j≥1} Δt ‖b_j − a_j‖²`
    pub fn accumulated(&self, dt: f64) -> f64 {
        self.absolute.iter().skip(1).map(|e| dt * e * e).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorReport {
    pub l2: Option<ErrorSeries>,
    /// Gradient (`H¹₀` seminorm) errors.
    pub h1: Option<ErrorSeries>,
}

fn norm_in(op: &SparseOperator, v: &[f64]) -> f64 {
    op.bilinear(v, v).max(0.0).sqrt()
}

fn difference(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn series_in(op: &SparseOperator, reference: &[FeFunction], approx: &[FeFunction]) -> ErrorSeries {
    let mut out = ErrorSeries { absolute: Vec::new(), relative: Vec::new(), zero_denominator: Vec::new() };
    for (a, b) in reference.iter().zip(approx) {
        let err = norm_in(op, &difference(&b.values, &a.values));
        let den = norm_in(op, &a.values);
        out.absolute.push(err);
        out.relative.push(if den > 0.0 { err / den } else { err });
        out.zero_denominator.push(den == 0.0);
    }
    out
}

/// Errors of `approx` relative to `reference`, index by index.
pub fn compute_error_norms(
    reference: &[FeFunction],
    approx: &[FeFunction],
    disc: &Discretization,
    which: NormSelection,
) -> Result<ErrorReport> {
    if reference.len() != approx.len() {
        return Err(Error::DimensionMismatch(format!("series lengths {} and {} differ", reference.len(), approx.len())));
    }
    let n = disc.n_velocity();
    if reference.iter().chain(approx).any(|f| f.len() != n) {
        return Err(Error::DimensionMismatch(format!("series members must have {n} velocity DOFs")));
    }
    let want_l2 = which != NormSelection::H1;
    let want_h1 = which != NormSelection::L2;
    Ok(ErrorReport {
        l2: want_l2.then(|| series_in(&disc.forms.mass, reference, approx)),
        h1: want_h1.then(|| series_in(&disc.forms.stiffness, reference, approx)),
    })
}

/// `ū + P_r(u − ū)` for every state, with `ū = 0` when the basis has no offset.
pub fn project_series(basis: &PodBasis, disc: &Discretization, states: &[FeFunction]) -> Vec<FeFunction> {
    states
        .iter()
        .map(|u| match &basis.offset {
            Some(off) => {
                let a = basis.coords(disc, &difference(&u.values, &off.values));
                let mut p = basis.combine(&a);
                p.iter_mut().zip(&off.values).for_each(|(x, o)| *x += o);
                FeFunction::new(p)
            }
            None => FeFunction::new(basis.combine(&basis.coords(disc, &u.values))),
        })
        .collect()
}

/// `∫₀^T ‖z_tt‖² dt` from central second differences on a uniform grid.
/// Interior values get weight `Δt`; the first and last also cover the
/// half-intervals next to `t = 0` and `t = T`, so the weights sum to `T`.
pub fn second_difference_integral(states: &[FeFunction], dt: f64, op: &SparseOperator) -> Result<f64> {
    let m = states.len().saturating_sub(1);
    if m < 2 {
        return Err(Error::InvalidInput(format!("second differences need at least 2 steps (got {m})")));
    }
    let inv = 1.0 / (dt * dt);
    let sq: Vec<f64> = (1..m)
        .map(|j| {
            let d2: Vec<f64> = (0..states[j].len())
                .map(|i| (states[j + 1].values[i] - 2.0 * states[j].values[i] + states[j - 1].values[i]) * inv)
                .collect();
            op.bilinear(&d2, &d2).max(0.0)
        })
        .collect();
    Ok(dt * sq.iter().sum::<f64>() + 0.5 * dt * (sq[0] + sq[sq.len() - 1]))
}

/// `(∫‖u_tt‖₀², ∫‖∇u_tt‖₀²)` of a trajectory's velocities.
pub fn second_derivative_integrals(traj: &Trajectory, disc: &Discretization) -> Result<(f64, f64)> {
    let dt = traj.dt();
    Ok((
        second_difference_integral(&traj.velocities, dt, &disc.forms.mass)?,
        second_difference_integral(&traj.velocities, dt, &disc.forms.stiffness)?,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Anchor {
    /// Anchor term `3‖z⁰‖²`.
    Initial,
    /// Anchor term `3‖z̄‖²` with doubled derivative and quadrupled
    /// second-derivative weights.
    Mean,
}

impl Anchor {
    pub fn as_str(&self) -> &'static str {
        match self {
            Anchor::Initial => "initial",
            Anchor::Mean => "mean",
        }
    }
}

/// Both sides of the pointwise-in-time bound
/// `max_k ‖z^k‖² ≤ 3‖z_a‖² + c₁ (T²/M) Σ_{n≥1} ‖z_t^n‖² + c₂ T Δt² ∫‖z_tt‖²`
/// with `(z_a, c₁, c₂) = (z⁰, 3, 4/3)` or `(z̄, 12, 16/3)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointwiseBound {
    pub anchor: Anchor,
    pub lhs: f64,
    /// Index attaining the maximum on the left.
    pub argmax: usize,
    pub anchor_term: f64,
    pub derivative_term: f64,
    pub second_derivative_term: f64,
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
}

pub const BOUND_TOLERANCE: f64 = 1e-8;

/// `z` holds `z⁰..z^M`; `z_t` holds `z_t¹..z_t^M`.
pub fn pointwise_bound_check(
    z: &[FeFunction],
    z_t: &[FeFunction],
    op: &SparseOperator,
    dt: f64,
    anchor: Anchor,
) -> Result<PointwiseBound> {
    let m = z.len().saturating_sub(1);
    if m < 2 {
        return Err(Error::InvalidInput(format!("pointwise bound needs at least 2 steps (got {m})")));
    }
    if z_t.len() != m {
        return Err(Error::DimensionMismatch(format!("expected {m} derivative values, found {}", z_t.len())));
    }
    let t_final = m as f64 * dt;
    let sq = |v: &[f64]| op.bilinear(v, v).max(0.0);
    let (argmax, lhs) = z.iter().map(|v| sq(&v.values)).enumerate().fold((0, 0.0), |best, (k, v)| if v > best.1 { (k, v) } else { best });
    let (anchor_sq, c1, c2) = match anchor {
        Anchor::Initial => (sq(&z[0].values), 3.0, 4.0 / 3.0),
        Anchor::Mean => (sq(&crate::snapshots::temporal_mean(z).values), 12.0, 16.0 / 3.0),
    };
    let deriv_sum: f64 = z_t.iter().map(|v| sq(&v.values)).sum();
    let itt = second_difference_integral(z, dt, op)?;
    let anchor_term = 3.0 * anchor_sq;
    let derivative_term = c1 * t_final * t_final / m as f64 * deriv_sum;
    let second_derivative_term = c2 * t_final * dt * dt * itt;
    let rhs = anchor_term + derivative_term + second_derivative_term;
    let margin = rhs - lhs;
    Ok(PointwiseBound {
        anchor,
        lhs,
        argmax,
        anchor_term,
        derivative_term,
        second_derivative_term,
        rhs,
        margin,
        pass: margin >= -BOUND_TOLERANCE * rhs,
    })
}

/// `z = P_r u − u` and `z_t = P_r u_t − u_t` (for `n = 1..M`) along a trajectory.
pub fn projection_error_trajectory(traj: &Trajectory, basis: &PodBasis, disc: &Discretization) -> Result<(Vec<FeFunction>, Vec<FeFunction>)> {
    if traj.derivatives.len() != traj.velocities.len() {
        return Err(Error::InvalidInput("trajectory carries no time derivatives".into()));
    }
    let residual = |u: &FeFunction| FeFunction::new(difference(&basis.combine(&basis.coords(disc, &u.values)), &u.values));
    let z = traj.velocities.iter().map(residual).collect();
    let z_t = traj.derivatives[1..].iter().map(residual).collect();
    Ok((z, z_t))
}

/// `(1/M) Σ_{j≥1} ‖u^j − P_r u^j‖²_X` against
/// `C_X² = (3 + 6T²/τ²) Σ_{k>r} λ_k + (16T/3) Δt² ∫‖u_tt‖²_X`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailConsistency {
    pub lhs: f64,
    pub max_pointwise: f64,
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
}

pub fn tail_consistency_check(traj: &Trajectory, basis: &PodBasis, disc: &Discretization) -> Result<TailConsistency> {
    let op = basis.inner_product.operator(disc);
    let m = traj.n_steps();
    let (z, _) = projection_error_trajectory(traj, basis, disc)?;
    let errs: Vec<f64> = z.iter().map(|v| op.bilinear(&v.values, &v.values).max(0.0)).collect();
    let lhs = errs[1..].iter().sum::<f64>() / m as f64;
    let t = traj.t_final();
    let itt = second_difference_integral(&traj.velocities, traj.dt(), op)?;
    let rhs = (3.0 + 6.0 * t * t / (basis.tau * basis.tau)) * basis.tail(basis.r) + 16.0 * t / 3.0 * traj.dt().powi(2) * itt;
    let margin = rhs - lhs;
    Ok(TailConsistency {
        lhs,
        max_pointwise: errs.iter().copied().fold(0.0, f64::max),
        rhs,
        margin,
        pass: margin >= -BOUND_TOLERANCE * rhs,
    })
}

/// Observed order between consecutive samples.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rate {
    Observed(f64),
    /// One of the two errors is exactly zero.
    Saturated,
}

impl Rate {
    pub fn value(&self) -> Option<f64> {
        match self {
            Rate::Observed(r) => Some(*r),
            Rate::Saturated => None,
        }
    }
}

impl std::fmt::Display for Rate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Rate::Observed(r) => write!(f, "{r:.16e}"),
            Rate::Saturated => f.write_str("saturated"),
        }
    }
}

/// `rate_i = log(e_i/e_{i+1}) / log(h_i/h_{i+1})`.
pub fn convergence_rates(errors: &[f64], spacings: &[f64]) -> Result<Vec<Rate>> {
    if errors.len() != spacings.len() || errors.len() < 2 {
        return Err(Error::InvalidInput("need at least two matching error/spacing samples".into()));
    }
    if spacings.iter().any(|h| !(*h > 0.0)) || errors.iter().any(|e| !(*e >= 0.0)) {
        return Err(Error::InvalidInput("spacings must be positive and errors non-negative".into()));
    }
    Ok((0..errors.len() - 1)
        .map(|i| {
            let (e0, e1) = (errors[i], errors[i + 1]);
            if e0 == 0.0 || e1 == 0.0 {
                Rate::Saturated
            } else {
                Rate::Observed((e0 / e1).ln() / (spacings[i] / spacings[i + 1]).ln())
            }
        })
        .collect())
}

/// Discrete surrogates of the a priori constants of the projected trajectory.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstantsReport {
    /// `max_j ‖P_r u^j‖_∞`
    pub c_inf: f64,
    /// `max_j ‖∇P_r u^j‖_∞`
    pub c_1inf: f64,
    /// `max_j ‖∇P_r u^j‖_{L⁴}`
    pub c_ld: f64,
    /// `Δt Σ_j ‖P_r u^j‖²_∞`
    pub k_inf: f64,
    /// `Δt Σ_j ‖∇P_r u^j‖_∞`
    pub k_1inf: f64,
    /// `2K_{1,inf} + K_inf²/(2μ) + 2`
    pub c_u: f64,
    /// `Δt (2C_{1,inf} + C_inf²/(2μ) + 2/T)`, required to be at most ½.
    pub time_condition: f64,
    pub time_condition_holds: bool,
}

/// Nodal maximum of the pointwise Euclidean velocity magnitude.
pub fn nodal_sup_norm(disc: &Discretization, u: &[f64]) -> f64 {
    let n = disc.space.n_scalar();
    (0..n).map(|i| u[i].hypot(u[n + i])).fold(0.0, f64::max)
}

/// `(max |∇u|_F, (∫ |∇u|_F⁴)^{1/4})` over the quadrature points.
pub fn gradient_norms(disc: &Discretization, u: &[f64]) -> (f64, f64) {
    let mut sup = 0.0f64;
    let mut l4 = 0.0;
    disc.for_each_quad_point(u, |q| {
        let g2: f64 = q.grad.iter().flatten().map(|v| v * v).sum();
        sup = sup.max(g2.sqrt());
        l4 += q.weight * g2 * g2;
    });
    (sup, l4.max(0.0).powf(0.25))
}

pub fn constants_report(traj: &Trajectory, basis: &PodBasis, disc: &Discretization, mu: f64) -> Result<ConstantsReport> {
    if !(mu > 0.0) {
        return Err(Error::InvalidInput(format!("grad-div parameter must be positive (got {mu})")));
    }
    let dt = traj.dt();
    let mut out = ConstantsReport {
        c_inf: 0.0,
        c_1inf: 0.0,
        c_ld: 0.0,
        k_inf: 0.0,
        k_1inf: 0.0,
        c_u: 0.0,
        time_condition: 0.0,
        time_condition_holds: false,
    };
    for u in &traj.velocities {
        let p = basis.combine(&basis.coords(disc, &u.values));
        let sup = nodal_sup_norm(disc, &p);
        let (gsup, gl4) = gradient_norms(disc, &p);
        out.c_inf = out.c_inf.max(sup);
        out.c_1inf = out.c_1inf.max(gsup);
        out.c_ld = out.c_ld.max(gl4);
        out.k_inf += dt * sup * sup;
        out.k_1inf += dt * gsup;
    }
    out.c_u = 2.0 * out.k_1inf + out.k_inf * out.k_inf / (2.0 * mu) + 2.0;
    let t = traj.t_final();
    let inv_t = if t > 0.0 { 2.0 / t } else { f64::INFINITY };
    out.time_condition = dt * (2.0 * out.c_1inf + out.c_inf * out.c_inf / (2.0 * mu) + inv_t);
    out.time_condition_holds = out.time_condition <= 0.5;
    Ok(out)
}

/// One line of `report.csv`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub check_id: String,
    pub time_index: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
}

impl PointwiseBound {
    pub fn row(&self, check_id: &str) -> ReportRow {
        ReportRow { check_id: check_id.into(), time_index: self.argmax, lhs: self.lhs, rhs: self.rhs, margin: self.margin, pass: self.pass }
    }
}

fn f(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_report_csv(path: &Path, rows: &[ReportRow]) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "check_id,time_index,lhs,rhs,margin,pass")?;
    for r in rows {
        writeln!(w, "{},{},{},{},{},{}", r.check_id, r.time_index, f(r.lhs), f(r.rhs), f(r.margin), r.pass)?;
    }
    w.flush()?;
    Ok(())
}

/// One refinement level of a convergence study.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateLevel {
    pub level: usize,
    pub h_or_dt: f64,
    pub error_l2: f64,
    pub error_h1: f64,
}

/// Writes `rates.csv`; the rate columns of the first level are empty.
pub fn write_rates_csv(path: &Path, levels: &[RateLevel]) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "level,h_or_dt,error_L2,error_H1,rate_L2,rate_H1")?;
    let hs: Vec<f64> = levels.iter().map(|l| l.h_or_dt).collect();
    let (r2, r1) = if levels.len() >= 2 {
        (
            convergence_rates(&levels.iter().map(|l| l.error_l2).collect::<Vec<_>>(), &hs)?,
            convergence_rates(&levels.iter().map(|l| l.error_h1).collect::<Vec<_>>(), &hs)?,
        )
    } else {
        (Vec::new(), Vec::new())
    };
    for (i, l) in levels.iter().enumerate() {
        let (a, b) = if i == 0 { (String::new(), String::new()) } else { (r2[i - 1].to_string(), r1[i - 1].to_string()) };
        writeln!(w, "{},{},{},{},{a},{b}", l.level, f(l.h_or_dt), f(l.error_l2), f(l.error_h1))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `singular_values.csv` with one row per mode of the numerical rank.
pub fn write_singular_values_csv(path: &Path, basis: &PodBasis) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "k,sigma_k,sigma_rel")?;
    let rel = basis.relative_singular_values();
    for k in 0..basis.d_v {
        writeln!(w, "{},{},{}", k + 1, f(basis.eigenvalues[k].max(0.0).sqrt()), f(rel[k]))?;
    }
    w.flush()?;
    Ok(())
}
