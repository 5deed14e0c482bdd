//! Snapshot sets assembled from a trajectory.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fe_space::{FeFunction, SpaceSpec};
use crate::fom::Trajectory;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnapshotVariant {
    /// `{√N u⁰, τ u_t¹, …, τ u_t^M}`
    InitialPlusDerivatives,
    /// `{√N ū, τ u_t¹, …, τ u_t^M}`
    MeanPlusDerivatives,
    /// `{u^j − ū}`
    Fluctuations,
    /// `{τ (u^j − u^{j−1}) / Δt}`
    DifferenceQuotients,
    /// `{u^j}`
    RawVelocities,
}

impl SnapshotVariant {
    pub const ALL: [SnapshotVariant; 5] = [
        SnapshotVariant::InitialPlusDerivatives,
        SnapshotVariant::MeanPlusDerivatives,
        SnapshotVariant::Fluctuations,
        SnapshotVariant::DifferenceQuotients,
        SnapshotVariant::RawVelocities,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SnapshotVariant::InitialPlusDerivatives => "initial_plus_derivatives",
            SnapshotVariant::MeanPlusDerivatives => "mean_plus_derivatives",
            SnapshotVariant::Fluctuations => "fluctuations",
            SnapshotVariant::DifferenceQuotients => "difference_quotients",
            SnapshotVariant::RawVelocities => "raw_velocities",
        }
    }

    pub fn uses_derivatives(&self) -> bool {
        matches!(
            self,
            SnapshotVariant::InitialPlusDerivatives | SnapshotVariant::MeanPlusDerivatives | SnapshotVariant::DifferenceQuotients
        )
    }
}

impl std::str::FromStr for SnapshotVariant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        SnapshotVariant::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| format!("unknown snapshot variant {s:?}"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotSet {
    pub variant: SnapshotVariant,
    pub tau: f64,
    pub members: Vec<FeFunction>,
    pub source: String,
    pub space: Option<SpaceSpec>,
}

impl SnapshotSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn n_dofs(&self) -> usize {
        self.members.first().map_or(0, FeFunction::len)
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let meta = SetMeta {
            format: SET_FORMAT.into(),
            variant: self.variant,
            tau: self.tau,
            n: self.members.len(),
            n_dofs: self.n_dofs(),
            source: self.source.clone(),
            space: self.space,
        };
        std::fs::write(dir.join("meta.json"), serde_json::to_string_pretty(&meta)?)?;
        for (j, y) in self.members.iter().enumerate() {
            y.write_binary(&dir.join(format!("y_{j:05}.bin")))?;
        }
        Ok(())
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let meta_path = dir.join("meta.json");
        let meta: SetMeta = serde_json::from_str(&std::fs::read_to_string(&meta_path)?)?;
        if meta.format != SET_FORMAT {
            return Err(Error::Format { path: meta_path.display().to_string(), reason: format!("unsupported format tag {:?}", meta.format) });
        }
        let members = (0..meta.n)
            .map(|j| FeFunction::read_binary(&dir.join(format!("y_{j:05}.bin"))))
            .collect::<Result<Vec<_>>>()?;
        if members.iter().any(|m| m.len() != meta.n_dofs) {
            return Err(Error::Format { path: dir.display().to_string(), reason: "member length differs from meta.json".into() });
        }
        Ok(SnapshotSet { variant: meta.variant, tau: meta.tau, members, source: meta.source, space: meta.space })
    }
}

#[derive(Serialize, Deserialize)]
struct SetMeta {
    format: String,
    variant: SnapshotVariant,
    tau: f64,
    n: usize,
    n_dofs: usize,
    source: String,
    space: Option<SpaceSpec>,
}

const SET_FORMAT: &str = "podlab-snapshots-1";

/// Compensated (Neumaier) sum of the given values.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for v in values {
        let t = s + v;
        if s.abs() >= v.abs() {
            c += (s - t) + v;
        } else {
            c += (v - t) + s;
        }
        s = t;
    }
    s + c
}

/// Temporal mean `ū = (1/(M+1)) Σ u^j`, summed with compensation per DOF.
pub fn temporal_mean(states: &[FeFunction]) -> FeFunction {
    let n = states[0].len();
    let count = states.len() as f64;
    FeFunction::new((0..n).map(|i| compensated_sum(states.iter().map(|s| s.values[i])) / count).collect())
}

/// `s (a − b)` with the subtraction carried to double-double precision.
fn scaled_difference(a: f64, b: f64, s: f64) -> f64 {
    let d = a - b;
    let bb = a - d;
    let err = (a - (d + bb)) + (bb - b);
    d * s + err * s
}

impl Trajectory {
    /// Same trajectory with the temporal mean removed from every velocity.
    /// Time derivatives are unchanged.
    pub fn fluctuations(&self) -> Trajectory {
        let mean = temporal_mean(&self.velocities);
        let mut out = self.clone();
        for u in &mut out.velocities {
            for (v, m) in u.values.iter_mut().zip(&mean.values) {
                *v -= m;
            }
        }
        out.label = format!("{}-fluctuations", self.label);
        out
    }
}

pub fn build_snapshot_set(traj: &Trajectory, variant: SnapshotVariant, tau: f64) -> Result<SnapshotSet> {
    let m = traj.n_steps();
    if variant.uses_derivatives() && m == 0 {
        return Err(Error::InvalidInput(format!("variant {} needs at least one time step", variant.as_str())));
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidInput(format!("time scale must be positive (got {tau})")));
    }
    let need_derivs = matches!(variant, SnapshotVariant::InitialPlusDerivatives | SnapshotVariant::MeanPlusDerivatives);
    if need_derivs && traj.derivatives.len() != m + 1 {
        return Err(Error::InvalidInput("trajectory carries no time derivatives".into()));
    }
    let scaled = |f: &FeFunction, s: f64| FeFunction::new(f.values.iter().map(|v| s * v).collect());
    let n_anchor = ((m + 1) as f64).sqrt();
    let derivs = || traj.derivatives[1..].iter().map(|w| scaled(w, tau));
    let members: Vec<FeFunction> = match variant {
        SnapshotVariant::InitialPlusDerivatives => {
            std::iter::once(scaled(&traj.velocities[0], n_anchor)).chain(derivs()).collect()
        }
        SnapshotVariant::MeanPlusDerivatives => {
            std::iter::once(scaled(&temporal_mean(&traj.velocities), n_anchor)).chain(derivs()).collect()
        }
        SnapshotVariant::Fluctuations => traj.fluctuations().velocities,
        SnapshotVariant::DifferenceQuotients => {
            let s = tau / traj.dt();
            (1..=m)
                .map(|j| {
                    let (a, b) = (&traj.velocities[j].values, &traj.velocities[j - 1].values);
                    FeFunction::new(a.iter().zip(b).map(|(x, y)| scaled_difference(*x, *y, s)).collect())
                })
                .collect()
        }
        SnapshotVariant::RawVelocities => traj.velocities.clone(),
    };
    Ok(SnapshotSet { variant, tau, members, source: traj.label.clone(), space: traj.space })
}
