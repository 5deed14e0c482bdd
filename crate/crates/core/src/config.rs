//! Run configuration shared by the command-line tools and the studies.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fe_space::SpaceSpec;
use crate::fom::{FomConfig, Integrator};
use crate::manufactured::Problem;
use crate::mesh::Rect;
use crate::pod::{InnerProduct, PodOptions};
use crate::snapshots::SnapshotVariant;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshConfig {
    pub nx: usize,
    pub ny: usize,
    /// Number of meshes in a convergence study, each a uniform refinement
    /// of the previous one.
    pub levels: usize,
    pub rect: Rect,
}

impl Default for MeshConfig {
    fn default() -> Self {
        MeshConfig { nx: 16, ny: 16, levels: 3, rect: Rect::UNIT }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub problem: Problem,
    pub mesh: MeshConfig,
    pub degree: usize,
    pub nu: f64,
    pub mu: f64,
    pub dt: f64,
    pub t_final: f64,
    pub integrator: Integrator,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub variant: SnapshotVariant,
    /// Snapshot time scale; `None` means the final time.
    pub tau: Option<f64>,
    pub inner_product: InnerProduct,
    /// Explicit POD rank; takes precedence over `threshold`.
    pub rank: Option<usize>,
    /// Relative singular value cut-off; `None` means the default for the
    /// inner product.
    pub threshold: Option<f64>,
    pub output: Option<PathBuf>,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let fom = FomConfig::default();
        RunConfig {
            problem: Problem::MultiVortex,
            mesh: MeshConfig::default(),
            degree: 2,
            nu: fom.nu,
            mu: fom.mu,
            dt: fom.dt,
            t_final: fom.t_final,
            integrator: fom.integrator,
            newton_tol: fom.newton_tol,
            newton_max_iter: fom.newton_max_iter,
            variant: SnapshotVariant::InitialPlusDerivatives,
            tau: None,
            inner_product: InnerProduct::L2,
            rank: None,
            threshold: None,
            output: None,
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Format { path: path.display().to_string(), reason: e.to_string() })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn fom_config(&self) -> FomConfig {
        FomConfig {
            nu: self.nu,
            mu: self.mu,
            dt: self.dt,
            t_final: self.t_final,
            integrator: self.integrator,
            newton_tol: self.newton_tol,
            newton_max_iter: self.newton_max_iter,
        }
    }

    /// Space on the base mesh refined `level` times.
    pub fn space_spec(&self, level: usize) -> SpaceSpec {
        SpaceSpec { nx: self.mesh.nx << level, ny: self.mesh.ny << level, rect: self.mesh.rect, degree: self.degree }
    }

    pub fn tau(&self) -> f64 {
        self.tau.unwrap_or(self.t_final)
    }

    pub fn threshold(&self) -> f64 {
        self.threshold.unwrap_or_else(|| self.inner_product.default_threshold())
    }

    pub fn pod_options(&self) -> PodOptions {
        match self.rank {
            Some(r) => PodOptions::rank(r),
            None => PodOptions::threshold(self.threshold()),
        }
    }

    /// Checks every field; cheap, so callers run it before any solve.
    pub fn validate(&self) -> Result<()> {
        self.fom_config().validate()?;
        let bad = |m: String| Err(Error::InvalidInput(m));
        if self.mesh.nx == 0 || self.mesh.ny == 0 || self.mesh.levels == 0 {
            return bad("mesh counts and levels must be positive".into());
        }
        let r = self.mesh.rect;
        if !(r.x1 > r.x0 && r.y1 > r.y0) {
            return bad("degenerate rectangle".into());
        }
        if !(2..=3).contains(&self.degree) {
            return bad(format!("degree must be 2 or 3 (got {})", self.degree));
        }
        if let Some(t) = self.tau {
            if !(t > 0.0 && t.is_finite()) {
                return bad(format!("time scale must be positive (got {t})"));
            }
        } else if self.t_final <= 0.0 {
            return bad("the default time scale needs a positive final time".into());
        }
        if self.rank == Some(0) {
            return bad("rank must be positive".into());
        }
        if let Some(t) = self.threshold {
            if !(0.0..=1.0).contains(&t) {
                return bad(format!("threshold must lie in [0, 1] (got {t})"));
            }
        }
        Ok(())
    }
}
