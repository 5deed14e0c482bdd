//! Analytic divergence-free flows on the unit square and their forcing.
//!
//! Each flow is a sum of stream-function modes
//! `ψ = c g(t) a_k(x) a_l(y)` with `a_k(s) = sin²(kπs)`, so the velocity
//! `u = (∂_y ψ, -∂_x ψ)` is divergence-free and vanishes on the whole
//! boundary. The time profile is
//! `g(t) = e^{-σt} cos(ωt + φ)`. The pressure is zero and the forcing is
//! `f = u_t - νΔu + (u·∇)u`.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VortexMode {
    pub kx: u32,
    pub ky: u32,
    pub amplitude: f64,
    pub decay: f64,
    pub omega: f64,
    pub phase: f64,
}

impl VortexMode {
    /// `(g, g', g'')` at time `t`.
    fn profile(&self, t: f64) -> [f64; 3] {
        let e = (-self.decay * t).exp();
        let (s, c) = (self.omega * t + self.phase).sin_cos();
        let (sg, w) = (self.decay, self.omega);
        let g = e * c;
        let g1 = e * (-sg * c - w * s);
        let g2 = e * ((sg * sg - w * w) * c + 2.0 * sg * w * s);
        [g, g1, g2]
    }
}

/// `a_k` and its first three derivatives.
fn axis(k: u32, s: f64) -> [f64; 4] {
    let kp = k as f64 * PI;
    let s1 = (kp * s).sin();
    let (s2, c2) = (2.0 * kp * s).sin_cos();
    [s1 * s1, kp * s2, 2.0 * kp * kp * c2, -4.0 * kp * kp * kp * s2]
}

/// Spatial shape of one mode: value, gradient and Laplacian of `u / (c g)`.
fn mode_shape(m: &VortexMode, x: [f64; 2]) -> ([f64; 2], [[f64; 2]; 2], [f64; 2]) {
    let ax = axis(m.kx, x[0]);
    let ay = axis(m.ky, x[1]);
    let value = [ax[0] * ay[1], -ax[1] * ay[0]];
    let grad = [[ax[1] * ay[1], ax[0] * ay[2]], [-ax[2] * ay[0], -ax[1] * ay[1]]];
    let lap = [ax[2] * ay[1] + ax[0] * ay[3], -ax[3] * ay[0] - ax[1] * ay[2]];
    (value, grad, lap)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VortexFlow {
    pub modes: Vec<VortexMode>,
}

impl VortexFlow {
    /// One decaying cell: `u = e^{-t}(sin²(πx) sin(2πy), -sin(2πx) sin²(πy))`.
    pub fn taylor_green() -> Self {
        VortexFlow {
            modes: vec![VortexMode { kx: 1, ky: 1, amplitude: 1.0 / PI, decay: 1.0, omega: 0.0, phase: 0.0 }],
        }
    }

    /// Several interacting cells with distinct time scales, giving a
    /// snapshot set with a graded singular value spectrum.
    pub fn multi_vortex() -> Self {
        let mode = |kx, ky, amplitude: f64, decay, omega, phase| VortexMode {
            kx,
            ky,
            amplitude: amplitude / PI,
            decay,
            omega,
            phase,
        };
        VortexFlow {
            modes: vec![
                mode(1, 1, 1.0, 0.5, 0.0, 0.0),
                mode(2, 1, 0.4, 0.2, 2.0 * PI, 0.0),
                mode(1, 2, 0.3, 0.0, 3.0 * PI, -0.5 * PI),
                mode(2, 2, 0.15, 0.3, 5.0, 0.3),
                mode(3, 1, 0.08, 0.0, 7.0, 1.0),
                mode(1, 3, 0.05, 0.1, 11.0, -0.7),
            ],
        }
    }

    pub fn velocity(&self, x: [f64; 2], t: f64) -> [f64; 2] {
        self.combine(x, t, |shape, _, _, g| scale2(shape, g[0]))
    }

    /// `grad[d][c] = ∂_c u_d`.
    pub fn gradient(&self, x: [f64; 2], t: f64) -> [[f64; 2]; 2] {
        let mut out = [[0.0; 2]; 2];
        for m in &self.modes {
            let (_, grad, _) = mode_shape(m, x);
            let g = m.amplitude * m.profile(t)[0];
            for d in 0..2 {
                for c in 0..2 {
                    out[d][c] += g * grad[d][c];
                }
            }
        }
        out
    }

    pub fn time_derivative(&self, x: [f64; 2], t: f64) -> [f64; 2] {
        self.combine(x, t, |shape, _, _, g| scale2(shape, g[1]))
    }

    pub fn second_time_derivative(&self, x: [f64; 2], t: f64) -> [f64; 2] {
        self.combine(x, t, |shape, _, _, g| scale2(shape, g[2]))
    }

    /// Gradient of `u_tt`.
    pub fn second_time_derivative_gradient(&self, x: [f64; 2], t: f64) -> [[f64; 2]; 2] {
        let mut out = [[0.0; 2]; 2];
        for m in &self.modes {
            let (_, grad, _) = mode_shape(m, x);
            let g = m.amplitude * m.profile(t)[2];
            for d in 0..2 {
                for c in 0..2 {
                    out[d][c] += g * grad[d][c];
                }
            }
        }
        out
    }

    pub fn laplacian(&self, x: [f64; 2], t: f64) -> [f64; 2] {
        self.combine(x, t, |_, _, lap, g| scale2(lap, g[0]))
    }

    pub fn forcing(&self, x: [f64; 2], t: f64, nu: f64) -> [f64; 2] {
        let u = self.velocity(x, t);
        let g = self.gradient(x, t);
        let ut = self.time_derivative(x, t);
        let lap = self.laplacian(x, t);
        let mut f = [0.0; 2];
        for d in 0..2 {
            f[d] = ut[d] - nu * lap[d] + u[0] * g[d][0] + u[1] * g[d][1];
        }
        f
    }

    fn combine(&self, x: [f64; 2], t: f64, term: impl Fn([f64; 2], [[f64; 2]; 2], [f64; 2], [f64; 3]) -> [f64; 2]) -> [f64; 2] {
        let mut out = [0.0; 2];
        for m in &self.modes {
            let (v, grad, lap) = mode_shape(m, x);
            let p = m.profile(t);
            let r = term(v, grad, lap, [m.amplitude * p[0], m.amplitude * p[1], m.amplitude * p[2]]);
            out[0] += r[0];
            out[1] += r[1];
        }
        out
    }
}

fn scale2(v: [f64; 2], s: f64) -> [f64; 2] {
    [v[0] * s, v[1] * s]
}

/// Test problems available to the solvers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Problem {
    /// Zero initial data and zero forcing.
    Zero,
    /// Single decaying vortex cell with manufactured forcing.
    TaylorGreen,
    /// Multi-cell flow with manufactured forcing.
    MultiVortex,
    /// Multi-cell initial data decaying without forcing.
    FreeDecay,
}

impl Problem {
    pub fn as_str(&self) -> &'static str {
        match self {
            Problem::Zero => "zero",
            Problem::TaylorGreen => "taylor_green",
            Problem::MultiVortex => "multi_vortex",
            Problem::FreeDecay => "free_decay",
        }
    }

    fn flow(&self) -> Option<VortexFlow> {
        match self {
            Problem::Zero => None,
            Problem::TaylorGreen => Some(VortexFlow::taylor_green()),
            Problem::MultiVortex | Problem::FreeDecay => Some(VortexFlow::multi_vortex()),
        }
    }

    /// Analytic solution, when one is known.
    pub fn exact(&self) -> Option<VortexFlow> {
        match self {
            Problem::FreeDecay => None,
            _ => self.flow(),
        }
    }

    pub fn initial_velocity(&self, x: [f64; 2]) -> [f64; 2] {
        self.flow().map_or([0.0; 2], |f| f.velocity(x, 0.0))
    }

    /// Body force as a closure for the given viscosity.
    pub fn forcing(&self, nu: f64) -> impl Fn([f64; 2], f64) -> [f64; 2] + Send + Sync {
        let flow = match self {
            Problem::TaylorGreen | Problem::MultiVortex => self.flow(),
            _ => None,
        };
        move |x, t| flow.as_ref().map_or([0.0; 2], |f| f.forcing(x, t, nu))
    }

    pub fn has_forcing(&self) -> bool {
        matches!(self, Problem::TaylorGreen | Problem::MultiVortex)
    }
}

impl std::str::FromStr for Problem {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "zero" => Ok(Problem::Zero),
            "taylor_green" => Ok(Problem::TaylorGreen),
            "multi_vortex" => Ok(Problem::MultiVortex),
            "free_decay" => Ok(Problem::FreeDecay),
            other => Err(format!("unknown problem {other:?}")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const H: f64 = 1e-5;

    fn fd_grad(f: &VortexFlow, x: [f64; 2], t: f64) -> [[f64; 2]; 2] {
        let mut g = [[0.0; 2]; 2];
        for c in 0..2 {
            let (mut xp, mut xm) = (x, x);
            xp[c] += H;
            xm[c] -= H;
            let (up, um) = (f.velocity(xp, t), f.velocity(xm, t));
            for d in 0..2 {
                g[d][c] = (up[d] - um[d]) / (2.0 * H);
            }
        }
        g
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let f = VortexFlow::multi_vortex();
        for &(x, t) in &[([0.3, 0.7], 0.1), ([0.81, 0.12], 0.45), ([0.5, 0.5], 0.0)] {
            let g = f.gradient(x, t);
            let fd = fd_grad(&f, x, t);
            for d in 0..2 {
                for c in 0..2 {
                    assert!((g[d][c] - fd[d][c]).abs() < 1e-6, "{g:?} vs {fd:?}");
                }
            }
            assert!((g[0][0] + g[1][1]).abs() < 1e-12);

            let ut = f.time_derivative(x, t);
            let (up, um) = (f.velocity(x, t + H), f.velocity(x, t - H));
            let utt = f.second_time_derivative(x, t);
            let u0 = f.velocity(x, t);
            for d in 0..2 {
                assert!((ut[d] - (up[d] - um[d]) / (2.0 * H)).abs() < 1e-7);
                let fd2 = (up[d] - 2.0 * u0[d] + um[d]) / (H * H);
                assert!((utt[d] - fd2).abs() < 1e-3 * (1.0 + utt[d].abs()));
            }

            let lap = f.laplacian(x, t);
            let h = 1e-4;
            for d in 0..2 {
                let mut acc = -4.0 * u0[d];
                for (dx, dy) in [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h)] {
                    acc += f.velocity([x[0] + dx, x[1] + dy], t)[d];
                }
                assert!((lap[d] - acc / (h * h)).abs() < 1e-4 * (1.0 + lap[d].abs()));
            }
        }
    }

    #[test]
    fn vanishes_on_boundary() {
        let f = VortexFlow::multi_vortex();
        for s in [0.0, 0.13, 0.5, 0.77, 1.0] {
            for p in [[s, 0.0], [s, 1.0], [0.0, s], [1.0, s]] {
                let u = f.velocity(p, 0.37);
                assert!(u[0].abs() < 1e-14 && u[1].abs() < 1e-14);
            }
        }
    }

    #[test]
    fn forcing_balances_momentum() {
        let f = VortexFlow::taylor_green();
        let (x, t, nu) = ([0.2, 0.6], 0.3, 0.01);
        let u = f.velocity(x, t);
        let ut = f.time_derivative(x, t);
        let g = fd_grad(&f, x, t);
        let lap = f.laplacian(x, t);
        let force = f.forcing(x, t, nu);
        for d in 0..2 {
            let expected = ut[d] - nu * lap[d] + u[0] * g[d][0] + u[1] * g[d][1];
            assert!((force[d] - expected).abs() < 1e-6);
        }
        // the single cell decays like e^{-t}
        assert!((f.velocity(x, 1.0)[0] / f.velocity(x, 0.0)[0] - (-1.0f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn problem_names_round_trip() {
        for p in [Problem::Zero, Problem::TaylorGreen, Problem::MultiVortex, Problem::FreeDecay] {
            assert_eq!(p.as_str().parse::<Problem>().unwrap(), p);
            assert_eq!(serde_json::to_string(&p).unwrap(), format!("\"{}\"", p.as_str()));
        }
        assert!(Problem::FreeDecay.exact().is_none());
        assert_eq!(Problem::FreeDecay.forcing(0.1)([0.3, 0.3], 0.0), [0.0, 0.0]);
    }
}
