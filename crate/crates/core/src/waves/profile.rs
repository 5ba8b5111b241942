//! Viscous 2-shock profile of the relaxed system.
//!
//! In the travelling coordinate `ξ = x − σt` the profile satisfies
//!
//! ```text
//! −σ v_ξ − u_ξ = 0,   −σ u_ξ + p(v)_ξ = Π_ξ,   −στ Π_ξ + vΠ = μ u_ξ
//! ```
//!
//! which integrates to `σv + u = σv_m + u_m`, `Π = −h(v)` with
//! `h(v) = σ²(v_m − v) + p(v_m) − p(v)`, and the scalar ODE
//!
//! ```text
//! v_ξ = v h(v) / (μσ + τσ h'(v)).
//! ```
//!
//! The endpoints are equilibria, so the ODE is started from the midpoint value
//! at `ξ = 0` and integrated outwards in both directions. Beyond the last
//! computed node on each side the profile continues with the linearised
//! exponential decay at that fixed point.

use std::io::{BufRead, Write};
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

use serde::{Deserialize, Serialize};

use super::end_states::WaveEndStates;
use super::interp::MonotoneCubic;
use super::ode::{self, OdeOptions};
use crate::eos::GasModel;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct ShockProfile {
    model: GasModel,
    end_states: WaveEndStates,
    xi: Vec<f64>,
    v: Vec<f64>,
    u: Vec<f64>,
    pi: Vec<f64>,
    interp: MonotoneCubic,
    left_rate: f64,
    right_rate: f64,
}

/// Profile values and first ξ-derivatives at a point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ShockSample {
    pub v: f64,
    pub u: f64,
    pub pi: f64,
    pub v_xi: f64,
    pub u_xi: f64,
    pub pi_xi: f64,
}

/// Consistency measures of a computed profile, all maxima over the nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileCheck {
    /// Residual of the three travelling-wave equations.
    pub system_residual: f64,
    /// Residual of `σv + u = σv_m + u_m` and `Π = −σ(u − u_m) + p(v) − p(v_m)`.
    pub algebraic_residual: f64,
    /// Mismatch between the node spacing and `∫ dv / v_ξ(v)` over each
    /// interval, scaled to a `v` error by the local slope.
    pub ode_defect: f64,
    /// Distance of the extreme nodes to `v_m` and `v₊`.
    pub endpoint_gap: f64,
    /// `v` strictly increasing and `u` strictly decreasing.
    pub monotone: bool,
    pub nodes: usize,
}

/// JSON sidecar written next to the profile CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileSidecar {
    pub sigma: f64,
    #[serde(rename = "delta_S")]
    pub delta_s: f64,
    pub tail_rate: f64,
    pub v_m: f64,
    pub u_m: f64,
    pub v_plus: f64,
    pub u_plus: f64,
    pub gamma: f64,
    pub mu: f64,
    pub tau: f64,
}

/// Right-hand side data of the profile ODE for fixed end states.
#[derive(Debug, Clone, Copy)]
struct ProfileOde {
    model: GasModel,
    v_m: f64,
    sigma: f64,
}

impl ProfileOde {
    fn h(&self, v: f64) -> f64 {
        let s2 = self.sigma * self.sigma;
        s2 * (self.v_m - v) + self.model.p(self.v_m) - self.model.p(v)
    }

    fn dh(&self, v: f64) -> f64 {
        -self.sigma * self.sigma - self.model.dp(v)
    }

    fn denominator(&self, v: f64) -> f64 {
        let (mu, tau) = (self.model.mu(), self.model.tau());
        mu * self.sigma + tau * self.sigma * self.dh(v)
    }

    fn rhs(&self, v: f64) -> f64 {
        v * self.h(v) / self.denominator(v)
    }

    /// `d/dv` of the right-hand side at a zero of `h`.
    fn linear_rate(&self, v: f64) -> f64 {
        v * self.dh(v) / self.denominator(v)
    }
}

/// Largest admissible relaxation time `inf μ/|h'(v)|` over `[v_m, v₊]`.
pub fn relaxation_limit(model: &GasModel, end_states: &WaveEndStates) -> f64 {
    let ode = ProfileOde {
        model: *model,
        v_m: end_states.v_m,
        sigma: end_states.sigma,
    };
    let n = 2000;
    (0..=n)
        .map(|k| {
            let v = end_states.v_m + (end_states.v_plus - end_states.v_m) * k as f64 / n as f64;
            model.mu() / ode.dh(v).abs()
        })
        .fold(f64::INFINITY, f64::min)
}

impl ShockProfile {
    /// Solves the profile ODE. `tol` is the distance to each end state at
    /// which integration stops.
    pub fn solve(model: &GasModel, end_states: &WaveEndStates, tol: f64) -> Result<Self> {
        let (v_m, v_plus) = (end_states.v_m, end_states.v_plus);
        if !(v_m < v_plus) {
            return Err(Error::InvalidWaveConfiguration(
                "shock profile needs v_m < v_plus".into(),
            ));
        }
        if !(tol > 0.0 && tol < 0.25 * (v_plus - v_m)) {
            return Err(Error::InvalidWaveConfiguration(format!(
                "profile tolerance {tol} out of range"
            )));
        }
        let ode = ProfileOde {
            model: *model,
            v_m,
            sigma: end_states.sigma,
        };

        let limit = relaxation_limit(model, end_states);
        if !(model.tau() < limit) {
            return Err(Error::RelaxationTooLarge {
                tau: model.tau(),
                limit,
            });
        }
        let n = 2000;
        for k in 1..n {
            let v = v_m + (v_plus - v_m) * k as f64 / n as f64;
            if !(ode.h(v) > 0.0) {
                return Err(Error::ProfileNonexistence(format!(
                    "h changes sign at v = {v} inside (v_m, v_plus)"
                )));
            }
        }

        let anchor = 0.5 * (v_m + v_plus);
        let slope = ode.rhs(anchor);
        let width = (v_plus - v_m) / slope;
        let opts = OdeOptions {
            rtol: 1e-13,
            atol: tol * 1e-3,
            h_init: width / 64.0,
            h_max: width / 24.0,
            max_steps: 200_000,
        };
        let rhs = |v: f64| ode.rhs(v);
        let forward = ode::integrate(rhs, 0.0, anchor, opts, |_, v| v_plus - v < tol)?;
        let backward = ode::integrate(
            rhs,
            0.0,
            anchor,
            OdeOptions {
                h_init: -opts.h_init,
                ..opts
            },
            |_, v| v - v_m < tol,
        )?;

        let mut xi = Vec::with_capacity(forward.len() + backward.len());
        let mut v = Vec::with_capacity(xi.capacity());
        for &(t, y) in backward.iter().rev().chain(forward.iter().skip(1)) {
            xi.push(t);
            v.push(y.clamp(v_m, v_plus));
        }
        Self::from_nodes(*model, *end_states, xi, v)
    }

    fn from_nodes(model: GasModel, end_states: WaveEndStates, xi: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        let ode = ProfileOde {
            model,
            v_m: end_states.v_m,
            sigma: end_states.sigma,
        };
        if xi.len() < 4 || !xi.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::Numeric("profile nodes are not strictly increasing".into()));
        }
        if !v.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::Numeric("profile values are not strictly increasing".into()));
        }
        let sigma = end_states.sigma;
        let u: Vec<f64> = v
            .iter()
            .map(|&vi| end_states.u_m - sigma * (vi - end_states.v_m))
            .collect();
        let pi: Vec<f64> = v.iter().map(|&vi| -ode.h(vi)).collect();
        let slopes: Vec<f64> = v.iter().map(|&vi| ode.rhs(vi)).collect();
        let interp = MonotoneCubic::new(xi.clone(), v.clone(), Some(slopes));
        let left_rate = ode.linear_rate(end_states.v_m);
        let right_rate = -ode.linear_rate(end_states.v_plus);
        if !(left_rate > 0.0 && right_rate > 0.0) {
            return Err(Error::ProfileNonexistence(
                "end states are not hyperbolic fixed points of the profile ODE".into(),
            ));
        }
        Ok(Self {
            model,
            end_states,
            xi,
            v,
            u,
            pi,
            interp,
            left_rate,
            right_rate,
        })
    }

    pub fn model(&self) -> &GasModel {
        &self.model
    }

    pub fn end_states(&self) -> &WaveEndStates {
        &self.end_states
    }

    pub fn sigma(&self) -> f64 {
        self.end_states.sigma
    }

    pub fn delta_s(&self) -> f64 {
        self.end_states.delta_s
    }

    pub fn nodes(&self) -> &[f64] {
        &self.xi
    }

    pub fn node_v(&self) -> &[f64] {
        &self.v
    }

    pub fn node_u(&self) -> &[f64] {
        &self.u
    }

    pub fn node_pi(&self) -> &[f64] {
        &self.pi
    }

    /// Linearised decay rate of `v − v_m` as `ξ → −∞`.
    pub fn left_rate(&self) -> f64 {
        self.left_rate
    }

    /// Linearised decay rate of `v₊ − v` as `ξ → +∞`.
    pub fn right_rate(&self) -> f64 {
        self.right_rate
    }

    /// Slower of the two tail rates.
    pub fn tail_rate(&self) -> f64 {
        self.left_rate.min(self.right_rate)
    }

    /// Width of the transition measured as jump / max slope.
    pub fn width(&self) -> f64 {
        let ode = self.ode();
        let vmax = self
            .v
            .iter()
            .map(|&v| ode.rhs(v))
            .fold(0.0f64, f64::max);
        (self.end_states.v_plus - self.end_states.v_m) / vmax
    }

    /// Right-hand side of the profile ODE, `v_ξ` as a function of `v`.
    pub fn slope_at(&self, v: f64) -> f64 {
        self.ode().rhs(v)
    }

    fn ode(&self) -> ProfileOde {
        ProfileOde {
            model: self.model,
            v_m: self.end_states.v_m,
            sigma: self.end_states.sigma,
        }
    }

    pub fn eval(&self, xi: f64) -> ShockSample {
        let es = &self.end_states;
        let (x0, v0) = self.interp.first();
        let (x1, v1) = self.interp.last();
        let (v, v_xi) = if xi < x0 {
            let d = (v0 - es.v_m) * (self.left_rate * (xi - x0)).exp();
            (es.v_m + d, self.left_rate * d)
        } else if xi > x1 {
            let d = (es.v_plus - v1) * (-self.right_rate * (xi - x1)).exp();
            (es.v_plus - d, self.right_rate * d)
        } else {
            let v = self.interp.eval(xi).0;
            (v, self.ode().rhs(v))
        };
        let ode = self.ode();
        let sigma = es.sigma;
        ShockSample {
            v,
            u: es.u_m - sigma * (v - es.v_m),
            pi: -ode.h(v),
            v_xi,
            u_xi: -sigma * v_xi,
            pi_xi: -ode.dh(v) * v_xi,
        }
    }

    pub fn check(&self) -> ProfileCheck {
        let es = &self.end_states;
        let (sigma, mu, tau) = (es.sigma, self.model.mu(), self.model.tau());
        let ode = self.ode();
        let rule = GaussLegendre::new(NonZeroUsize::new(16).unwrap());
        let mut system: f64 = 0.0;
        let mut algebraic: f64 = 0.0;
        let mut defect: f64 = 0.0;
        for (k, &x) in self.xi.iter().enumerate() {
            let s = self.eval(x);
            let r = [
                -sigma * s.v_xi - s.u_xi,
                -sigma * s.u_xi + self.model.dp(s.v) * s.v_xi - s.pi_xi,
                -sigma * tau * s.pi_xi + s.v * s.pi - mu * s.u_xi,
            ];
            system = r.iter().fold(system, |m, x| m.max(x.abs()));
            let (v, u, pi) = (self.v[k], self.u[k], self.pi[k]);
            algebraic = algebraic
                .max((sigma * v + u - sigma * es.v_m - es.u_m).abs())
                .max((pi + sigma * (u - es.u_m) - self.model.p(v) + self.model.p(es.v_m)).abs());
            if k + 1 < self.xi.len() {
                let (a, b) = (self.v[k], self.v[k + 1]);
                let span = rule.integrate(a, b, |w| 1.0 / ode.rhs(w));
                let slope = ode.rhs(0.5 * (a + b));
                defect = defect.max((span - (self.xi[k + 1] - x)).abs() * slope);
            }
        }
        let monotone = self.v.windows(2).all(|w| w[1] > w[0]) && self.u.windows(2).all(|w| w[1] < w[0]);
        let endpoint_gap = (self.v[0] - es.v_m).abs().max((es.v_plus - self.v[self.v.len() - 1]).abs());
        ProfileCheck {
            system_residual: system,
            algebraic_residual: algebraic,
            ode_defect: defect,
            endpoint_gap,
            monotone,
            nodes: self.xi.len(),
        }
    }

    pub fn sidecar(&self) -> ProfileSidecar {
        let es = &self.end_states;
        ProfileSidecar {
            sigma: es.sigma,
            delta_s: es.delta_s,
            tail_rate: self.tail_rate(),
            v_m: es.v_m,
            u_m: es.u_m,
            v_plus: es.v_plus,
            u_plus: es.u_plus,
            gamma: self.model.gamma(),
            mu: self.model.mu(),
            tau: self.model.tau(),
        }
    }

    /// Writes the nodes as CSV with header `xi,v,u,pi`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "xi,v,u,pi")?;
        for i in 0..self.xi.len() {
            writeln!(
                w,
                "{:.17e},{:.17e},{:.17e},{:.17e}",
                self.xi[i], self.v[i], self.u[i], self.pi[i]
            )?;
        }
        Ok(())
    }

    /// Rebuilds a profile from its CSV nodes and JSON sidecar.
    pub fn read_csv<R: BufRead>(reader: R, sidecar: &ProfileSidecar) -> Result<Self> {
        let model = GasModel::new(sidecar.gamma, sidecar.mu, sidecar.tau)?;
        let mut lines = reader.lines();
        let header = lines
            .next()
            .transpose()
            .map_err(|e| Error::Serde(e.to_string()))?
            .unwrap_or_default();
        if header.trim() != "xi,v,u,pi" {
            return Err(Error::Serde(format!("unexpected profile header {header:?}")));
        }
        let mut xi = Vec::new();
        let mut v = Vec::new();
        for line in lines {
            let line = line.map_err(|e| Error::Serde(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<f64> = line
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Serde(format!("bad profile row {line:?}: {e}")))?;
            if cols.len() != 4 {
                return Err(Error::Serde(format!("bad profile row {line:?}")));
            }
            xi.push(cols[0]);
            v.push(cols[1]);
        }
        let v_minus = sidecar.v_m;
        let mut es = WaveEndStates::build(&model, sidecar.v_plus, sidecar.u_plus, sidecar.v_m, v_minus)?;
        es.sigma = sidecar.sigma;
        Self::from_nodes(model, es, xi, v)
    }
}
