//! One time step of the moving-frame system
//!
//! ```text
//! v_t − σv_ξ − u_ξ = 0
//! u_t − σu_ξ + p(v)_ξ = Π_ξ
//! τΠ_t − στΠ_ξ + vΠ = μu_ξ
//! ```
//!
//! by Strang splitting: half a step of the stiff stress relaxation (solved
//! exactly with `v` and `u_ξ` frozen), a full SSP-RK2 step of the transport
//! part with Rusanov fluxes on minmod-limited reconstructions, and a second
//! relaxation half step. The classical reference scheme is the `τ → 0` limit
//! of the same discretisation, where each relaxation step sets `Π = μu_ξ/v`.

use serde::{Deserialize, Serialize};

use super::grid::FieldState;
use crate::eos::GasModel;
use crate::error::{Error, Result};
use crate::waves::CompositeWave;

const GHOSTS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    RelaxedImex,
    ClassicalReference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    #[default]
    FarfieldDirichlet,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub cfl: f64,
    pub end_time: f64,
    pub scheme: Scheme,
    #[serde(default)]
    pub boundary: BoundaryKind,
    /// Speed of the moving frame.
    pub sigma: f64,
    /// Steps between sampler calls.
    pub output_stride: usize,
    /// Optional cap on the time step, e.g. to share one step size across runs.
    #[serde(default)]
    pub max_dt: Option<f64>,
}

impl SolverConfig {
    pub const MAX_CFL: f64 = 0.95;

    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= Self::MAX_CFL) {
            return Err(Error::Config(format!(
                "cfl must lie in (0, {}], got {}",
                Self::MAX_CFL,
                self.cfl
            )));
        }
        if !(self.end_time >= 0.0 && self.end_time.is_finite()) {
            return Err(Error::Config(format!("end_time must be non-negative, got {}", self.end_time)));
        }
        if !self.sigma.is_finite() {
            return Err(Error::Config("sigma must be finite".into()));
        }
        if let Some(dt) = self.max_dt {
            if !(dt > 0.0) {
                return Err(Error::Config(format!("max_dt must be positive, got {dt}")));
            }
        }
        if self.output_stride == 0 {
            return Err(Error::Config("output_stride must be at least 1".into()));
        }
        Ok(())
    }
}

/// Source of ghost-cell values: `(t, ξ, X) ↦ [v, u, Π]`.
pub trait FarField: Sync {
    fn state(&self, t: f64, xi: f64, shift: f64) -> Result<[f64; 3]>;
}

impl FarField for CompositeWave {
    fn state(&self, t: f64, xi: f64, shift: f64) -> Result<[f64; 3]> {
        let (v, u, pi) = self.eval(t, xi, shift)?;
        Ok([v, u, pi])
    }
}

/// Constant states left and right of `ξ = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantStates {
    pub left: [f64; 3],
    pub right: [f64; 3],
}

impl ConstantStates {
    pub fn uniform(state: [f64; 3]) -> Self {
        Self {
            left: state,
            right: state,
        }
    }
}

impl FarField for ConstantStates {
    fn state(&self, _t: f64, xi: f64, _shift: f64) -> Result<[f64; 3]> {
        Ok(if xi < 0.0 { self.left } else { self.right })
    }
}

/// Adapts a closure `(t, ξ) ↦ [v, u, Π]`.
pub struct FnFarField<F>(pub F);

impl<F> FarField for FnFarField<F>
where
    F: Fn(f64, f64) -> Result<[f64; 3]> + Sync,
{
    fn state(&self, t: f64, xi: f64, _shift: f64) -> Result<[f64; 3]> {
        (self.0)(t, xi)
    }
}

/// Eigenvalues `0, ±√(μ/τ − p′(v))` of the lab-frame quasilinear system.
pub fn characteristic_speeds(model: &GasModel, v: f64) -> Result<(f64, f64, f64)> {
    if !(v > 0.0) {
        return Err(Error::Domain(format!("specific volume must be positive, got {v}")));
    }
    if model.tau() == 0.0 {
        return Err(Error::Domain(
            "tau = 0 has no finite relaxation speeds; use the classical scheme".into(),
        ));
    }
    let s = (model.mu() / model.tau() - model.dp(v)).sqrt();
    Ok((0.0, -s, s))
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepReport {
    pub dt: f64,
    /// Time-integrated net outflow `∫(F_right − F_left) dt` of `v` and `u`.
    pub boundary_flux: [f64; 2],
    /// `Σ(new − old)·dx + boundary_flux`, zero up to round-off.
    pub conservation_residual: [f64; 2],
}

/// Largest stable step for the given scheme.
pub fn stable_dt(state: &FieldState, model: &GasModel, scheme: Scheme, sigma: f64, cfl: f64) -> Result<f64> {
    let dx = state.grid.dx();
    match scheme {
        Scheme::RelaxedImex => {
            let mut smax: f64 = 0.0;
            for &v in &state.v {
                let (_, _, s) = characteristic_speeds(model, v)?;
                smax = smax.max(sigma.abs() + s);
            }
            Ok(cfl * dx / smax)
        }
        Scheme::ClassicalReference => {
            let mut smax: f64 = 0.0;
            let mut vmin = f64::INFINITY;
            for &v in &state.v {
                smax = smax.max(sigma.abs() + (-model.dp(v)).sqrt());
                vmin = vmin.min(v);
            }
            Ok((cfl * dx / smax).min(cfl * dx * dx * vmin / (2.0 * model.mu())))
        }
    }
}

/// Relaxed step with the CFL time step.
pub fn step_relaxed(
    state: &FieldState,
    model: &GasModel,
    config: &SolverConfig,
    far: &dyn FarField,
    shift: f64,
) -> Result<(FieldState, StepReport)> {
    let dt = stable_dt(state, model, Scheme::RelaxedImex, config.sigma, config.cfl)?;
    step_with_dt(state, model, Scheme::RelaxedImex, config.sigma, far, shift, dt)
}

/// Classical step with the combined hyperbolic and diffusive time step.
pub fn step_classical(
    state: &FieldState,
    model: &GasModel,
    config: &SolverConfig,
    far: &dyn FarField,
    shift: f64,
) -> Result<(FieldState, StepReport)> {
    let dt = stable_dt(state, model, Scheme::ClassicalReference, config.sigma, config.cfl)?;
    step_with_dt(state, model, Scheme::ClassicalReference, config.sigma, far, shift, dt)
}

/// One step with an explicitly chosen `dt`, which is not checked against
/// any stability limit.
pub fn step_with_dt(
    state: &FieldState,
    model: &GasModel,
    scheme: Scheme,
    sigma: f64,
    far: &dyn FarField,
    shift: f64,
    dt: f64,
) -> Result<(FieldState, StepReport)> {
    if !(dt > 1e-13 * state.t.max(1.0)) || !dt.is_finite() {
        return Err(Error::Stall { dt });
    }
    let tau = match scheme {
        Scheme::RelaxedImex if model.tau() > 0.0 => model.tau(),
        Scheme::RelaxedImex => {
            return Err(Error::Domain(
                "relaxed scheme needs tau > 0; use the classical scheme".into(),
            ))
        }
        Scheme::ClassicalReference => 0.0,
    };
    let kernel = Kernel {
        model,
        tau,
        sigma,
        dx: state.grid.dx(),
        n: state.grid.cells(),
    };
    let t0 = state.t;
    let t1 = t0 + dt;

    let mut w = kernel.extend(state, far, t0, shift)?;
    kernel.relax(&mut w, 0.5 * dt);

    let (l0, fl0, fr0) = kernel.transport_rhs(&w)?;
    let mut stage = w.clone();
    for i in 0..kernel.n {
        for c in 0..3 {
            stage[i + GHOSTS][c] += dt * l0[i][c];
        }
    }
    kernel.fill_ghosts(&mut stage, far, t1, shift)?;
    kernel.check_positive(&stage, dt)?;
    let (l1, fl1, fr1) = kernel.transport_rhs(&stage)?;
    for i in 0..kernel.n {
        for c in 0..3 {
            w[i + GHOSTS][c] += 0.5 * dt * (l0[i][c] + l1[i][c]);
        }
    }
    kernel.fill_ghosts(&mut w, far, t1, shift)?;
    kernel.check_positive(&w, dt)?;
    kernel.relax(&mut w, 0.5 * dt);

    let n = kernel.n;
    let mut next = FieldState {
        t: t1,
        grid: state.grid,
        v: Vec::with_capacity(n),
        u: Vec::with_capacity(n),
        pi: Vec::with_capacity(n),
    };
    for cell in &w[GHOSTS..GHOSTS + n] {
        next.v.push(cell[0]);
        next.u.push(cell[1]);
        next.pi.push(cell[2]);
    }
    if let Some(i) = next.pi.iter().position(|x| !x.is_finite()) {
        return Err(Error::Numeric(format!("non-finite stress in cell {i}")));
    }

    let mut report = StepReport {
        dt,
        ..Default::default()
    };
    let dx = kernel.dx;
    for c in 0..2 {
        let flux = 0.5 * dt * ((fr0[c] - fl0[c]) + (fr1[c] - fl1[c]));
        let (new, old) = if c == 0 { (&next.v, &state.v) } else { (&next.u, &state.u) };
        let change: f64 = new.iter().zip(old).map(|(a, b)| a - b).sum::<f64>() * dx;
        report.boundary_flux[c] = flux;
        report.conservation_residual[c] = change + flux;
    }
    Ok((next, report))
}

struct Kernel<'a> {
    model: &'a GasModel,
    tau: f64,
    sigma: f64,
    dx: f64,
    n: usize,
}

type Cell = [f64; 3];

impl Kernel<'_> {
    fn extend(&self, state: &FieldState, far: &dyn FarField, t: f64, shift: f64) -> Result<Vec<Cell>> {
        let mut w = vec![[0.0; 3]; self.n + 2 * GHOSTS];
        for i in 0..self.n {
            w[i + GHOSTS] = [state.v[i], state.u[i], state.pi[i]];
        }
        self.fill_ghosts(&mut w, far, t, shift)?;
        Ok(w)
    }

    fn ghost_center(&self, j: usize) -> f64 {
        let half = 0.5 * self.dx * self.n as f64;
        -half + (j as f64 - GHOSTS as f64 + 0.5) * self.dx
    }

    fn fill_ghosts(&self, w: &mut [Cell], far: &dyn FarField, t: f64, shift: f64) -> Result<()> {
        let last = self.n + 2 * GHOSTS;
        for j in (0..GHOSTS).chain(last - GHOSTS..last) {
            w[j] = far.state(t, self.ghost_center(j), shift)?;
        }
        Ok(())
    }

    fn check_positive(&self, w: &[Cell], dt: f64) -> Result<()> {
        for (i, cell) in w[GHOSTS..GHOSTS + self.n].iter().enumerate() {
            if !(cell[0] > 0.0) || !cell[0].is_finite() || !cell[1].is_finite() {
                return Err(Error::Positivity {
                    cell: i,
                    value: cell[0],
                    dt,
                });
            }
        }
        Ok(())
    }

    /// Exact solution of `τΠ_t = μu_ξ − vΠ` over `h` with `v`, `u_ξ` frozen.
    fn relax(&self, w: &mut [Cell], h: f64) {
        let mu = self.model.mu();
        let inv = 1.0 / (2.0 * self.dx);
        for j in GHOSTS..GHOSTS + self.n {
            let v = w[j][0];
            let eq = mu * (w[j + 1][1] - w[j - 1][1]) * inv / v;
            let decay = if self.tau > 0.0 { (-v * h / self.tau).exp() } else { 0.0 };
            w[j][2] = eq + (w[j][2] - eq) * decay;
        }
    }

    fn flux(&self, c: &Cell) -> Cell {
        let s = self.sigma;
        [-s * c[0] - c[1], -s * c[1] + self.model.p(c[0]) - c[2], -s * c[2]]
    }

    fn speed(&self, v: f64) -> f64 {
        self.sigma.abs() + (-self.model.dp(v)).sqrt()
    }

    /// Returns `−∂_ξ F` on the interior cells and the boundary fluxes.
    fn transport_rhs(&self, w: &[Cell]) -> Result<(Vec<Cell>, Cell, Cell)> {
        let m = w.len();
        let mut slope = vec![[0.0; 3]; m];
        for j in 1..m - 1 {
            for c in 0..3 {
                slope[j][c] = minmod(w[j][c] - w[j - 1][c], w[j + 1][c] - w[j][c]);
            }
        }
        let mut faces = Vec::with_capacity(self.n + 1);
        for f in 0..=self.n {
            let (a, b) = (f + GHOSTS - 1, f + GHOSTS);
            let mut l = w[a];
            let mut r = w[b];
            for c in 0..3 {
                l[c] += 0.5 * slope[a][c];
                r[c] -= 0.5 * slope[b][c];
            }
            if !(l[0] > 0.0 && r[0] > 0.0) {
                return Err(Error::Positivity {
                    cell: f.min(self.n - 1),
                    value: l[0].min(r[0]),
                    dt: f64::NAN,
                });
            }
            let alpha = self.speed(l[0]).max(self.speed(r[0]));
            let (fl, fr) = (self.flux(&l), self.flux(&r));
            let mut out = [0.0; 3];
            for c in 0..3 {
                out[c] = 0.5 * (fl[c] + fr[c]) - 0.5 * alpha * (r[c] - l[c]);
            }
            faces.push(out);
        }
        let inv = 1.0 / self.dx;
        let rhs = (0..self.n)
            .map(|i| {
                let mut d = [0.0; 3];
                for c in 0..3 {
                    d[c] = -(faces[i + 1][c] - faces[i][c]) * inv;
                }
                d
            })
            .collect();
        Ok((rhs, faces[0], faces[self.n]))
    }
}

fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}
