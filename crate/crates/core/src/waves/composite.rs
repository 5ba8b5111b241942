//! Superposition of the approximate rarefaction and the shifted viscous shock.
//!
//! In the moving frame `ξ = x − σt` the composite wave with shift `X` is
//!
//! ```text
//! ṽ(t,ξ) = ṽᴿ(t, ξ+σt) + ṽˢ(ξ−X) − v_m
//! ũ(t,ξ) = ũᴿ(t, ξ+σt) + ũˢ(ξ−X) − u_m
//! Π̃(t,ξ) = Π̃ˢ(ξ−X) + μ ũᴿ_x / ṽᴿ
//! ```
//!
//! It is not an exact solution. Its defects in the momentum and stress
//! equations are the interaction terms `F₁` and `F₂` carried by
//! [`CompositeSample`].

use super::end_states::WaveEndStates;
use super::profile::{ShockProfile, ShockSample};
use super::rarefaction::{RarefactionSample, RarefactionWave};
use crate::eos::GasModel;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct CompositeWave {
    model: GasModel,
    sigma: f64,
    v_m: f64,
    u_m: f64,
    shock: Option<ShockProfile>,
    raref: Option<RarefactionWave>,
}

/// Composite values together with the ingredients the entropy bookkeeping
/// needs.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompositeSample {
    pub v: f64,
    pub u: f64,
    pub pi: f64,
    pub v_xi: f64,
    pub u_xi: f64,
    pub pi_xi: f64,
    pub shock: ShockSample,
    pub raref: RarefactionSample,
    pub f1: f64,
    pub f2: f64,
}

impl CompositeWave {
    /// Shock profile plus, when `v_minus < v_m`, the smoothed rarefaction.
    pub fn build(
        model: &GasModel,
        es: &WaveEndStates,
        profile_tol: f64,
        eps: Option<f64>,
        q: f64,
    ) -> Result<Self> {
        let shock = ShockProfile::solve(model, es, profile_tol)?;
        let raref = RarefactionWave::from_end_states(model, es, eps, q)?;
        Ok(Self::from_parts(model, es.sigma, (es.v_m, es.u_m), Some(shock), raref))
    }

    /// Assembles a composite from optional parts. Missing parts contribute
    /// the constant middle state.
    pub fn from_parts(
        model: &GasModel,
        sigma: f64,
        (v_m, u_m): (f64, f64),
        shock: Option<ShockProfile>,
        raref: Option<RarefactionWave>,
    ) -> Self {
        Self {
            model: *model,
            sigma,
            v_m,
            u_m,
            shock,
            raref,
        }
    }

    pub fn model(&self) -> &GasModel {
        &self.model
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn middle_state(&self) -> (f64, f64) {
        (self.v_m, self.u_m)
    }

    pub fn shock(&self) -> Option<&ShockProfile> {
        self.shock.as_ref()
    }

    pub fn rarefaction(&self) -> Option<&RarefactionWave> {
        self.raref.as_ref()
    }

    /// Shock strength, zero without a shock.
    pub fn delta_s(&self) -> f64 {
        self.shock.as_ref().map_or(0.0, |s| s.delta_s())
    }

    /// Rarefaction component at lab position `ξ + σt`.
    pub fn raref_at(&self, t: f64, xi: f64) -> Result<RarefactionSample> {
        match &self.raref {
            Some(r) => r.eval(t, xi + self.sigma * t),
            None => Ok(RarefactionSample::constant(self.v_m, self.u_m)),
        }
    }

    /// Rarefaction components for a whole column of ξ values at one time.
    /// They do not depend on the shift, so callers can reuse them.
    pub fn raref_column(&self, t: f64, xi: &[f64]) -> Result<Vec<RarefactionSample>> {
        xi.iter().map(|&x| self.raref_at(t, x)).collect()
    }

    pub fn shock_at(&self, xi: f64, shift: f64) -> ShockSample {
        match &self.shock {
            Some(s) => s.eval(xi - shift),
            None => ShockSample {
                v: self.v_m,
                u: self.u_m,
                ..Default::default()
            },
        }
    }

    pub fn eval(&self, t: f64, xi: f64, shift: f64) -> Result<(f64, f64, f64)> {
        let s = self.sample(t, xi, shift)?;
        Ok((s.v, s.u, s.pi))
    }

    pub fn sample(&self, t: f64, xi: f64, shift: f64) -> Result<CompositeSample> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("time must be non-negative, got {t}")));
        }
        let r = self.raref_at(t, xi)?;
        self.combine(&r, xi, shift)
    }

    /// Superposes a precomputed rarefaction sample with the shock at `ξ − X`.
    pub fn combine(&self, r: &RarefactionSample, xi: f64, shift: f64) -> Result<CompositeSample> {
        let s = self.shock_at(xi, shift);
        let m = &self.model;
        let mu = m.mu();
        let tau = m.tau();
        let v = r.v + s.v - self.v_m;
        if !(v > 0.0) {
            return Err(Error::InvalidWaveConfiguration(format!(
                "composite volume {v} is not positive at xi = {xi}; wave strengths too large"
            )));
        }
        let u = r.u + s.u - self.u_m;
        let visc = mu * r.u_x / r.v;
        let visc_x = mu * (r.u_xx / r.v - r.u_x * r.v_x / (r.v * r.v));
        let visc_t = mu * (r.u_xt / r.v - r.u_x * r.v_t / (r.v * r.v));
        let f1 = m.dp(v) * (r.v_x + s.v_xi) - m.dp(r.v) * r.v_x - m.dp(s.v) * s.v_xi - visc_x;
        let f2 = tau * visc_t + (r.v - self.v_m) * s.pi + (s.v - self.v_m) * visc;
        Ok(CompositeSample {
            v,
            u,
            pi: s.pi + visc,
            v_xi: r.v_x + s.v_xi,
            u_xi: r.u_x + s.u_xi,
            pi_xi: s.pi_xi + visc_x,
            shock: s,
            raref: *r,
            f1,
            f2,
        })
    }
}
