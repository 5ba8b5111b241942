//! Weight function and shift of the a-contraction method.
//!
//! The weight `a(ξ) = 1 + λ/δ_S (p(v_m) − p(ṽˢ(ξ)))` increases from 1 to
//! `1 + λ` across the shock. The shift follows
//!
//! ```text
//! Ẋ = −M/δ_S [ ∫ a(ξ−X)/σ ũˢ_ξ(ξ−X) (p(v) − p(ṽ)) dξ − ∫ a(ξ−X) p(ṽˢ(ξ−X))_ξ (v − ṽ) dξ ]
//! ```
//!
//! with `M = 5(γ+1)σ_m³ / (8γ p(v_m))` and `σ_m = √(−p′(v_m))`.

use serde::{Deserialize, Serialize};

use crate::eos::GasModel;
use crate::error::{Error, Result};
use crate::solver::FieldState;
use crate::waves::{CompositeWave, RarefactionSample, ShockProfile, ShockSample};

/// Drift constant `M`.
pub fn drift_constant(model: &GasModel, v_m: f64) -> f64 {
    let g = model.gamma();
    let sigma_m = (-model.dp(v_m)).sqrt();
    5.0 * (g + 1.0) * sigma_m.powi(3) / (8.0 * g * model.p(v_m))
}

#[derive(Debug, Clone)]
pub struct WeightSpec {
    lambda_amp: f64,
    delta_s: f64,
    p_m: f64,
    model: GasModel,
}

impl WeightSpec {
    pub fn new(profile: &ShockProfile, lambda_amp: f64) -> Result<Self> {
        if !(lambda_amp > 0.0 && lambda_amp.is_finite()) {
            return Err(Error::Config(format!("weight amplitude must be positive, got {lambda_amp}")));
        }
        let es = profile.end_states();
        Ok(Self {
            lambda_amp,
            delta_s: es.delta_s,
            p_m: profile.model().p(es.v_m),
            model: *profile.model(),
        })
    }

    /// `λ = √δ_S`, the top of the admissible window.
    pub fn with_default_amplitude(profile: &ShockProfile) -> Result<Self> {
        Self::new(profile, profile.delta_s().sqrt())
    }

    pub fn lambda_amp(&self) -> f64 {
        self.lambda_amp
    }

    pub fn delta_s(&self) -> f64 {
        self.delta_s
    }

    /// Whether `δ_S < λ ≤ √δ_S`.
    pub fn in_window(&self) -> bool {
        self.delta_s < self.lambda_amp && self.lambda_amp <= self.delta_s.sqrt()
    }

    /// `a` and `a′` from a profile sample at the same argument.
    pub fn weight_pair(&self, s: &ShockSample) -> (f64, f64) {
        let k = self.lambda_amp / self.delta_s;
        let a = 1.0 + k * (self.p_m - self.model.p(s.v));
        let da = -k * self.model.dp(s.v) * s.v_xi;
        (a, da)
    }

    pub fn weight(&self, profile: &ShockProfile, xi: f64) -> f64 {
        self.weight_pair(&profile.eval(xi)).0
    }

    pub fn weight_derivative(&self, profile: &ShockProfile, xi: f64) -> f64 {
        self.weight_pair(&profile.eval(xi)).1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftState {
    pub x: f64,
    pub xdot: f64,
    pub m: f64,
}

impl ShiftState {
    /// `X(0) = 0`.
    pub fn new(model: &GasModel, v_m: f64) -> Self {
        Self {
            x: 0.0,
            xdot: 0.0,
            m: drift_constant(model, v_m),
        }
    }

    /// Heun step for `Ẋ = rate(t, X)`.
    pub fn advance<F>(&mut self, t: f64, dt: f64, mut rate: F) -> Result<()>
    where
        F: FnMut(f64, f64) -> Result<f64>,
    {
        let k1 = rate(t, self.x)?;
        let k2 = rate(t + dt, self.x + dt * k1)?;
        self.correct(dt, k1, k2);
        Ok(())
    }

    /// Predictor `X + dt·Ẋ`.
    pub fn predict(&self, dt: f64, xdot: f64) -> f64 {
        self.x + dt * xdot
    }

    /// Trapezoid corrector from the rates at the old and predicted states.
    pub fn correct(&mut self, dt: f64, xdot_old: f64, xdot_pred: f64) {
        self.x += 0.5 * dt * (xdot_old + xdot_pred);
        self.xdot = xdot_pred;
    }
}

/// `Ẋ` for a state, evaluating the composite on the state's grid.
pub fn shift_rate(
    state: &FieldState,
    composite: &CompositeWave,
    spec: &WeightSpec,
    shift: &ShiftState,
    t: f64,
) -> Result<f64> {
    let raref = composite.raref_column(t, &state.grid.centers())?;
    shift_rate_with(state, composite, spec, shift.m, shift.x, &raref)
}

/// As [`shift_rate`] with precomputed rarefaction samples.
pub fn shift_rate_with(
    state: &FieldState,
    composite: &CompositeWave,
    spec: &WeightSpec,
    m: f64,
    x: f64,
    raref: &[RarefactionSample],
) -> Result<f64> {
    let model = composite.model();
    let sigma = composite.sigma();
    let grid = &state.grid;
    let mut y1 = Vec::with_capacity(grid.cells());
    let mut y2 = Vec::with_capacity(grid.cells());
    for (i, r) in raref.iter().enumerate() {
        let c = composite.combine(r, grid.center(i), x)?;
        let (a, _) = spec.weight_pair(&c.shock);
        let v = state.v[i];
        y1.push(a / sigma * c.shock.u_xi * (model.p(v) - model.p(c.v)));
        y2.push(a * model.dp(c.shock.v) * c.shock.v_xi * (v - c.v));
    }
    let bracket = grid.trapezoid(y1) - grid.trapezoid(y2);
    Ok(-m / spec.delta_s() * bracket)
}

/// Number of cells across the shock transition, measured as the sum of
/// the two tail lengths. Fewer than [`MIN_TRANSITION_CELLS`] triggers an
/// accuracy warning.
pub fn transition_cells(profile: &ShockProfile, dx: f64) -> f64 {
    (1.0 / profile.left_rate() + 1.0 / profile.right_rate()) / dx
}

pub const MIN_TRANSITION_CELLS: f64 = 8.0;

/// Shift-rate evaluator that caches the rarefaction column per time level.
pub struct ShiftTracker<'a> {
    composite: &'a CompositeWave,
    spec: &'a WeightSpec,
    m: f64,
    cache: Option<(f64, Vec<RarefactionSample>)>,
}

impl<'a> ShiftTracker<'a> {
    pub fn new(composite: &'a CompositeWave, spec: &'a WeightSpec, m: f64) -> Self {
        Self {
            composite,
            spec,
            m,
            cache: None,
        }
    }

    pub fn rarefaction_column(&mut self, state: &FieldState) -> Result<&[RarefactionSample]> {
        let fresh = matches!(&self.cache, Some((t, col)) if *t == state.t && col.len() == state.grid.cells());
        if !fresh {
            let col = self.composite.raref_column(state.t, &state.grid.centers())?;
            self.cache = Some((state.t, col));
        }
        Ok(&self.cache.as_ref().unwrap().1)
    }
}

impl crate::solver::ShiftRate for ShiftTracker<'_> {
    fn rate(&mut self, state: &FieldState, shift: f64) -> Result<f64> {
        let (composite, spec, m) = (self.composite, self.spec, self.m);
        let col = self.rarefaction_column(state)?;
        shift_rate_with(state, composite, spec, m, shift, col)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::Grid;
    use crate::waves::WaveEndStates;

    fn setup() -> (CompositeWave, WeightSpec) {
        let g = GasModel::new(2.0, 1.0, 0.01).unwrap();
        let es = WaveEndStates::build(&g, 1.2, 0.0, 1.0, 0.9).unwrap();
        let c = CompositeWave::build(&g, &es, 1e-10, None, 2.0).unwrap();
        let spec = WeightSpec::with_default_amplitude(c.shock().unwrap()).unwrap();
        (c, spec)
    }

    #[test]
    fn drift_constant_closed_form() {
        let g = GasModel::new(2.0, 1.0, 0.01).unwrap();
        let m = drift_constant(&g, 1.0);
        assert!((m - 15.0 * 2f64.sqrt().powi(3) / 16.0).abs() < 1e-12);
        assert!((m - 2.651_650).abs() < 1e-6);
    }

    #[test]
    fn weight_limits_and_monotonicity() {
        let (c, spec) = setup();
        let p = c.shock().unwrap();
        let lam = spec.lambda_amp();
        assert!((spec.weight(p, -1e6) - 1.0).abs() < 1e-9);
        assert!((spec.weight(p, 1e6) - 1.0 - lam).abs() < 1e-9);
        // Beyond |ξ| ≈ 80 the offset from 1 or 1 + λ drops below round-off.
        let mut prev = 1.0;
        for k in -240..=240 {
            let xi = k as f64 * 0.25;
            let a = spec.weight(p, xi);
            assert!(a > 1.0 && a < 1.0 + lam);
            assert!(a > prev);
            assert!(spec.weight_derivative(p, xi) > 0.0);
            prev = a;
        }
        for k in -2000..=2000 {
            let a = spec.weight(p, k as f64);
            assert!((1.0..=1.0 + lam).contains(&a));
            assert!(spec.weight_derivative(p, k as f64) >= 0.0);
        }
        assert!(spec.in_window());
    }

    #[test]
    fn zero_perturbation_gives_zero_rate() {
        let (c, spec) = setup();
        let grid = Grid::new(150.0, 1024).unwrap();
        let state = crate::solver::FieldState::from_fn(grid, 1.0, |xi| {
            let (v, u, pi) = c.eval(1.0, xi, 0.0)?;
            Ok([v, u, pi])
        })
        .unwrap();
        let s = ShiftState::new(c.model(), 1.0);
        assert!(shift_rate(&state, &c, &spec, &s, 1.0).unwrap().abs() < 1e-14);
    }

    #[test]
    fn heun_exact_for_constant_rate() {
        let g = GasModel::new(2.0, 1.0, 0.01).unwrap();
        let mut s = ShiftState::new(&g, 1.0);
        for k in 0..10 {
            s.advance(k as f64 * 0.1, 0.1, |_, _| Ok(0.0)).unwrap();
        }
        assert_eq!(s.x, 0.0);
        for k in 0..10 {
            s.advance(k as f64 * 0.1, 0.1, |_, _| Ok(0.3)).unwrap();
        }
        assert!((s.x - 0.3 * 10.0 * 0.1).abs() < 1e-15);
    }

    #[test]
    fn heun_is_second_order() {
        // Ẋ = −X + sin t on a frozen field has a smooth solution.
        let g = GasModel::new(2.0, 1.0, 0.01).unwrap();
        let solve = |n: usize| {
            let mut s = ShiftState::new(&g, 1.0);
            let dt = 2.0 / n as f64;
            for k in 0..n {
                s.advance(k as f64 * dt, dt, |t, x| Ok(-x + t.sin())).unwrap();
            }
            s.x
        };
        let (a, b, c) = (solve(50), solve(100), solve(200));
        let ratio = (a - b).abs() / (b - c).abs();
        assert!(ratio > 3.6 && ratio < 4.4, "ratio {ratio}");
    }
}
