//! Smooth approximate 1-rarefaction.
//!
//! The Burgers equation `w_t + w w_x = 0` is solved exactly by
//! characteristics from the smooth increasing datum
//!
//! ```text
//! w₀(x) = (w_m + w₋)/2 + (w_m − w₋)/2 · k_q ∫₀^{εx} (1 + y²)^(−q) dy,
//! ```
//!
//! and the volume is recovered from `λ₁(v) = w`, the velocity from constancy
//! of the 1-Riemann invariant. The resulting pair solves the p-system exactly.

use std::f64::consts::FRAC_PI_2;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

use super::end_states::WaveEndStates;
use crate::eos::GasModel;
use crate::error::{Error, Result};

pub const DEFAULT_TAIL_EXPONENT: f64 = 2.0;

#[derive(Debug, Clone)]
pub struct RarefactionWave {
    model: GasModel,
    v_minus: f64,
    u_minus: f64,
    v_m: f64,
    u_m: f64,
    eps: f64,
    q: f64,
    k_q: f64,
    w_minus: f64,
    w_m: f64,
    z1: f64,
    quad: TailIntegral,
}

/// Burgers solution and its first two x-derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BurgersSample {
    pub w: f64,
    pub w_x: f64,
    pub w_xx: f64,
}

/// Rarefaction state with every derivative the composite-wave source terms
/// need. Time derivatives are taken in the lab frame.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RarefactionSample {
    pub v: f64,
    pub u: f64,
    pub v_x: f64,
    pub u_x: f64,
    pub v_xx: f64,
    pub u_xx: f64,
    pub v_t: f64,
    pub u_t: f64,
    pub u_xt: f64,
}

impl RarefactionSample {
    /// A constant state.
    pub fn constant(v: f64, u: f64) -> Self {
        Self {
            v,
            u,
            ..Default::default()
        }
    }
}

/// `∫₀^s (1+y²)^(−q) dy` evaluated as `∫₀^{atan s} cos^{2q−2}θ dθ`.
///
/// For integer `q` the integrand is entire and one Gauss–Legendre rule
/// resolves it to round-off. Otherwise the interval is split on a geometric
/// grading towards `π/2`, where the integrand has limited smoothness.
#[derive(Debug, Clone)]
struct TailIntegral {
    rule: GaussLegendre,
    exponent: f64,
    integer: bool,
}

impl TailIntegral {
    fn new(q: f64) -> Self {
        let integer = q.fract() == 0.0 && q <= 32.0;
        Self {
            rule: GaussLegendre::new(NonZeroUsize::new(24).unwrap()),
            exponent: 2.0 * q - 2.0,
            integer,
        }
    }

    fn integrand(&self, theta: f64) -> f64 {
        let c = theta.cos();
        if self.integer {
            c.powi(self.exponent as i32)
        } else {
            c.powf(self.exponent)
        }
    }

    /// Integral over `[0, θ]` for `0 ≤ θ ≤ π/2`.
    fn upto_angle(&self, theta: f64) -> f64 {
        if self.integer {
            return self.rule.integrate(0.0, theta, |t| self.integrand(t));
        }
        let mut total = 0.0;
        let mut a = 0.0;
        let mut gap = FRAC_PI_2 / 2.0;
        for _ in 0..48 {
            let b = FRAC_PI_2 - gap;
            if theta <= b {
                break;
            }
            total += self.rule.integrate(a, b, |t| self.integrand(t));
            a = b;
            gap *= 0.5;
        }
        total + self.rule.integrate(a, theta, |t| self.integrand(t))
    }

    fn eval(&self, s: f64) -> f64 {
        let v = self.upto_angle(s.abs().atan());
        v.copysign(s)
    }

    fn total(&self) -> f64 {
        self.upto_angle(FRAC_PI_2)
    }
}

impl RarefactionWave {
    pub fn new(
        model: &GasModel,
        (v_minus, u_minus): (f64, f64),
        (v_m, u_m): (f64, f64),
        eps: f64,
        q: f64,
    ) -> Result<Self> {
        if !(v_minus > 0.0 && v_minus < v_m) {
            return Err(Error::InvalidWaveConfiguration(format!(
                "rarefaction needs 0 < v_minus < v_m, got {v_minus}, {v_m}"
            )));
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidWaveConfiguration(format!(
                "smoothing parameter must be positive, got {eps}"
            )));
        }
        if !(q > 1.5 && q.is_finite()) {
            return Err(Error::InvalidWaveConfiguration(format!(
                "tail exponent must exceed 3/2, got {q}"
            )));
        }
        let z1 = model.z1(v_m, u_m);
        if (model.z1(v_minus, u_minus) - z1).abs() > 1e-10 {
            return Err(Error::InvalidWaveConfiguration(
                "end states are not on a common 1-rarefaction curve".into(),
            ));
        }
        let quad = TailIntegral::new(q);
        let k_q = 1.0 / quad.total();
        Ok(Self {
            model: *model,
            v_minus,
            u_minus,
            v_m,
            u_m,
            eps,
            q,
            k_q,
            w_minus: model.lambda1(v_minus),
            w_m: model.lambda1(v_m),
            z1,
            quad,
        })
    }

    /// Builds the left wave of a configuration; `None` when it has no
    /// rarefaction. `eps` defaults to `δ_R³`.
    pub fn from_end_states(
        model: &GasModel,
        es: &WaveEndStates,
        eps: Option<f64>,
        q: f64,
    ) -> Result<Option<Self>> {
        if !es.has_rarefaction() {
            return Ok(None);
        }
        let eps = eps.unwrap_or(es.delta_r.powi(3));
        Self::new(model, (es.v_minus, es.u_minus), (es.v_m, es.u_m), eps, q).map(Some)
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn k_q(&self) -> f64 {
        self.k_q
    }

    pub fn w_minus(&self) -> f64 {
        self.w_minus
    }

    pub fn w_m(&self) -> f64 {
        self.w_m
    }

    pub fn left_state(&self) -> (f64, f64) {
        (self.v_minus, self.u_minus)
    }

    pub fn right_state(&self) -> (f64, f64) {
        (self.v_m, self.u_m)
    }

    /// `k_q ∫₀^∞ (1+y²)^(−q) dy`, one up to quadrature error.
    pub fn normalization_check(&self) -> f64 {
        self.k_q * self.quad.total()
    }

    fn half_jump(&self) -> f64 {
        0.5 * (self.w_m - self.w_minus)
    }

    /// Initial Burgers datum and its first two derivatives.
    pub fn initial_datum(&self, x: f64) -> BurgersSample {
        let s = self.eps * x;
        let base = 1.0 + s * s;
        let amp = self.half_jump() * self.k_q;
        let w = 0.5 * (self.w_m + self.w_minus) + amp * self.quad.eval(s);
        let w_x = amp * self.eps * base.powf(-self.q);
        let w_xx = -2.0 * self.q * amp * self.eps * self.eps * s * base.powf(-self.q - 1.0);
        BurgersSample { w, w_x, w_xx }
    }

    /// Solves `x = x₀ + t w₀(x₀)` for the foot of the characteristic.
    fn foot(&self, t: f64, x: f64) -> Result<f64> {
        if t == 0.0 {
            return Ok(x);
        }
        let mut lo = x - t * self.w_m;
        let mut hi = x - t * self.w_minus;
        let mut y = (x - t * self.initial_datum(x).w).clamp(lo, hi);
        for _ in 0..200 {
            let d = self.initial_datum(y);
            let g = y + t * d.w - x;
            if g < 0.0 {
                lo = y;
            } else {
                hi = y;
            }
            let step = g / (1.0 + t * d.w_x);
            let mut next = y - step;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let tol = 1e-14 * (1.0 + y.abs());
            if (next - y).abs() <= tol || hi - lo <= tol {
                return Ok(next);
            }
            y = next;
        }
        Err(Error::Numeric(format!(
            "characteristic root finder did not converge at t={t}, x={x}"
        )))
    }

    pub fn burgers(&self, t: f64, x: f64) -> Result<BurgersSample> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("time must be non-negative, got {t}")));
        }
        let x0 = self.foot(t, x)?;
        let d = self.initial_datum(x0);
        let j = 1.0 + t * d.w_x;
        Ok(BurgersSample {
            w: d.w,
            w_x: d.w_x / j,
            w_xx: d.w_xx / (j * j * j),
        })
    }

    pub fn eval(&self, t: f64, x: f64) -> Result<RarefactionSample> {
        let b = self.burgers(t, x)?;
        let m = &self.model;
        let v = m.lambda1_inverse(b.w)?;
        let l1 = m.lambda1(v);
        let dl = m.dlambda1(v);
        let d2l = m.d2lambda1(v);
        let v_x = b.w_x / dl;
        let v_xx = (b.w_xx - d2l * v_x * v_x) / dl;
        let u = m.u_on_z1(self.z1, v);
        let u_x = -l1 * v_x;
        let u_xx = -dl * v_x * v_x - l1 * v_xx;
        let (dp, d2p) = (m.dp(v), m.d2p(v));
        Ok(RarefactionSample {
            v,
            u,
            v_x,
            u_x,
            v_xx,
            u_xx,
            v_t: u_x,
            u_t: -dp * v_x,
            u_xt: -(d2p * v_x * v_x + dp * v_xx),
        })
    }

    /// Exact centred fan `(v^r, u^r)(x/t)` of the Riemann problem.
    pub fn exact_fan(&self, t: f64, x: f64) -> Result<(f64, f64)> {
        let w = if t > 0.0 {
            (x / t).clamp(self.w_minus, self.w_m)
        } else if x < 0.0 {
            self.w_minus
        } else {
            self.w_m
        };
        let v = self.model.lambda1_inverse(w)?;
        Ok((v, self.model.u_on_z1(self.z1, v)))
    }
}
