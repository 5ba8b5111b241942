use serde::{Deserialize, Serialize};

use crate::eos::GasModel;
use crate::error::{Error, Result};

/// End states of a 1-rarefaction followed by a 2-shock, `(v₋,u₋) → (v_m,u_m)
/// → (v₊,u₊)`, with the shock speed and both wave strengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveEndStates {
    pub v_minus: f64,
    pub u_minus: f64,
    pub v_m: f64,
    pub u_m: f64,
    pub v_plus: f64,
    pub u_plus: f64,
    pub sigma: f64,
    /// `|p(v₊) − p(v_m)|`
    pub delta_s: f64,
    /// `|v_m − v₋|`
    pub delta_r: f64,
}

impl WaveEndStates {
    /// Places `(v_m, u_m)` on the 2-shock curve through `(v₊, u₊)` and
    /// `(v₋, u₋)` on the 1-rarefaction curve through `(v_m, u_m)`.
    ///
    /// `v_minus == v_m` is accepted and gives a single shock.
    pub fn build(model: &GasModel, v_plus: f64, u_plus: f64, v_m: f64, v_minus: f64) -> Result<Self> {
        if !(v_minus > 0.0 && v_minus <= v_m && v_m < v_plus) || !v_plus.is_finite() {
            return Err(Error::InvalidWaveConfiguration(format!(
                "need 0 < v_minus <= v_m < v_plus, got v_minus={v_minus}, v_m={v_m}, v_plus={v_plus}"
            )));
        }
        if !u_plus.is_finite() {
            return Err(Error::InvalidWaveConfiguration("u_plus must be finite".into()));
        }
        let sigma2 = (model.p(v_m) - model.p(v_plus)) / (v_plus - v_m);
        let sigma = sigma2.sqrt();
        let u_m = u_plus + sigma * (v_plus - v_m);
        let z = model.z1(v_m, u_m);
        let u_minus = if v_minus == v_m { u_m } else { model.u_on_z1(z, v_minus) };

        let lam2_plus = -model.lambda1(v_plus);
        let lam2_m = -model.lambda1(v_m);
        if !(lam2_plus < sigma && sigma < lam2_m) {
            return Err(Error::LaxViolation(format!(
                "need lambda2(v_plus)={lam2_plus} < sigma={sigma} < lambda2(v_m)={lam2_m}"
            )));
        }

        Ok(Self {
            v_minus,
            u_minus,
            v_m,
            u_m,
            v_plus,
            u_plus,
            sigma,
            delta_s: (model.p(v_plus) - model.p(v_m)).abs(),
            delta_r: (v_m - v_minus).abs(),
        })
    }

    /// Rankine–Hugoniot mass residual `σ v_m + u_m − (σ v₊ + u₊)`.
    pub fn rh_residual(&self) -> f64 {
        self.sigma * self.v_m + self.u_m - (self.sigma * self.v_plus + self.u_plus)
    }

    pub fn z1_residual(&self, model: &GasModel) -> f64 {
        model.z1(self.v_minus, self.u_minus) - model.z1(self.v_m, self.u_m)
    }

    pub fn has_rarefaction(&self) -> bool {
        self.v_minus < self.v_m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn gas() -> GasModel {
        GasModel::new(2.0, 1.0, 0.01).unwrap()
    }

    #[test]
    fn reference_configuration() {
        let g = gas();
        let es = WaveEndStates::build(&g, 1.2, 0.0, 1.0, 0.9).unwrap();
        // sigma^2 = (1 - 1.2^-2)/0.2
        let sigma = ((1.0 - 1.2f64.powi(-2)) / 0.2).sqrt();
        assert_relative_eq!(es.sigma, sigma, epsilon = 1e-15);
        assert_relative_eq!(es.sigma, 1.236_033, epsilon = 1e-6);
        assert_relative_eq!(es.u_m, 0.2 * sigma, epsilon = 1e-15);
        assert_relative_eq!(es.delta_s, 1.0 - 1.2f64.powi(-2), epsilon = 1e-15);
        assert_relative_eq!(es.delta_s, 0.305_555_555_555_555_6, epsilon = 1e-15);
        // z1 = u + 2 sqrt(2) v^-1/2 conserved along R1
        let u_minus = es.u_m + 2.0 * 2f64.sqrt() * (1.0 - 0.9f64.powf(-0.5));
        assert_relative_eq!(es.u_minus, u_minus, epsilon = 1e-14);
        assert_relative_eq!(es.delta_r, 0.1, epsilon = 1e-14);
    }

    #[test]
    fn invariants() {
        let g = GasModel::new(1.4, 1.0, 0.0).unwrap();
        let es = WaveEndStates::build(&g, 1.5, -0.3, 1.1, 0.8).unwrap();
        assert!(es.rh_residual().abs() < 1e-12);
        assert!(es.z1_residual(&g).abs() < 1e-12);
        let s2 = (g.p(es.v_m) - g.p(es.v_plus)) / (es.v_plus - es.v_m);
        assert_relative_eq!(es.sigma * es.sigma, s2, epsilon = 1e-14);
        assert!(-g.lambda1(es.v_plus) < es.sigma && es.sigma < -g.lambda1(es.v_m));
    }

    #[test]
    fn rejects_bad_orderings() {
        let g = gas();
        assert!(matches!(
            WaveEndStates::build(&g, 1.0, 0.0, 1.0, 0.9),
            Err(Error::InvalidWaveConfiguration(_))
        ));
        assert!(WaveEndStates::build(&g, 1.2, 0.0, 1.0, 1.05).is_err());
        assert!(WaveEndStates::build(&g, 1.2, 0.0, 1.0, 0.0).is_err());
        assert!(WaveEndStates::build(&g, 0.8, 0.0, 1.0, 0.9).is_err());
    }

    #[test]
    fn single_shock_allowed() {
        let es = WaveEndStates::build(&gas(), 1.2, 0.0, 1.0, 1.0).unwrap();
        assert_eq!(es.delta_r, 0.0);
        assert_eq!(es.u_minus, es.u_m);
        assert!(!es.has_rarefaction());
    }
}
