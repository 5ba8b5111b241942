//! γ-law constitutive functions in Lagrangian form.
//!
//! Pressure is `p(v) = v^(-γ)` (pressure coefficient fixed at one), the
//! potential energy is `H(v) = v^(1-γ)/(γ-1)` so that `H' = -p`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the relaxed isentropic gas: adiabatic index, viscosity and
/// relaxation time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasModel {
    gamma: f64,
    mu: f64,
    tau: f64,
}

/// Which convex function a relative quantity `F(v|w)` is taken of.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relative {
    Pressure,
    Potential,
}

/// 1-characteristic speed, its mirror, and the 1-Riemann invariant at a state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicData {
    pub lambda1: f64,
    pub lambda2: f64,
    pub z1: f64,
}

impl GasModel {
    pub fn new(gamma: f64, mu: f64, tau: f64) -> Result<Self> {
        if !(gamma > 1.0 && gamma.is_finite()) {
            return Err(Error::Domain(format!("gamma must exceed 1, got {gamma}")));
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::Domain(format!("mu must be positive, got {mu}")));
        }
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(Error::Domain(format!("tau must be non-negative, got {tau}")));
        }
        Ok(Self { gamma, mu, tau })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Same gas with a different relaxation time.
    pub fn with_tau(&self, tau: f64) -> Result<Self> {
        Self::new(self.gamma, self.mu, tau)
    }

    /// `d^order/dv^order` of `v^(-γ)` for `order` in `0..=3`.
    pub fn pressure(&self, v: f64, order: u8) -> Result<f64> {
        check_volume(v)?;
        match order {
            0 => Ok(self.p(v)),
            1 => Ok(self.dp(v)),
            2 => Ok(self.d2p(v)),
            3 => Ok(self.d3p(v)),
            k => Err(Error::UnsupportedOrder(k)),
        }
    }

    // Unchecked kernels. Callers guarantee v > 0.

    #[inline]
    pub fn p(&self, v: f64) -> f64 {
        v.powf(-self.gamma)
    }

    #[inline]
    pub fn dp(&self, v: f64) -> f64 {
        -self.gamma * v.powf(-self.gamma - 1.0)
    }

    #[inline]
    pub fn d2p(&self, v: f64) -> f64 {
        let g = self.gamma;
        g * (g + 1.0) * v.powf(-g - 2.0)
    }

    #[inline]
    pub fn d3p(&self, v: f64) -> f64 {
        let g = self.gamma;
        -g * (g + 1.0) * (g + 2.0) * v.powf(-g - 3.0)
    }

    #[inline]
    pub fn potential(&self, v: f64) -> f64 {
        v.powf(1.0 - self.gamma) / (self.gamma - 1.0)
    }

    /// `p(v|w) = p(v) - p(w) - p'(w)(v - w)`.
    #[inline]
    pub fn p_rel(&self, v: f64, w: f64) -> f64 {
        self.p(v) - self.p(w) - self.dp(w) * (v - w)
    }

    /// `H(v|w) = H(v) - H(w) + p(w)(v - w)`.
    #[inline]
    pub fn h_rel(&self, v: f64, w: f64) -> f64 {
        self.potential(v) - self.potential(w) + self.p(w) * (v - w)
    }

    pub fn relative_quantity(&self, which: Relative, v: f64, w: f64) -> Result<f64> {
        check_volume(v)?;
        check_volume(w)?;
        Ok(match which {
            Relative::Pressure => self.p_rel(v, w),
            Relative::Potential => self.h_rel(v, w),
        })
    }

    /// `λ₁(v) = -√(-p'(v))`.
    #[inline]
    pub fn lambda1(&self, v: f64) -> f64 {
        -self.gamma.sqrt() * v.powf(-0.5 * (self.gamma + 1.0))
    }

    /// `dλ₁/dv`, positive.
    #[inline]
    pub fn dlambda1(&self, v: f64) -> f64 {
        let g = self.gamma;
        0.5 * (g + 1.0) * g.sqrt() * v.powf(-0.5 * (g + 3.0))
    }

    /// `d²λ₁/dv²`, negative.
    #[inline]
    pub fn d2lambda1(&self, v: f64) -> f64 {
        let g = self.gamma;
        -0.25 * (g + 1.0) * (g + 3.0) * g.sqrt() * v.powf(-0.5 * (g + 5.0))
    }

    /// Inverse of `λ₁` on the negative axis: `v = (γ/w²)^(1/(γ+1))`.
    pub fn lambda1_inverse(&self, w: f64) -> Result<f64> {
        if !(w < 0.0) {
            return Err(Error::Domain(format!(
                "1-characteristic speed must be negative, got {w}"
            )));
        }
        Ok((self.gamma / (w * w)).powf(1.0 / (self.gamma + 1.0)))
    }

    /// 1-Riemann invariant with the antiderivative of `λ₁` taken with zero
    /// integration constant.
    #[inline]
    pub fn z1(&self, v: f64, u: f64) -> f64 {
        let g = self.gamma;
        u + 2.0 * g.sqrt() / (g - 1.0) * v.powf(-0.5 * (g - 1.0))
    }

    /// Velocity on the level set `z₁ = z` at volume `v`.
    #[inline]
    pub fn u_on_z1(&self, z: f64, v: f64) -> f64 {
        z - (self.z1(v, 0.0))
    }

    pub fn characteristic_data(&self, v: f64, u: f64) -> Result<CharacteristicData> {
        check_volume(v)?;
        let lambda1 = self.lambda1(v);
        Ok(CharacteristicData {
            lambda1,
            lambda2: -lambda1,
            z1: self.z1(v, u),
        })
    }
}

fn check_volume(v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("specific volume must be positive, got {v}")))
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
    fn pressure_values() {
        let g = gas();
        assert_eq!(g.pressure(1.0, 0).unwrap(), 1.0);
        assert_eq!(g.pressure(1.0, 1).unwrap(), -2.0);
        assert_relative_eq!(g.pressure(1.2, 0).unwrap(), 0.694_444_444_444_444_4, epsilon = 1e-15);
    }

    #[test]
    fn pressure_errors() {
        let g = gas();
        assert!(matches!(g.pressure(0.0, 0), Err(Error::Domain(_))));
        assert!(matches!(g.pressure(-1.0, 1), Err(Error::Domain(_))));
        assert!(matches!(g.pressure(1.0, 4), Err(Error::UnsupportedOrder(4))));
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let g = GasModel::new(1.4, 1.0, 0.0).unwrap();
        let h = 1e-5;
        for &v in &[0.5, 0.9, 1.0, 1.7, 3.0] {
            for order in 0..3u8 {
                let fd = (g.pressure(v + h, order).unwrap() - g.pressure(v - h, order).unwrap())
                    / (2.0 * h);
                let exact = g.pressure(v, order + 1).unwrap();
                assert!(((fd - exact) / exact).abs() < 1e-6, "order {order} at v={v}");
            }
        }
    }

    #[test]
    fn relative_quantities() {
        let g = gas();
        assert_eq!(g.relative_quantity(Relative::Potential, 1.0, 1.0).unwrap(), 0.0);
        assert_relative_eq!(
            g.relative_quantity(Relative::Potential, 2.0, 1.0).unwrap(),
            0.5,
            epsilon = 1e-15
        );
        assert_relative_eq!(
            g.relative_quantity(Relative::Pressure, 2.0, 1.0).unwrap(),
            1.25,
            epsilon = 1e-15
        );
        assert!(g.relative_quantity(Relative::Pressure, 0.0, 1.0).is_err());
        assert!(g.relative_quantity(Relative::Potential, 1.0, -2.0).is_err());
    }

    #[test]
    fn characteristic_values() {
        let g = gas();
        let c = g.characteristic_data(1.0, 0.0).unwrap();
        assert_relative_eq!(c.lambda1, -std::f64::consts::SQRT_2, epsilon = 1e-15);
        assert_relative_eq!(c.lambda2, std::f64::consts::SQRT_2, epsilon = 1e-15);
        assert_relative_eq!(c.z1, 2.0 * std::f64::consts::SQRT_2, epsilon = 1e-15);
        let c = g.characteristic_data(0.9, 0.0).unwrap();
        assert_relative_eq!(c.lambda1, -1.656_346_650, epsilon = 1e-9);
        assert!(g.characteristic_data(0.0, 1.0).is_err());
    }

    #[test]
    fn lambda1_inverse_roundtrip() {
        let g = GasModel::new(1.4, 1.0, 0.0).unwrap();
        for &v in &[0.3, 1.0, 2.5] {
            assert_relative_eq!(g.lambda1_inverse(g.lambda1(v)).unwrap(), v, epsilon = 1e-13);
        }
        assert!(g.lambda1_inverse(0.0).is_err());
    }

    #[test]
    fn z1_antiderivative_of_lambda1() {
        let g = GasModel::new(1.4, 1.0, 0.0).unwrap();
        let h = 1e-6;
        for &v in &[0.6, 1.0, 2.0] {
            let fd = (g.z1(v + h, 0.0) - g.z1(v - h, 0.0)) / (2.0 * h);
            assert!((fd - g.lambda1(v)).abs() < 1e-8);
            let fd2 = (g.lambda1(v + h) - g.lambda1(v - h)) / (2.0 * h);
            assert!((fd2 - g.dlambda1(v)).abs() < 1e-7);
            let fd3 = (g.dlambda1(v + h) - g.dlambda1(v - h)) / (2.0 * h);
            assert!((fd3 - g.d2lambda1(v)).abs() < 1e-7);
        }
    }

    #[test]
    fn constructor_rejects_bad_parameters() {
        assert!(GasModel::new(1.0, 1.0, 0.0).is_err());
        assert!(GasModel::new(2.0, 0.0, 0.0).is_err());
        assert!(GasModel::new(2.0, 1.0, -0.1).is_err());
    }

    // |v-w|^2 <= C F(v|w) on the box [0.5, 2]^2 around v_ref = 1. C was fitted
    // once on a 401x401 sample (max ratio 7.985 for H, 5.320 for p at
    // gamma = 2) and frozen with headroom.
    const COERCIVITY_C: f64 = 8.5;

    #[test]
    fn relative_quantities_coercive_on_box() {
        let g = gas();
        let n = 200;
        for i in 0..=n {
            for j in 0..=n {
                let v = 0.5 + 1.5 * i as f64 / n as f64;
                let w = 0.5 + 1.5 * j as f64 / n as f64;
                let d2 = (v - w).powi(2);
                assert!(d2 <= COERCIVITY_C * g.h_rel(v, w) + 1e-15);
                assert!(d2 <= COERCIVITY_C * g.p_rel(v, w) + 1e-15);
            }
        }
    }

    #[test]
    fn lambda1_increasing() {
        let g = gas();
        let mut prev = g.lambda1(0.1);
        for k in 1..1000 {
            let v = 0.1 + k as f64 * 0.005;
            let l = g.lambda1(v);
            assert!(l > prev);
            prev = l;
        }
    }

    proptest::proptest! {
        #[test]
        fn relative_quantities_nonnegative(v in 0.5f64..3.0, w in 0.5f64..3.0, gamma in 1.1f64..3.0) {
            let g = GasModel::new(gamma, 1.0, 0.0).unwrap();
            let hp = g.relative_quantity(Relative::Potential, v, w).unwrap();
            let pp = g.relative_quantity(Relative::Pressure, v, w).unwrap();
            proptest::prop_assert!(hp >= -1e-15 && pp >= -1e-15);
            if (v - w).abs() > 1e-6 {
                proptest::prop_assert!(hp > 0.0 && pp > 0.0);
            }
        }

        #[test]
        fn z1_shift_in_u(v in 0.2f64..5.0, u in -3.0f64..3.0, c in -2.0f64..2.0) {
            let g = GasModel::new(2.0, 1.0, 0.0).unwrap();
            let a = g.characteristic_data(v, u).unwrap().z1;
            let b = g.characteristic_data(v, u + c).unwrap().z1;
            proptest::prop_assert!((b - a - c).abs() < 1e-12);
        }
    }
}
