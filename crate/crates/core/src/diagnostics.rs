//! Relative-entropy bookkeeping and error norms against the shifted
//! composite wave.
//!
//! With `e = U − Ũ`, `Δp = p(v) − p(ṽ)` and the weight `a` taken at `ξ − X`,
//! the weighted entropy `E = ∫ a η(U|Ũ)`,
//!
//! ```text
//! η(U|Ũ) = e_u²/2 + H(v|ṽ) + τ e_Π² / (2μ),
//! ```
//!
//! evolves along solutions as `dE/dt = Ẋ·Y + J_bad − J_good`. Every term is
//! a pointwise integral of the solution and the composite-wave ingredients,
//! so the balance can be checked on a computed trajectory.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shift::{ShiftState, WeightSpec};
use crate::solver::FieldState;
use crate::waves::{CompositeSample, CompositeWave, RarefactionSample};

/// Individual integrals of the entropy balance.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EntropyTerms {
    /// `Y₁ … Y₈`
    pub y: [f64; 8],
    /// `B₁ … B₅`
    pub b: [f64; 5],
    /// `S₁, S₂`
    pub s: [f64; 2],
    /// `G₁, G₂, G₃`
    pub g: [f64; 3],
    /// `G = ∫ a v/μ e_Π²`
    pub g_pi: f64,
    /// `Gᴿ = ∫ a ũᴿ_ξ p(v|ṽ)`
    pub g_r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub t: f64,
    pub eta_integral: f64,
    pub xdot: f64,
    pub y: f64,
    pub j_bad: f64,
    pub j_good: f64,
    /// `Ẋ·Y + J_bad − J_good`
    pub rhs: f64,
    /// `|ΔE/Δt − (rhs + rhs_prev)/2|` against the previous report.
    pub identity_residual: Option<f64>,
    pub terms: EntropyTerms,
    /// Names of good terms that came out negative on this sample.
    pub negative_good_terms: Vec<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub t: f64,
    /// `sup_ξ |(e_v, e_u, e_Π)|`
    pub sup_error: f64,
    /// L² norms of `e_v, e_u, e_Π`.
    pub l2_errors: [f64; 3],
    /// `∫ ṽˢ_ξ e_v²`
    pub g_s: f64,
    /// `∫ ũᴿ_ξ e_v²`
    pub g_r: f64,
    /// `∫ v/μ e_Π²`
    pub g_pi: f64,
    /// L² norm of `Π − μu_ξ/v`.
    pub relaxation_gap: f64,
}

/// Composite samples on the state's grid at shift `x`.
pub fn composite_on_grid(
    state: &FieldState,
    composite: &CompositeWave,
    raref: &[RarefactionSample],
    x: f64,
) -> Result<Vec<CompositeSample>> {
    if raref.len() != state.grid.cells() {
        return Err(Error::IncompleteIngredients(format!(
            "{} rarefaction samples for {} cells",
            raref.len(),
            state.grid.cells()
        )));
    }
    raref
        .iter()
        .enumerate()
        .map(|(i, r)| composite.combine(r, state.grid.center(i), x))
        .collect()
}

/// Entropy balance at the state's time. `xdot` overrides the shift rate;
/// by default the rate of the shift equation is used.
pub fn entropy_report(
    state: &FieldState,
    composite: &CompositeWave,
    spec: &WeightSpec,
    shift: &ShiftState,
    xdot: Option<f64>,
    previous: Option<&EntropyReport>,
) -> Result<EntropyReport> {
    let raref = composite.raref_column(state.t, &state.grid.centers())?;
    let samples = composite_on_grid(state, composite, &raref, shift.x)?;
    entropy_report_with(state, composite, spec, shift, &samples, xdot, previous)
}

pub fn entropy_report_with(
    state: &FieldState,
    composite: &CompositeWave,
    spec: &WeightSpec,
    shift: &ShiftState,
    samples: &[CompositeSample],
    xdot: Option<f64>,
    previous: Option<&EntropyReport>,
) -> Result<EntropyReport> {
    if composite.shock().is_none() {
        return Err(Error::IncompleteIngredients(
            "the weighted entropy needs a shock profile for the weight".into(),
        ));
    }
    let m = composite.model();
    let (mu, tau, sigma) = (m.mu(), m.tau(), composite.sigma());
    let grid = &state.grid;
    let n = grid.cells();

    const COLS: usize = 21;
    let mut cols: Vec<Vec<f64>> = (0..COLS).map(|_| Vec::with_capacity(n)).collect();
    for i in 0..n {
        let c = &samples[i];
        let (a, da) = spec.weight_pair(&c.shock);
        let v = state.v[i];
        let ev = v - c.v;
        let eu = state.u[i] - c.u;
        let ep = state.pi[i] - c.pi;
        let dp = m.p(v) - m.p(c.v);
        let h_rel = m.h_rel(v, c.v);
        let p_rel = m.p_rel(v, c.v);
        let vs_x = c.shock.v_xi;
        let us_x = c.shock.u_xi;
        let eta = 0.5 * eu * eu + h_rel + tau * ep * ep / (2.0 * mu);
        let row: [f64; COLS] = [
            a * eta,
            // Y₁ … Y₈
            a * us_x / sigma * dp,
            -a * m.dp(c.shock.v) * vs_x * ev,
            a * us_x * (eu - dp / sigma),
            -a * (m.dp(c.v) - m.dp(c.shock.v)) * vs_x * ev,
            a * tau / mu * c.shock.pi_xi * ep,
            -da * tau * ep * ep / (2.0 * mu),
            -0.5 * da * (eu - dp / sigma) * (eu + dp / sigma),
            -da * h_rel - 0.5 * da * (dp / sigma).powi(2),
            // B₁ … B₅
            da * dp * dp / (2.0 * sigma),
            sigma * a * vs_x * p_rel,
            -da * ep * dp / sigma,
            -a * c.pi / mu * ep * ev,
            da * ep * ep / (2.0 * sigma),
            // S₁, S₂
            -a * eu * c.f1,
            -a * ep * c.f2 / mu,
            // G₁, G₂, G₃, G, Gᴿ
            0.5 * sigma * da * (eu - dp / sigma + ep / sigma).powi(2),
            sigma * da * h_rel,
            sigma * tau / (2.0 * mu) * da * ep * ep,
            a * v / mu * ep * ep,
            a * c.raref.u_x * p_rel,
        ];
        for (col, val) in cols.iter_mut().zip(row) {
            col.push(val);
        }
    }
    let int: Vec<f64> = cols.into_iter().map(|c| grid.trapezoid(c)).collect();

    let mut terms = EntropyTerms::default();
    terms.y.copy_from_slice(&int[1..9]);
    terms.b.copy_from_slice(&int[9..14]);
    terms.s.copy_from_slice(&int[14..16]);
    terms.g.copy_from_slice(&int[16..19]);
    terms.g_pi = int[19];
    terms.g_r = int[20];

    let y: f64 = terms.y.iter().sum();
    let j_bad = terms.b.iter().sum::<f64>() + terms.s.iter().sum::<f64>();
    let j_good = terms.g.iter().sum::<f64>() + terms.g_pi + terms.g_r;
    let xdot = xdot.unwrap_or(-shift.m / spec.delta_s() * (terms.y[0] + terms.y[1]));
    let rhs = xdot * y + j_bad - j_good;
    let eta_integral = int[0];
    let identity_residual = previous.and_then(|p| {
        let dt = state.t - p.t;
        (dt > 0.0).then(|| ((eta_integral - p.eta_integral) / dt - 0.5 * (rhs + p.rhs)).abs())
    });
    let names = ["G1", "G2", "G3", "G", "GR"];
    let goods = [terms.g[0], terms.g[1], terms.g[2], terms.g_pi, terms.g_r];
    let negative_good_terms = names
        .iter()
        .zip(goods)
        .filter(|(_, g)| *g < 0.0)
        .map(|(n, _)| n.to_string())
        .collect();

    Ok(EntropyReport {
        t: state.t,
        eta_integral,
        xdot,
        y,
        j_bad,
        j_good,
        rhs,
        identity_residual,
        terms,
        negative_good_terms,
    })
}

/// Deviation from the shifted composite and the wave dissipations.
pub fn error_report(state: &FieldState, composite: &CompositeWave, shift: &ShiftState) -> Result<ErrorReport> {
    let raref = composite.raref_column(state.t, &state.grid.centers())?;
    let samples = composite_on_grid(state, composite, &raref, shift.x)?;
    Ok(error_report_with(state, composite, &samples))
}

pub fn error_report_with(state: &FieldState, composite: &CompositeWave, samples: &[CompositeSample]) -> ErrorReport {
    let m = composite.model();
    let grid = &state.grid;
    let n = grid.cells();
    let mut sup: f64 = 0.0;
    let (mut ev2, mut eu2, mut ep2) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    let (mut gs, mut gr, mut gp) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for (i, c) in samples.iter().enumerate() {
        let ev = state.v[i] - c.v;
        let eu = state.u[i] - c.u;
        let ep = state.pi[i] - c.pi;
        sup = sup.max((ev * ev + eu * eu + ep * ep).sqrt());
        ev2.push(ev * ev);
        eu2.push(eu * eu);
        ep2.push(ep * ep);
        gs.push(c.shock.v_xi * ev * ev);
        gr.push(c.raref.u_x * ev * ev);
        gp.push(state.v[i] / m.mu() * ep * ep);
    }
    ErrorReport {
        t: state.t,
        sup_error: sup,
        l2_errors: [
            grid.trapezoid(ev2).sqrt(),
            grid.trapezoid(eu2).sqrt(),
            grid.trapezoid(ep2).sqrt(),
        ],
        g_s: grid.trapezoid(gs),
        g_r: grid.trapezoid(gr),
        g_pi: grid.trapezoid(gp),
        relaxation_gap: relaxation_gap(state, m.mu()),
    }
}

/// `Π − μu_ξ/v` per cell, with central differences inside and one-sided
/// differences at the two ends.
pub fn relaxation_defect(state: &FieldState, mu: f64) -> Vec<f64> {
    let n = state.grid.cells();
    let dx = state.grid.dx();
    (0..n)
        .map(|i| {
            let du = if i == 0 {
                (state.u[1] - state.u[0]) / dx
            } else if i + 1 == n {
                (state.u[n - 1] - state.u[n - 2]) / dx
            } else {
                (state.u[i + 1] - state.u[i - 1]) / (2.0 * dx)
            };
            state.pi[i] - mu * du / state.v[i]
        })
        .collect()
}

/// Discrete L² norm of [`relaxation_defect`] over the cells where the
/// central difference is defined.
pub fn relaxation_gap(state: &FieldState, mu: f64) -> f64 {
    let d = relaxation_defect(state, mu);
    let n = d.len();
    let sum: f64 = d[1..n - 1].iter().map(|x| x * x).sum();
    (sum * state.grid.dx()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eos::GasModel;
    use crate::solver::Grid;
    use crate::waves::WaveEndStates;

    fn setup() -> (CompositeWave, WeightSpec, ShiftState) {
        let g = GasModel::new(2.0, 1.0, 0.01).unwrap();
        let es = WaveEndStates::build(&g, 1.2, 0.0, 1.0, 0.9).unwrap();
        let c = CompositeWave::build(&g, &es, 1e-10, Some(0.05), 2.0).unwrap();
        let spec = WeightSpec::with_default_amplitude(c.shock().unwrap()).unwrap();
        let s = ShiftState::new(&g, 1.0);
        (c, spec, s)
    }

    fn on_composite(c: &CompositeWave, grid: Grid, t: f64, x: f64) -> FieldState {
        FieldState::from_fn(grid, t, |xi| {
            let (v, u, pi) = c.eval(t, xi, x)?;
            Ok([v, u, pi])
        })
        .unwrap()
    }

    #[test]
    fn zero_perturbation_reports_zero() {
        let (c, spec, mut s) = setup();
        s.x = 0.7;
        let st = on_composite(&c, Grid::new(120.0, 512).unwrap(), 2.0, 0.7);
        let e = entropy_report(&st, &c, &spec, &s, None, None).unwrap();
        assert_eq!(e.eta_integral, 0.0);
        assert_eq!((e.y, e.j_bad, e.j_good, e.xdot), (0.0, 0.0, 0.0, 0.0));
        let r = error_report(&st, &c, &s).unwrap();
        assert_eq!(r.sup_error, 0.0);
        assert_eq!(r.l2_errors, [0.0; 3]);
        assert_eq!((r.g_s, r.g_r, r.g_pi), (0.0, 0.0, 0.0));
    }

    #[test]
    fn constant_velocity_offset() {
        let (c, spec, s) = setup();
        let grid = Grid::new(50.0, 400).unwrap();
        let mut st = on_composite(&c, grid, 0.0, 0.0);
        for u in &mut st.u {
            *u += 0.1;
        }
        let e = entropy_report(&st, &c, &spec, &s, Some(0.0), None).unwrap();
        // η ≡ 0.005, so E = 0.005 ∫ a
        let int_a = grid.trapezoid(grid.centers().into_iter().map(|x| spec.weight(c.shock().unwrap(), x)));
        assert!((e.eta_integral - 0.005 * int_a).abs() < 1e-12);
        let r = error_report(&st, &c, &s).unwrap();
        assert!((r.sup_error - 0.1).abs() < 1e-15);
    }

    #[test]
    fn shock_dissipation_integrates_the_jump() {
        let (c, _, s) = setup();
        let grid = Grid::new(200.0, 4000).unwrap();
        let mut st = on_composite(&c, grid, 0.0, 0.0);
        for v in &mut st.v {
            *v += 0.01;
        }
        let r = error_report(&st, &c, &s).unwrap();
        assert!((r.g_s - 1e-4 * 0.2).abs() < 1e-10, "{}", r.g_s);
        assert!(r.g_r > 0.0);
    }

    #[test]
    fn equilibrium_gap_vanishes() {
        let grid = Grid::new(10.0, 200).unwrap();
        let mut st = FieldState::constant(grid, 0.0, [1.0, 0.0, 0.0]).unwrap();
        for i in 0..200 {
            st.u[i] = 0.3 * grid.center(i);
            st.v[i] = 1.0 + 0.01 * i as f64;
            st.pi[i] = 2.0 * 0.3 / st.v[i];
        }
        assert!(relaxation_gap(&st, 2.0) < 1e-13);
    }

    #[test]
    fn single_rarefaction_has_no_weight() {
        let g = GasModel::new(2.0, 1.0, 0.01).unwrap();
        let es = WaveEndStates::build(&g, 1.2, 0.0, 1.0, 0.9).unwrap();
        let full = CompositeWave::build(&g, &es, 1e-10, None, 2.0).unwrap();
        let spec = WeightSpec::with_default_amplitude(full.shock().unwrap()).unwrap();
        let raref = CompositeWave::from_parts(&g, es.sigma, (1.0, es.u_m), None, full.rarefaction().cloned());
        let st = on_composite(&raref, Grid::new(10.0, 64).unwrap(), 0.0, 0.0);
        let s = ShiftState::new(&g, 1.0);
        assert!(matches!(
            entropy_report(&st, &raref, &spec, &s, None, None),
            Err(Error::IncompleteIngredients(_))
        ));
    }
}
