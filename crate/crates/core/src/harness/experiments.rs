//! The experiments behind the CLI subcommands.
//!
//! Each function returns a typed summary together with the tables and
//! charts that [`emit_outputs`](super::emit_outputs) turns into files.
//! Pass/fail thresholds are constants of this module and are echoed in
//! the summaries.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentConfig, ExperimentKind, Field, Resolved};
use super::output::{Artifacts, Line, Series, Table};
use crate::diagnostics::{composite_on_grid, entropy_report_with, error_report_with, relaxation_defect, relaxation_gap};
use crate::eos::GasModel;
use crate::error::{Error, Result};
use crate::shift::{transition_cells, ShiftState, ShiftTracker, WeightSpec, MIN_TRANSITION_CELLS};
use crate::solver::{run, stable_dt, FieldState, Grid, RunSummary, Scheme, SolverConfig};
use crate::waves::{CompositeWave, ProfileCheck};

/// Largest admissible `sup_error(T)/sup_error(0)` above the floor.
pub const DECAY_THRESHOLD: f64 = 0.2;
/// Largest admissible ratio of late to early `max |Ẋ|`.
pub const XDOT_TREND_THRESHOLD: f64 = 0.2;
/// Smallest admissible drop of the identity residual under refinement.
pub const REFINEMENT_THRESHOLD: f64 = 1.7;
/// Smallest admissible fitted exponent of the relaxation gap in `τ`.
pub const GAP_EXPONENT_THRESHOLD: f64 = 0.5;
/// `κ` in the bound `E(t) ≤ 2E(0) + κ δ_R^θ` on the weighted entropy.
pub const ENTROPY_MARGIN_KAPPA: f64 = 1e-3;
/// Fraction of the common relaxation-sweep step below every stable step.
const SWEEP_DT_SAFETY: f64 = 0.9;
/// The common sweep step resolves the smallest relaxation time:
/// `dt ≤ τ_min / SWEEP_STEPS_PER_TAU`.
const SWEEP_STEPS_PER_TAU: f64 = 2.0;

/// Header of the diagnostics time series.
pub const DIAGNOSTICS_HEADER: &str = "t,eta,Y,Jbad,Jgood,residual,supE,l2v,l2u,l2pi,gS,gR,gPi,relaxgap,X,Xdot";

/// Waves, weight and resolved numbers for one configuration.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub config: ExperimentConfig,
    pub resolved: Resolved,
    pub composite: CompositeWave,
    pub spec: WeightSpec,
    pub config_hash: String,
}

impl Prepared {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        let resolved = config.validate()?;
        let composite = build_composite(config, &resolved, &resolved.model)?;
        let shock = composite
            .shock()
            .ok_or_else(|| Error::InvalidWaveConfiguration("configuration has no shock".into()))?;
        let spec = WeightSpec::new(shock, resolved.lambda_amp)?;
        Ok(Self {
            config: config.clone(),
            resolved,
            composite,
            spec,
            config_hash: config.content_hash()?,
        })
    }

    fn drift_constant(&self) -> f64 {
        crate::shift::drift_constant(&self.resolved.model, self.resolved.end_states.v_m)
    }

    /// Composite wave at `t = 0`, plus the perturbation when `perturbed`.
    /// `Π` starts on the composite.
    pub fn initial_state(&self, grid: Grid, perturbed: bool) -> Result<FieldState> {
        let fields = &self.config.perturbation.target_fields;
        let (on_v, on_u) = (fields.contains(&Field::V), fields.contains(&Field::U));
        FieldState::from_fn(grid, 0.0, |xi| {
            let (v, u, pi) = self.composite.eval(0.0, xi, 0.0)?;
            let b = if perturbed { self.resolved.bump(&self.config, xi) } else { 0.0 };
            Ok([v + if on_v { b } else { 0.0 }, u + if on_u { b } else { 0.0 }, pi])
        })
    }

    fn solver_config(&self) -> SolverConfig {
        let s = &self.config.solver;
        SolverConfig {
            cfl: s.cfl,
            end_time: s.end_time,
            scheme: Scheme::RelaxedImex,
            boundary: Default::default(),
            sigma: self.resolved.end_states.sigma,
            output_stride: s.output_stride,
            max_dt: None,
        }
    }

    /// Cells across the shock transition on `grid`, with a warning when
    /// the transition is under-resolved.
    fn resolution(&self, grid: &Grid) -> (f64, Option<String>) {
        let cells = transition_cells(self.composite.shock().expect("checked in new"), grid.dx());
        let warning = (cells < MIN_TRANSITION_CELLS).then(|| {
            format!("only {cells:.1} cells across the shock transition (want at least {MIN_TRANSITION_CELLS})")
        });
        (cells, warning)
    }
}

fn build_composite(config: &ExperimentConfig, r: &Resolved, model: &GasModel) -> Result<CompositeWave> {
    CompositeWave::build(model, &r.end_states, config.waves.profile_tol, r.eps, config.waves.q)
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start {jobs} worker threads: {e}")))
}

fn require(config: &ExperimentConfig, kinds: &[ExperimentKind], what: &str) -> Result<()> {
    if kinds.contains(&config.experiment) {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "{what} cannot run a configuration with experiment = \"{}\"",
            config.experiment
        )))
    }
}

/// One sample of the diagnostics time series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagnosticRow {
    pub t: f64,
    pub eta: f64,
    pub y: f64,
    pub j_bad: f64,
    pub j_good: f64,
    pub residual: Option<f64>,
    pub sup_error: f64,
    pub l2_errors: [f64; 3],
    pub g_s: f64,
    pub g_r: f64,
    pub g_pi: f64,
    pub relaxation_gap: f64,
    pub x: f64,
    /// Shift rate at the sampled state and shift.
    pub xdot: f64,
}

impl DiagnosticRow {
    fn values(&self) -> Vec<f64> {
        vec![
            self.t,
            self.eta,
            self.y,
            self.j_bad,
            self.j_good,
            self.residual.unwrap_or(f64::NAN),
            self.sup_error,
            self.l2_errors[0],
            self.l2_errors[1],
            self.l2_errors[2],
            self.g_s,
            self.g_r,
            self.g_pi,
            self.relaxation_gap,
            self.x,
            self.xdot,
        ]
    }
}

/// A coupled run with its sampled diagnostics.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub rows: Vec<DiagnosticRow>,
    pub run: RunSummary,
    pub negative_good_terms: BTreeSet<String>,
}

impl Trajectory {
    fn table(&self, name: &str) -> Table {
        let mut t = Table::new(name, DIAGNOSTICS_HEADER);
        for r in &self.rows {
            t.push(r.values());
        }
        t
    }

    fn shift_table(&self) -> Table {
        let mut t = Table::new("shift", "t,X,Xdot");
        for r in &self.rows {
            t.push(vec![r.t, r.x, r.xdot]);
        }
        t
    }

    fn line(&self, label: &str, f: impl Fn(&DiagnosticRow) -> f64) -> Line {
        Line {
            label: label.into(),
            points: self.rows.iter().map(|r| (r.t, f(r))).collect(),
        }
    }

    /// Largest identity residual over the run.
    pub fn max_residual(&self) -> f64 {
        self.rows.iter().filter_map(|r| r.residual).fold(0.0, f64::max)
    }

    /// Shift at time `t` by linear interpolation between samples.
    pub fn shift_at(&self, t: f64) -> f64 {
        let k = self.rows.partition_point(|r| r.t < t);
        if k == 0 {
            return self.rows[0].x;
        }
        if k == self.rows.len() {
            return self.rows[k - 1].x;
        }
        let (a, b) = (&self.rows[k - 1], &self.rows[k]);
        a.x + (b.x - a.x) * (t - a.t) / (b.t - a.t)
    }
}

/// Runs the relaxed solver coupled to the shift from `initial`, sampling
/// the entropy and error diagnostics every `stride` steps.
pub fn coupled_run(prep: &Prepared, initial: FieldState, stride: usize) -> Result<Trajectory> {
    let model = prep.resolved.model;
    let cfg = SolverConfig {
        output_stride: stride,
        ..prep.solver_config()
    };
    let shift = ShiftState::new(&model, prep.resolved.end_states.v_m);
    let mut tracker = ShiftTracker::new(&prep.composite, &prep.spec, shift.m);
    let mut rows: Vec<DiagnosticRow> = Vec::new();
    let mut negative = BTreeSet::new();
    let mut previous = None;
    let mut sampler = |_: usize, state: &FieldState, sh: &ShiftState| -> Result<()> {
        let raref = prep.composite.raref_column(state.t, &state.grid.centers())?;
        let samples = composite_on_grid(state, &prep.composite, &raref, sh.x)?;
        let e = entropy_report_with(state, &prep.composite, &prep.spec, sh, &samples, None, previous.as_ref())?;
        let err = error_report_with(state, &prep.composite, &samples);
        negative.extend(e.negative_good_terms.iter().cloned());
        rows.push(DiagnosticRow {
            t: state.t,
            eta: e.eta_integral,
            y: e.y,
            j_bad: e.j_bad,
            j_good: e.j_good,
            residual: e.identity_residual,
            sup_error: err.sup_error,
            l2_errors: err.l2_errors,
            g_s: err.g_s,
            g_r: err.g_r,
            g_pi: err.g_pi,
            relaxation_gap: err.relaxation_gap,
            x: sh.x,
            xdot: e.xdot,
        });
        previous = Some(e);
        Ok(())
    };
    let summary = run(initial, &model, &cfg, &prep.composite, Some(&mut tracker), shift, &mut sampler)?;
    Ok(Trajectory {
        rows,
        run: summary,
        negative_good_terms: negative,
    })
}

/// Discrete `H²` norm of the perturbation on `grid`, by central differences.
pub fn perturbation_h2_norm(prep: &Prepared, grid: &Grid) -> f64 {
    let fields = prep.config.perturbation.target_fields.iter().collect::<BTreeSet<_>>().len() as f64;
    let dx = grid.dx();
    let b: Vec<f64> = grid.centers().iter().map(|&x| prep.resolved.bump(&prep.config, x)).collect();
    let n = b.len();
    let at = |i: isize| if i < 0 || i >= n as isize { 0.0 } else { b[i as usize] };
    let density = (0..n as isize).map(|i| {
        let d1 = (at(i + 1) - at(i - 1)) / (2.0 * dx);
        let d2 = (at(i + 1) - 2.0 * at(i) + at(i - 1)) / (dx * dx);
        at(i).powi(2) + d1 * d1 + d2 * d2
    });
    (fields * grid.trapezoid(density)).sqrt()
}

/// `(E_max, 2E(0) + κ δ_R^θ)` for a trajectory.
fn entropy_bound(prep: &Prepared, rows: &[DiagnosticRow]) -> (f64, f64, f64) {
    let q = prep.config.waves.q;
    let theta = 0.5f64.min(1.5 - 1.0 / q);
    let margin = ENTROPY_MARGIN_KAPPA * prep.resolved.end_states.delta_r.powf(theta);
    let eta0 = rows[0].eta;
    let max = rows.iter().map(|r| r.eta).fold(f64::NEG_INFINITY, f64::max);
    let min = rows.iter().map(|r| r.eta).fold(f64::INFINITY, f64::min);
    (min, max, 2.0 * eta0 + margin)
}

#[derive(Debug, Clone, Serialize)]
pub struct WaveInfo {
    pub sigma: f64,
    pub delta_s: f64,
    pub delta_r: f64,
    pub v_minus: f64,
    pub u_minus: f64,
    pub v_m: f64,
    pub u_m: f64,
    pub v_plus: f64,
    pub u_plus: f64,
    pub tau: f64,
    pub tau_window: f64,
    pub lambda_amp: f64,
    pub drift_constant: f64,
    pub eps: Option<f64>,
}

impl WaveInfo {
    fn new(prep: &Prepared) -> Self {
        let es = &prep.resolved.end_states;
        Self {
            sigma: es.sigma,
            delta_s: es.delta_s,
            delta_r: es.delta_r,
            v_minus: es.v_minus,
            u_minus: es.u_minus,
            v_m: es.v_m,
            u_m: es.u_m,
            v_plus: es.v_plus,
            u_plus: es.u_plus,
            tau: prep.resolved.model.tau(),
            tau_window: prep.resolved.tau_window,
            lambda_amp: prep.resolved.lambda_amp,
            drift_constant: prep.drift_constant(),
            eps: prep.composite.rarefaction().map(|r| r.eps()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GridInfo {
    pub half_width: f64,
    pub cells: usize,
    pub dx: f64,
    pub transition_cells: f64,
    pub resolution_warning: Option<String>,
}

impl GridInfo {
    fn new(prep: &Prepared, grid: &Grid) -> Self {
        let (transition_cells, resolution_warning) = prep.resolution(grid);
        Self {
            half_width: grid.half_width(),
            cells: grid.cells(),
            dx: grid.dx(),
            transition_cells,
            resolution_warning,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct StabilityChecks {
    /// `(sup_error(T) − floor(T)) / sup_error(0) < DECAY_THRESHOLD`.
    pub decay: bool,
    /// Late `max |Ẋ|` below `XDOT_TREND_THRESHOLD` times the early one.
    pub xdot_trend: bool,
    /// `|X(T)|/T < |X(T/4)|/(T/4)`.
    pub x_over_t: bool,
}

impl StabilityChecks {
    pub fn all(&self) -> bool {
        self.decay && self.xdot_trend && self.x_over_t
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilitySummary {
    pub experiment: ExperimentKind,
    pub waves: WaveInfo,
    pub grid: GridInfo,
    pub end_time: f64,
    pub steps: usize,
    pub max_conservation_residual: [f64; 2],
    pub perturbation_h2_norm: f64,
    pub sup_error_initial: f64,
    pub sup_error_final: f64,
    /// `sup_error(T)` of the unperturbed run.
    pub floor_sup_error_final: f64,
    pub decay_ratio: f64,
    pub decay_ratio_above_floor: f64,
    pub xdot_first_decile_max: f64,
    pub xdot_last_decile_max: f64,
    pub xdot_trend_ratio: f64,
    pub shift_final: f64,
    pub shift_quarter: f64,
    pub shift_over_t_final: f64,
    pub shift_over_t_quarter: f64,
    pub floor_shift_final: f64,
    pub entropy_initial: f64,
    pub entropy_min: f64,
    pub entropy_max: f64,
    pub entropy_bound: f64,
    /// `0 ≤ E(t) ≤ 2E(0) + κ δ_R^θ`; reported, not part of the checks.
    pub entropy_within_bound: bool,
    pub max_identity_residual: f64,
    pub negative_good_terms: Vec<String>,
    pub thresholds: StabilityThresholds,
    pub checks: StabilityChecks,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct StabilityThresholds {
    pub decay: f64,
    pub xdot_trend: f64,
    pub entropy_margin_kappa: f64,
}

/// Result of an experiment: a typed summary and its files.
#[derive(Debug, Clone)]
pub struct Report<S> {
    pub summary: S,
    pub artifacts: Artifacts,
}

/// Perturbed run of the composite wave, alongside the unperturbed run that
/// measures how far the composite itself is from a solution.
pub fn run_stability(config: &ExperimentConfig, jobs: usize) -> Result<Report<StabilitySummary>> {
    require(config, &[ExperimentKind::Stability], "stability")?;
    let prep = Prepared::new(config)?;
    let grid = prep.resolved.grid;
    let stride = config.solver.output_stride;
    let perturbed = prep.initial_state(grid, true)?;
    let floor = prep.initial_state(grid, false)?;
    let (pert, base) = if jobs > 1 {
        let (a, b) = pool(jobs)?.install(|| {
            rayon::join(
                || coupled_run(&prep, perturbed, stride),
                || coupled_run(&prep, floor, stride),
            )
        });
        (a?, b?)
    } else {
        (coupled_run(&prep, perturbed, stride)?, coupled_run(&prep, floor, stride)?)
    };

    let t_end = config.solver.end_time;
    let first = &pert.rows[0];
    let last = pert.rows.last().expect("run samples its final state");
    let floor_last = base.rows.last().expect("run samples its final state");
    let decile = |lo: f64, hi: f64| {
        pert.rows
            .iter()
            .filter(|r| r.t >= lo && r.t <= hi)
            .map(|r| r.xdot.abs())
            .fold(0.0, f64::max)
    };
    let early = decile(0.0, 0.1 * t_end);
    let late = decile(0.9 * t_end, t_end);
    let quarter = pert.shift_at(0.25 * t_end);
    let x_t = last.x.abs() / t_end;
    let x_q = quarter.abs() / (0.25 * t_end);
    let (eta_min, eta_max, eta_bound) = entropy_bound(&prep, &pert.rows);
    let decay_ratio_above_floor = (last.sup_error - floor_last.sup_error) / first.sup_error;
    let checks = StabilityChecks {
        decay: decay_ratio_above_floor < DECAY_THRESHOLD,
        xdot_trend: late < XDOT_TREND_THRESHOLD * early,
        x_over_t: x_t < x_q,
    };
    let summary = StabilitySummary {
        experiment: ExperimentKind::Stability,
        waves: WaveInfo::new(&prep),
        grid: GridInfo::new(&prep, &grid),
        end_time: t_end,
        steps: pert.run.steps,
        max_conservation_residual: pert.run.max_conservation_residual,
        perturbation_h2_norm: perturbation_h2_norm(&prep, &grid),
        sup_error_initial: first.sup_error,
        sup_error_final: last.sup_error,
        floor_sup_error_final: floor_last.sup_error,
        decay_ratio: last.sup_error / first.sup_error,
        decay_ratio_above_floor,
        xdot_first_decile_max: early,
        xdot_last_decile_max: late,
        xdot_trend_ratio: late / early,
        shift_final: last.x,
        shift_quarter: quarter,
        shift_over_t_final: x_t,
        shift_over_t_quarter: x_q,
        floor_shift_final: floor_last.x,
        entropy_initial: first.eta,
        entropy_min: eta_min,
        entropy_max: eta_max,
        entropy_bound: eta_bound,
        entropy_within_bound: eta_min >= 0.0 && eta_max <= eta_bound,
        max_identity_residual: pert.max_residual(),
        negative_good_terms: pert.negative_good_terms.iter().cloned().collect(),
        thresholds: StabilityThresholds {
            decay: DECAY_THRESHOLD,
            xdot_trend: XDOT_TREND_THRESHOLD,
            entropy_margin_kappa: ENTROPY_MARGIN_KAPPA,
        },
        checks,
    };

    let mut artifacts = Artifacts::default();
    artifacts.tables.push(pert.table("diagnostics"));
    artifacts.tables.push(base.table("floor_diagnostics"));
    artifacts.tables.push(pert.shift_table());
    push_state(&mut artifacts, "final_state", &pert.run.state, &prep);
    artifacts.series = vec![
        Series {
            name: "sup_error".into(),
            x_label: "t".into(),
            y_label: "sup |U - U~|".into(),
            lines: vec![pert.line("perturbed", |r| r.sup_error), base.line("floor", |r| r.sup_error)],
        },
        Series {
            name: "eta".into(),
            x_label: "t".into(),
            y_label: "weighted relative entropy".into(),
            lines: vec![pert.line("perturbed", |r| r.eta), base.line("floor", |r| r.eta)],
        },
        Series {
            name: "xdot".into(),
            x_label: "t".into(),
            y_label: "|Xdot|".into(),
            lines: vec![pert.line("perturbed", |r| r.xdot.abs()), base.line("floor", |r| r.xdot.abs())],
        },
    ];
    Ok(Report { summary, artifacts })
}

fn push_state(artifacts: &mut Artifacts, name: &str, state: &FieldState, prep: &Prepared) {
    let mut t = Table::new(name, "xi,v,u,pi");
    for i in 0..state.grid.cells() {
        t.push(vec![state.grid.center(i), state.v[i], state.u[i], state.pi[i]]);
    }
    artifacts.tables.push(t);
    let side = state.sidecar(&prep.resolved.model, prep.resolved.end_states.sigma);
    artifacts
        .sidecars
        .push((name.into(), serde_json::to_value(side).expect("sidecar serialises")));
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationSummary {
    pub experiment: &'static str,
    pub waves: WaveInfo,
    pub grid: GridInfo,
    pub end_time: f64,
    pub steps: usize,
    pub max_conservation_residual: [f64; 2],
    pub sup_error_initial: f64,
    pub sup_error_final: f64,
    pub shift_final: f64,
    pub entropy_initial: f64,
    pub entropy_final: f64,
    pub negative_good_terms: Vec<String>,
}

/// A single coupled run of the configured perturbation, without reference
/// runs or pass/fail checks.
pub fn run_simulation(config: &ExperimentConfig) -> Result<Report<SimulationSummary>> {
    require(config, &[ExperimentKind::Stability, ExperimentKind::EntropyCheck], "simulate")?;
    let prep = Prepared::new(config)?;
    let grid = prep.resolved.grid;
    let traj = coupled_run(&prep, prep.initial_state(grid, true)?, config.solver.output_stride)?;
    let first = &traj.rows[0];
    let last = traj.rows.last().expect("final sample");
    let summary = SimulationSummary {
        experiment: "simulate",
        waves: WaveInfo::new(&prep),
        grid: GridInfo::new(&prep, &grid),
        end_time: config.solver.end_time,
        steps: traj.run.steps,
        max_conservation_residual: traj.run.max_conservation_residual,
        sup_error_initial: first.sup_error,
        sup_error_final: last.sup_error,
        shift_final: last.x,
        entropy_initial: first.eta,
        entropy_final: last.eta,
        negative_good_terms: traj.negative_good_terms.iter().cloned().collect(),
    };
    let mut artifacts = Artifacts::default();
    artifacts.tables.push(traj.table("diagnostics"));
    artifacts.tables.push(traj.shift_table());
    push_state(&mut artifacts, "final_state", &traj.run.state, &prep);
    artifacts.series = vec![
        Series {
            name: "sup_error".into(),
            x_label: "t".into(),
            y_label: "sup |U - U~|".into(),
            lines: vec![traj.line("run", |r| r.sup_error)],
        },
        Series {
            name: "eta".into(),
            x_label: "t".into(),
            y_label: "weighted relative entropy".into(),
            lines: vec![traj.line("run", |r| r.eta)],
        },
        Series {
            name: "xdot".into(),
            x_label: "t".into(),
            y_label: "|Xdot|".into(),
            lines: vec![traj.line("run", |r| r.xdot.abs())],
        },
    ];
    Ok(Report { summary, artifacts })
}

#[derive(Debug, Clone, Serialize)]
pub struct EntropyLevel {
    pub cells: usize,
    pub dx: f64,
    pub steps: usize,
    pub samples: usize,
    pub max_identity_residual: f64,
    pub max_abs_rhs: f64,
    pub entropy_initial: f64,
    pub entropy_min: f64,
    pub entropy_max: f64,
    pub entropy_bound: f64,
    pub negative_good_terms: Vec<String>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EntropyChecks {
    /// Residual on `N` over residual on `2N` at least `REFINEMENT_THRESHOLD`.
    pub refinement: bool,
    pub entropy_nonnegative: bool,
    pub entropy_bounded: bool,
}

impl EntropyChecks {
    pub fn all(&self) -> bool {
        self.refinement && self.entropy_nonnegative && self.entropy_bounded
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EntropyCheckSummary {
    pub experiment: ExperimentKind,
    pub waves: WaveInfo,
    pub grid: GridInfo,
    pub end_time: f64,
    pub output_stride: usize,
    pub levels: Vec<EntropyLevel>,
    pub refinement_factor: f64,
    pub refinement_threshold: f64,
    pub checks: EntropyChecks,
}

/// Checks the entropy balance `dE/dt = Ẋ Y + J_bad − J_good` on the
/// configured grid and on one twice as fine. The sampling stride is fixed
/// in steps, so both the sample spacing in time and `dx` halve.
pub fn run_entropy_check(config: &ExperimentConfig, jobs: usize) -> Result<Report<EntropyCheckSummary>> {
    require(config, &[ExperimentKind::EntropyCheck], "entropy-check")?;
    let prep = Prepared::new(config)?;
    let coarse = prep.resolved.grid;
    let fine = Grid::new(coarse.half_width(), 2 * coarse.cells())?;
    let stride = config.solver.output_stride;
    let runs: Vec<Result<Trajectory>> = pool(jobs)?.install(|| {
        [coarse, fine]
            .into_par_iter()
            .map(|g| coupled_run(&prep, prep.initial_state(g, true)?, stride))
            .collect()
    });
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let levels: Vec<EntropyLevel> = runs
        .iter()
        .zip([coarse, fine])
        .map(|(tr, g)| {
            let (min, max, bound) = entropy_bound(&prep, &tr.rows);
            EntropyLevel {
                cells: g.cells(),
                dx: g.dx(),
                steps: tr.run.steps,
                samples: tr.rows.len(),
                max_identity_residual: tr.max_residual(),
                max_abs_rhs: tr
                    .rows
                    .iter()
                    .map(|r| (r.j_bad - r.j_good + r.xdot * r.y).abs())
                    .fold(0.0, f64::max),
                entropy_initial: tr.rows[0].eta,
                entropy_min: min,
                entropy_max: max,
                entropy_bound: bound,
                negative_good_terms: tr.negative_good_terms.iter().cloned().collect(),
            }
        })
        .collect();
    let factor = levels[0].max_identity_residual / levels[1].max_identity_residual;
    let checks = EntropyChecks {
        refinement: factor >= REFINEMENT_THRESHOLD,
        entropy_nonnegative: levels.iter().all(|l| l.entropy_min >= 0.0),
        entropy_bounded: levels.iter().all(|l| l.entropy_max <= l.entropy_bound),
    };
    let summary = EntropyCheckSummary {
        experiment: ExperimentKind::EntropyCheck,
        waves: WaveInfo::new(&prep),
        grid: GridInfo::new(&prep, &coarse),
        end_time: config.solver.end_time,
        output_stride: stride,
        levels,
        refinement_factor: factor,
        refinement_threshold: REFINEMENT_THRESHOLD,
        checks,
    };
    let mut artifacts = Artifacts::default();
    let mut residual_lines = Vec::new();
    for (tr, g) in runs.iter().zip([coarse, fine]) {
        artifacts.tables.push(tr.table(&format!("diagnostics_N{}", g.cells())));
        residual_lines.push(tr.line(&format!("N={}", g.cells()), |r| r.residual.unwrap_or(f64::NAN)));
    }
    artifacts.series = vec![
        Series {
            name: "identity_residual".into(),
            x_label: "t".into(),
            y_label: "|dE/dt - (Xdot Y + Jbad - Jgood)|".into(),
            lines: residual_lines,
        },
        Series {
            name: "eta".into(),
            x_label: "t".into(),
            y_label: "weighted relative entropy".into(),
            lines: runs
                .iter()
                .zip([coarse, fine])
                .map(|(tr, g)| tr.line(&format!("N={}", g.cells()), |r| r.eta))
                .collect(),
        },
    ];
    Ok(Report { summary, artifacts })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    /// `0` marks the classical reference.
    pub tau: f64,
    pub steps: usize,
    /// `‖(v^τ, u^τ) − (v^0, u^0)‖` at the end time.
    pub l2_difference: f64,
    /// `‖Π^τ − μu^τ_ξ/v^τ‖` at the end time.
    pub relaxation_gap: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepChecks {
    pub difference_decreasing: bool,
    pub gap_decreasing: bool,
    pub gap_exponent: bool,
}

impl SweepChecks {
    pub fn all(&self) -> bool {
        self.difference_decreasing && self.gap_decreasing && self.gap_exponent
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub experiment: ExperimentKind,
    pub waves: WaveInfo,
    pub half_width: f64,
    pub cells: usize,
    pub dx: f64,
    pub end_time: f64,
    /// Time step shared by all runs.
    pub dt: f64,
    pub rows: Vec<SweepRow>,
    pub classical: SweepRow,
    pub difference_exponent: f64,
    pub gap_exponent: f64,
    pub gap_exponent_threshold: f64,
    /// Non-fatal findings such as a non-monotone column.
    pub flags: Vec<String>,
    pub checks: SweepChecks,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Relaxed runs for every `τ` of the sweep and one classical run, all from
/// the same equilibrium data `Π = μu_ξ/v` and with the same time step,
/// compared at the end time.
pub fn run_relax_sweep(config: &ExperimentConfig, jobs: usize) -> Result<Report<SweepSummary>> {
    require(config, &[ExperimentKind::RelaxSweep], "relax-sweep")?;
    let resolved = config.validate()?;
    let taus = config.sweep.as_ref().expect("validated").tau_list.clone();
    let classical_model = resolved.model.with_tau(0.0)?;
    let composite = build_composite(config, &resolved, &classical_model)?;
    let prep = Prepared {
        config: config.clone(),
        resolved,
        spec: WeightSpec::new(composite.shock().expect("validated shock"), resolved.lambda_amp)?,
        composite,
        config_hash: config.content_hash()?,
    };
    let grid = resolved.grid;
    let mu = resolved.model.mu();
    let mut initial = prep.initial_state(grid, true)?;
    initial.pi.iter_mut().for_each(|p| *p = 0.0);
    initial.pi = relaxation_defect(&initial, mu).iter().map(|d| -d).collect();

    let sigma = resolved.end_states.sigma;
    let cfl = config.solver.cfl;
    let mut dt = stable_dt(&initial, &classical_model, Scheme::ClassicalReference, sigma, cfl)?;
    for &tau in &taus {
        dt = dt.min(stable_dt(&initial, &resolved.model.with_tau(tau)?, Scheme::RelaxedImex, sigma, cfl)?);
    }
    let tau_min = taus.iter().copied().fold(f64::INFINITY, f64::min);
    let dt = (SWEEP_DT_SAFETY * dt).min(tau_min / SWEEP_STEPS_PER_TAU);

    let jobs_list: Vec<Option<f64>> = std::iter::once(None).chain(taus.iter().copied().map(Some)).collect();
    let stride = config.solver.output_stride;
    let outcomes: Vec<Result<(RunSummary, Vec<(f64, f64)>)>> = pool(jobs)?.install(|| {
        jobs_list
            .par_iter()
            .map(|tau| {
                let (model, scheme) = match tau {
                    Some(t) => (resolved.model.with_tau(*t)?, Scheme::RelaxedImex),
                    None => (classical_model, Scheme::ClassicalReference),
                };
                let cfg = SolverConfig {
                    cfl,
                    end_time: config.solver.end_time,
                    scheme,
                    boundary: Default::default(),
                    sigma,
                    output_stride: stride,
                    max_dt: Some(dt),
                };
                let mut gaps = Vec::new();
                let mut sampler = |_: usize, s: &FieldState, _: &ShiftState| -> Result<()> {
                    gaps.push((s.t, relaxation_gap(s, mu)));
                    Ok(())
                };
                let shift = ShiftState::new(&model, resolved.end_states.v_m);
                let out = run(initial.clone(), &model, &cfg, &prep.composite, None, shift, &mut sampler)?;
                Ok((out, gaps))
            })
            .collect()
    });
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
    let reference = &outcomes[0].0.state;
    let row = |tau: f64, out: &RunSummary| {
        let s = &out.state;
        let d = grid.trapezoid(
            (0..grid.cells()).map(|i| (s.v[i] - reference.v[i]).powi(2) + (s.u[i] - reference.u[i]).powi(2)),
        );
        SweepRow {
            tau,
            steps: out.steps,
            l2_difference: d.sqrt(),
            relaxation_gap: relaxation_gap(s, mu),
        }
    };
    let classical = row(0.0, &outcomes[0].0);
    let rows: Vec<SweepRow> = taus.iter().zip(&outcomes[1..]).map(|(&t, o)| row(t, &o.0)).collect();

    let strictly_decreasing = |f: &dyn Fn(&SweepRow) -> f64| rows.windows(2).all(|w| f(&w[1]) < f(&w[0]));
    let difference_decreasing = strictly_decreasing(&|r| r.l2_difference);
    let gap_decreasing = strictly_decreasing(&|r| r.relaxation_gap);
    let distinct: BTreeSet<u64> = taus.iter().map(|t| t.to_bits()).collect();
    let (difference_exponent, gap_exponent) = if distinct.len() >= 2 {
        (
            log_log_slope(&rows.iter().map(|r| (r.tau, r.l2_difference)).collect::<Vec<_>>()),
            log_log_slope(&rows.iter().map(|r| (r.tau, r.relaxation_gap)).collect::<Vec<_>>()),
        )
    } else {
        (f64::NAN, f64::NAN)
    };
    let mut flags = Vec::new();
    if !difference_decreasing {
        flags.push("l2_difference is not strictly decreasing across the sweep".to_string());
    }
    if !gap_decreasing {
        flags.push("relaxation_gap is not strictly decreasing across the sweep".to_string());
    }
    if rows.iter().any(|r| r.steps != classical.steps) {
        flags.push("runs took different numbers of steps".to_string());
    }
    let checks = SweepChecks {
        difference_decreasing,
        gap_decreasing,
        gap_exponent: gap_exponent >= GAP_EXPONENT_THRESHOLD,
    };

    let mut table = Table::new("sweep", "tau,steps,l2_difference,relaxation_gap");
    for r in std::iter::once(&classical).chain(&rows) {
        table.push(vec![r.tau, r.steps as f64, r.l2_difference, r.relaxation_gap]);
    }
    let lines = jobs_list
        .iter()
        .zip(&outcomes)
        .map(|(tau, (_, gaps))| Line {
            label: tau.map_or("classical".to_string(), |t| format!("tau={t:e}")),
            points: gaps.clone(),
        })
        .collect();
    let artifacts = Artifacts {
        tables: vec![table],
        sidecars: vec![],
        series: vec![Series {
            name: "relaxation_gap".into(),
            x_label: "t".into(),
            y_label: "||Pi - mu u_xi / v||".into(),
            lines,
        }],
    };
    let summary = SweepSummary {
        experiment: ExperimentKind::RelaxSweep,
        waves: WaveInfo::new(&prep),
        half_width: grid.half_width(),
        cells: grid.cells(),
        dx: grid.dx(),
        end_time: config.solver.end_time,
        dt,
        rows,
        classical,
        difference_exponent,
        gap_exponent,
        gap_exponent_threshold: GAP_EXPONENT_THRESHOLD,
        flags,
        checks,
    };
    Ok(Report { summary, artifacts })
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileSummary {
    pub experiment: ExperimentKind,
    pub waves: WaveInfo,
    pub left_rate: f64,
    pub right_rate: f64,
    pub tail_rate: f64,
    pub width: f64,
    pub check: ProfileCheck,
    pub grid: GridInfo,
}

/// Builds the shock profile and reports its consistency checks.
pub fn run_profile(config: &ExperimentConfig) -> Result<Report<ProfileSummary>> {
    let prep = Prepared::new(config)?;
    let profile = prep.composite.shock().expect("checked in Prepared::new");
    let summary = ProfileSummary {
        experiment: ExperimentKind::ProfileOnly,
        waves: WaveInfo::new(&prep),
        left_rate: profile.left_rate(),
        right_rate: profile.right_rate(),
        tail_rate: profile.tail_rate(),
        width: profile.width(),
        check: profile.check(),
        grid: GridInfo::new(&prep, &prep.resolved.grid),
    };
    let mut table = Table::new("profile", "xi,v,u,pi");
    for k in 0..profile.nodes().len() {
        table.push(vec![
            profile.nodes()[k],
            profile.node_v()[k],
            profile.node_u()[k],
            profile.node_pi()[k],
        ]);
    }
    let samples: Vec<(f64, f64)> = profile
        .nodes()
        .iter()
        .map(|&x| (x, profile.eval(x).v_xi))
        .collect();
    let artifacts = Artifacts {
        tables: vec![table],
        sidecars: vec![(
            "profile".into(),
            serde_json::to_value(profile.sidecar()).map_err(|e| Error::Serde(e.to_string()))?,
        )],
        series: vec![Series {
            name: "profile_slope".into(),
            x_label: "xi".into(),
            y_label: "v_xi".into(),
            lines: vec![Line {
                label: "v_xi".into(),
                points: samples,
            }],
        }],
    };
    Ok(Report { summary, artifacts })
}

/// Summary JSON with the config echo and hash attached, and whether every
/// check of the experiment passed.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub summary: serde_json::Value,
    pub artifacts: Artifacts,
    pub passed: Option<bool>,
}

fn outcome<S: Serialize>(config: &ExperimentConfig, report: Report<S>, passed: Option<bool>) -> Result<Outcome> {
    let mut summary = serde_json::to_value(&report.summary).map_err(|e| Error::Serde(e.to_string()))?;
    let obj = summary.as_object_mut().expect("summaries are structs");
    obj.insert("config_hash".into(), config.content_hash()?.into());
    obj.insert(
        "config".into(),
        serde_json::to_value(config).map_err(|e| Error::Serde(e.to_string()))?,
    );
    Ok(Outcome {
        summary,
        artifacts: report.artifacts,
        passed,
    })
}

/// Runs whichever experiment the configuration names.
pub fn run_experiment(config: &ExperimentConfig, jobs: usize) -> Result<Outcome> {
    match config.experiment {
        ExperimentKind::Stability => {
            let r = run_stability(config, jobs)?;
            let ok = r.summary.checks.all();
            outcome(config, r, Some(ok))
        }
        ExperimentKind::RelaxSweep => {
            let r = run_relax_sweep(config, jobs)?;
            let ok = r.summary.checks.all();
            outcome(config, r, Some(ok))
        }
        ExperimentKind::EntropyCheck => {
            let r = run_entropy_check(config, jobs)?;
            let ok = r.summary.checks.all();
            outcome(config, r, Some(ok))
        }
        ExperimentKind::ProfileOnly => outcome(config, run_profile(config)?, None),
    }
}

/// Runs [`run_profile`] and attaches the config. Any experiment kind is
/// accepted since only the waves are used.
pub fn profile(config: &ExperimentConfig) -> Result<Outcome> {
    outcome(config, run_profile(config)?, None)
}

/// Runs [`run_simulation`] and attaches the config.
pub fn simulate(config: &ExperimentConfig) -> Result<Outcome> {
    outcome(config, run_simulation(config)?, None)
}
