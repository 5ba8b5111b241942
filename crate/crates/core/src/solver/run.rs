use super::grid::FieldState;
use super::scheme::{stable_dt, step_with_dt, FarField, SolverConfig};
use crate::eos::GasModel;
use crate::error::{Error, Result};
use crate::shift::ShiftState;

/// Evaluates the shift rate `Ẋ` for a state and a trial shift.
pub trait ShiftRate {
    fn rate(&mut self, state: &FieldState, shift: f64) -> Result<f64>;
}

/// Called at step 0, every `output_stride` steps and after the last step.
pub trait Sampler {
    fn sample(&mut self, step: usize, state: &FieldState, shift: &ShiftState) -> Result<()>;
}

impl<F> Sampler for F
where
    F: FnMut(usize, &FieldState, &ShiftState) -> Result<()>,
{
    fn sample(&mut self, step: usize, state: &FieldState, shift: &ShiftState) -> Result<()> {
        self(step, state, shift)
    }
}

/// Sampler that records nothing.
pub struct NoSampler;

impl Sampler for NoSampler {
    fn sample(&mut self, _: usize, _: &FieldState, _: &ShiftState) -> Result<()> {
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub state: FieldState,
    pub shift: ShiftState,
    pub steps: usize,
    /// Largest per-step conservation residual of `v` and `u`.
    pub max_conservation_residual: [f64; 2],
}

/// Advances `initial` to `config.end_time`. With a coupling, the shift is
/// advanced by Heun's method: the rate at the old state and shift, then at
/// the new state and the predicted shift.
pub fn run(
    initial: FieldState,
    model: &GasModel,
    config: &SolverConfig,
    far: &dyn FarField,
    mut coupling: Option<&mut dyn ShiftRate>,
    mut shift: ShiftState,
    sampler: &mut dyn Sampler,
) -> Result<RunSummary> {
    config.validate()?;
    let mut state = initial;
    let mut steps = 0usize;
    let mut max_res = [0.0f64; 2];
    let end = config.end_time;
    let wrap = |step: usize, t: f64| move |e: Error| Error::Run {
        step,
        t,
        source: Box::new(e),
    };
    sampler.sample(0, &state, &shift).map_err(wrap(0, state.t))?;
    let mut last_sampled = 0;
    while end - state.t > 1e-12 * end.max(1.0) {
        let t = state.t;
        let ctx = wrap(steps + 1, t);
        let mut dt = stable_dt(&state, model, config.scheme, config.sigma, config.cfl).map_err(ctx)?;
        if let Some(cap) = config.max_dt {
            dt = dt.min(cap);
        }
        let remaining = end - t;
        if dt >= remaining || remaining - dt < 1e-9 * dt {
            dt = remaining;
        }
        let xdot_old = match coupling.as_deref_mut() {
            Some(c) => Some(c.rate(&state, shift.x).map_err(wrap(steps + 1, t))?),
            None => None,
        };
        let (mut next, report) = step_with_dt(&state, model, config.scheme, config.sigma, far, shift.x, dt)
            .map_err(wrap(steps + 1, t))?;
        if remaining == dt {
            next.t = end;
        }
        for c in 0..2 {
            max_res[c] = max_res[c].max(report.conservation_residual[c].abs());
        }
        if let (Some(c), Some(k1)) = (coupling.as_deref_mut(), xdot_old) {
            let k2 = c
                .rate(&next, shift.predict(dt, k1))
                .map_err(wrap(steps + 1, next.t))?;
            shift.correct(dt, k1, k2);
        }
        state = next;
        steps += 1;
        if steps.is_multiple_of(config.output_stride) {
            sampler.sample(steps, &state, &shift).map_err(wrap(steps, state.t))?;
            last_sampled = steps;
        }
    }
    if last_sampled != steps {
        sampler.sample(steps, &state, &shift).map_err(wrap(steps, state.t))?;
    }
    Ok(RunSummary {
        state,
        shift,
        steps,
        max_conservation_residual: max_res,
    })
}
