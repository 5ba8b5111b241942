//! Finite-volume evolution on a truncated moving-frame domain.

mod grid;
mod run;
mod scheme;

pub use grid::{FieldState, Grid, SnapshotSidecar};
pub use run::{run, NoSampler, RunSummary, Sampler, ShiftRate};
pub use scheme::{
    characteristic_speeds, stable_dt, step_classical, step_relaxed, step_with_dt, BoundaryKind, ConstantStates,
    FarField, FnFarField, Scheme, SolverConfig, StepReport,
};
