//! Elementary waves and their superposition.

pub mod composite;
pub mod end_states;
pub mod interp;
pub mod ode;
pub mod profile;
pub mod rarefaction;

pub use composite::{CompositeSample, CompositeWave};
pub use end_states::WaveEndStates;
pub use profile::{relaxation_limit, ProfileCheck, ProfileSidecar, ShockProfile, ShockSample};
pub use rarefaction::{BurgersSample, RarefactionSample, RarefactionWave, DEFAULT_TAIL_EXPONENT};
