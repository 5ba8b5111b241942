#![doc = include_str!("../../../README.md")]

pub mod diagnostics;
pub mod eos;
pub mod harness;
pub mod error;
pub mod shift;
pub mod solver;
pub mod waves;

pub use eos::GasModel;
pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/waves.md")]
    mod waves {}
    #[doc = include_str!("../../../book/src/solver.md")]
    mod solver {}
    #[doc = include_str!("../../../book/src/shift.md")]
    mod shift {}
    #[doc = include_str!("../../../book/src/diagnostics.md")]
    mod diagnostics {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
