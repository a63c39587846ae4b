//! Noisy quantum-annealing emulator for a spin-qubit cQED processor, used as
//! the pruning backend of a multiple-hypothesis radar tracker.

pub mod dynamics;
pub mod error;
pub mod device;
pub mod graph;
pub mod ising;
pub mod mht;
pub mod sqa;
pub mod timing;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/mwis.md")]
    mod mwis {}
    #[doc = include_str!("../../../book/src/annealing.md")]
    mod annealing {}
    #[doc = include_str!("../../../book/src/tracking.md")]
    mod tracking {}
    #[doc = include_str!("../../../book/src/timing.md")]
    mod timing {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
