//! Numerical toolkit for spin-squeezing-enhanced, large-momentum-transfer
//! light-pulse atom interferometry.

pub mod constants;
pub mod dicke;
pub mod ep;
pub mod error;
pub mod lightshift;
pub mod output;
pub mod protocol;
pub mod raman;
pub mod trajectory;

pub use error::{Error, Result};

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/introduction.md")]
mod book_introduction {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/collective-spin.md")]
mod book_collective_spin {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/protocols.md")]
mod book_protocols {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/trajectory.md")]
mod book_trajectory {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/velocity-selection.md")]
mod book_velocity_selection {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/light-shift.md")]
mod book_light_shift {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/eotvos.md")]
mod book_eotvos {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod book_cli {}
