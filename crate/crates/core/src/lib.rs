//! Exact continued-fraction and Ostrowski-numeration tools for studying
//! which `β` in the circle satisfy `‖a_nβ‖ → 0` statistically, for
//! `a_n = q_n` (convergent denominators of α) and for the merged sequence
//! of their multiples.
//!
//! All irrational quantities are [`Enclosure`]s with rational endpoints;
//! nothing is computed in floating point.

pub mod cf;
pub mod density;
pub mod enclosure;
pub mod error;
pub mod ostrowski;
pub mod run;
pub mod statconv;
pub mod witness;

pub use cf::{Budget, CfDigits, ConvergentTable};
pub use enclosure::{Enclosure, Tri};
pub use error::{Error, Result};
pub use ostrowski::OstrowskiDigits;
