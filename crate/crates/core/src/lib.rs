//! Computation of c-nilpotent and polynilpotent multipliers of nth nilpotent
//! products of cyclic groups.
//!
//! The crate has two halves that deliberately do not share arithmetic:
//!
//! * [`multipliers`] evaluates the closed-form answers, built on the Witt
//!   counting function in [`witt`].
//! * [`oracle`] recomputes the same groups from first principles: it realizes
//!   the multiplier as a quotient of a free abelian group on basic commutators
//!   ([`hall`]) by an integer relation lattice, obtained either directly from
//!   generator sets or by running the collection process in a free nilpotent
//!   group ([`fng`]), and then reads off abelian invariants via Smith normal
//!   form.
//!
//! Agreement between the two halves on a grid of small instances is the
//! correctness story; see the `acceptance` integration test.

pub mod error;
pub mod fng;
pub mod hall;
mod linalg;
pub mod multipliers;
pub mod oracle;
pub mod witt;

pub use error::{Budget, Error, Result};
