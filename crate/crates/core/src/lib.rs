//! Soliton surfaces of the mean curvature flow in S2 x R.
//!
//! The crate constructs the surfaces invariant under vertical translations or
//! sphere rotations whose mean curvature tracks a Killing field, integrates
//! the autonomous systems their generating curves satisfy, analyzes the
//! resulting phase planes and curve geometry, and verifies everything against
//! a finite-difference oracle that knows nothing about the closed forms.

pub mod ambient;
pub mod analyze;
pub mod charts;
pub mod cli;
pub mod error;
pub mod integrate;
pub mod meshio;
pub mod oracle;
pub mod par;
pub mod systems;

pub use error::{Error, Result};
