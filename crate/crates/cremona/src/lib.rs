//! Exact arithmetic for plane birational transformations preserving the
//! logarithmic 2-form ω₀ = dx∧dy/(xy), and a mechanical solution of the
//! word problem in the subgroup H = ⟨C, I, P⟩ via quadratic-word rewriting.
//!
//! Everything is computed over ℚ with no floating point: sparse homogeneous
//! polynomials, projective and infinitely near points, blow-ups, homaloidal
//! nets, pullback/pushforward of 2-forms, and the reduction algorithm with
//! its audit trail.

pub mod error;
pub mod forms;
pub mod geometry;
pub mod json;
mod linalg;
pub mod maps;
pub mod point;
pub mod poly;
pub mod words;

pub use error::{Error, Result};
