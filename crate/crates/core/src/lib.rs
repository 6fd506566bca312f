//! Rotor-router walks on the integer line.
//!
//! The Propp machine moves chips deterministically: a site holding `n` chips
//! sends half of them to each neighbour, and when `n` is odd the extra chip
//! follows the site's rotor, which then flips. This crate simulates that
//! machine exactly, compares it against the linear (expected-value) machine,
//! and builds configurations that realise prescribed rotor histories.

pub mod numerics;
pub mod machine;
pub mod discrepancy;
pub mod forcing;
pub mod cli;
