//! Command-line driver and file formats for `rfs-core`.
//!
//! The numerics live in the `no_std` core crate. This crate adds a
//! thread-safe state cache, rayon-parallel sweeps and peak searches, CSV and
//! JSON emission with atomic file replacement, the built-in self-test suites
//! and the `rfs` command line.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod output;
pub mod par;
pub mod suites;

pub use par::SharedCache;
