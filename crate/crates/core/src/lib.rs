//! Reduced fidelity susceptibility of two-spin subsystems in the
//! Lipkin-Meshkov-Glick model.
//!
//! The ground state in the maximum-spin sector comes from a parity-split
//! tridiagonal eigensolver ([`eigensolver`]). The two-spin reduced density
//! matrix is built from collective spin moments ([`observables`]) and fed to
//! the closed-form block susceptibility ([`fidelity`]). [`scaling`] drives
//! sweeps, peak searches and exponent fits on top of that. The isotropic
//! point `γ = 1` is diagonal and handled separately in [`isotropic`].
//!
//! `no_std` with `alloc`; `libm` supplies the transcendental functions.

#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` is how NaN gets rejected along with the out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod eigensolver;
pub mod error;
pub mod fidelity;
pub mod isotropic;
mod math;
pub mod model;
pub mod observables;
pub mod reference;
pub mod scaling;

pub use eigensolver::{ground_state, GroundState};
pub use error::{Error, Result};
pub use fidelity::{block_fidelity, chi_blockdiag, chi_lmg, fidelity_blockdiag, Block2x2, BlockCase, SusceptibilityResult};
pub use model::{build_sector, LmgParams, ParitySector, SectorMatrix};
pub use observables::{rdm_at, rdm_derivatives, spin_moments, two_spin_rdm, RdmDerivatives, SpinMoments, TwoSpinRdm};
pub use scaling::{
    find_peak, fit_peak_exponent, fit_thermo_exponent, sweep_chi, ChiOptions, Evaluator, PeakResult, ScalingFit,
    StepPolicy, SweepRow, SweepSpec,
};
