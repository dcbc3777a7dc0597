//! Closed-form results for the isotropic model `γ = 1`.
//!
//! The Hamiltonian is diagonal in `|S, M>` with
//! `E(M, h) = (2/N)(M - hN/2)² - (N/2)(1 + h²)`, so the ground state is a
//! single Dicke state. For `h ≥ 1` it is fully polarized; below, the number of
//! flipped spins is `j = R[N(1 - h)/2]` and jumps by one at the level crossings
//! `h_j = 1 - (2j + 1)/N`. The reduced density matrix is therefore piecewise
//! constant in `h` and the finite-`N` susceptibility vanishes almost
//! everywhere; only the plateau structure and the thermodynamic limit
//! `χ → 1/(2(1 - h²))` are exposed.
//!
//! The printed thermodynamic result carries a domain condition `h > 1 - 1/N`,
//! which conflicts with the statement that the state is `h`-independent above
//! `h = 1`. Here the closed form is applied for `h < 1` and the susceptibility
//! is zero for `h > 1`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fidelity::{chi_diagonal, fidelity_blockdiag};
use crate::math;
use crate::observables::TwoSpinRdm;

/// Tolerance for recognising a field value as a level crossing.
pub const CROSSING_TOL: f64 = 1e-12;

/// Field interval `(lo, hi]` on which the ground state is constant. The
/// lowest level of an even-`N` chain also owns `h = 0` (`includes_lo`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plateau {
    pub lo: f64,
    pub hi: f64,
    pub includes_lo: bool,
}

impl Plateau {
    pub fn contains(&self, h: f64) -> bool {
        (h > self.lo || (self.includes_lo && h == self.lo)) && h <= self.hi
    }
}

/// Isotropic ground state at one field value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsoGround {
    pub n_spins: u32,
    /// Number of flipped spins `j = N/2 - M0`.
    pub flips: u32,
    pub m0: f64,
    pub energy: f64,
    pub plateau: Plateau,
    /// Set when `h` sits on a crossing; `flips` then follows the
    /// round-half-away convention and `tied_flips` names the other state.
    pub degenerate: bool,
    pub tied_flips: Option<u32>,
}

/// `h_j = (N - 2j - 1)/N`, written to be exact for representable quotients.
fn crossing(n_spins: u32, j: u32) -> f64 {
    (n_spins as f64 - 2.0 * j as f64 - 1.0) / n_spins as f64
}

/// `E(M, h)`.
pub fn iso_energy(n_spins: u32, m: f64, h: f64) -> f64 {
    let n = n_spins as f64;
    let shift = m - h * n / 2.0;
    (2.0 / n) * shift * shift - (n / 2.0) * (1.0 + h * h)
}

fn plateau_of(n_spins: u32, j: u32) -> Plateau {
    let bottom = 2 * j + 1 > n_spins;
    let hi = if j == 0 {
        f64::INFINITY
    } else {
        crossing(n_spins, j - 1)
    };
    Plateau {
        lo: if bottom { 0.0 } else { crossing(n_spins, j) },
        hi,
        includes_lo: bottom,
    }
}

/// Ground-state quantum number and plateau at field `h`.
pub fn iso_m0(n_spins: u32, h: f64) -> Result<IsoGround> {
    if n_spins < 2 {
        return Err(Error::param("n_spins must be at least 2", n_spins as f64));
    }
    if !(h >= 0.0) || !h.is_finite() {
        return Err(Error::param("field must be finite and non-negative", h));
    }
    let n = n_spins as f64;
    let (flips, degenerate, tied) = if h >= 1.0 {
        (0, false, None)
    } else {
        let x = n * (1.0 - h) / 2.0;
        let below = math::floor(x) as u32;
        let hit = [below.saturating_sub(1), below, below + 1]
            .into_iter()
            .find(|&c| 2 * c < n_spins && math::abs(h - crossing(n_spins, c)) <= CROSSING_TOL);
        match hit {
            // x = c + 1/2 rounds away from zero
            Some(c) => (c + 1, true, Some(c)),
            None => ((math::round(x) as u32).min(n_spins), false, None),
        }
    };
    let m0 = n / 2.0 - flips as f64;
    Ok(IsoGround {
        n_spins,
        flips,
        m0,
        energy: iso_energy(n_spins, m0, h),
        plateau: plateau_of(n_spins, flips),
        degenerate,
        tied_flips: tied,
    })
}

/// All crossing fields `h_j ≥ 0`, ascending.
pub fn iso_crossings(n_spins: u32) -> Vec<f64> {
    let jmax = (n_spins.saturating_sub(1)) / 2;
    (0..=jmax).rev().map(|j| crossing(n_spins, j)).collect()
}

/// Thermodynamic-limit susceptibility: `1/(2(1 - h²))` below `h = 1`, zero above.
pub fn iso_chi_thermo(h: f64) -> Result<f64> {
    if !(h >= 0.0) || !h.is_finite() {
        return Err(Error::param("field must be finite and non-negative", h));
    }
    if h == 1.0 {
        return Err(Error::CriticalDivergence);
    }
    if h > 1.0 {
        Ok(0.0)
    } else {
        Ok(1.0 / (2.0 * (1.0 - h * h)))
    }
}

/// Two-spin RDM of the Dicke state with `flips` flipped spins (`u = 0`).
pub fn iso_rdm(n_spins: u32, flips: u32) -> TwoSpinRdm {
    let n = n_spins as f64;
    let k = flips as f64;
    let pairs = n * (n - 1.0);
    TwoSpinRdm {
        v_plus: (n - k) * (n - k - 1.0) / pairs,
        v_minus: k * (k - 1.0) / pairs,
        y: k * (n - k) / pairs,
        u: 0.0,
    }
}

/// Reduced two-spin fidelity between the isotropic ground states at `h1` and `h2`.
pub fn iso_reduced_fidelity(n_spins: u32, h1: f64, h2: f64) -> Result<f64> {
    let a = iso_m0(n_spins, h1)?;
    let b = iso_m0(n_spins, h2)?;
    for (g, h) in [(&a, h1), (&b, h2)] {
        if g.degenerate {
            return Err(Error::LevelCrossing { h });
        }
    }
    fidelity_blockdiag(
        &iso_rdm(n_spins, a.flips).blocks(),
        &iso_rdm(n_spins, b.flips).blocks(),
    )
}

/// Susceptibility of the plateau-smoothed state `M0 = hN/2` (continuous in `h`).
///
/// Converges to [`iso_chi_thermo`] as `N` grows; shown in the tests as a
/// convergence demonstration rather than asserted at a tolerance.
pub fn iso_chi_smoothed(n_spins: u32, h: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&h) {
        return Err(Error::param("smoothed plateau susceptibility needs 0 <= h < 1", h));
    }
    let n = n_spins as f64;
    let k = n * (1.0 - h) / 2.0;
    let dk = -n / 2.0;
    let pairs = n * (n - 1.0);
    let vp = (n - k) * (n - k - 1.0) / pairs;
    let vm = k * (k - 1.0) / pairs;
    let y2 = 2.0 * k * (n - k) / pairs;
    let dvp = -(2.0 * (n - k) - 1.0) * dk / pairs;
    let dvm = (2.0 * k - 1.0) * dk / pairs;
    let dy2 = 2.0 * (n - 2.0 * k) * dk / pairs;
    chi_diagonal(&[vp, vm, y2], &[dvp, dvm, dy2])
}
