//! LMG Hamiltonian in the maximum-spin sector `S = N/2`, split by parity.
//!
//! The Hamiltonian
//!
//! ```text
//! H = -(λ/N)(1+γ)(S² - Sz² - N/2) - (λ/2N)(1-γ)(S+² + S-²) - 2h Sz
//! ```
//!
//! couples `M` only to `M ± 2`, so the `N + 1` Dicke states split into two
//! sublattices distinguished by the parity of the number of flipped spins
//! `k = S - M`. Each sublattice carries a symmetric tridiagonal matrix.
//!
//! Entries are written in terms of `k` and `N` so that they are exact
//! products of small integers: `S(S+1) - M² - N/2 = k(N - k)` and
//! `c(M) c(M+1) = sqrt(k(N-k+1)(k-1)(N-k+2))` for the pair `(M, M+2)`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Model parameters `(N, γ, h, λ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmgParams {
    pub n_spins: u32,
    pub gamma: f64,
    pub field: f64,
    pub lambda: f64,
}

impl LmgParams {
    /// Validated parameters with `λ = 1`.
    pub fn new(n_spins: u32, gamma: f64, field: f64) -> Result<Self> {
        let p = LmgParams {
            n_spins,
            gamma,
            field,
            lambda: 1.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_lambda(mut self, lambda: f64) -> Result<Self> {
        self.lambda = lambda;
        self.validate()?;
        Ok(self)
    }

    /// Same model at another field value.
    pub fn at_field(&self, field: f64) -> Result<Self> {
        let p = LmgParams { field, ..*self };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_spins < 2 {
            return Err(Error::param("n_spins must be at least 2", self.n_spins as f64));
        }
        if !self.gamma.is_finite() || math::abs(self.gamma) > 1.0 {
            return Err(Error::param("gamma must lie in [-1, 1]", self.gamma));
        }
        if !self.field.is_finite() || self.field < 0.0 {
            return Err(Error::param("field must be finite and non-negative", self.field));
        }
        if !self.lambda.is_finite() {
            return Err(Error::param("lambda must be finite", self.lambda));
        }
        Ok(())
    }

    /// Total spin `S = N/2`.
    pub fn spin(&self) -> f64 {
        self.n_spins as f64 / 2.0
    }
}

/// The two parity sublattices of the `S = N/2` multiplet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ParitySector {
    /// `M ∈ {S, S-2, ...}`: an even number of flipped spins, contains `M = S`.
    EvenFlips,
    /// `M ∈ {S-1, S-3, ...}`.
    OddFlips,
}

impl ParitySector {
    pub const ALL: [ParitySector; 2] = [ParitySector::EvenFlips, ParitySector::OddFlips];

    /// Sector holding the basis state with `k` flipped spins.
    pub fn of_flips(k: u32) -> Self {
        if k.is_multiple_of(2) {
            ParitySector::EvenFlips
        } else {
            ParitySector::OddFlips
        }
    }

    pub fn other(self) -> Self {
        match self {
            ParitySector::EvenFlips => ParitySector::OddFlips,
            ParitySector::OddFlips => ParitySector::EvenFlips,
        }
    }

    /// Flip counts in ascending-`M` order (descending `k`).
    pub fn flips(self, n_spins: u32) -> impl Iterator<Item = u32> {
        let first = match self {
            ParitySector::EvenFlips => 0,
            ParitySector::OddFlips => 1,
        };
        let top = n_spins.saturating_sub((n_spins + first) % 2);
        (0..self.dim(n_spins) as u32).map(move |i| top - 2 * i)
    }

    pub fn dim(self, n_spins: u32) -> usize {
        match self {
            ParitySector::EvenFlips => n_spins as usize / 2 + 1,
            ParitySector::OddFlips => (n_spins as usize).div_ceil(2),
        }
    }
}

/// Symmetric tridiagonal Hamiltonian of one parity sector, ascending in `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorMatrix {
    pub sector: ParitySector,
    pub m_values: Vec<f64>,
    pub diagonal: Vec<f64>,
    pub offdiagonal: Vec<f64>,
}

impl SectorMatrix {
    /// Assemble from raw parts, checking the shape invariants.
    pub fn from_parts(
        sector: ParitySector,
        m_values: Vec<f64>,
        diagonal: Vec<f64>,
        offdiagonal: Vec<f64>,
    ) -> Result<Self> {
        if diagonal.is_empty() || diagonal.len() != m_values.len() {
            return Err(Error::param("diagonal length must match m_values", diagonal.len() as f64));
        }
        if offdiagonal.len() + 1 != diagonal.len() {
            return Err(Error::param(
                "offdiagonal must be one shorter than diagonal",
                offdiagonal.len() as f64,
            ));
        }
        if diagonal.iter().chain(&offdiagonal).any(|x| !x.is_finite()) {
            return Err(Error::param("matrix entries must be finite", f64::NAN));
        }
        Ok(SectorMatrix {
            sector,
            m_values,
            diagonal,
            offdiagonal,
        })
    }

    /// Diagonal matrix with the given entries (M labels are 0, 1, ...).
    pub fn diagonal_only(diagonal: Vec<f64>) -> Result<Self> {
        let n = diagonal.len();
        let m_values = (0..n).map(|i| i as f64).collect();
        Self::from_parts(
            ParitySector::EvenFlips,
            m_values,
            diagonal,
            alloc::vec![0.0; n.saturating_sub(1)],
        )
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    /// Infinity norm (max absolute row sum).
    pub fn inf_norm(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = math::abs(self.diagonal[i]);
                if i > 0 {
                    s += math::abs(self.offdiagonal[i - 1]);
                }
                if i + 1 < n {
                    s += math::abs(self.offdiagonal[i]);
                }
                s
            })
            .fold(0.0, f64::max)
    }

    /// `y = H x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.dim();
        for i in 0..n {
            let mut s = self.diagonal[i] * x[i];
            if i > 0 {
                s += self.offdiagonal[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                s += self.offdiagonal[i] * x[i + 1];
            }
            y[i] = s;
        }
    }
}

/// Ladder product `c(M) c(M+1)` coupling `M` and `M + 2`, where `M = S - k`.
pub(crate) fn pair_ladder(n_spins: u32, k: u32) -> f64 {
    debug_assert!(k >= 2 && k <= n_spins);
    let n = n_spins as f64;
    let k = k as f64;
    math::sqrt(k * (n - k + 1.0) * (k - 1.0) * (n - k + 2.0))
}

/// Raw sector construction without parameter validation (used for symmetry tests at h < 0).
pub(crate) fn sector_unchecked(
    n_spins: u32,
    gamma: f64,
    field: f64,
    lambda: f64,
    sector: ParitySector,
) -> SectorMatrix {
    let n = n_spins as f64;
    let s = n / 2.0;
    let flips: Vec<u32> = sector.flips(n_spins).collect();
    let m_values: Vec<f64> = flips.iter().map(|&k| s - k as f64).collect();
    let diagonal = flips
        .iter()
        .map(|&k| {
            let kf = k as f64;
            -(lambda / n) * (1.0 + gamma) * (kf * (n - kf)) - 2.0 * field * (s - kf)
        })
        .collect();
    // flips[i] = k at M, flips[i + 1] = k - 2 at M + 2
    let offdiagonal = flips
        .windows(2)
        .map(|w| -(lambda / (2.0 * n)) * (1.0 - gamma) * pair_ladder(n_spins, w[0]))
        .collect();
    SectorMatrix {
        sector,
        m_values,
        diagonal,
        offdiagonal,
    }
}

/// Hamiltonian of one parity sector in ascending-`M` order.
pub fn build_sector(params: &LmgParams, sector: ParitySector) -> Result<SectorMatrix> {
    params.validate()?;
    Ok(sector_unchecked(
        params.n_spins,
        params.gamma,
        params.field,
        params.lambda,
        sector,
    ))
}
