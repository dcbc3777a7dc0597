//! Uhlmann fidelity and fidelity susceptibility for density matrices that are
//! block-diagonal in real symmetric 2×2 blocks.
//!
//! For 2×2 positive semidefinite `A`, `B` the Uhlmann trace has the closed form
//! `tr sqrt(A^{1/2} B A^{1/2}) = sqrt(tr(AB) + 2 sqrt(det(AB)))`, so the
//! fidelity of `ρ = ⊕ ϱ_i` against `ρ̃ = ⊕ ϱ̃_i` is a sum over blocks. Expanding
//! to second order in the field step gives the per-block susceptibility
//!
//! ```text
//! χ_i = [ (tr ϱ')² - 4 det ϱ' + (∂ det ϱ)² / det ϱ ] / (4 tr ϱ)     tr ϱ ≠ 0, det ϱ ≠ 0
//! χ_i = [ (tr ϱ')² - 4 det ϱ' + 2 ∂² det ϱ ]       / (4 tr ϱ)     tr ϱ ≠ 0, det ϱ = 0
//! χ_i = 0                                                          tr ϱ = 0
//! ```
//!
//! where the terms linear in `tr ϱ'` and `tr ϱ''` have been dropped because
//! they cancel across blocks when `tr ρ ≡ 1`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::observables::{RdmDerivatives, TwoSpinRdm};

/// Absolute threshold for a vanishing trace or eigenvalue.
pub const EPS_ZERO: f64 = 1e-12;
/// Relative threshold for a vanishing determinant, `det ≤ EPS_DET·(tr)²`.
pub const EPS_DET: f64 = 1e-12;
/// Negative round-off under square roots tolerated before reporting invalid input.
pub const ROUNDOFF_FLOOR: f64 = 1e-12;

/// Real symmetric block `[[a, b], [b, d]]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Block2x2 {
    pub a: f64,
    pub d: f64,
    pub b: f64,
}

impl Block2x2 {
    pub const fn new(a: f64, d: f64, b: f64) -> Self {
        Block2x2 { a, d, b }
    }

    pub const fn diag(a: f64, d: f64) -> Self {
        Block2x2 { a, d, b: 0.0 }
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.b
    }

    /// `tr(self · other)`.
    pub fn trace_product(&self, o: &Block2x2) -> f64 {
        self.a * o.a + 2.0 * self.b * o.b + self.d * o.d
    }

    fn check_psd(&self) -> Result<()> {
        if !(self.trace() >= -ROUNDOFF_FLOOR) {
            return Err(Error::InvalidDensity { what: "trace", value: self.trace() });
        }
        if !(self.det() >= -ROUNDOFF_FLOOR) {
            return Err(Error::InvalidDensity { what: "determinant", value: self.det() });
        }
        Ok(())
    }
}

/// Which branch of the block susceptibility was used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BlockCase {
    Regular,
    ZeroDet,
    ZeroTrace,
}

/// Total susceptibility with its per-block decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct SusceptibilityResult {
    pub chi_total: f64,
    pub per_block: Vec<f64>,
    pub case_used: Vec<BlockCase>,
    /// Finite-step estimate `-2 ln F / δ²`, when computed.
    pub oracle_chi: Option<f64>,
    pub oracle_delta: Option<f64>,
}

impl SusceptibilityResult {
    fn from_blocks(per_block: Vec<f64>, case_used: Vec<BlockCase>) -> Result<Self> {
        let chi_total: f64 = per_block.iter().sum();
        if !(chi_total >= -1e-10) {
            return Err(Error::InternalConsistency {
                what: "negative susceptibility",
                value: chi_total,
            });
        }
        Ok(SusceptibilityResult {
            chi_total,
            per_block,
            case_used,
            oracle_chi: None,
            oracle_delta: None,
        })
    }

    pub fn with_oracle(mut self, chi: f64, delta: f64) -> Self {
        self.oracle_chi = Some(chi);
        self.oracle_delta = Some(delta);
        self
    }
}

/// `tr sqrt(A^{1/2} B A^{1/2})` for 2×2 positive semidefinite blocks.
pub fn block_fidelity(a: &Block2x2, b: &Block2x2) -> Result<f64> {
    a.check_psd()?;
    b.check_psd()?;
    let det = a.det() * b.det();
    let root_det = math::clamped_sqrt(det, ROUNDOFF_FLOOR)
        .ok_or(Error::InvalidDensity { what: "det(AB)", value: det })?;
    let inner = a.trace_product(b) + 2.0 * root_det;
    math::clamped_sqrt(inner, ROUNDOFF_FLOOR)
        .ok_or(Error::InvalidDensity { what: "tr(AB) + 2 sqrt(det AB)", value: inner })
}

fn check_unit_trace(blocks: &[Block2x2]) -> Result<()> {
    let tr: f64 = blocks.iter().map(Block2x2::trace).sum();
    if math::abs(tr - 1.0) > 1e-10 {
        return Err(Error::InvalidDensity { what: "total trace - 1", value: tr - 1.0 });
    }
    Ok(())
}

/// Fidelity of two block-diagonal density matrices with matching block structure.
pub fn fidelity_blockdiag(p: &[Block2x2], q: &[Block2x2]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::param("block lists differ in length", q.len() as f64));
    }
    for list in [p, q] {
        // an all-zero list is tolerated: its fidelity with anything is 0
        if list.iter().any(|b| b.trace() != 0.0) {
            check_unit_trace(list)?;
        }
    }
    let mut f = 0.0;
    for (a, b) in p.iter().zip(q) {
        f += block_fidelity(a, b)?;
    }
    Ok(f)
}

/// `∂ det ϱ` from the block and its first derivative.
fn det_first(p: &Block2x2, p1: &Block2x2) -> f64 {
    p1.a * p.d + p.a * p1.d - 2.0 * p.b * p1.b
}

/// `∂² det ϱ` from the block and its first two derivatives.
fn det_second(p: &Block2x2, p1: &Block2x2, p2: &Block2x2) -> f64 {
    p2.a * p.d + 2.0 * p1.a * p1.d + p.a * p2.d - 2.0 * p1.b * p1.b - 2.0 * p.b * p2.b
}

/// Susceptibility contribution of a single block.
pub fn block_chi(
    p: &Block2x2,
    p1: &Block2x2,
    p2: Option<&Block2x2>,
) -> Result<(f64, BlockCase)> {
    p.check_psd()?;
    let tr = p.trace();
    if tr <= EPS_ZERO {
        return Ok((0.0, BlockCase::ZeroTrace));
    }
    let det = p.det();
    let tr1 = p1.trace();
    let base = tr1 * tr1 - 4.0 * p1.det();
    let (chi, case) = if det > EPS_DET * tr * tr {
        let dd = det_first(p, p1);
        ((base + dd * dd / det) / (4.0 * tr), BlockCase::Regular)
    } else {
        let p2 = p2.ok_or(Error::MissingSecondDerivative)?;
        let dd2 = det_second(p, p1, p2);
        ((base + 2.0 * dd2) / (4.0 * tr), BlockCase::ZeroDet)
    };
    if !(chi >= -1e-10) {
        return Err(Error::InternalConsistency { what: "negative block susceptibility", value: chi });
    }
    Ok((chi, case))
}

/// `χ = Σ χ_i` over all blocks.
pub fn chi_blockdiag(
    blocks: &[Block2x2],
    first: &[Block2x2],
    second: Option<&[Block2x2]>,
) -> Result<SusceptibilityResult> {
    if blocks.len() != first.len() || second.is_some_and(|s| s.len() != blocks.len()) {
        return Err(Error::param("derivative list length mismatch", first.len() as f64));
    }
    check_unit_trace(blocks)?;
    let mut per_block = Vec::with_capacity(blocks.len());
    let mut cases = Vec::with_capacity(blocks.len());
    for (i, (p, p1)) in blocks.iter().zip(first).enumerate() {
        let (chi, case) = block_chi(p, p1, second.map(|s| &s[i]))?;
        per_block.push(chi);
        cases.push(case);
    }
    SusceptibilityResult::from_blocks(per_block, cases)
}

/// Diagonal density matrix: `χ = Σ (λ_i')² / (4 λ_i)` over non-vanishing `λ_i`.
pub fn chi_diagonal(lambdas: &[f64], dlambdas: &[f64]) -> Result<f64> {
    if lambdas.len() != dlambdas.len() {
        return Err(Error::param("eigenvalue list length mismatch", dlambdas.len() as f64));
    }
    let total: f64 = lambdas.iter().sum();
    if math::abs(total - 1.0) > 1e-10 {
        return Err(Error::InvalidDensity { what: "eigenvalue sum - 1", value: total - 1.0 });
    }
    let mut chi = 0.0;
    for (&l, &dl) in lambdas.iter().zip(dlambdas) {
        if l < -ROUNDOFF_FLOOR {
            return Err(Error::InvalidDensity { what: "eigenvalue", value: l });
        }
        if l < EPS_ZERO {
            if math::abs(dl) >= EPS_ZERO {
                return Err(Error::SingularSusceptibility { value: l, slope: dl });
            }
            continue;
        }
        chi += dl * dl / (4.0 * l);
    }
    Ok(chi)
}

/// Finite-step estimator `-2 ln F / δ²`.
pub fn chi_from_fidelity(fidelity: f64, delta: f64) -> Result<f64> {
    if !(fidelity > 0.0) {
        return Err(Error::ZeroFidelity);
    }
    if fidelity > 1.0 + 1e-9 {
        return Err(Error::param("fidelity exceeds 1", fidelity));
    }
    if delta == 0.0 || !delta.is_finite() {
        return Err(Error::param("delta must be finite and non-zero", delta));
    }
    Ok(-2.0 * math::ln(fidelity) / (delta * delta))
}

/// Reduced fidelity susceptibility of the two-spin LMG reduced density matrix.
///
/// When `det ϱ1 > 0` and `y > 0` this is
///
/// ```text
/// χ = y'²/(2y) + [ (v+' - v-')² + 4u'² + (v+'v- + v+v-' - 2u'u)² / (v+v- - u²) ] / (4(v+ + v-))
/// ```
///
/// The `[[y, y], [y, y]]` block has identically vanishing determinant and
/// contributes `y'²/(2y)`. A (numerically) singular `ϱ1` falls back to the
/// zero-determinant branch, which needs `d.second`.
pub fn chi_lmg(rdm: &TwoSpinRdm, d: &RdmDerivatives) -> Result<SusceptibilityResult> {
    let TwoSpinRdm { v_plus: vp, v_minus: vm, y, u } = *rdm;
    let TwoSpinRdm { v_plus: dvp, v_minus: dvm, y: dy, u: du } = d.first;
    let tr1 = vp + vm;
    let det1 = vp * vm - u * u;

    let (block1, case1) = if tr1 > EPS_ZERO && det1 > EPS_DET * tr1 * tr1 {
        let cross = dvp * vm + vp * dvm - 2.0 * du * u;
        let chi = ((dvp - dvm) * (dvp - dvm) + 4.0 * du * du + cross * cross / det1) / (4.0 * tr1);
        (chi, BlockCase::Regular)
    } else {
        let [p, _] = rdm.blocks();
        let [p1, _] = d.first.blocks();
        let p2 = d.second.map(|s| s.blocks()[0]);
        block_chi(&p, &p1, p2.as_ref())?
    };

    let (block2, case2) = if y > EPS_ZERO {
        (dy * dy / (2.0 * y), BlockCase::ZeroDet)
    } else if math::abs(dy) > EPS_ZERO {
        return Err(Error::SingularSusceptibility { value: y, slope: dy });
    } else {
        (0.0, BlockCase::ZeroTrace)
    };

    SusceptibilityResult::from_blocks(alloc::vec![block1, block2], alloc::vec![case1, case2])
}
