//! Lowest eigenpair of a symmetric tridiagonal matrix by Sturm-sequence
//! bisection and inverse iteration, and the global ground state across both
//! parity sectors.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::model::{build_sector, LmgParams, ParitySector, SectorMatrix};

/// Default relative bisection tolerance.
pub const DEFAULT_TOL: f64 = 1e-15;

/// Relative threshold below which two levels count as degenerate.
pub const DEGENERACY_THRESHOLD: f64 = 1e-10;

const MAX_INVERSE_ITERATIONS: usize = 8;
const MAX_RESTARTS: usize = 3;

/// Ground state of the `S = N/2` multiplet.
///
/// `amplitudes[i]` is the coefficient of the basis state with magnetization
/// `m_values()[i]` in the winning sector. Amplitudes are real, normalized, and
/// the entry of largest magnitude is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundState {
    pub n_spins: u32,
    pub energy: f64,
    pub amplitudes: Vec<f64>,
    pub sector: ParitySector,
    /// Distance to the next level in the same sector (infinite for 1-dim sectors).
    pub gap_within_sector: f64,
    /// `|E_other - E_winner|` between the two sector ground energies.
    pub gap_between_sectors: f64,
    pub degenerate: bool,
}

impl GroundState {
    /// Magnetizations labelling `amplitudes`, ascending.
    pub fn m_values(&self) -> impl Iterator<Item = f64> + '_ {
        let s = self.n_spins as f64 / 2.0;
        self.sector.flips(self.n_spins).map(move |k| s - k as f64)
    }

    /// Flip counts `k = S - M` labelling `amplitudes`.
    pub fn flips(&self) -> impl Iterator<Item = u32> {
        self.sector.flips(self.n_spins)
    }

    /// Gap to the first excited level of the whole multiplet.
    pub fn gap(&self) -> f64 {
        self.gap_within_sector.min(self.gap_between_sectors)
    }
}

/// Number of eigenvalues strictly below `x`.
pub fn sturm_count(m: &SectorMatrix, x: f64) -> usize {
    let pivmin = pivot_floor(m);
    let mut count = 0;
    let mut q = m.diagonal[0] - x;
    if math::abs(q) < pivmin {
        q = -pivmin;
    }
    if q < 0.0 {
        count += 1;
    }
    for i in 1..m.dim() {
        let e = m.offdiagonal[i - 1];
        q = m.diagonal[i] - x - e * e / q;
        if math::abs(q) < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn pivot_floor(m: &SectorMatrix) -> f64 {
    let emax = m.offdiagonal.iter().map(|e| e * e).fold(0.0, f64::max);
    f64::MIN_POSITIVE.max(f64::MIN_POSITIVE * emax)
}

fn gershgorin(m: &SectorMatrix) -> (f64, f64) {
    let n = m.dim();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let mut r = 0.0;
        if i > 0 {
            r += math::abs(m.offdiagonal[i - 1]);
        }
        if i + 1 < n {
            r += math::abs(m.offdiagonal[i]);
        }
        lo = lo.min(m.diagonal[i] - r);
        hi = hi.max(m.diagonal[i] + r);
    }
    // widen so that both ends are strict bounds
    let pad = f64::EPSILON * (1.0 + lo.abs().max(hi.abs())) * 4.0;
    (lo - pad, hi + pad)
}

/// The `k`-th smallest eigenvalue (`k = 0` is the lowest). `on_step` sees
/// every bracket `(lo, hi)` the bisection visits.
pub(crate) fn bisect_with(
    m: &SectorMatrix,
    k: usize,
    tol: f64,
    mut on_step: impl FnMut(f64, f64),
) -> f64 {
    let (mut lo, mut hi) = gershgorin(m);
    let abs_tol = tol * m.inf_norm().max(1.0);
    on_step(lo, hi);
    while hi - lo > abs_tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(m, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
        on_step(lo, hi);
    }
    0.5 * (lo + hi)
}

/// The `k`-th smallest eigenvalue by bisection.
pub fn kth_eigenvalue(m: &SectorMatrix, k: usize, tol: f64) -> f64 {
    bisect_with(m, k, tol, |_, _| {})
}

/// LU factorization of `T - σI` with partial pivoting.
struct TridiagonalLu {
    // U has diagonal u0, first superdiagonal u1, second superdiagonal u2
    u0: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    mult: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagonalLu {
    fn factor(m: &SectorMatrix, shift: f64, pivot_eps: f64) -> Self {
        let n = m.dim();
        let mut diag: Vec<f64> = m.diagonal.iter().map(|d| d - shift).collect();
        let mut sup: Vec<f64> = m.offdiagonal.clone();
        sup.push(0.0);
        let sub = &m.offdiagonal;
        let mut u2 = vec![0.0; n];
        let mut mult = vec![0.0; n];
        let mut swapped = vec![false; n];
        for k in 0..n.saturating_sub(1) {
            let c = sub[k];
            if math::abs(diag[k]) >= math::abs(c) {
                if math::abs(diag[k]) < pivot_eps {
                    diag[k] = pivot_eps;
                }
                let l = c / diag[k];
                mult[k] = l;
                diag[k + 1] -= l * sup[k];
            } else {
                // swap rows k and k + 1
                let (a_k, b_k) = (diag[k], sup[k]);
                let (a_k1, b_k1) = (diag[k + 1], sup[k + 1]);
                let l = a_k / c;
                diag[k] = c;
                sup[k] = a_k1;
                u2[k] = b_k1;
                diag[k + 1] = b_k - l * a_k1;
                sup[k + 1] = -l * b_k1;
                mult[k] = l;
                swapped[k] = true;
            }
        }
        if math::abs(diag[n - 1]) < pivot_eps {
            diag[n - 1] = pivot_eps;
        }
        TridiagonalLu {
            u0: diag,
            u1: sup,
            u2,
            mult,
            swapped,
        }
    }

    fn solve(&self, x: &mut [f64]) {
        let n = x.len();
        for k in 0..n.saturating_sub(1) {
            if self.swapped[k] {
                x.swap(k, k + 1);
            }
            x[k + 1] -= self.mult[k] * x[k];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            if i + 1 < n {
                s -= self.u1[i] * x[i + 1];
            }
            if i + 2 < n {
                s -= self.u2[i] * x[i + 2];
            }
            x[i] = s / self.u0[i];
        }
    }
}

fn normalize(v: &mut [f64]) -> bool {
    let scale = v.iter().fold(0.0f64, |a, &x| a.max(math::abs(x)));
    if !(scale > 0.0) || !scale.is_finite() {
        return false;
    }
    let norm = math::sqrt(v.iter().map(|x| (x / scale) * (x / scale)).sum::<f64>()) * scale;
    v.iter_mut().for_each(|x| *x /= norm);
    true
}

fn fix_phase(v: &mut [f64]) {
    let mut best = 0;
    for i in 1..v.len() {
        if math::abs(v[i]) > math::abs(v[best]) {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn residual(m: &SectorMatrix, energy: f64, v: &[f64]) -> f64 {
    let mut hv = vec![0.0; v.len()];
    m.apply(v, &mut hv);
    hv.iter()
        .zip(v)
        .map(|(a, b)| math::abs(a - energy * b))
        .fold(0.0, f64::max)
}

/// Lowest eigenvalue and its normalized, phase-fixed eigenvector.
pub fn lowest_eigenpair(m: &SectorMatrix, tol: f64) -> Result<(f64, Vec<f64>)> {
    if !(tol > 0.0) {
        return Err(Error::param("tolerance must be positive", tol));
    }
    let n = m.dim();
    let energy = kth_eigenvalue(m, 0, tol);
    if n == 1 {
        return Ok((energy, vec![1.0]));
    }
    let norm = m.inf_norm().max(1.0);
    let accept = DEGENERACY_THRESHOLD * math::abs(energy).max(1.0);
    let mut best = f64::INFINITY;
    for restart in 0..=MAX_RESTARTS {
        let shift = energy - (restart as f64) * 8.0 * f64::EPSILON * norm;
        let lu = TridiagonalLu::factor(m, shift, f64::EPSILON * norm);
        let mut v: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.125 * math::exp(-(((i + restart) % 7) as f64)))
            .collect();
        normalize(&mut v);
        for _ in 0..MAX_INVERSE_ITERATIONS {
            lu.solve(&mut v);
            if !normalize(&mut v) {
                break;
            }
            let r = residual(m, energy, &v);
            best = best.min(r);
            if r <= accept * 1e-3 {
                break;
            }
        }
        let r = residual(m, energy, &v);
        if r.is_finite() && r <= accept {
            fix_phase(&mut v);
            return Ok((energy, v));
        }
    }
    Err(Error::NumericalFailure {
        what: "inverse iteration did not converge",
        residual: best,
    })
}

/// Ground state of the model, solving both parity sectors.
pub fn ground_state(params: &LmgParams, tol: f64) -> Result<GroundState> {
    let even = build_sector(params, ParitySector::EvenFlips)?;
    let odd = build_sector(params, ParitySector::OddFlips)?;
    let e_even = kth_eigenvalue(&even, 0, tol);
    let e_odd = kth_eigenvalue(&odd, 0, tol);
    let scale = DEGENERACY_THRESHOLD * math::abs(e_even.min(e_odd)).max(1.0);
    let gap_between = math::abs(e_even - e_odd);
    let winner = if e_odd < e_even && gap_between >= scale {
        odd
    } else {
        even
    };
    let (energy, amplitudes) = lowest_eigenpair(&winner, tol)?;
    let gap_within = if winner.dim() > 1 {
        kth_eigenvalue(&winner, 1, tol) - energy
    } else {
        f64::INFINITY
    };
    let degenerate = gap_within.min(gap_between) < scale;
    Ok(GroundState {
        n_spins: params.n_spins,
        energy,
        amplitudes,
        sector: winner.sector,
        gap_within_sector: gap_within.max(0.0),
        gap_between_sectors: gap_between,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference;

    #[test]
    fn two_spin_even_sector_energy() {
        let p = LmgParams::new(2, 0.0, 1.0).unwrap();
        let m = build_sector(&p, ParitySector::EvenFlips).unwrap();
        let (e, v) = lowest_eigenpair(&m, DEFAULT_TOL).unwrap();
        assert!((e + 4.25f64.sqrt()).abs() < 1e-14);
        // closed-form eigenvector of [[2, -0.5], [-0.5, -2]]
        assert!((v[0] - 0.122_18).abs() < 1e-5);
        assert!((v[1] - 0.992_51).abs() < 1e-5);
    }

    #[test]
    fn isotropic_above_saturation_is_polarized() {
        let p = LmgParams::new(8, 1.0, 2.0).unwrap();
        let m = build_sector(&p, ParitySector::EvenFlips).unwrap();
        let (e, v) = lowest_eigenpair(&m, DEFAULT_TOL).unwrap();
        let top = m.dim() - 1;
        assert_eq!(m.m_values[top], 4.0);
        assert!((e - m.diagonal[top]).abs() < 1e-12);
        for (i, x) in v.iter().enumerate() {
            let want = if i == top { 1.0 } else { 0.0 };
            assert!((x - want).abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_matrix_picks_minimum() {
        let m = SectorMatrix::diagonal_only(vec![3.0, -1.5, 0.25, 7.0]).unwrap();
        let (e, v) = lowest_eigenpair(&m, DEFAULT_TOL).unwrap();
        assert!((e + 1.5).abs() < 1e-14);
        assert_eq!(v.iter().map(|x| (x * 1e12).round() / 1e12).collect::<Vec<_>>(), vec![0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn bisection_halves_bracket() {
        let p = LmgParams::new(40, 0.3, 0.8).unwrap();
        let m = build_sector(&p, ParitySector::EvenFlips).unwrap();
        let mut widths = Vec::new();
        bisect_with(&m, 0, DEFAULT_TOL, |lo, hi| widths.push(hi - lo));
        assert!(widths.len() > 10);
        // the last few halvings are distorted by rounding of the midpoint
        for w in widths.windows(2).filter(|w| w[1] > 1e-9) {
            let ratio = w[1] / w[0];
            assert!((ratio - 0.5).abs() < 1e-6, "ratio {ratio}");
        }
    }

    #[test]
    fn sturm_count_matches_dense_spectrum() {
        let p = LmgParams::new(21, -0.4, 0.6).unwrap();
        let m = build_sector(&p, ParitySector::OddFlips).unwrap();
        let spec = reference::tridiagonal_spectrum(&m);
        for (i, w) in spec.windows(2).enumerate() {
            let mid = 0.5 * (w[0] + w[1]);
            assert_eq!(sturm_count(&m, mid), i + 1);
        }
    }

    #[test]
    fn ground_state_invariants() {
        for &(n, g, h) in &[(2, 0.0, 1.0), (17, 0.5, 0.9), (64, -0.7, 1.3), (300, 0.25, 1.01)] {
            let p = LmgParams::new(n, g, h).unwrap();
            let gs = ground_state(&p, DEFAULT_TOL).unwrap();
            let norm: f64 = gs.amplitudes.iter().map(|a| a * a).sum();
            assert!((norm - 1.0).abs() < 1e-12);
            let m = build_sector(&p, gs.sector).unwrap();
            let r = residual(&m, gs.energy, &gs.amplitudes);
            assert!(r <= 1e-10 * gs.energy.abs().max(1.0), "residual {r}");
            let big = gs.amplitudes.iter().cloned().fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
            assert!(big > 0.0);
        }
    }

    #[test]
    fn two_spin_ground_state_sector_and_amplitudes() {
        let p = LmgParams::new(2, 0.0, 1.0).unwrap();
        let gs = ground_state(&p, DEFAULT_TOL).unwrap();
        assert_eq!(gs.sector, ParitySector::EvenFlips);
        assert_eq!(gs.m_values().collect::<Vec<_>>(), vec![-1.0, 1.0]);
        assert!((gs.amplitudes[0] - 0.122_18).abs() < 1e-5);
        assert!((gs.amplitudes[1] - 0.992_51).abs() < 1e-5);
        assert!(!gs.degenerate);
    }

    #[test]
    fn isotropic_crossing_is_degenerate() {
        let p = LmgParams::new(10, 1.0, 0.9).unwrap();
        let gs = ground_state(&p, DEFAULT_TOL).unwrap();
        assert!(gs.degenerate);
        assert_eq!(gs.sector, ParitySector::EvenFlips);
    }

    #[test]
    fn zero_field_is_degenerate() {
        for n in [8u32, 32, 128] {
            let p = LmgParams::new(n, 0.0, 0.0).unwrap();
            assert!(ground_state(&p, DEFAULT_TOL).unwrap().degenerate, "N={n}");
        }
        // isotropic: M = ±1/2 doublet for odd N, unique M = 0 for even N
        let p = LmgParams::new(9, 1.0, 0.0).unwrap();
        assert!(ground_state(&p, DEFAULT_TOL).unwrap().degenerate);
        let p = LmgParams::new(10, 1.0, 0.0).unwrap();
        assert!(!ground_state(&p, DEFAULT_TOL).unwrap().degenerate);
    }

    #[test]
    fn rejects_non_positive_tolerance() {
        let m = SectorMatrix::diagonal_only(vec![1.0, 2.0]).unwrap();
        assert!(lowest_eigenpair(&m, 0.0).is_err());
    }
}
