//! Collective spin moments, the two-spin reduced density matrix, and its
//! derivatives with respect to the field `h`.
//!
//! For a symmetric (Dicke) state every pair of spins sees the same reduced
//! density matrix. In the basis `{|00>, |01>, |10>, |11>}` it reads
//!
//! ```text
//! [ v+  0  0  u  ]
//! [ 0   y  y  0  ]
//! [ 0   y  y  0  ]
//! [ u   0  0  v- ]
//! ```
//!
//! and splits into the blocks `[[v+, u], [u, v-]]` and `[[y, y], [y, y]]`.
//! With `k = S - M` flipped spins the diagonal elements are pair-counting
//! averages,
//!
//! ```text
//! v+ = <(N-k)(N-k-1)> / N(N-1)
//! v- = <k(k-1)>       / N(N-1)
//! y  = <k(N-k)>       / N(N-1)
//! u  = <Sx² - Sy²>    / N(N-1)
//! ```
//!
//! which expand to the familiar `<Sz>`, `<Sz²>` forms (see
//! [`two_spin_rdm_expanded`]) but avoid the cancellation in `N² - 4<Sz²>`
//! near saturation. For large `N` they approach `v± ≈ 1/4 + <Sz²>/N² ± <Sz>/N`,
//! `y ≈ 1/4 - <Sz²>/N²`; those asymptotic forms are not used here.

use core::ops::{Add, Mul, Sub};

use crate::eigensolver::{ground_state, GroundState, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::fidelity::Block2x2;
use crate::math;
use crate::model::{pair_ladder, LmgParams};

/// Tolerance on the RDM trace and positivity checks.
pub const RDM_TOL: f64 = 1e-12;

/// Expectation values of collective spin operators in a ground state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinMoments {
    pub sz: f64,
    pub szz: f64,
    /// `<S+² + S-²>/2 = <Sx² - Sy²>`.
    pub splus2_re: f64,
    pub sxx: f64,
    pub syy: f64,
    /// `<(N-k)(N-k-1)>`: ordered pairs of up spins.
    pub up_pairs: f64,
    /// `<k(k-1)>`: ordered pairs of down spins.
    pub down_pairs: f64,
    /// `<k(N-k)>`: up/down pairs.
    pub mixed_pairs: f64,
}

/// Independent elements of the two-spin reduced density matrix.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TwoSpinRdm {
    pub v_plus: f64,
    pub v_minus: f64,
    pub y: f64,
    pub u: f64,
}

impl TwoSpinRdm {
    pub fn trace(&self) -> f64 {
        self.v_plus + self.v_minus + 2.0 * self.y
    }

    /// `(ϱ1, ϱ2)` in the rearranged basis `{|00>, |11>, |01>, |10>}`.
    pub fn blocks(&self) -> [Block2x2; 2] {
        [
            Block2x2::new(self.v_plus, self.v_minus, self.u),
            Block2x2::new(self.y, self.y, self.y),
        ]
    }

    /// Trace and positivity of both blocks, with round-off slack [`RDM_TOL`].
    pub fn check(&self) -> Result<()> {
        let tr = self.trace();
        if math::abs(tr - 1.0) > RDM_TOL {
            return Err(Error::InternalConsistency {
                what: "RDM trace differs from 1",
                value: tr - 1.0,
            });
        }
        for (what, v) in [
            ("v_plus negative", self.v_plus),
            ("v_minus negative", self.v_minus),
            ("y negative", self.y),
            ("block determinant negative", self.v_plus * self.v_minus - self.u * self.u),
        ] {
            if v < -RDM_TOL {
                return Err(Error::InternalConsistency { what, value: v });
            }
        }
        Ok(())
    }

    fn map(self, f: impl Fn(f64) -> f64) -> Self {
        TwoSpinRdm {
            v_plus: f(self.v_plus),
            v_minus: f(self.v_minus),
            y: f(self.y),
            u: f(self.u),
        }
    }

    fn zip(self, o: Self, f: impl Fn(f64, f64) -> f64) -> Self {
        TwoSpinRdm {
            v_plus: f(self.v_plus, o.v_plus),
            v_minus: f(self.v_minus, o.v_minus),
            y: f(self.y, o.y),
            u: f(self.u, o.u),
        }
    }

    /// Largest absolute element.
    pub fn max_abs(&self) -> f64 {
        [self.v_plus, self.v_minus, self.y, self.u]
            .iter()
            .fold(0.0, |a, &x| a.max(math::abs(x)))
    }
}

impl Add for TwoSpinRdm {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        self.zip(o, |a, b| a + b)
    }
}

impl Sub for TwoSpinRdm {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self.zip(o, |a, b| a - b)
    }
}

impl Mul<f64> for TwoSpinRdm {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        self.map(|a| a * s)
    }
}

/// Field derivatives of the RDM elements at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RdmDerivatives {
    /// RDM at the centre of the stencil.
    pub value: TwoSpinRdm,
    pub first: TwoSpinRdm,
    pub second: Option<TwoSpinRdm>,
    pub step_used: f64,
    /// Max element-wise gap between the 5-point and 3-point first derivatives.
    pub estimated_error: f64,
}

/// Collective moments of a (real, normalized) ground state.
pub fn spin_moments(gs: &GroundState) -> Result<SpinMoments> {
    let norm: f64 = gs.amplitudes.iter().map(|a| a * a).sum();
    if math::abs(norm - 1.0) > 1e-10 {
        return Err(Error::param("ground state is not normalized", norm));
    }
    let n = gs.n_spins as f64;
    let s = n / 2.0;
    let mut m = SpinMoments {
        sz: 0.0,
        szz: 0.0,
        splus2_re: 0.0,
        sxx: 0.0,
        syy: 0.0,
        up_pairs: 0.0,
        down_pairs: 0.0,
        mixed_pairs: 0.0,
    };
    let flips: alloc::vec::Vec<u32> = gs.flips().collect();
    for (i, (&a, &k)) in gs.amplitudes.iter().zip(&flips).enumerate() {
        let p = a * a;
        let kf = k as f64;
        let mm = s - kf;
        m.sz += p * mm;
        m.szz += p * mm * mm;
        m.up_pairs += p * (n - kf) * (n - kf - 1.0);
        m.down_pairs += p * kf * (kf - 1.0);
        m.mixed_pairs += p * kf * (n - kf);
        if let Some(&b) = gs.amplitudes.get(i + 1) {
            // amplitude at M + 2 (k - 2 flips)
            m.splus2_re += a * b * pair_ladder(gs.n_spins, k);
        }
    }
    let casimir = s * (s + 1.0);
    m.sxx = 0.5 * (casimir - m.szz + m.splus2_re);
    m.syy = 0.5 * (casimir - m.szz - m.splus2_re);
    Ok(m)
}

/// Two-spin RDM from the pair-count moments.
pub fn two_spin_rdm(m: &SpinMoments, n_spins: u32) -> Result<TwoSpinRdm> {
    if n_spins < 2 {
        return Err(Error::param("n_spins must be at least 2", n_spins as f64));
    }
    let n = n_spins as f64;
    let pairs = n * (n - 1.0);
    let rdm = TwoSpinRdm {
        v_plus: m.up_pairs / pairs,
        v_minus: m.down_pairs / pairs,
        y: m.mixed_pairs / pairs,
        u: m.splus2_re / pairs,
    };
    rdm.check()?;
    Ok(rdm)
}

/// The same RDM written through `<Sz>` and `<Sz²>`:
/// `v± = [N² - 2N + 4<Sz²> ± 4<Sz>(N-1)] / 4N(N-1)`, `y = (N² - 4<Sz²>) / 4N(N-1)`.
pub fn two_spin_rdm_expanded(m: &SpinMoments, n_spins: u32) -> TwoSpinRdm {
    let n = n_spins as f64;
    let den = 4.0 * n * (n - 1.0);
    TwoSpinRdm {
        v_plus: (n * n - 2.0 * n + 4.0 * m.szz + 4.0 * m.sz * (n - 1.0)) / den,
        v_minus: (n * n - 2.0 * n + 4.0 * m.szz - 4.0 * m.sz * (n - 1.0)) / den,
        y: (n * n - 4.0 * m.szz) / den,
        u: (m.sxx - m.syy) / (n * (n - 1.0)),
    }
}

/// Ground state and RDM at the given parameters.
pub fn rdm_at(params: &LmgParams) -> Result<(GroundState, TwoSpinRdm)> {
    let gs = ground_state(params, DEFAULT_TOL)?;
    let rdm = two_spin_rdm(&spin_moments(&gs)?, params.n_spins)?;
    Ok((gs, rdm))
}

/// RDM at `params`, or [`Error::DerivativeUndefined`] when the ground state is degenerate.
pub fn nondegenerate_rdm(params: &LmgParams) -> Result<TwoSpinRdm> {
    let (gs, rdm) = rdm_at(params)?;
    if gs.degenerate {
        return Err(Error::DerivativeUndefined { h: params.field });
    }
    Ok(rdm)
}

/// Default derivative step: `1e-3`, shrinking to `2.5e-4` within 0.05 of `h = 1`.
pub fn default_step(h: f64) -> f64 {
    if math::abs(h - 1.0) < 0.05 {
        2.5e-4
    } else {
        1e-3
    }
}

/// Stencil derivatives of any RDM-valued function of `h`.
///
/// `eval` is called at `h + j·step` for `j = -2..=2` in ascending order.
pub fn stencil_derivatives(
    mut eval: impl FnMut(f64) -> Result<TwoSpinRdm>,
    h: f64,
    step: f64,
    want_second: bool,
) -> Result<RdmDerivatives> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::param("derivative step must be positive", step));
    }
    let mut f = [TwoSpinRdm::default(); 5];
    for (j, slot) in f.iter_mut().enumerate() {
        *slot = eval(h + (j as f64 - 2.0) * step)?;
    }
    let first5 = ((f[0] - f[4]) + (f[3] - f[1]) * 8.0) * (1.0 / (12.0 * step));
    let first3 = (f[3] - f[1]) * (1.0 / (2.0 * step));
    let second = want_second.then(|| {
        ((f[1] + f[3]) * 16.0 - (f[0] + f[4]) - f[2] * 30.0) * (1.0 / (12.0 * step * step))
    });
    let tr = first5.trace();
    if math::abs(tr) > 1e-8 {
        return Err(Error::InternalConsistency {
            what: "trace of RDM derivative is not zero",
            value: tr,
        });
    }
    Ok(RdmDerivatives {
        value: f[2],
        first: first5,
        second,
        step_used: step,
        estimated_error: (first5 - first3).max_abs(),
    })
}

/// First (and optionally second) field derivatives of the RDM at `params.field`.
///
/// Undefined when any stencil point is degenerate or has its ground state in
/// the other parity sector.
pub fn rdm_derivatives(params: &LmgParams, step: f64, want_second: bool) -> Result<RdmDerivatives> {
    params.validate()?;
    let (centre, _) = rdm_at(params)?;
    stencil_derivatives(
        |h| {
            let (gs, rdm) = rdm_at(&params.at_field(h)?)?;
            if gs.degenerate || gs.sector != centre.sector {
                return Err(Error::DerivativeUndefined { h });
            }
            Ok(rdm)
        },
        params.field,
        step,
        want_second,
    )
}

/// Global ground-state overlap `|<φ0(h)|φ0(h+δ)>|`.
pub fn global_overlap(params: &LmgParams, delta: f64) -> Result<f64> {
    let a = ground_state(params, DEFAULT_TOL)?;
    let b = ground_state(&params.at_field(params.field + delta)?, DEFAULT_TOL)?;
    for (gs, h) in [(&a, params.field), (&b, params.field + delta)] {
        if gs.degenerate {
            return Err(Error::DerivativeUndefined { h });
        }
    }
    if a.sector != b.sector {
        return Ok(0.0);
    }
    let dot: f64 = a.amplitudes.iter().zip(&b.amplitudes).map(|(x, y)| x * y).sum();
    Ok(math::abs(dot))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ParitySector;
    use alloc::vec;

    fn polarized(n: u32) -> GroundState {
        let dim = ParitySector::EvenFlips.dim(n);
        let mut amplitudes = vec![0.0; dim];
        amplitudes[dim - 1] = 1.0;
        GroundState {
            n_spins: n,
            energy: 0.0,
            amplitudes,
            sector: ParitySector::EvenFlips,
            gap_within_sector: 1.0,
            gap_between_sectors: 1.0,
            degenerate: false,
        }
    }

    #[test]
    fn polarized_moments_and_rdm() {
        for n in [2u32, 5, 64] {
            let m = spin_moments(&polarized(n)).unwrap();
            let nf = n as f64;
            assert_eq!(m.sz, nf / 2.0);
            assert_eq!(m.szz, nf * nf / 4.0);
            assert_eq!(m.splus2_re, 0.0);
            let r = two_spin_rdm(&m, n).unwrap();
            assert_eq!(r, TwoSpinRdm { v_plus: 1.0, v_minus: 0.0, y: 0.0, u: 0.0 });
        }
    }

    #[test]
    fn two_spin_closed_form_moments() {
        let p = LmgParams::new(2, 0.0, 1.0).unwrap();
        let (gs, r) = rdm_at(&p).unwrap();
        let m = spin_moments(&gs).unwrap();
        // eigenvector (b, a) of [[2, -1/2], [-1/2, -2]]
        let e = 4.25f64.sqrt();
        let b = 0.5 / (2.0 + e);
        let norm = (1.0 + b * b).sqrt();
        let (a, b) = (1.0 / norm, b / norm);
        assert!((m.sz - (a * a - b * b)).abs() < 1e-14);
        assert!((m.sz - 0.970_143).abs() < 1e-6);
        assert!((m.szz - 1.0).abs() < 1e-14);
        assert!((m.splus2_re - 2.0 * a * b).abs() < 1e-14);
        assert!((m.splus2_re - 0.242_536).abs() < 1e-6);
        assert!((r.v_plus - 0.985_071).abs() < 1e-6);
        assert!((r.v_minus - 0.014_929).abs() < 1e-6);
        assert!(r.y.abs() < 1e-15);
        assert!((r.u - 0.121_268).abs() < 1e-6);
    }

    #[test]
    fn isotropic_state_has_no_u() {
        for h in [0.13, 0.55, 1.7] {
            let p = LmgParams::new(20, 1.0, h).unwrap();
            let (gs, r) = rdm_at(&p).unwrap();
            // only the residue of inverse iteration on a diagonal matrix survives
            assert!(spin_moments(&gs).unwrap().splus2_re.abs() < 1e-9);
            assert!(r.u.abs() < 1e-11);
        }
    }

    #[test]
    fn sum_rule_and_expanded_formula() {
        for &(n, g, h) in &[(7u32, 0.3, 0.4), (64, 0.0, 0.95), (200, -0.5, 1.2), (513, 0.75, 1.0)] {
            let p = LmgParams::new(n, g, h).unwrap();
            let (gs, r) = rdm_at(&p).unwrap();
            let m = spin_moments(&gs).unwrap();
            let s = n as f64 / 2.0;
            let c = s * (s + 1.0);
            assert!(((m.sxx + m.syy + m.szz) - c).abs() <= 1e-9 * c);
            assert!(m.sz.abs() <= s + 1e-12);
            assert!(m.szz >= 0.0 && m.szz <= s * s + 1e-9);
            let e = two_spin_rdm_expanded(&m, n);
            assert!((e - r).max_abs() < 1e-12, "{e:?} vs {r:?}");
        }
    }

    #[test]
    fn large_isotropic_y_approaches_thermodynamic_value() {
        let h: f64 = 0.6;
        let mut last = f64::INFINITY;
        for n in [100u32, 1000, 10000] {
            // M0 = hN/2 exactly on these sizes
            let p = LmgParams::new(n, 1.0, h + 0.1 / n as f64).unwrap();
            let (_, r) = rdm_at(&p).unwrap();
            let err = (r.y - (1.0 - h * h) / 4.0).abs();
            assert!(err < last);
            last = err;
        }
        assert!(last < 1e-4);
    }

    #[test]
    fn derivatives_on_flat_plateau_vanish() {
        let p = LmgParams::new(16, 1.0, 1.5).unwrap();
        let d = rdm_derivatives(&p, 1e-3, true).unwrap();
        assert!(d.first.max_abs() < 1e-10);
        assert!(d.second.unwrap().max_abs() < 1e-10);
    }

    #[test]
    fn derivative_trace_vanishes() {
        let p = LmgParams::new(100, 0.5, 1.1).unwrap();
        let d = rdm_derivatives(&p, 1e-3, true).unwrap();
        assert!(d.first.trace().abs() < 1e-10);
        assert!(d.second.unwrap().trace().abs() < 1e-6);
    }

    #[test]
    fn derivatives_self_converge() {
        let p = LmgParams::new(128, 0.0, 0.8).unwrap();
        let a = rdm_derivatives(&p, 1e-3, false).unwrap();
        let b = rdm_derivatives(&p, 5e-4, false).unwrap();
        let scale = a.first.max_abs();
        assert!((a.first - b.first).max_abs() <= 1e-6 * scale);
    }

    #[test]
    fn stencil_on_polynomial_is_fourth_order() {
        // y(h) = h(1-h) embedded in a trace-one family
        let fam = |h: f64| {
            let y = 0.25 * (h.sin() + 1.2) / 2.2;
            Ok(TwoSpinRdm { v_plus: 0.5 - y, v_minus: 0.5 - y, y, u: 0.0 })
        };
        let exact = 0.25 * 0.7f64.cos() / 2.2;
        let e1 = (stencil_derivatives(fam, 0.7, 0.1, false).unwrap().first.y - exact).abs();
        let e2 = (stencil_derivatives(fam, 0.7, 0.05, false).unwrap().first.y - exact).abs();
        assert!(e1 / e2 > 8.0, "ratio {}", e1 / e2);
    }

    #[test]
    fn degenerate_stencil_point_is_reported() {
        // lowest stencil point lands on the crossing at h = 0.9
        let p = LmgParams::new(10, 1.0, 0.901).unwrap();
        match rdm_derivatives(&p, 5e-4, false) {
            Err(Error::DerivativeUndefined { h }) => assert!((h - 0.9).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn overlap_cases() {
        let p = LmgParams::new(64, 0.3, 1.1).unwrap();
        assert!((global_overlap(&p, 0.0).unwrap() - 1.0).abs() < 1e-12);
        let o = global_overlap(&p, 1e-2).unwrap();
        assert!(o < 1.0 && o > 0.99);
        let iso = LmgParams::new(10, 1.0, 0.92).unwrap();
        assert!((global_overlap(&iso, 0.05).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(global_overlap(&iso, -0.05).unwrap(), 0.0);
        let iso = LmgParams::new(10, 1.0, 0.75).unwrap();
        assert!(global_overlap(&iso, 0.15).is_err());
    }
}
