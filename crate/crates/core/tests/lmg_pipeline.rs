//! End-to-end checks of the LMG pipeline: ground state, RDM, closed form, oracle.

use proptest::prelude::*;
use rfs_core::observables::{default_step, nondegenerate_rdm};
use rfs_core::scaling::{ChiOptions, Evaluator};
use rfs_core::{chi_blockdiag, chi_lmg, fidelity_blockdiag, rdm_at, rdm_derivatives, spin_moments, LmgParams};

#[test]
fn nearby_fidelity_is_just_below_one() {
    let a = nondegenerate_rdm(&LmgParams::new(128, 0.0, 0.8).unwrap()).unwrap();
    let b = nondegenerate_rdm(&LmgParams::new(128, 0.0, 0.801).unwrap()).unwrap();
    let f = fidelity_blockdiag(&a.blocks(), &b.blocks()).unwrap();
    assert!(f > 1.0 - 1e-4 && f < 1.0, "{f}");
}

#[test]
fn closed_form_equals_generic_block_formula() {
    for (n, gamma, h) in [(128, 0.0, 0.8), (64, 0.5, 1.2), (256, -0.3, 0.95), (32, 0.75, 0.4)] {
        let p = LmgParams::new(n, gamma, h).unwrap();
        let d = rdm_derivatives(&p, default_step(h), true).unwrap();
        let lmg = chi_lmg(&d.value, &d).unwrap();
        let second = d.second.unwrap().blocks();
        let generic = chi_blockdiag(&d.value.blocks(), &d.first.blocks(), Some(&second)).unwrap();
        assert!((lmg.chi_total - generic.chi_total).abs() <= 1e-12 * lmg.chi_total.max(1.0), "N={n} h={h}");
        for (x, y) in lmg.per_block.iter().zip(&generic.per_block) {
            assert!((x - y).abs() <= 1e-12 * lmg.chi_total.max(1.0));
        }
    }
}

#[test]
fn n512_closed_form_matches_oracle() {
    let e = Evaluator::uncached(512, 0.0, ChiOptions::default()).unwrap();
    let r = e.chi(0.9).unwrap();
    let o = r.oracle_chi.unwrap();
    assert!((r.chi_total - o).abs() <= 5e-3 * r.chi_total, "{} vs {o}", r.chi_total);
}

#[test]
fn polarized_isotropic_plateau_has_zero_susceptibility() {
    let p = LmgParams::new(40, 1.0, 1.3).unwrap();
    let d = rdm_derivatives(&p, 1e-3, true).unwrap();
    let r = chi_lmg(&d.value, &d).unwrap();
    assert!(r.chi_total.abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn rdm_invariants_hold_everywhere(n in 2u32..300, gamma in -1.0f64..0.999, h in 0.0f64..2.0) {
        let p = LmgParams::new(n, gamma, h).unwrap();
        let (gs, r) = rdm_at(&p).unwrap();
        prop_assert!((r.trace() - 1.0).abs() <= 1e-12);
        for b in r.blocks() {
            prop_assert!(b.a >= -1e-12 && b.d >= -1e-12);
            prop_assert!(b.det() >= -1e-12);
        }
        let m = spin_moments(&gs).unwrap();
        let s = n as f64 / 2.0;
        let casimir = s * (s + 1.0);
        prop_assert!((m.sxx + m.syy + m.szz - casimir).abs() <= 1e-9 * casimir);
        let norm: f64 = gs.amplitudes.iter().map(|a| a * a).sum();
        prop_assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn susceptibility_is_non_negative(n in 8u32..200, gamma in -0.9f64..0.9, h in 0.3f64..1.6) {
        let e = Evaluator::uncached(n, gamma, ChiOptions::closed_form_only()).unwrap();
        if let Some(chi) = e.chi_or_none(h).unwrap() {
            prop_assert!(chi >= 0.0);
        }
    }
}
