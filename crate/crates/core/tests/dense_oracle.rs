//! Parity-split solver against dense diagonalization of the unsplit Hamiltonian.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rfs_core::eigensolver::{kth_eigenvalue, DEFAULT_TOL};
use rfs_core::{build_sector, rdm_at, LmgParams, ParitySector};

/// Unsplit Hamiltonian in the basis `M = -S..S`, straight from the spin operators:
/// `-(2/N)(Sx² + γ Sy²) - 2h Sz + (1 + γ)/2`, the constant removing the `i = j` pair terms.
fn dense_hamiltonian(n: u32, gamma: f64, h: f64) -> DMatrix<f64> {
    let dim = n as usize + 1;
    let s = n as f64 / 2.0;
    let m = |i: usize| -s + i as f64;
    let mut sp = DMatrix::<f64>::zeros(dim, dim);
    let mut sz = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..dim {
        sz[(i, i)] = m(i);
        if i + 1 < dim {
            sp[(i + 1, i)] = (s * (s + 1.0) - m(i) * (m(i) + 1.0)).sqrt();
        }
    }
    let sm = sp.transpose();
    let sx = (&sp + &sm) * 0.5;
    // Sy² = -(S+ - S-)²/4, real
    let d = &sp - &sm;
    let sy2 = -(&d * &d) * 0.25;
    let nf = n as f64;
    let id = DMatrix::<f64>::identity(dim, dim);
    -(&sx * &sx + &sy2 * gamma) * (2.0 / nf) - &sz * (2.0 * h) + id * ((1.0 + gamma) / 2.0)
}

fn sorted_dense_spectrum(n: u32, gamma: f64, h: f64) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(dense_hamiltonian(n, gamma, h)).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

#[test]
fn split_spectra_match_dense_for_all_n_up_to_64() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a6);
    for n in 2..=64u32 {
        for _ in 0..3 {
            let gamma = rng.gen_range(-1.0..1.0);
            let h = rng.gen_range(0.0..2.0);
            let p = LmgParams::new(n, gamma, h).unwrap();
            let mut split = Vec::new();
            for sector in ParitySector::ALL {
                let m = build_sector(&p, sector).unwrap();
                split.extend((0..m.dim()).map(|k| kth_eigenvalue(&m, k, DEFAULT_TOL)));
            }
            split.sort_by(f64::total_cmp);
            let dense = sorted_dense_spectrum(n, gamma, h);
            assert_eq!(split.len(), dense.len());
            for (a, b) in split.iter().zip(&dense) {
                assert!((a - b).abs() <= 1e-10, "N={n} γ={gamma} h={h}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn rdm_matches_dense_ground_vector() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    while checked < 40 {
        let n = rng.gen_range(2..=48u32);
        let gamma = rng.gen_range(-1.0..1.0);
        let h = rng.gen_range(0.0..1.8);
        let p = LmgParams::new(n, gamma, h).unwrap();
        let (gs, rdm) = rdm_at(&p).unwrap();
        if gs.degenerate {
            continue;
        }
        let eig = SymmetricEigen::new(dense_hamiltonian(n, gamma, h));
        let (i0, _) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        let v = eig.eigenvectors.column(i0);
        assert!((gs.energy - eig.eigenvalues[i0]).abs() < 1e-10);
        let nf = n as f64;
        let s = nf / 2.0;
        let pairs = nf * (nf - 1.0);
        let (mut vp, mut vm, mut y, mut u) = (0.0, 0.0, 0.0, 0.0);
        for i in 0..=n as usize {
            let m = -s + i as f64;
            let k = s - m;
            let pr = v[i] * v[i];
            vp += pr * (nf - k) * (nf - k - 1.0) / pairs;
            vm += pr * k * (k - 1.0) / pairs;
            y += pr * k * (nf - k) / pairs;
            if i + 2 <= n as usize {
                let c = |m: f64| (s * (s + 1.0) - m * (m + 1.0)).sqrt();
                u += v[i + 2] * v[i] * c(m) * c(m + 1.0) / pairs;
            }
        }
        for (got, want, what) in [(rdm.v_plus, vp, "v+"), (rdm.v_minus, vm, "v-"), (rdm.y, y, "y"), (rdm.u, u, "u")] {
            assert!((got - want).abs() < 1e-9, "{what}: N={n} γ={gamma} h={h}: {got} vs {want}");
        }
        checked += 1;
    }
}

#[test]
fn n2_ground_energy_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let h = rng.gen_range(0.5..2.0);
        let gamma = rng.gen_range(-1.0..1.0);
        let gs = rfs_core::ground_state(&LmgParams::new(2, gamma, h).unwrap(), DEFAULT_TOL).unwrap();
        let want = -(4.0 * h * h + (1.0 - gamma) * (1.0 - gamma) / 4.0).sqrt();
        assert!((gs.energy - want).abs() < 1e-12);
    }
}
