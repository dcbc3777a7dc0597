//! Verification suites shared by `rfs selftest` and the acceptance target.
//!
//! Each suite counts cases and failures and keeps the worst error as a
//! fraction of its tolerance, so a report line reads the same for every suite.
//! Random inputs come from fixed ChaCha seeds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rfs_core::eigensolver::{kth_eigenvalue, DEFAULT_TOL};
use rfs_core::isotropic::{iso_chi_thermo, iso_crossings, iso_m0, iso_reduced_fidelity};
use rfs_core::reference::{uhlmann_2x2, unsplit_spectrum};
use rfs_core::scaling::{fit_line, maximize, ChiOptions, Evaluator, SweepRow};
use rfs_core::{block_fidelity, build_sector, ground_state, rdm_at, spin_moments, Block2x2, LmgParams, ParitySector};
use serde::Serialize;

/// Outcome of one suite.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Tally {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    /// Largest observed error divided by its tolerance.
    pub worst: f64,
    pub first_failure: Option<String>,
}

impl Tally {
    pub fn new(name: &'static str) -> Self {
        Tally {
            name,
            cases: 0,
            failures: 0,
            worst: 0.0,
            first_failure: None,
        }
    }

    /// Record `err` against `tol`; NaN counts as a failure.
    pub fn check(&mut self, err: f64, tol: f64, ctx: impl FnOnce() -> String) {
        self.cases += 1;
        let ratio = err / tol;
        if ratio.is_nan() || ratio > self.worst {
            self.worst = if ratio.is_nan() { f64::INFINITY } else { ratio };
        }
        if !(err <= tol) {
            self.fail(ctx);
        }
    }

    /// Record a boolean condition.
    pub fn expect(&mut self, ok: bool, ctx: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.fail(ctx);
        }
    }

    fn fail(&mut self, ctx: impl FnOnce() -> String) {
        self.failures += 1;
        if self.first_failure.is_none() {
            self.first_failure = Some(ctx());
        }
    }

    /// Record an error from the pipeline as a failed case.
    pub fn error(&mut self, e: impl std::fmt::Display) {
        self.cases += 1;
        let msg = e.to_string();
        self.fail(|| msg);
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > 0
    }

    pub fn summary(&self) -> String {
        let mut s = format!(
            "{}: {}/{} passed, worst {:.3} of tolerance",
            self.name,
            self.cases - self.failures,
            self.cases,
            self.worst
        );
        if let Some(f) = &self.first_failure {
            s.push_str(&format!("; first failure: {f}"));
        }
        s
    }
}

/// `G Gᵀ` for a random `G` with entries in `[-1, 1)`.
fn random_psd(rng: &mut ChaCha8Rng) -> Block2x2 {
    let g: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
    Block2x2::new(g[0] * g[0] + g[1] * g[1], g[2] * g[2] + g[3] * g[3], g[0] * g[2] + g[1] * g[3])
}

/// Closed-form 2×2 fidelity against explicit matrix square roots, at 1e-10.
pub fn fidelity_identity(seed: u64, cases: usize) -> Tally {
    let mut t = Tally::new("fidelity-identity");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..cases {
        let (a, b) = (random_psd(&mut rng), random_psd(&mut rng));
        match block_fidelity(&a, &b) {
            Ok(f) => {
                let want = uhlmann_2x2([a.a, a.b, a.d], [b.a, b.b, b.d]);
                t.check((f - want).abs(), 1e-10, || format!("{a:?} {b:?}: {f} vs {want}"));
            }
            Err(e) => t.error(e),
        }
    }
    t
}

/// `tr(A²) = (tr A)² - 2 det A`, at 1e-12.
pub fn trace_square_identity(seed: u64, cases: usize) -> Tally {
    let mut t = Tally::new("trace-square-identity");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..cases {
        let a = random_psd(&mut rng);
        // tr(A²) written out element by element
        let lhs = a.a * a.a + 2.0 * a.b * a.b + a.d * a.d;
        let rhs = a.trace() * a.trace() - 2.0 * a.det();
        t.check((lhs - rhs).abs(), 1e-12, || format!("{a:?}: {lhs} vs {rhs}"));
    }
    t
}

/// Two-spin ground energy `-sqrt(4h² + (1-γ)²/4)`, at 1e-12.
///
/// The formula is the ground energy where it lies below the other parity
/// sector, which holds on `h ∈ [0.5, 2]`, `γ ∈ [-1, 1)`.
pub fn two_spin_energy(seed: u64, cases: usize) -> Tally {
    let mut t = Tally::new("two-spin-energy");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..cases {
        let h: f64 = rng.gen_range(0.5..=2.0);
        let gamma = rng.gen_range(-1.0..1.0);
        let want = -(4.0 * h * h + (1.0 - gamma) * (1.0 - gamma) / 4.0).sqrt();
        match LmgParams::new(2, gamma, h).and_then(|p| ground_state(&p, DEFAULT_TOL)) {
            Ok(gs) => t.check((gs.energy - want).abs(), 1e-12, || format!("h={h} γ={gamma}: {} vs {want}", gs.energy)),
            Err(e) => t.error(e),
        }
    }
    t
}

/// Sector-split spectra against dense Jacobi on the unsplit matrix, `N = 2..=max_n`, at 1e-10.
pub fn split_vs_dense(seed: u64, max_n: u32, per_n: usize) -> Tally {
    let mut t = Tally::new("split-vs-dense");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for n in 2..=max_n {
        for _ in 0..per_n {
            let gamma = rng.gen_range(-1.0..=1.0);
            let h = rng.gen_range(0.0..2.0);
            let p = match LmgParams::new(n, gamma, h) {
                Ok(p) => p,
                Err(e) => {
                    t.error(e);
                    continue;
                }
            };
            let mut split = Vec::with_capacity(n as usize + 1);
            for sector in ParitySector::ALL {
                match build_sector(&p, sector) {
                    Ok(m) => split.extend((0..m.dim()).map(|k| kth_eigenvalue(&m, k, DEFAULT_TOL))),
                    Err(e) => t.error(e),
                }
            }
            split.sort_by(f64::total_cmp);
            let dense = unsplit_spectrum(&p);
            let err = if split.len() == dense.len() {
                split.iter().zip(&dense).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
            } else {
                f64::NAN
            };
            t.check(err, 1e-10, || format!("N={n} γ={gamma} h={h}: max deviation {err:e}"));
        }
    }
    t
}

/// RDM trace, positivity, the spin sum rule and the block decomposition of χ
/// at every row of a sweep.
pub fn sweep_invariants(t: &mut Tally, n_spins: u32, gamma: f64, rows: &[SweepRow]) {
    for r in rows {
        let ctx = |what: &str| format!("{what} at N={n_spins} γ={gamma} h={}", r.h);
        let (gs, rdm) = match LmgParams::new(n_spins, gamma, r.h).and_then(|p| rdm_at(&p)) {
            Ok(x) => x,
            Err(e) => {
                t.error(e);
                continue;
            }
        };
        t.check((rdm.trace() - 1.0).abs(), 1e-12, || ctx("trace"));
        let min_eig = rdm
            .blocks()
            .iter()
            .map(|b| {
                let half = 0.5 * (b.a - b.d);
                0.5 * (b.a + b.d) - (half * half + b.b * b.b).sqrt()
            })
            .fold(f64::INFINITY, f64::min);
        t.expect(min_eig >= -1e-12, || ctx("positivity"));
        match spin_moments(&gs) {
            Ok(m) => {
                let s = n_spins as f64 / 2.0;
                let c = s * (s + 1.0);
                t.check((m.sxx + m.syy + m.szz - c).abs() / c, 1e-9, || ctx("sum rule"));
            }
            Err(e) => t.error(e),
        }
        if !r.degenerate {
            t.check((r.chi - r.chi_block1 - r.chi_block2).abs(), 1e-10, || ctx("block sum"));
        }
    }
}

/// Isotropic closed forms and plateau fidelities for the given sizes.
pub fn isotropic(ns: &[u32]) -> Tally {
    let mut t = Tally::new("isotropic");
    t.expect(iso_chi_thermo(0.6) == Ok(0.78125), || "chi_thermo(0.6) != 0.78125".into());
    t.expect(iso_crossings(10) == [0.1, 0.3, 0.5, 0.7, 0.9], || format!("crossings(10) = {:?}", iso_crossings(10)));
    for &n in ns {
        let cs = iso_crossings(n);
        let mut edges = vec![0.0];
        edges.extend(cs.iter().copied().filter(|&c| c > 0.0));
        edges.push(1.4);
        // two interior points of every plateau give F = 1
        for w in edges.windows(2) {
            let (a, b) = (w[0] + 0.25 * (w[1] - w[0]), w[0] + 0.75 * (w[1] - w[0]));
            match iso_reduced_fidelity(n, a, b) {
                Ok(f) => t.check((f - 1.0).abs(), 1e-12, || format!("N={n} plateau ({a}, {b}): F = {f}")),
                Err(e) => t.error(e),
            }
        }
        // straddling each crossing gives F < 1
        for &c in cs.iter().filter(|&&c| c > 0.0) {
            let eps = 0.25 / n as f64;
            match iso_reduced_fidelity(n, c - eps, c + eps) {
                Ok(f) => t.expect(f < 1.0 - 1e-12, || format!("N={n} crossing {c}: F = {f}")),
                Err(e) => t.error(e),
            }
            t.expect(iso_m0(n, c).map(|g| g.degenerate) == Ok(true), || format!("N={n}: {c} not flagged"));
        }
    }
    t
}

/// Closed-form χ against the centred oracle at small `N`, 0.5 % relative.
pub fn closed_vs_oracle(ns: &[u32], gammas: &[f64], hs: &[f64]) -> Tally {
    let mut t = Tally::new("closed-vs-oracle");
    for &n in ns {
        for &g in gammas {
            let eval = match Evaluator::uncached(n, g, ChiOptions::default()) {
                Ok(e) => e,
                Err(e) => {
                    t.error(e);
                    continue;
                }
            };
            for &h in hs {
                match eval.row(h) {
                    Ok(r) if r.degenerate => {}
                    Ok(r) => {
                        let err = (r.chi - r.chi_oracle).abs();
                        let tol = (5e-3 * r.chi.abs()).max(1e-6);
                        t.check(err, tol, || format!("N={n} γ={g} h={h}: {} vs {}", r.chi, r.chi_oracle));
                    }
                    Err(e) => t.error(e),
                }
            }
        }
    }
    t
}

/// Golden-section search on known maxima and an exact line fit.
pub fn search_and_fit() -> Tally {
    let mut t = Tally::new("search-and-fit");
    for centre in [0.55, 0.8, 1.17] {
        match maximize(|x| Ok(Some(2.0 - (x - centre) * (x - centre))), 0.5, 1.3, 1e-5) {
            Ok(m) => t.check((m.x - centre).abs(), 1e-5, || format!("parabola at {centre}: {}", m.x)),
            Err(e) => t.error(e),
        }
    }
    let pts: Vec<(f64, f64)> = (7..=12).map(|k| (k as f64, 2.0 / 3.0 * k as f64 + 0.1)).collect();
    match fit_line(&pts) {
        Ok(f) => {
            t.check((f.slope - 2.0 / 3.0).abs(), 1e-12, || format!("slope {}", f.slope));
            t.check((f.r_squared - 1.0).abs(), 1e-12, || format!("r² {}", f.r_squared));
        }
        Err(e) => t.error(e),
    }
    t
}

/// The suites behind `rfs selftest`, sized to finish well inside a minute.
pub fn selftest() -> Vec<Tally> {
    let mut inv = Tally::new("sweep-invariants");
    for (n, g) in [(16u32, 0.0), (33, 0.5), (64, -0.4)] {
        let spec = rfs_core::SweepSpec {
            n_spins: n,
            gamma: g,
            h_min: 0.3,
            h_max: 1.5,
            steps: 25,
            options: ChiOptions::default(),
        };
        match crate::par::sweep(&spec) {
            Ok(rows) => sweep_invariants(&mut inv, n, g, &rows),
            Err(e) => inv.error(e),
        }
    }
    vec![
        fidelity_identity(0xf1de, 1000),
        trace_square_identity(0x7ace, 1000),
        two_spin_energy(0x2, 100),
        split_vs_dense(0xde45e, 64, 1),
        inv,
        isotropic(&[4, 10, 50]),
        closed_vs_oracle(&[16, 32, 64], &[0.0, 0.5], &[0.6, 0.9, 1.1, 1.4]),
        search_and_fit(),
    ]
}
