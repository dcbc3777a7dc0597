//! Parallel drivers over the core evaluator.
//!
//! Work items are independent. `collect` on an indexed parallel iterator keeps
//! input order, so results come back sorted by `(N, h)` whatever the schedule.

use std::collections::HashMap;
use std::sync::RwLock;

use rayon::prelude::*;
use rfs_core::scaling::{
    collapse_rows, find_peak, fit_thermo_exponent, ChiOptions, CollapseNote, CollapseRow, Evaluator, PeakResult,
    PointState, ScalingFit, StateCache, SweepRow, SweepSpec,
};
use rfs_core::Result;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "RFS_THREADS";

/// State cache shared between worker threads: concurrent readers, one writer at a time.
#[derive(Debug, Default)]
pub struct SharedCache(RwLock<HashMap<u64, PointState>>);

impl SharedCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.0.read().map(|m| m.len()).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl StateCache for SharedCache {
    fn get(&self, key: u64) -> Option<PointState> {
        self.0.read().ok()?.get(&key).copied()
    }

    fn put(&self, key: u64, state: PointState) {
        if let Ok(mut m) = self.0.write() {
            m.insert(key, state);
        }
    }
}

/// Thread pool sized from [`THREADS_ENV`] when set.
pub fn thread_pool() -> std::result::Result<rayon::ThreadPool, String> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| format!("{THREADS_ENV} must be a positive integer (got {v:?})"))?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| e.to_string())
}

/// Sweep with rows evaluated in parallel.
pub fn sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let cache = SharedCache::new();
    let eval = Evaluator::new(spec.n_spins, spec.gamma, spec.options, &cache)?;
    spec.grid().par_iter().map(|&h| eval.row(h)).collect()
}

/// Peak search parameters shared by all sizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakSearch {
    pub gamma: f64,
    pub h_lo: f64,
    pub h_hi: f64,
    pub tol_h: f64,
    pub options: ChiOptions,
}

impl PeakSearch {
    pub fn new(gamma: f64) -> Self {
        PeakSearch {
            gamma,
            h_lo: 0.5,
            h_hi: 1.3,
            tol_h: rfs_core::scaling::DEFAULT_TOL_H,
            options: ChiOptions::closed_form_only(),
        }
    }

    pub fn run(&self, n_spins: u32, cache: &SharedCache) -> Result<PeakResult> {
        let eval = Evaluator::new(n_spins, self.gamma, self.options, cache)?;
        find_peak(&eval, self.h_lo, self.h_hi, self.tol_h)
    }
}

/// One peak per size, searched concurrently.
pub fn peaks(ns: &[u32], search: &PeakSearch) -> Result<Vec<PeakResult>> {
    ns.par_iter().map(|&n| search.run(n, &SharedCache::new())).collect()
}

/// Collapse table for each size at the shared `x` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Collapse {
    pub peaks: Vec<PeakResult>,
    pub rows: Vec<CollapseRow>,
    pub notes: Vec<CollapseNote>,
}

pub fn collapse(ns: &[u32], search: &PeakSearch, nu: f64, xs: &[f64]) -> Result<Collapse> {
    let parts: Vec<(PeakResult, Vec<CollapseRow>, Vec<CollapseNote>)> = ns
        .par_iter()
        .map(|&n| {
            let cache = SharedCache::new();
            let peak = search.run(n, &cache)?;
            let eval = Evaluator::new(n, search.gamma, search.options, &cache)?;
            let (mut rows, mut notes) = (Vec::new(), Vec::new());
            collapse_rows(&eval, &peak, nu, xs, &mut rows, &mut notes)?;
            Ok((peak, rows, notes))
        })
        .collect::<Result<_>>()?;
    let mut out = Collapse {
        peaks: Vec::new(),
        rows: Vec::new(),
        notes: Vec::new(),
    };
    for (p, r, n) in parts {
        out.peaks.push(p);
        out.rows.extend(r);
        out.notes.extend(n);
    }
    Ok(out)
}

/// Thermodynamic exponent fit on `h ∈ [1 + a, 1 + b]`.
pub fn thermo_fit(n_spins: u32, gamma: f64, a: f64, b: f64, points: usize, options: ChiOptions) -> Result<ScalingFit> {
    let cache = SharedCache::new();
    let eval = Evaluator::new(n_spins, gamma, options, &cache)?;
    fit_thermo_exponent(&eval, a, b, points)
}
