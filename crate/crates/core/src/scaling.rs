//! Susceptibility sweeps, peak location, exponent fits and collapse tables.
//!
//! Everything is driven through an [`Evaluator`], which owns the model
//! parameters, the derivative and oracle settings, and a [`StateCache`] of
//! ground-state RDMs keyed by the exact bit pattern of `h`. The five stencil
//! points of neighbouring evaluations overlap, so the cache matters inside
//! peak searches and dense sweeps; it never changes a result.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::cell::RefCell;

use crate::eigensolver::{ground_state, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::fidelity::{chi_from_fidelity, chi_lmg, fidelity_blockdiag, SusceptibilityResult};
use crate::math;
use crate::model::{LmgParams, ParitySector};
use crate::observables::{default_step, spin_moments, stencil_derivatives, two_spin_rdm, TwoSpinRdm};

/// Critical field of the anisotropic model.
pub const H_C: f64 = 1.0;
/// Oracle step used when none is given.
pub const DEFAULT_ORACLE_DELTA: f64 = 1e-3;
/// Golden-section stopping width used when none is given.
pub const DEFAULT_TOL_H: f64 = 1e-5;
/// Points in the unimodality pre-scan of [`find_peak`].
pub const PRESCAN_POINTS: usize = 32;
/// Largest `|2 c2|` of a quadratic fit to log-log data accepted by [`fit_power_law`].
pub const MAX_LOG_CURVATURE: f64 = 0.6;
/// The thermodynamic window must start at least this many `N^{-2/3}` above `h_c`.
pub const ROUNDING_MARGIN: f64 = 4.0;

/// How the stencil step is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepPolicy {
    /// [`default_step`]: finer near the critical point.
    Auto,
    Fixed(f64),
}

impl StepPolicy {
    pub fn at(self, h: f64) -> f64 {
        match self {
            StepPolicy::Auto => default_step(h),
            StepPolicy::Fixed(s) => s,
        }
    }

    /// Largest step the policy can produce.
    pub fn max_step(self) -> f64 {
        match self {
            StepPolicy::Auto => 1e-3,
            StepPolicy::Fixed(s) => s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiOptions {
    pub step: StepPolicy,
    /// Centred finite-step oracle `-2 ln F(ρ(h-δ/2), ρ(h+δ/2))/δ²`; `None` skips it.
    pub oracle_delta: Option<f64>,
}

impl Default for ChiOptions {
    fn default() -> Self {
        ChiOptions {
            step: StepPolicy::Auto,
            oracle_delta: Some(DEFAULT_ORACLE_DELTA),
        }
    }
}

impl ChiOptions {
    pub fn closed_form_only() -> Self {
        ChiOptions {
            oracle_delta: None,
            ..ChiOptions::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let s = self.step.max_step();
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::param("derivative step must be positive", s));
        }
        if let Some(d) = self.oracle_delta {
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::param("oracle delta must be positive", d));
            }
        }
        Ok(())
    }

    /// How far below the centre field an evaluation reaches.
    pub fn reach(&self) -> f64 {
        let stencil = 2.0 * self.step.max_step();
        let oracle = self.oracle_delta.map_or(0.0, |d| d / 2.0);
        stencil.max(oracle)
    }
}

/// Ground-state data at one field value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointState {
    pub rdm: TwoSpinRdm,
    pub energy: f64,
    pub gap: f64,
    pub sector: ParitySector,
    pub degenerate: bool,
}

/// Memo of [`PointState`]s keyed by `h.to_bits()`.
pub trait StateCache {
    fn get(&self, key: u64) -> Option<PointState>;
    fn put(&self, key: u64, state: PointState);
}

impl<T: StateCache + ?Sized> StateCache for &T {
    fn get(&self, key: u64) -> Option<PointState> {
        (**self).get(key)
    }
    fn put(&self, key: u64, state: PointState) {
        (**self).put(key, state)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NoCache;

impl StateCache for NoCache {
    fn get(&self, _: u64) -> Option<PointState> {
        None
    }
    fn put(&self, _: u64, _: PointState) {}
}

/// Single-threaded cache.
#[derive(Debug, Default)]
pub struct LocalCache(RefCell<BTreeMap<u64, PointState>>);

impl LocalCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.0.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl StateCache for LocalCache {
    fn get(&self, key: u64) -> Option<PointState> {
        self.0.borrow().get(&key).copied()
    }
    fn put(&self, key: u64, state: PointState) {
        self.0.borrow_mut().insert(key, state);
    }
}

/// One row of a susceptibility sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub h: f64,
    pub chi: f64,
    pub chi_block1: f64,
    pub chi_block2: f64,
    /// NaN when the oracle is disabled or the row is degenerate.
    pub chi_oracle: f64,
    pub energy: f64,
    pub gap: f64,
    pub degenerate: bool,
}

/// Susceptibility evaluator for a fixed `(N, γ)`.
#[derive(Debug)]
pub struct Evaluator<C: StateCache = NoCache> {
    params: LmgParams,
    options: ChiOptions,
    cache: C,
}

impl Evaluator<NoCache> {
    pub fn uncached(n_spins: u32, gamma: f64, options: ChiOptions) -> Result<Self> {
        Evaluator::new(n_spins, gamma, options, NoCache)
    }
}

impl<C: StateCache> Evaluator<C> {
    /// Fails with [`Error::IsotropicRouting`] for `γ = 1`.
    pub fn new(n_spins: u32, gamma: f64, options: ChiOptions, cache: C) -> Result<Self> {
        if gamma == 1.0 {
            return Err(Error::IsotropicRouting);
        }
        let params = LmgParams::new(n_spins, gamma, 0.0)?;
        options.validate()?;
        Ok(Evaluator {
            params,
            options,
            cache,
        })
    }

    pub fn n_spins(&self) -> u32 {
        self.params.n_spins
    }

    pub fn gamma(&self) -> f64 {
        self.params.gamma
    }

    pub fn options(&self) -> &ChiOptions {
        &self.options
    }

    pub fn point(&self, h: f64) -> Result<PointState> {
        let key = h.to_bits();
        if let Some(s) = self.cache.get(key) {
            return Ok(s);
        }
        let p = self.params.at_field(h)?;
        let gs = ground_state(&p, DEFAULT_TOL)?;
        let rdm = two_spin_rdm(&spin_moments(&gs)?, p.n_spins)?;
        let s = PointState {
            rdm,
            energy: gs.energy,
            gap: gs.gap(),
            sector: gs.sector,
            degenerate: gs.degenerate,
        };
        self.cache.put(key, s);
        Ok(s)
    }

    /// RDM at `h`, provided the ground state there is non-degenerate and in
    /// `sector`. A sector change between two evaluation points means a level
    /// crossing lies between them, and a derivative across it is meaningless.
    fn rdm_in(&self, h: f64, sector: ParitySector) -> Result<TwoSpinRdm> {
        let s = self.point(h)?;
        if s.degenerate || s.sector != sector {
            return Err(Error::DerivativeUndefined { h });
        }
        Ok(s.rdm)
    }

    fn centre_sector(&self, h: f64) -> Result<ParitySector> {
        let s = self.point(h)?;
        if s.degenerate {
            return Err(Error::DerivativeUndefined { h });
        }
        Ok(s.sector)
    }

    /// Closed-form susceptibility, without the oracle.
    pub fn chi_closed(&self, h: f64) -> Result<SusceptibilityResult> {
        let sector = self.centre_sector(h)?;
        let d = stencil_derivatives(|x| self.rdm_in(x, sector), h, self.options.step.at(h), true)?;
        chi_lmg(&d.value, &d)
    }

    /// Centred finite-step oracle at step `delta`.
    pub fn chi_oracle(&self, h: f64, delta: f64) -> Result<f64> {
        let sector = self.centre_sector(h)?;
        let lo = self.rdm_in(h - delta / 2.0, sector)?;
        let hi = self.rdm_in(h + delta / 2.0, sector)?;
        let f = fidelity_blockdiag(&lo.blocks(), &hi.blocks())?;
        chi_from_fidelity(f, delta)
    }

    /// Closed form plus the oracle when enabled.
    pub fn chi(&self, h: f64) -> Result<SusceptibilityResult> {
        let r = self.chi_closed(h)?;
        match self.options.oracle_delta {
            Some(delta) => Ok(r.with_oracle(self.chi_oracle(h, delta)?, delta)),
            None => Ok(r),
        }
    }

    /// Sweep row at `h`; degeneracy or a sector change anywhere in the stencil
    /// yields a NaN row.
    pub fn row(&self, h: f64) -> Result<SweepRow> {
        let centre = self.point(h)?;
        let mut row = SweepRow {
            h,
            chi: f64::NAN,
            chi_block1: f64::NAN,
            chi_block2: f64::NAN,
            chi_oracle: f64::NAN,
            energy: centre.energy,
            gap: centre.gap,
            degenerate: true,
        };
        if centre.degenerate {
            return Ok(row);
        }
        match self.chi(h) {
            Ok(r) => {
                row.chi = r.chi_total;
                row.chi_block1 = r.per_block[0];
                row.chi_block2 = r.per_block[1];
                row.chi_oracle = r.oracle_chi.unwrap_or(f64::NAN);
                row.degenerate = false;
                Ok(row)
            }
            Err(Error::DerivativeUndefined { .. }) => Ok(row),
            Err(e) => Err(e),
        }
    }

    /// Closed-form χ, or `None` where it is undefined because of degeneracy.
    pub fn chi_or_none(&self, h: f64) -> Result<Option<f64>> {
        match self.chi_closed(h) {
            Ok(r) => Ok(Some(r.chi_total)),
            Err(Error::DerivativeUndefined { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    }
}

/// `steps` equally spaced points from `lo` to `hi`, both ends exact.
pub fn sweep_grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    let last = steps.saturating_sub(1).max(1) as f64;
    (0..steps)
        .map(|i| {
            if i + 1 == steps {
                hi
            } else {
                lo + (hi - lo) * (i as f64 / last)
            }
        })
        .collect()
}

/// Sweep request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub n_spins: u32,
    pub gamma: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub steps: usize,
    pub options: ChiOptions,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.gamma == 1.0 {
            return Err(Error::IsotropicRouting);
        }
        LmgParams::new(self.n_spins, self.gamma, 0.0)?;
        self.options.validate()?;
        if !(self.h_min < self.h_max) || !self.h_max.is_finite() {
            return Err(Error::param("h_min must be below h_max", self.h_min));
        }
        if self.steps < 2 {
            return Err(Error::param("a sweep needs at least 2 steps", self.steps as f64));
        }
        if self.h_min - self.options.reach() < 0.0 {
            return Err(Error::param(
                "h_min leaves no room for the derivative stencil above h = 0",
                self.h_min,
            ));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        sweep_grid(self.h_min, self.h_max, self.steps)
    }
}

/// Sequential sweep; rows ascending in `h`.
pub fn sweep_chi<C: StateCache>(spec: &SweepSpec, cache: C) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let eval = Evaluator::new(spec.n_spins, spec.gamma, spec.options, cache)?;
    spec.grid().into_iter().map(|h| eval.row(h)).collect()
}

/// Located susceptibility maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakResult {
    pub n_spins: u32,
    pub gamma: f64,
    pub h_m: f64,
    pub chi_m: f64,
    /// Width of the final search interval.
    pub bracket: f64,
}

/// Maximum of a scalar function found by [`maximize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
    pub value_lo: f64,
    pub value_hi: f64,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

fn score(v: Option<f64>) -> f64 {
    match v {
        Some(x) if x.is_finite() => x,
        _ => f64::NEG_INFINITY,
    }
}

/// Golden-section maximisation on `[a, b]` until the bracket is at most `tol` wide.
///
/// `f` returns `None` where the function is undefined; such points never win.
/// The bracket endpoints are evaluated at the end so the reported maximum
/// dominates them.
pub fn golden_section_max(
    mut f: impl FnMut(f64) -> Result<Option<f64>>,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> Result<Maximum> {
    if !(tol > 0.0) || !(a < b) {
        return Err(Error::param("golden section needs a < b and tol > 0", tol));
    }
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = score(f(x1)?);
    let mut f2 = score(f(x2)?);
    while b - a > tol {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = score(f(x1)?);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = score(f(x2)?);
        }
    }
    let fa = score(f(a)?);
    let fb = score(f(b)?);
    let (x, value) = [(a, fa), (x1, f1), (x2, f2), (b, fb)]
        .into_iter()
        .fold((f64::NAN, f64::NEG_INFINITY), |best, c| if c.1 > best.1 { c } else { best });
    if !value.is_finite() {
        return Err(Error::DerivativeUndefined { h: 0.5 * (a + b) });
    }
    Ok(Maximum {
        x,
        value,
        lo: a,
        hi: b,
        value_lo: fa,
        value_hi: fb,
    })
}

/// Pre-scan on [`PRESCAN_POINTS`] points, then golden section inside the
/// neighbours of the single interior local maximum.
pub fn maximize(
    mut f: impl FnMut(f64) -> Result<Option<f64>>,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<Maximum> {
    if !(lo < hi) {
        return Err(Error::param("search range needs lo < hi", lo));
    }
    let grid = sweep_grid(lo, hi, PRESCAN_POINTS);
    let mut values = Vec::with_capacity(grid.len());
    for &h in &grid {
        values.push(score(f(h)?));
    }
    let top = (0..values.len())
        .max_by(|&i, &j| values[i].total_cmp(&values[j]).then(j.cmp(&i)))
        .unwrap_or(0);
    if !values[top].is_finite() {
        return Err(Error::DerivativeUndefined { h: lo });
    }
    if top == 0 || top == values.len() - 1 {
        return Err(Error::PeakAtBoundary { h: grid[top] });
    }
    let maxima: Vec<usize> = (1..values.len() - 1)
        .filter(|&i| values[i].is_finite() && values[i] > values[i - 1] && values[i] >= values[i + 1])
        .collect();
    if maxima.len() > 1 {
        return Err(Error::AmbiguousPeak {
            count: maxima.len(),
            first: grid[maxima[0]],
        });
    }
    golden_section_max(f, grid[top - 1], grid[top + 1], tol)
}

/// Peak of the closed-form susceptibility on `[h_lo, h_hi]`.
pub fn find_peak<C: StateCache>(eval: &Evaluator<C>, h_lo: f64, h_hi: f64, tol_h: f64) -> Result<PeakResult> {
    if h_lo - 2.0 * eval.options().step.max_step() < 0.0 {
        return Err(Error::param("h_lo leaves no room for the derivative stencil", h_lo));
    }
    let m = maximize(|h| eval.chi_or_none(h), h_lo, h_hi, tol_h)?;
    Ok(PeakResult {
        n_spins: eval.n_spins(),
        gamma: eval.gamma(),
        h_m: m.x,
        chi_m: m.value,
        bracket: m.hi - m.lo,
    })
}

/// Least-squares line with its goodness of fit.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: Vec<(f64, f64)>,
}

fn mean(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = xs.clone().count() as f64;
    xs.sum::<f64>() / n
}

fn distinct_abscissae(points: &[(f64, f64)]) -> bool {
    let mut xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.windows(2).all(|w| w[0] != w[1])
}

/// Ordinary least squares `y = slope·x + intercept`.
pub fn fit_line(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < 3
        || !distinct_abscissae(points)
        || points.iter().any(|p| !p.0.is_finite() || !p.1.is_finite())
    {
        return Err(Error::DegenerateFit { points: points.len() });
    }
    let mx = mean(points.iter().map(|p| p.0));
    let my = mean(points.iter().map(|p| p.1));
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = points
        .iter()
        .map(|p| {
            let r = p.1 - (slope * p.0 + intercept);
            r * r
        })
        .sum();
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok(ScalingFit {
        slope,
        intercept,
        r_squared,
        points: points.to_vec(),
    })
}

/// Fit of `ln χ_m = A_N ln N + const`.
pub fn fit_peak_exponent(peaks: &[PeakResult]) -> Result<ScalingFit> {
    let mut ns: Vec<u32> = peaks.iter().map(|p| p.n_spins).collect();
    ns.sort_unstable();
    ns.dedup();
    if ns.len() != peaks.len() {
        return Err(Error::DegenerateFit { points: ns.len() });
    }
    let pts: Vec<(f64, f64)> = peaks
        .iter()
        .map(|p| (math::ln(p.n_spins as f64), math::ln(p.chi_m)))
        .collect();
    fit_line(&pts)
}

/// Second-order coefficient of a least-squares parabola.
pub fn quadratic_coefficient(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 4 || !distinct_abscissae(points) {
        return Err(Error::DegenerateFit { points: points.len() });
    }
    let mx = mean(points.iter().map(|p| p.0));
    // normal equations in the centred variable t = x - mean
    let mut s = [0.0f64; 5];
    let mut r = [0.0f64; 3];
    for &(x, y) in points {
        let t = x - mx;
        let mut tp = 1.0;
        for k in 0..5 {
            s[k] += tp;
            if k < 3 {
                r[k] += tp * y;
            }
            tp *= t;
        }
    }
    let m = [[s[0], s[1], s[2]], [s[1], s[2], s[3]], [s[2], s[3], s[4]]];
    let det3 = |a: [[f64; 3]; 3]| {
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    };
    let d = det3(m);
    if d == 0.0 {
        return Err(Error::DegenerateFit { points: points.len() });
    }
    let mut m2 = m;
    for (row, &ri) in m2.iter_mut().zip(&r) {
        row[2] = ri;
    }
    Ok(det3(m2) / d)
}

/// Log-log fit of `χ` against a distance `η > 0` from the critical point,
/// rejected when the data bend more than [`MAX_LOG_CURVATURE`].
pub fn fit_power_law(samples: &[(f64, f64)]) -> Result<ScalingFit> {
    if samples.iter().any(|s| !(s.0 > 0.0) || !(s.1 > 0.0)) {
        return Err(Error::DegenerateFit { points: samples.len() });
    }
    let pts: Vec<(f64, f64)> = samples.iter().map(|s| (math::ln(s.0), math::ln(s.1))).collect();
    let curvature = 2.0 * quadratic_coefficient(&pts)?;
    if math::abs(curvature) > MAX_LOG_CURVATURE {
        return Err(Error::WindowTooClose { curvature });
    }
    fit_line(&pts)
}

/// `count` log-spaced distances on `[a, b]`.
pub fn log_spaced(a: f64, b: f64, count: usize) -> Vec<f64> {
    let (la, lb) = (math::ln(a), math::ln(b));
    sweep_grid(la, lb, count).into_iter().map(math::exp).collect()
}

/// Fit of `ln χ = A_h ln(h - 1) + const` on `h ∈ [1 + a, 1 + b]`.
pub fn fit_thermo_exponent<C: StateCache>(eval: &Evaluator<C>, a: f64, b: f64, count: usize) -> Result<ScalingFit> {
    if !(a > 0.0) || !(a < b) || !b.is_finite() {
        return Err(Error::param("thermodynamic window needs 0 < a < b", a));
    }
    let rounding = ROUNDING_MARGIN * math::powf(eval.n_spins() as f64, -2.0 / 3.0);
    let mut samples = Vec::with_capacity(count);
    for eta in log_spaced(a, b, count) {
        let chi = eval
            .chi_or_none(H_C + eta)?
            .ok_or(Error::DerivativeUndefined { h: H_C + eta })?;
        samples.push((eta, chi));
    }
    let fit = fit_power_law(&samples)?;
    if a < rounding {
        let pts: Vec<(f64, f64)> = fit.points.clone();
        return Err(Error::WindowTooClose {
            curvature: 2.0 * quadratic_coefficient(&pts)?,
        });
    }
    Ok(fit)
}

/// One collapse point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollapseRow {
    pub n_spins: u32,
    pub x: f64,
    pub h: f64,
    pub q: f64,
}

/// A grid point left out of the collapse table, with the reason.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollapseNote {
    pub n_spins: u32,
    pub x: f64,
    pub h: f64,
    pub reason: &'static str,
}

/// `q = χ(h_m)/χ(h)` at `h = h_m + x N^{-ν}` for each `x`.
pub fn collapse_rows<C: StateCache>(
    eval: &Evaluator<C>,
    peak: &PeakResult,
    nu: f64,
    xs: &[f64],
    rows: &mut Vec<CollapseRow>,
    notes: &mut Vec<CollapseNote>,
) -> Result<()> {
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(Error::param("collapse exponent must be positive", nu));
    }
    let n = eval.n_spins();
    let scale = math::powf(n as f64, -nu);
    for &x in xs {
        let h = peak.h_m + x * scale;
        let note = |reason| CollapseNote { n_spins: n, x, h, reason };
        if h - eval.options().reach() <= 0.0 {
            notes.push(note("field outside the valid range"));
            continue;
        }
        match eval.chi_or_none(h)? {
            Some(chi) if chi > 0.0 => rows.push(CollapseRow {
                n_spins: n,
                x,
                h,
                q: peak.chi_m / chi,
            }),
            Some(_) => notes.push(note("susceptibility vanishes")),
            None => notes.push(note("degenerate ground state")),
        }
    }
    Ok(())
}

/// Largest relative spread `(max q - min q)/min q` over sizes at a common `x`.
///
/// Only `x` values present for at least two sizes count.
pub fn collapse_spread(rows: &[CollapseRow]) -> f64 {
    let mut by_x: BTreeMap<u64, (f64, f64, usize)> = BTreeMap::new();
    for r in rows {
        let e = by_x.entry(r.x.to_bits()).or_insert((f64::INFINITY, f64::NEG_INFINITY, 0));
        e.0 = e.0.min(r.q);
        e.1 = e.1.max(r.q);
        e.2 += 1;
    }
    by_x.values()
        .filter(|e| e.2 >= 2)
        .map(|&(lo, hi, _)| (hi - lo) / lo)
        .fold(0.0, f64::max)
}
