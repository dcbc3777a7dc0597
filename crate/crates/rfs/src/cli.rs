//! `rfs` command line.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid arguments, 3 numerical
//! failure (degenerate point, non-convergence, ambiguous peak, failing self-test).

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rfs_core::isotropic::{iso_chi_thermo, iso_crossings, iso_m0, iso_reduced_fidelity};
use rfs_core::scaling::{collapse_spread, fit_peak_exponent, sweep_grid, ChiOptions, StepPolicy, SweepSpec};
use rfs_core::Error;
use serde_json::json;

use crate::output::{self, fmt_f64, json as j};
use crate::par::{self, PeakSearch};
use crate::suites;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "rfs", version, about = "Reduced fidelity susceptibility of two-spin subsystems in the LMG model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Susceptibility on an equally spaced field grid.
    Sweep(SweepArgs),
    /// Locate the susceptibility maximum for one size.
    Peak(PeakArgs),
    /// Peaks over several sizes and the fitted exponent of ln χ_m against ln N.
    Scale(ScaleArgs),
    /// Scaling-collapse table q = χ(h_m)/χ(h) against x = N^ν (h - h_m).
    Collapse(CollapseArgs),
    /// Closed-form results for the isotropic model γ = 1.
    Iso(IsoArgs),
    /// Run the built-in verification suites.
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Derivative step: `auto` or a positive number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step(pub StepPolicy);

fn parse_step(s: &str) -> Result<Step, String> {
    if s == "auto" {
        return Ok(Step(StepPolicy::Auto));
    }
    let v: f64 = s.parse().map_err(|_| format!("expected `auto` or a number, got {s:?}"))?;
    if !(v > 0.0) || !v.is_finite() {
        return Err(format!("derivative step must be positive, got {v}"));
    }
    Ok(Step(StepPolicy::Fixed(v)))
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("not a number: {s:?}"))?;
    if !(v > 0.0) || !v.is_finite() {
        return Err(format!("must be positive, got {v}"));
    }
    Ok(v)
}

/// Accepts `p/q` as well as plain decimals.
fn parse_ratio(s: &str) -> Result<f64, String> {
    match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|_| format!("not a number: {p:?}"))?;
            let q: f64 = q.trim().parse().map_err(|_| format!("not a number: {q:?}"))?;
            parse_positive(&(p / q).to_string())
        }
        None => parse_positive(s),
    }
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected `a,b`, got {s:?}"))?;
    let a: f64 = a.trim().parse().map_err(|_| format!("not a number: {a:?}"))?;
    let b: f64 = b.trim().parse().map_err(|_| format!("not a number: {b:?}"))?;
    Ok((a, b))
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Number of spins N.
    #[arg(long = "n")]
    pub n: u32,
    /// Anisotropy γ; γ = 1 belongs to `iso`.
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: f64,
}

#[derive(Debug, Clone, Args)]
pub struct ChiArgs {
    /// Stencil step for the field derivatives.
    #[arg(long, default_value = "auto", value_parser = parse_step)]
    pub deriv_step: Step,
    /// Step of the finite-δ fidelity oracle.
    #[arg(long, default_value_t = 1e-3, value_parser = parse_positive)]
    pub oracle_delta: f64,
    /// Skip the oracle column.
    #[arg(long)]
    pub no_oracle: bool,
}

impl ChiArgs {
    fn options(&self) -> ChiOptions {
        ChiOptions {
            step: self.deriv_step.0,
            oracle_delta: (!self.no_oracle).then_some(self.oracle_delta),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SinkArgs {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; standard output when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 0.5)]
    pub h_min: f64,
    #[arg(long, default_value_t = 1.5)]
    pub h_max: f64,
    #[arg(long, default_value_t = 101)]
    pub steps: usize,
    #[command(flatten)]
    pub chi: ChiArgs,
    #[command(flatten)]
    pub sink: SinkArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SearchArgs {
    #[arg(long, default_value_t = 0.5)]
    pub h_lo: f64,
    #[arg(long, default_value_t = 1.3)]
    pub h_hi: f64,
    /// Final bracket width of the golden-section search.
    #[arg(long, default_value_t = 1e-5, value_parser = parse_positive)]
    pub tol_h: f64,
    #[arg(long, default_value = "auto", value_parser = parse_step)]
    pub deriv_step: Step,
}

impl SearchArgs {
    fn search(&self, gamma: f64) -> PeakSearch {
        PeakSearch {
            gamma,
            h_lo: self.h_lo,
            h_hi: self.h_hi,
            tol_h: self.tol_h,
            options: ChiOptions {
                step: self.deriv_step.0,
                oracle_delta: None,
            },
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct PeakArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub search: SearchArgs,
    #[command(flatten)]
    pub sink: SinkArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ScaleArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: f64,
    /// Comma-separated sizes, at least three.
    #[arg(long, value_delimiter = ',', required = true)]
    pub n_list: Vec<u32>,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Also fit ln χ against ln(h - 1) at this size.
    #[arg(long, requires = "thermo_window")]
    pub thermo_n: Option<u32>,
    /// Field window `h1,h2` above h = 1 for the thermodynamic fit.
    #[arg(long, value_parser = parse_pair, requires = "thermo_n")]
    pub thermo_window: Option<(f64, f64)>,
    #[arg(long, default_value_t = 24)]
    pub thermo_points: usize,
    #[command(flatten)]
    pub sink: SinkArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CollapseArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: f64,
    #[arg(long, value_delimiter = ',', required = true)]
    pub n_list: Vec<u32>,
    /// Collapse exponent ν; accepts `p/q`.
    #[arg(long, default_value = "2/3", value_parser = parse_ratio)]
    pub nu: f64,
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    pub x_min: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub x_max: f64,
    #[arg(long, default_value_t = 21)]
    pub points: usize,
    #[command(flatten)]
    pub search: SearchArgs,
    #[command(flatten)]
    pub sink: SinkArgs,
}

#[derive(Debug, Clone, Args)]
#[group(id = "iso_query", required = true, multiple = false)]
pub struct IsoQuery {
    /// Level-crossing fields.
    #[arg(long)]
    pub crossings: bool,
    /// Ground state at this field.
    #[arg(long)]
    pub h: Option<f64>,
    /// Thermodynamic-limit susceptibility at this field.
    #[arg(long)]
    pub chi_thermo: Option<f64>,
    /// Reduced two-spin fidelity between two fields `h1,h2`.
    #[arg(long, value_parser = parse_pair)]
    pub fidelity: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Args)]
pub struct IsoArgs {
    #[arg(long = "n")]
    pub n: Option<u32>,
    #[command(flatten)]
    pub query: IsoQuery,
    #[command(flatten)]
    pub sink: SinkArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SelftestArgs {
    #[command(flatten)]
    pub sink: SinkArgs,
}

/// Failure carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_USAGE };
        let message = match e {
            Error::IsotropicRouting => "gamma = 1 is the isotropic model; use `rfs iso` instead".to_string(),
            e => e.to_string(),
        };
        Failure { code, message }
    }
}

type Outcome = Result<(), Failure>;

fn reject_isotropic(gamma: f64) -> Outcome {
    if gamma == 1.0 {
        return Err(Error::IsotropicRouting.into());
    }
    Ok(())
}

fn write(text: &str, sink: &SinkArgs) -> Outcome {
    output::emit(text, sink.output.as_deref()).map_err(|e| Failure {
        code: EXIT_IO,
        message: match &sink.output {
            Some(p) => format!("cannot write {}: {e}", p.display()),
            None => format!("cannot write to standard output: {e}"),
        },
    })
}

fn json_only(sink: &SinkArgs, what: &str) -> Outcome {
    if sink.format == Some(Format::Csv) {
        return Err(Failure::usage(format!("{what} output is JSON only")));
    }
    Ok(())
}

fn step_json(s: StepPolicy) -> serde_json::Value {
    match s {
        StepPolicy::Auto => json!("auto"),
        StepPolicy::Fixed(v) => json!(v),
    }
}

fn sweep(a: &SweepArgs) -> Outcome {
    reject_isotropic(a.model.gamma)?;
    let spec = SweepSpec {
        n_spins: a.model.n,
        gamma: a.model.gamma,
        h_min: a.h_min,
        h_max: a.h_max,
        steps: a.steps,
        options: a.chi.options(),
    };
    let rows = par::sweep(&spec)?;
    let text = match a.sink.format.unwrap_or(Format::Csv) {
        Format::Csv => output::sweep_csv(&rows),
        Format::Json => j::document(
            "sweep",
            json!({
                "n_spins": spec.n_spins,
                "gamma": spec.gamma,
                "deriv_step": step_json(spec.options.step),
                "oracle_delta": spec.options.oracle_delta,
                "rows": rows.iter().map(j::Row::from).collect::<Vec<_>>(),
            }),
        ),
    };
    write(&text, &a.sink)
}

fn peak(a: &PeakArgs) -> Outcome {
    reject_isotropic(a.model.gamma)?;
    let p = a.search.search(a.model.gamma).run(a.model.n, &par::SharedCache::new())?;
    let text = match a.sink.format.unwrap_or(Format::Json) {
        Format::Csv => output::peaks_csv(&[p]),
        Format::Json => j::document("peak", json!({ "peak": j::Peak::from(&p) })),
    };
    write(&text, &a.sink)
}

fn scale(a: &ScaleArgs) -> Outcome {
    reject_isotropic(a.gamma)?;
    json_only(&a.sink, "scale")?;
    let mut ns = a.n_list.clone();
    ns.sort_unstable();
    let search = a.search.search(a.gamma);
    let peaks = par::peaks(&ns, &search)?;
    let fit = fit_peak_exponent(&peaks)?;
    let mut body = json!({
        "gamma": a.gamma,
        "peaks": peaks.iter().map(j::Peak::from).collect::<Vec<_>>(),
        "fit": j::Fit::from(&fit),
    });
    if let (Some(n), Some((lo, hi))) = (a.thermo_n, a.thermo_window) {
        let h_c = rfs_core::scaling::H_C;
        let thermo = par::thermo_fit(n, a.gamma, lo - h_c, hi - h_c, a.thermo_points, search.options)?;
        body["thermo"] = json!({
            "n_spins": n,
            "window": [lo, hi],
            "fit": j::Fit::from(&thermo),
        });
    }
    write(&j::document("scale", body), &a.sink)
}

fn collapse(a: &CollapseArgs) -> Outcome {
    reject_isotropic(a.gamma)?;
    if a.points < 2 || !(a.x_min < a.x_max) {
        return Err(Failure::usage("collapse needs x_min < x_max and at least 2 points"));
    }
    let mut ns = a.n_list.clone();
    ns.sort_unstable();
    let xs = sweep_grid(a.x_min, a.x_max, a.points);
    let c = par::collapse(&ns, &a.search.search(a.gamma), a.nu, &xs)?;
    for n in &c.notes {
        eprintln!("skipped N={} x={} h={}: {}", n.n_spins, fmt_f64(n.x), fmt_f64(n.h), n.reason);
    }
    let text = match a.sink.format.unwrap_or(Format::Csv) {
        Format::Csv => output::collapse_csv(&c.rows),
        Format::Json => j::document(
            "collapse",
            json!({
                "gamma": a.gamma,
                "nu": a.nu,
                "peaks": c.peaks.iter().map(j::Peak::from).collect::<Vec<_>>(),
                "rows": c.rows.iter().map(j::Collapse::from).collect::<Vec<_>>(),
                "notes": c.notes.iter().map(j::Note::from).collect::<Vec<_>>(),
                "spread": collapse_spread(&c.rows),
            }),
        ),
    };
    write(&text, &a.sink)
}

fn iso(a: &IsoArgs) -> Outcome {
    let q = &a.query;
    let fmt = a.sink.format.unwrap_or(Format::Csv);
    let need_n = || a.n.ok_or_else(|| Failure::usage("--n is required for this query"));
    let text = if q.crossings {
        let n = need_n()?;
        if n < 2 {
            return Err(Failure::usage("--n must be at least 2"));
        }
        let cs = iso_crossings(n);
        match fmt {
            Format::Csv => output::value_list(&cs),
            Format::Json => j::document("iso-crossings", json!({ "n_spins": n, "crossings": cs })),
        }
    } else if let Some(h) = q.h {
        let g = iso_m0(need_n()?, h)?;
        match fmt {
            Format::Csv => output::iso_ground_csv(&g, h),
            Format::Json => j::document(
                "iso-ground",
                json!({
                    "n_spins": g.n_spins, "h": h, "m0": g.m0, "flips": g.flips, "energy": g.energy,
                    "plateau": [g.plateau.lo, g.plateau.hi], "degenerate": g.degenerate,
                    "tied_m0": g.tied_flips.map(|k| g.n_spins as f64 / 2.0 - k as f64),
                }),
            ),
        }
    } else if let Some(h) = q.chi_thermo {
        let chi = iso_chi_thermo(h)?;
        match fmt {
            Format::Csv => format!("h,chi_thermo\n{},{}\n", fmt_f64(h), fmt_f64(chi)),
            Format::Json => j::document("iso-chi-thermo", json!({ "h": h, "chi_thermo": chi })),
        }
    } else if let Some((h1, h2)) = q.fidelity {
        let n = need_n()?;
        let f = iso_reduced_fidelity(n, h1, h2)?;
        match fmt {
            Format::Csv => format!("h1,h2,fidelity\n{},{},{}\n", fmt_f64(h1), fmt_f64(h2), fmt_f64(f)),
            Format::Json => j::document("iso-fidelity", json!({ "n_spins": n, "h1": h1, "h2": h2, "fidelity": f })),
        }
    } else {
        return Err(Failure::usage("choose one of --crossings, --h, --chi-thermo, --fidelity"));
    };
    write(&text, &a.sink)
}

fn selftest(a: &SelftestArgs) -> Outcome {
    json_only(&a.sink, "selftest")?;
    let report = suites::selftest();
    let passed = report.iter().all(suites::Tally::passed);
    let body = json!({
        "passed": passed,
        "suites": report.iter().map(|t| json!({
            "name": t.name,
            "passed": t.passed(),
            "cases": t.cases,
            "failures": t.failures,
            "worst": t.worst,
            "first_failure": t.first_failure,
        })).collect::<Vec<_>>(),
    });
    write(&j::document("selftest", body), &a.sink)?;
    if passed {
        Ok(())
    } else {
        let failing: Vec<&str> = report.iter().filter(|t| !t.passed()).map(|t| t.name).collect();
        Err(Failure {
            code: EXIT_NUMERICAL,
            message: format!("self-test failed: {}", failing.join(", ")),
        })
    }
}

fn dispatch(cli: &Cli) -> Outcome {
    let pool = par::thread_pool().map_err(Failure::usage)?;
    pool.install(|| match &cli.command {
        Command::Sweep(a) => sweep(a),
        Command::Peak(a) => peak(a),
        Command::Scale(a) => scale(a),
        Command::Collapse(a) => collapse(a),
        Command::Iso(a) => iso(a),
        Command::Selftest(a) => selftest(a),
    })
}

/// Parse `argv` (program name first), run, and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("rfs: {}", f.message);
            f.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_and_ratio_parsers() {
        assert_eq!(parse_step("auto"), Ok(Step(StepPolicy::Auto)));
        assert_eq!(parse_step("5e-4"), Ok(Step(StepPolicy::Fixed(5e-4))));
        assert!(parse_step("-1").is_err());
        assert!((parse_ratio("2/3").unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(parse_ratio("0.5"), Ok(0.5));
        assert!(parse_ratio("1/0").is_err());
        assert_eq!(parse_pair("1.05, 1.4"), Ok((1.05, 1.4)));
    }

    #[test]
    fn error_codes() {
        assert_eq!(Failure::from(Error::IsotropicRouting).code, EXIT_USAGE);
        assert_eq!(Failure::from(Error::AmbiguousPeak { count: 2, first: 0.6 }).code, EXIT_NUMERICAL);
        assert_eq!(run(["rfs", "sweep", "--bogus"]), EXIT_USAGE);
    }
}
