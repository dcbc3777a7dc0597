//! CSV and JSON emission.
//!
//! Floats are written in the shortest form that parses back to the same
//! `f64`. CSV uses the literal `nan` for undefined values; JSON uses `null`.
//! Every JSON document carries `"schema": 1`.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::Path;

use rfs_core::isotropic::IsoGround;
use rfs_core::scaling::{CollapseNote, CollapseRow, PeakResult, ScalingFit, SweepRow};
use serde::Serialize;

pub const SCHEMA: u32 = 1;

/// Frozen sweep column order.
pub const SWEEP_HEADER: &str = "h,chi,chi_block1,chi_block2,chi_oracle,energy,gap,degenerate";

/// Shortest round-trip text for `x`.
///
/// Plain decimal inside `[1e-5, 1e16)`, exponent form outside, `nan`/`inf`
/// for the non-finite values.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let a = x.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn csv_line(out: &mut String, fields: &[String]) {
    out.push_str(&fields.join(","));
    out.push('\n');
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::with_capacity(64 * (rows.len() + 1));
    s.push_str(SWEEP_HEADER);
    s.push('\n');
    for r in rows {
        let f = [r.h, r.chi, r.chi_block1, r.chi_block2, r.chi_oracle, r.energy, r.gap];
        let mut fields: Vec<String> = f.iter().map(|&x| fmt_f64(x)).collect();
        fields.push(r.degenerate.to_string());
        csv_line(&mut s, &fields);
    }
    s
}

pub fn peaks_csv(peaks: &[PeakResult]) -> String {
    let mut s = String::from("n_spins,gamma,h_m,chi_m,bracket\n");
    for p in peaks {
        csv_line(
            &mut s,
            &[p.n_spins.to_string(), fmt_f64(p.gamma), fmt_f64(p.h_m), fmt_f64(p.chi_m), fmt_f64(p.bracket)],
        );
    }
    s
}

pub fn collapse_csv(rows: &[CollapseRow]) -> String {
    let mut s = String::from("n_spins,x,h,q\n");
    for r in rows {
        csv_line(&mut s, &[r.n_spins.to_string(), fmt_f64(r.x), fmt_f64(r.h), fmt_f64(r.q)]);
    }
    s
}

/// Comma-joined values on one line.
pub fn value_list(xs: &[f64]) -> String {
    let mut s = xs.iter().map(|&x| fmt_f64(x)).collect::<Vec<_>>().join(",");
    s.push('\n');
    s
}

pub fn iso_ground_csv(g: &IsoGround, h: f64) -> String {
    let mut s = String::from("h,m0,flips,energy,plateau_lo,plateau_hi,degenerate\n");
    let p = g.plateau;
    let _ = writeln!(
        s,
        "{},{},{},{},{},{},{}",
        fmt_f64(h),
        fmt_f64(g.m0),
        g.flips,
        fmt_f64(g.energy),
        fmt_f64(p.lo),
        fmt_f64(p.hi),
        g.degenerate
    );
    s
}

pub mod json {
    //! Serializable mirrors of the core result types.

    use super::*;

    #[derive(Serialize)]
    pub struct Row {
        pub h: f64,
        pub chi: f64,
        pub chi_block1: f64,
        pub chi_block2: f64,
        pub chi_oracle: f64,
        pub energy: f64,
        pub gap: f64,
        pub degenerate: bool,
    }

    impl From<&SweepRow> for Row {
        fn from(r: &SweepRow) -> Self {
            Row {
                h: r.h,
                chi: r.chi,
                chi_block1: r.chi_block1,
                chi_block2: r.chi_block2,
                chi_oracle: r.chi_oracle,
                energy: r.energy,
                gap: r.gap,
                degenerate: r.degenerate,
            }
        }
    }

    #[derive(Serialize)]
    pub struct Peak {
        pub n_spins: u32,
        pub gamma: f64,
        pub h_m: f64,
        pub chi_m: f64,
        pub bracket: f64,
    }

    impl From<&PeakResult> for Peak {
        fn from(p: &PeakResult) -> Self {
            Peak {
                n_spins: p.n_spins,
                gamma: p.gamma,
                h_m: p.h_m,
                chi_m: p.chi_m,
                bracket: p.bracket,
            }
        }
    }

    #[derive(Serialize)]
    pub struct Fit {
        pub slope: f64,
        pub intercept: f64,
        pub r_squared: f64,
        pub points: Vec<[f64; 2]>,
    }

    impl From<&ScalingFit> for Fit {
        fn from(f: &ScalingFit) -> Self {
            Fit {
                slope: f.slope,
                intercept: f.intercept,
                r_squared: f.r_squared,
                points: f.points.iter().map(|p| [p.0, p.1]).collect(),
            }
        }
    }

    #[derive(Serialize)]
    pub struct Collapse {
        pub n_spins: u32,
        pub x: f64,
        pub h: f64,
        pub q: f64,
    }

    impl From<&CollapseRow> for Collapse {
        fn from(r: &CollapseRow) -> Self {
            Collapse {
                n_spins: r.n_spins,
                x: r.x,
                h: r.h,
                q: r.q,
            }
        }
    }

    #[derive(Serialize)]
    pub struct Note {
        pub n_spins: u32,
        pub x: f64,
        pub h: f64,
        pub reason: &'static str,
    }

    impl From<&CollapseNote> for Note {
        fn from(n: &CollapseNote) -> Self {
            Note {
                n_spins: n.n_spins,
                x: n.x,
                h: n.h,
                reason: n.reason,
            }
        }
    }

    /// `{"schema": 1, "kind": kind, ...body}` pretty-printed with a trailing newline.
    pub fn document(kind: &str, body: serde_json::Value) -> String {
        let mut map = serde_json::Map::new();
        map.insert("schema".into(), SCHEMA.into());
        map.insert("kind".into(), kind.into());
        if let serde_json::Value::Object(b) = body {
            map.extend(b);
        }
        let mut s = serde_json::to_string_pretty(&serde_json::Value::Object(map)).unwrap_or_default();
        s.push('\n');
        s
    }
}

/// Write `text` to `path` through a temporary file in the same directory,
/// renamed into place only once fully written; `None` writes to stdout.
pub fn emit(text: &str, path: Option<&Path>) -> io::Result<()> {
    match path {
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
        Some(p) => {
            let dir = match p.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            tmp.write_all(text.as_bytes())?;
            tmp.as_file().sync_all()?;
            tmp.persist(p).map_err(|e| e.error)?;
            Ok(())
        }
    }
}
