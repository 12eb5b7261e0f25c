//! Serialized artifacts: 12-significant-digit numbers, JSON reports and sweep CSV.

use anyhow::{Context, Result};
use fockchan_core::choi::CHOI_BASIS;
use fockchan_core::linalg::CMatrix;
use fockchan_core::protocol::{NuOptimum, Strategy};
use fockchan_core::tomography::Support;
use fockchan_core::SweepRecord;
use serde::Serialize;

/// Significant decimal digits of every number written by the CLI.
pub const SIGNIFICANT_DIGITS: usize = 12;

pub const CSV_HEADER: [&str; 8] = [
    "strategy", "tau", "nu", "g", "fidelity", "t_eff", "p_succ", "p_rel",
];

/// `x` rounded to [`SIGNIFICANT_DIGITS`]; negative zero becomes zero.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    let s = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let r: f64 = s.parse().expect("formatted float parses");
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Shortest decimal text of the rounded value; exponent form outside `[1e-4, 1e12)`.
pub fn format_number(x: f64) -> String {
    let r = round_sig(x);
    let a = r.abs();
    if a != 0.0 && !(1e-4..1e12).contains(&a) {
        format!("{r:e}")
    } else {
        format!("{r}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixJson {
    pub real: Vec<Vec<f64>>,
    pub imag: Vec<Vec<f64>>,
}

impl From<&CMatrix> for MatrixJson {
    fn from(m: &CMatrix) -> Self {
        let rows = |f: fn(&fockchan_core::Complex64) -> f64| {
            (0..m.nrows())
                .map(|r| (0..m.ncols()).map(|c| round_sig(f(&m[(r, c)]))).collect())
                .collect()
        };
        MatrixJson {
            real: rows(|z| z.re),
            imag: rows(|z| z.im),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChoiReport {
    pub basis: [&'static str; 3],
    pub tau: f64,
    pub nu: f64,
    pub g: f64,
    pub strategy: Strategy,
    pub choi: MatrixJson,
    pub fidelity: f64,
    pub t_eff: f64,
    pub p_succ: f64,
    pub vacuum_weight: f64,
}

/// `row,col,re,im` with basis labels, one line per Choi entry.
pub fn choi_csv(m: &CMatrix) -> Result<String> {
    let mut w = csv_writer();
    w.write_record(["row", "col", "re", "im"])?;
    for (r, row) in CHOI_BASIS.iter().enumerate() {
        for (c, col) in CHOI_BASIS.iter().enumerate() {
            let z = m[(r, c)];
            w.write_record([*row, *col, &format_number(z.re), &format_number(z.im)])?;
        }
    }
    finish_csv(w)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SettingCounts {
    pub label: String,
    pub counts: f64,
    pub exposure: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TomoReport {
    pub basis: [&'static str; 3],
    pub tau: f64,
    pub nu: f64,
    pub g: f64,
    pub strategy: Strategy,
    pub mode: &'static str,
    pub seed: u64,
    pub total_counts: u64,
    pub settings: Vec<SettingCounts>,
    pub true_choi: MatrixJson,
    pub reconstructed_choi: MatrixJson,
    pub support: &'static str,
    pub fidelity: f64,
    pub trace_distance: f64,
    pub true_channel_fidelity: f64,
    pub reconstructed_channel_fidelity: f64,
    pub iterations: usize,
    pub converged: bool,
    pub last_update: f64,
}

pub fn support_label(s: Support) -> &'static str {
    match s {
        Support::Full => "full",
        Support::BlockDiagonal => "block-diagonal",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizeReport {
    pub tau: f64,
    pub target_fidelity: f64,
    pub nu: f64,
    pub g: f64,
    pub fidelity: f64,
    pub p_succ: f64,
}

impl OptimizeReport {
    pub fn new(tau: f64, target_fidelity: f64, opt: &NuOptimum, fidelity: f64) -> Self {
        OptimizeReport {
            tau: round_sig(tau),
            target_fidelity: round_sig(target_fidelity),
            nu: round_sig(opt.nu),
            g: round_sig(opt.g),
            fidelity: round_sig(fidelity),
            p_succ: round_sig(opt.p_succ),
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn rounded_record(r: &SweepRecord) -> SweepRecord {
    SweepRecord {
        strategy: r.strategy,
        tau: round_sig(r.tau),
        nu: round_sig(r.nu),
        g: round_sig(r.g),
        fidelity: round_sig(r.fidelity),
        t_eff: round_sig(r.t_eff),
        p_succ: round_sig(r.p_succ),
        p_rel: round_sig(r.p_rel),
    }
}

pub fn sweep_json(records: &[SweepRecord]) -> Result<String> {
    let rounded: Vec<SweepRecord> = records.iter().map(rounded_record).collect();
    to_json(&rounded)
}

pub fn sweep_csv(records: &[SweepRecord]) -> Result<String> {
    let mut w = csv_writer();
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.strategy.as_str().to_string(),
            format_number(r.tau),
            format_number(r.nu),
            format_number(r.g),
            format_number(r.fidelity),
            format_number(r.t_eff),
            format_number(r.p_succ),
            format_number(r.p_rel),
        ])?;
    }
    finish_csv(w)
}

/// Parses CSV written by [`sweep_csv`].
pub fn parse_sweep_csv(text: &str) -> Result<Vec<SweepRecord>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        anyhow::bail!(
            "unexpected CSV header: {}",
            header.iter().collect::<Vec<_>>().join(",")
        );
    }
    reader
        .deserialize()
        .enumerate()
        .map(|(i, row)| row.with_context(|| format!("CSV row {}", i + 1)))
        .collect()
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| anyhow::anyhow!("CSV buffer: {e}"))?;
    Ok(String::from_utf8(bytes)?)
}
