use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Result;
use heattrace_core::coefficients::CoefficientTable;
use heattrace_core::oracle::{
    asymptotic_trace, k_min_default, resolvent_trace, verify_fourier_exponential,
    verify_k0_product_identity, watson_roundtrip, OracleError, ResolventTrace,
};
use heattrace_core::{IdentityReport, QuadratureSpec, TraceTermResult};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Format, RunConfig};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_NOT_CONVERGED: u8 = 2;
pub const EXIT_IDENTITY_FAILED: u8 = 3;

/// What a command produced, ready to be written.
pub struct Output {
    pub files: Vec<(Option<PathBuf>, String)>,
    pub status: u8,
    /// Human-readable notes for stderr.
    pub log: String,
}

/// Shortest decimal that reads back to the same `f64`.
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn table_csv(table: &CoefficientTable) -> Result<String> {
    let mut rows = Vec::new();
    for e in &table.bnl {
        rows.push(vec![
            "b_nl".into(),
            e.n.to_string(),
            e.l.to_string(),
            num(e.value),
            num(e.err),
            e.converged.to_string(),
        ]);
    }
    for e in &table.bm {
        rows.push(vec![
            "b_m".into(),
            e.m.to_string(),
            String::new(),
            num(e.value),
            num(e.err),
            String::new(),
        ]);
    }
    for e in &table.an {
        rows.push(vec![
            "a_n".into(),
            e.n.to_string(),
            String::new(),
            num(e.value),
            String::new(),
            String::new(),
        ]);
    }
    csv_text(
        &["quantity", "n", "l", "value", "est_error", "converged"],
        rows,
    )
}

pub fn cmd_coeffs(cfg: &RunConfig, format: Format, out: Option<PathBuf>) -> Result<Output> {
    let spec = cfg.quadrature.apply(QuadratureSpec::default());
    let table = CoefficientTable::compute(&cfg.potential, cfg.max_order, &spec)?;
    let text = match format {
        Format::Json => {
            let mut s = table.to_json()?;
            s.push('\n');
            s
        }
        Format::Csv => table_csv(&table)?,
    };
    let status = if table.all_converged() {
        EXIT_OK
    } else {
        EXIT_NOT_CONVERGED
    };
    let log = if status == EXIT_OK {
        String::new()
    } else {
        "some coefficient cells did not converge; see `converged` fields\n".into()
    };
    Ok(Output {
        files: vec![(out, text)],
        status,
        log,
    })
}

fn identity_suite(cfg: &RunConfig, table: &CoefficientTable) -> Result<Vec<IdentityReport>> {
    let v = &cfg.verify;
    let mut reports = Vec::new();
    for &[kappa, eta, xi] in &v.fourier_cases {
        reports.push(verify_fourier_exponential(
            kappa,
            eta,
            &[xi],
            v.fourier_tolerance,
        )?);
    }
    let spec = cfg
        .quadrature
        .apply(QuadratureSpec::default().with_tolerances(1e-9, 1e-11));
    let grid: Vec<(f64, f64)> = v
        .k0_k_values
        .iter()
        .flat_map(|&k| v.k0_separations.iter().map(move |&d| (k, d)))
        .collect();
    let k0: Vec<IdentityReport> = grid
        .par_iter()
        .map(|&(k, d)| verify_k0_product_identity(k, 0.0, d, &spec, v.k0_tolerance))
        .collect::<Result<_, _>>()?;
    for (r, &(k, d)) in k0.into_iter().zip(&grid) {
        if d == 0.0 {
            // the coincident-point value is also known in closed form
            let closed = PI / (k * k);
            let abs_diff = (r.lhs.re - closed).abs();
            let mut parameters = r.parameters.clone();
            parameters.retain(|key, _| key == "k" || key == "tolerance");
            reports.push(r.clone());
            reports.push(IdentityReport {
                identity_name: "k0_product_coincident".into(),
                lhs: r.lhs,
                rhs: Complex64::new(closed, 0.0),
                abs_diff,
                passed: abs_diff <= v.k0_tolerance,
                parameters,
            });
        } else {
            reports.push(r);
        }
    }
    reports.push(watson_roundtrip(table, &v.t_samples)?);
    Ok(reports)
}

pub fn cmd_verify(cfg: &RunConfig, format: Format, out: Option<PathBuf>) -> Result<Output> {
    let spec = cfg.quadrature.apply(QuadratureSpec::default());
    let table = CoefficientTable::compute(&cfg.potential, cfg.max_order, &spec)?;
    let reports = identity_suite(cfg, &table)?;
    let text = match format {
        Format::Json => json(&reports)?,
        Format::Csv => csv_text(
            &[
                "identity_name",
                "lhs_re",
                "lhs_im",
                "rhs_re",
                "rhs_im",
                "abs_diff",
                "tolerance",
                "passed",
            ],
            reports.iter().map(|r| {
                vec![
                    r.identity_name.clone(),
                    num(r.lhs.re),
                    num(r.lhs.im),
                    num(r.rhs.re),
                    num(r.rhs.im),
                    num(r.abs_diff),
                    num(r.parameters["tolerance"]),
                    r.passed.to_string(),
                ]
            }),
        )?,
    };
    let status = if !reports.iter().all(|r| r.passed) {
        EXIT_IDENTITY_FAILED
    } else if !table.all_converged() {
        EXIT_NOT_CONVERGED
    } else {
        EXIT_OK
    };
    let mut log = String::new();
    for r in reports.iter().filter(|r| !r.passed) {
        let _ = writeln!(
            log,
            "FAILED {}: abs_diff {:e} > tolerance {:e}",
            r.identity_name, r.abs_diff, r.parameters["tolerance"]
        );
    }
    Ok(Output {
        files: vec![(out, text)],
        status,
        log,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Ok,
    NotConverged,
    BelowKMin,
}

impl RowStatus {
    fn as_str(&self) -> &'static str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::NotConverged => "not_converged",
            RowStatus::BelowKMin => "below_k_min",
        }
    }
}

/// One k̃ of a scan. Trace columns are absent for rows below `k_min`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub ktilde: f64,
    pub resolvent_trace: Option<f64>,
    pub asymptotic_trace: f64,
    pub difference: Option<f64>,
    pub scaled_difference: Option<f64>,
    pub est_error: Option<f64>,
    pub status: RowStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub k_min: f64,
    pub n_max: usize,
    pub max_order: usize,
    pub rows: Vec<ScanRow>,
    pub terms: Vec<TraceTermResult>,
}

fn terms_path(path: &Path) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}.terms.csv"))
}

pub fn run_scan(cfg: &RunConfig) -> Result<ScanReport> {
    if cfg.oracle.k_values.is_empty() {
        anyhow::bail!("oracle.k_values: scan needs at least one k value");
    }
    let spec = cfg.quadrature.apply(QuadratureSpec::default());
    let oracle_spec = cfg.quadrature.apply(QuadratureSpec::for_dimension(6));
    let table = CoefficientTable::compute(&cfg.potential, cfg.max_order, &spec)?;
    let k_min = cfg
        .oracle
        .k_min_override
        .unwrap_or_else(|| k_min_default(&cfg.potential));
    let n_max = cfg.oracle.n_max;
    let traces: Vec<Option<ResolventTrace>> = cfg
        .oracle
        .k_values
        .par_iter()
        .map(
            |&k| match resolvent_trace(&cfg.potential, k, n_max, &oracle_spec, k_min) {
                Ok(r) => Ok(Some(r)),
                Err(OracleError::BelowKMin { .. }) => Ok(None),
                Err(e) => Err(e),
            },
        )
        .collect::<Result<_, _>>()?;
    let cells_converged = table.all_converged();
    let mut rows = Vec::new();
    let mut terms = Vec::new();
    for (&k, trace) in cfg.oracle.k_values.iter().zip(traces) {
        let asym = asymptotic_trace(&table, k, cfg.max_order)?;
        let row = match trace {
            None => ScanRow {
                ktilde: k,
                resolvent_trace: None,
                asymptotic_trace: asym,
                difference: None,
                scaled_difference: None,
                est_error: None,
                status: RowStatus::BelowKMin,
            },
            Some(r) => {
                let diff = r.value - asym;
                let status = if r.converged && cells_converged {
                    RowStatus::Ok
                } else {
                    RowStatus::NotConverged
                };
                terms.extend(r.terms.iter().copied());
                ScanRow {
                    ktilde: k,
                    resolvent_trace: Some(r.value),
                    asymptotic_trace: asym,
                    difference: Some(diff),
                    scaled_difference: Some(diff * k.powi(cfg.max_order as i32 + 3)),
                    est_error: Some(r.est_error),
                    status,
                }
            }
        };
        rows.push(row);
    }
    Ok(ScanReport {
        k_min,
        n_max,
        max_order: cfg.max_order,
        rows,
        terms,
    })
}

fn scan_csv(report: &ScanReport) -> Result<String> {
    let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
    csv_text(
        &[
            "ktilde",
            "resolvent_trace",
            "asymptotic_trace",
            "difference",
            "scaled_difference",
            "est_error",
            "status",
        ],
        report.rows.iter().map(|r| {
            vec![
                num(r.ktilde),
                opt(r.resolvent_trace),
                num(r.asymptotic_trace),
                opt(r.difference),
                opt(r.scaled_difference),
                opt(r.est_error),
                r.status.as_str().into(),
            ]
        }),
    )
}

fn terms_csv(terms: &[TraceTermResult]) -> Result<String> {
    csv_text(
        &["n", "ktilde", "value", "est_error", "method"],
        terms.iter().map(|t| {
            vec![
                t.n.to_string(),
                num(t.ktilde),
                num(t.value),
                num(t.est_error),
                t.method.as_str().into(),
            ]
        }),
    )
}

pub fn cmd_scan(cfg: &RunConfig, format: Format, out: Option<PathBuf>) -> Result<Output> {
    let report = run_scan(cfg)?;
    let files = match format {
        Format::Json => vec![(out, json(&report)?)],
        Format::Csv => {
            let mut files = vec![(out.clone(), scan_csv(&report)?)];
            // the per-term table goes next to the main file
            if let Some(p) = &out {
                files.push((Some(terms_path(p)), terms_csv(&report.terms)?));
            }
            files
        }
    };
    let status = if report.rows.iter().all(|r| r.status == RowStatus::Ok) {
        EXIT_OK
    } else {
        EXIT_NOT_CONVERGED
    };
    Ok(Output {
        files,
        status,
        log: summarize_scan(&report),
    })
}

/// One line per row for the terminal.
fn summarize_scan(report: &ScanReport) -> String {
    let mut s = String::new();
    for r in &report.rows {
        let _ = writeln!(
            s,
            "k̃ = {:>8}  {:<13}  scaled difference {}",
            r.ktilde,
            r.status.as_str(),
            r.scaled_difference
                .map(|x| format!("{x:.6e}"))
                .unwrap_or_else(|| "-".into())
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1e-300, -2.5e17, 0.0217299, 3.0] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(3.0), "3.0");
    }

    #[test]
    fn terms_file_sits_next_to_output() {
        assert_eq!(
            terms_path(Path::new("/tmp/run/scan.csv")),
            PathBuf::from("/tmp/run/scan.terms.csv")
        );
    }
}
