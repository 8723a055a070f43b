use satbeam_core::sim::{self, PaCurvePoint};
use satbeam_core::{SalehParams, SolveStatus, SweepRow};

use crate::config::ConfigDoc;
use crate::{CliError, Format, EXIT_NOT_CONVERGED};

pub const SWEEP_HEADER: [&str; 7] = [
    "sweep_variable",
    "sweep_value",
    "scheme",
    "mean_rate",
    "stderr_rate",
    "mean_interference_w",
    "trials",
];

pub const PA_CURVE_HEADER: [&str; 3] = ["r", "am_am", "am_pm"];

/// Rendered command result and the exit code it should produce.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub body: String,
    pub exit_code: i32,
}

impl Output {
    fn ok(body: String) -> Self {
        Self { body, exit_code: 0 }
    }
}

fn json<T: serde::Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

fn csv_text<I, R>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii csv")
}

/// Solves the `[problem]` instance. Non-convergence still emits the
/// best-iterate report, with exit code 3.
pub fn solve(doc: &ConfigDoc, seed: Option<u64>, format: Format) -> Result<Output, CliError> {
    if format != Format::Json {
        return Err(CliError::Usage("solve only writes json".into()));
    }
    let spec = doc.problem(seed)?;
    let report = satbeam_core::solve(&spec)?;
    let exit_code = match report.status {
        SolveStatus::Optimal => 0,
        _ => EXIT_NOT_CONVERGED,
    };
    Ok(Output {
        body: json(&report),
        exit_code,
    })
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    csv_text(
        &SWEEP_HEADER,
        rows.iter().map(|r| {
            [
                r.sweep_variable.as_str().to_string(),
                r.sweep_value.to_string(),
                r.scheme.as_str().to_string(),
                r.mean_rate.to_string(),
                r.stderr_rate.to_string(),
                r.mean_interference_w.to_string(),
                r.trials.to_string(),
            ]
        }),
    )
}

pub fn sweep(
    doc: &ConfigDoc,
    seed: Option<u64>,
    format: Format,
    verbose: u8,
) -> Result<Output, CliError> {
    let cfg = doc.experiment(seed)?;
    if verbose > 0 {
        eprintln!(
            "sweeping {} over {} values, {} trials, seed {}",
            cfg.sweep_variable.as_str(),
            cfg.sweep_values.len(),
            cfg.trials,
            cfg.seed
        );
    }
    let result = sim::run_sweep(&cfg)?;
    Ok(Output::ok(match format {
        Format::Csv => sweep_csv(&result.rows),
        Format::Json => json(&result.rows),
    }))
}

/// Range and amplifier for `pa-curve`; `None` fields fall back to the
/// config's `[saleh]` base values.
#[derive(Debug, Clone, Copy, Default)]
pub struct CurveRequest {
    pub r_min: f64,
    pub r_max: f64,
    pub step: f64,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub alpha_phi: Option<f64>,
    pub beta_phi: Option<f64>,
}

pub fn curve_points(doc: &ConfigDoc, req: &CurveRequest) -> Result<Vec<PaCurvePoint>, CliError> {
    let s = &doc.saleh;
    let p = SalehParams::new(
        req.alpha.unwrap_or(s.alpha_base),
        req.beta.unwrap_or(s.beta_base),
        req.alpha_phi.unwrap_or(s.alpha_phi_base),
        req.beta_phi.unwrap_or(s.beta_phi_base),
    )?;
    Ok(sim::pa_curve(&p, req.r_min, req.r_max, req.step)?)
}

pub fn pa_curve_csv(points: &[PaCurvePoint]) -> String {
    csv_text(
        &PA_CURVE_HEADER,
        points
            .iter()
            .map(|p| [p.r.to_string(), p.am_am.to_string(), p.am_pm.to_string()]),
    )
}

pub fn pa_curve(doc: &ConfigDoc, req: &CurveRequest, format: Format) -> Result<Output, CliError> {
    let points = curve_points(doc, req)?;
    Ok(Output::ok(match format {
        Format::Csv => pa_curve_csv(&points),
        Format::Json => json(&points),
    }))
}

/// Lists every violation; exit code 2 unless the document is clean.
pub fn validate(doc: &ConfigDoc) -> Output {
    let v = doc.violations();
    if v.is_empty() {
        Output::ok("ok\n".into())
    } else {
        let mut body = String::new();
        for line in &v {
            body.push_str(line);
            body.push('\n');
        }
        Output {
            body,
            exit_code: crate::EXIT_CONFIG,
        }
    }
}
