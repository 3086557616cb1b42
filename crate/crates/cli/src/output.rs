use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

use anyhow::Result;
use icewall::enumeration::LatticeConfig;
use icewall::VertexWeights64;
use serde::Serialize;

use crate::compute::{model_label, DeviationSummary, ResultRecord};
use crate::config::{Format, Job, Model};
use crate::verify::Report;

pub const SCHEMA: u32 = 1;

/// Sweep columns, in order.
pub const SWEEP_HEADER: [&str; 10] = [
    "n",
    "lambda_re",
    "lambda_im",
    "eta_re",
    "eta_im",
    "representation",
    "log_abs_z",
    "phase",
    "f_n",
    "error",
];

pub fn write(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn json<T: Serialize>(doc: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(doc)?;
    s.push('\n');
    Ok(s)
}

fn csv_string(rows: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
    for r in rows {
        w.write_record(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// `[lambda_re, lambda_im, eta_re, eta_im]` cells, empty for explicit weights.
fn spectral(m: &Model) -> [String; 4] {
    match m {
        Model::Spectral { lambda, eta } => [lambda[0], lambda[1], eta[0], eta[1]].map(|x| x.to_string()),
        Model::Weights { .. } => Default::default(),
    }
}

#[derive(Serialize)]
struct ComputeDoc<'a> {
    schema: u32,
    command: &'static str,
    records: &'a [ResultRecord],
    #[serde(skip_serializing_if = "Option::is_none")]
    deviations: Option<&'a DeviationSummary>,
}

const COMPUTE_HEADER: [&str; 11] = [
    "representation",
    "n",
    "lambda_re",
    "lambda_im",
    "eta_re",
    "eta_im",
    "log_abs_z",
    "phase",
    "precision_bits",
    "config_count",
    "warnings",
];

pub fn compute(records: &[ResultRecord], summary: Option<&DeviationSummary>, format: Format) -> Result<String> {
    match format {
        Format::Json => json(&ComputeDoc {
            schema: SCHEMA,
            command: "compute",
            records,
            deviations: summary,
        }),
        Format::Csv => {
            let mut rows = vec![COMPUTE_HEADER.iter().map(|s| s.to_string()).collect()];
            for r in records {
                let [lr, li, er, ei] = spectral(&r.inputs.model);
                rows.push(vec![
                    r.inputs.representation.name().to_string(),
                    r.inputs.n.to_string(),
                    lr,
                    li,
                    er,
                    ei,
                    opt(r.log_magnitude),
                    r.phase.to_string(),
                    r.precision_bits.to_string(),
                    r.config_count.map(|c| c.to_string()).unwrap_or_default(),
                    r.warnings.join("; "),
                ]);
            }
            csv_string(rows)
        }
        Format::Text => {
            let mut s = String::new();
            if let Some(r) = records.first() {
                writeln!(s, "N = {}, {}", r.inputs.n, model_label(&r.inputs.model))?;
            }
            for r in records {
                write!(s, "{:<20} log|Z| = {:<24} phase = {:<24}", r.inputs.representation.name(), opt(r.log_magnitude), r.phase)?;
                let z = r.value().to_complex();
                if z.norm().is_finite() && (z.norm() > 1e-300 || r.log_magnitude.is_none()) {
                    write!(s, " Z = {:.15e} {:+.15e}i", z.re, z.im)?;
                }
                if let Some(c) = r.config_count {
                    write!(s, " configs = {c}")?;
                }
                writeln!(s)?;
                for w in &r.warnings {
                    writeln!(s, "  warning: {w}")?;
                }
            }
            if let Some(d) = summary {
                writeln!(s, "max pairwise relative deviation {:.3e} (tolerance {:.1e}): {}", d.max_deviation, d.tolerance, if d.passed { "PASS" } else { "FAIL" })?;
            }
            Ok(s)
        }
    }
}

/// One sweep row: a record, or the failed job and its error.
#[derive(Clone, Debug, Serialize)]
pub struct SweepPoint {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record: Option<ResultRecord>,
    /// `-log|Z| / N²`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_n: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failed_job: Option<Job>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SweepPoint {
    pub fn new(job: &Job, r: Result<ResultRecord>) -> Self {
        match r {
            Ok(rec) => SweepPoint {
                f_n: rec.log_magnitude.map(|l| -l / (job.n * job.n) as f64),
                record: Some(rec),
                failed_job: None,
                error: None,
            },
            Err(e) => SweepPoint {
                record: None,
                f_n: None,
                failed_job: Some(job.clone()),
                error: Some(format!("{e:#}")),
            },
        }
    }

    pub fn job(&self) -> &Job {
        match (&self.record, &self.failed_job) {
            (Some(r), _) => &r.inputs,
            (None, Some(j)) => j,
            (None, None) => unreachable!("sweep point without record or job"),
        }
    }
}

#[derive(Serialize)]
struct SweepDoc<'a> {
    schema: u32,
    command: &'static str,
    points: &'a [SweepPoint],
}

pub fn sweep(points: &[SweepPoint], format: Format) -> Result<String> {
    let row = |p: &SweepPoint| -> Vec<String> {
        let job = p.job();
        let [lr, li, er, ei] = spectral(&job.model);
        let rec = p.record.as_ref();
        vec![
            job.n.to_string(),
            lr,
            li,
            er,
            ei,
            job.representation.name().to_string(),
            opt(rec.and_then(|r| r.log_magnitude)),
            opt(rec.map(|r| r.phase)),
            opt(p.f_n),
            p.error.clone().unwrap_or_default(),
        ]
    };
    match format {
        Format::Json => json(&SweepDoc {
            schema: SCHEMA,
            command: "sweep",
            points,
        }),
        Format::Csv => {
            let mut rows = vec![SWEEP_HEADER.iter().map(|s| s.to_string()).collect()];
            rows.extend(points.iter().map(row));
            csv_string(rows)
        }
        Format::Text => {
            let mut s = String::new();
            writeln!(s, "{:>4} {:>10} {:>10} {:>24} {:>24} {:>24}", "N", "lambda", "eta", "log|Z|", "phase", "f_N")?;
            for p in points {
                let r = row(p);
                write!(s, "{:>4} {:>10} {:>10} ", r[0], fmt_pair(&r[1], &r[2]), fmt_pair(&r[3], &r[4]))?;
                match &p.error {
                    Some(e) => writeln!(s, "error: {e}")?,
                    None => writeln!(s, "{:>24} {:>24} {:>24}", r[6], r[7], r[8])?,
                }
            }
            Ok(s)
        }
    }
}

fn fmt_pair(re: &str, im: &str) -> String {
    if im == "0" {
        re.to_string()
    } else {
        format!("{re},{im}")
    }
}

pub fn verify(report: &Report, format: Format) -> Result<String> {
    match format {
        Format::Json => json(report),
        Format::Csv => {
            let mut rows = vec![["suite", "invariant", "deviation", "threshold", "passed"].map(String::from).to_vec()];
            for c in &report.checks {
                rows.push(vec![
                    c.suite.to_string(),
                    c.invariant.clone(),
                    c.deviation.to_string(),
                    c.threshold.to_string(),
                    c.passed.to_string(),
                ]);
            }
            csv_string(rows)
        }
        Format::Text => {
            let mut s = String::new();
            for c in &report.checks {
                writeln!(
                    s,
                    "{} [{}] {}: {:.3e} (threshold {:.1e})",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.suite,
                    c.invariant,
                    c.deviation,
                    c.threshold
                )?;
            }
            let failed = report.checks.iter().filter(|c| !c.passed).count();
            writeln!(s, "{} checks, {failed} failed", report.checks.len())?;
            Ok(s)
        }
    }
}

#[derive(Serialize)]
struct DumpEntry {
    index: usize,
    type_counts: [usize; 6],
    weight: [f64; 2],
    grid: icewall::enumeration::ArrowGrid,
}

#[derive(Serialize)]
struct DumpDoc {
    schema: u32,
    command: &'static str,
    n: usize,
    config_count: usize,
    configurations: Vec<DumpEntry>,
}

pub fn dump(n: usize, configs: &[LatticeConfig], w: &VertexWeights64, format: Format) -> Result<String> {
    match format {
        Format::Json => json(&DumpDoc {
            schema: SCHEMA,
            command: "enumerate-dump",
            n,
            config_count: configs.len(),
            configurations: configs
                .iter()
                .enumerate()
                .map(|(index, c)| {
                    let z = c.weight(w);
                    DumpEntry {
                        index,
                        type_counts: c.type_counts(),
                        weight: [z.re, z.im],
                        grid: c.to_tokens(),
                    }
                })
                .collect(),
        }),
        Format::Csv => {
            let mut rows = vec![["index", "n1", "n2", "n3", "n4", "n5", "n6", "weight_re", "weight_im", "types"]
                .map(String::from)
                .to_vec()];
            for (i, c) in configs.iter().enumerate() {
                let z = c.weight(w);
                let mut row = vec![i.to_string()];
                row.extend(c.type_counts().iter().map(|k| k.to_string()));
                row.push(z.re.to_string());
                row.push(z.im.to_string());
                let types: Vec<String> = c.to_tokens().types.iter().map(|r| r.iter().map(|t| t.to_string()).collect()).collect();
                row.push(types.join("/"));
                rows.push(row);
            }
            csv_string(rows)
        }
        Format::Text => {
            let mut s = String::new();
            writeln!(s, "N = {n}: {} configurations", configs.len())?;
            for (i, c) in configs.iter().enumerate() {
                writeln!(s, "\n#{i} types {:?}", c.type_counts())?;
                s.push_str(&c.to_ascii());
            }
            Ok(s)
        }
    }
}
