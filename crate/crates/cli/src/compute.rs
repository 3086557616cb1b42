use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use icewall::enumeration::{enumerate_configs, partition_dp, MAX_DP_N, MAX_ENUMERATION_N};
use icewall::finite::{full_partition_gauss, full_partition_mp};
use icewall::fredholm::{fredholm_det_auto, KernelSpec};
use icewall::hankel::{partition_hankel_mp, qgroup_prefactor};
use icewall::{Diagnosed, LogScaled64, Mp, ModelParams64, ModelParamsMp, PrecisionContext, C64};
use serde::{Deserialize, Serialize};

use crate::config::{Job, Model, Representation};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub inputs: Job,
    /// `null` when `Z = 0`.
    pub log_magnitude: Option<f64>,
    pub phase: f64,
    pub precision_bits: u32,
    pub elapsed_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub config_count: Option<u64>,
    pub warnings: Vec<String>,
}

impl ResultRecord {
    pub fn value(&self) -> LogScaled64 {
        match self.log_magnitude {
            Some(l) => LogScaled64::from_polar_log(l, self.phase),
            None => LogScaled64::zero(),
        }
    }
}

/// Pairwise max-relative-deviation summary for `--rep all`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationSummary {
    pub representations: Vec<Representation>,
    pub matrix: Vec<Vec<f64>>,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl DeviationSummary {
    pub fn from_records(records: &[ResultRecord], tolerance: f64) -> Self {
        let values: Vec<LogScaled64> = records.iter().map(ResultRecord::value).collect();
        let matrix: Vec<Vec<f64>> = values
            .iter()
            .map(|a| values.iter().map(|b| a.rel_deviation(b)).collect())
            .collect();
        let max_deviation = matrix.iter().flatten().fold(0f64, |m, &d| if d.is_nan() { f64::INFINITY } else { m.max(d) });
        DeviationSummary {
            representations: records.iter().map(|r| r.inputs.representation).collect(),
            matrix,
            max_deviation,
            tolerance,
            passed: max_deviation <= tolerance,
        }
    }
}

/// Directory-backed record cache, one JSON file per job hash.
pub struct Cache {
    dir: PathBuf,
    pub hits: AtomicUsize,
    pub computed: AtomicUsize,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).with_context(|| format!("creating cache directory {}", dir.display()))?;
        Ok(Cache {
            dir,
            hits: AtomicUsize::new(0),
            computed: AtomicUsize::new(0),
        })
    }

    fn path(&self, job: &Job) -> PathBuf {
        self.dir.join(format!("{}.json", job.cache_key()))
    }

    fn load(&self, job: &Job) -> Option<ResultRecord> {
        let text = std::fs::read_to_string(self.path(job)).ok()?;
        let rec: ResultRecord = serde_json::from_str(&text).ok()?;
        (rec.inputs == *job).then_some(rec)
    }

    fn store(&self, rec: &ResultRecord) -> Result<()> {
        let path = self.path(&rec.inputs);
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        std::fs::write(&tmp, serde_json::to_vec(rec)?)?;
        std::fs::rename(&tmp, &path)?;
        Ok(())
    }

    pub fn summary(&self) -> String {
        format!(
            "cache {}: {} hits, {} computed",
            self.dir.display(),
            self.hits.load(Ordering::Relaxed),
            self.computed.load(Ordering::Relaxed)
        )
    }
}

/// Runs a single-representation job, consulting the cache when given.
pub fn run_job(job: &Job, cache: Option<&Cache>) -> Result<ResultRecord> {
    if let Some(c) = cache {
        if let Some(rec) = c.load(job) {
            c.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(rec);
        }
    }
    let rec = compute(job).map_err(|e| anyhow!("[{}] {e:#}", job.representation.name()))?;
    if let Some(c) = cache {
        c.computed.fetch_add(1, Ordering::Relaxed);
        c.store(&rec)?;
    }
    Ok(rec)
}

/// Every representation that applies at the job's inputs.
pub fn applicable(job: &Job) -> Vec<Representation> {
    use Representation::*;
    let mut reps = Vec::new();
    if job.n <= MAX_ENUMERATION_N {
        reps.push(Enumerate);
    } else if job.n <= MAX_DP_N {
        reps.push(Dp);
    }
    let Some(p) = job.model.params() else {
        return reps;
    };
    reps.extend([Hankel, Wdet, Gauss]);
    if KernelSpec::disordered(job.n, &p).is_ok() {
        reps.push(FredholmDisordered);
    } else if discrete_phis(&p).is_ok() {
        reps.push(FredholmDiscrete);
    }
    reps
}

pub fn run_all(job: &Job, cache: Option<&Cache>) -> Result<(Vec<ResultRecord>, DeviationSummary)> {
    let records = applicable(job)
        .into_iter()
        .map(|r| run_job(&Job { representation: r, ..job.clone() }, cache))
        .collect::<Result<Vec<_>>>()?;
    let summary = DeviationSummary::from_records(&records, job.tol);
    Ok((records, summary))
}

fn context(job: &Job, n: usize) -> Result<PrecisionContext> {
    Ok(match job.bits {
        Some(b) => PrecisionContext::new(b)?,
        None => PrecisionContext::for_order(n),
    })
}

fn params(job: &Job) -> Result<ModelParams64> {
    job.model
        .params()
        .ok_or_else(|| anyhow!("needs --lambda and --eta"))
}

fn real_params(p: &ModelParams64) -> Result<(f64, f64)> {
    if p.lambda().im != 0.0 || p.eta().im != 0.0 {
        bail!("the rational kernel needs real lambda and eta");
    }
    Ok((p.lambda().re, p.eta().re))
}

/// `φ̃±` with `φ± = iφ̃±`; fails unless both are purely imaginary.
fn discrete_phis(p: &ModelParams64) -> Result<(C64, C64)> {
    let (pp, pm) = (p.phi_plus(), p.phi_minus());
    if pp.re.abs() > 1e-14 || pm.re.abs() > 1e-14 {
        bail!("the discrete kernel needs purely imaginary lambda +- eta, got {pp} and {pm}");
    }
    Ok((C64::new(pp.im, 0.0), C64::new(pm.im, 0.0)))
}

fn compute(job: &Job) -> Result<ResultRecord> {
    job.validate()?;
    let n = job.n;
    let start = Instant::now();
    let mut config_count = None;
    let (value, bits, warnings): (LogScaled64, u32, Vec<String>) = match job.representation {
        Representation::Enumerate => {
            let r = enumerate_configs(n, &job.model.vertex_weights())?;
            config_count = Some(r.config_count);
            (r.z_value, 53, vec![])
        }
        Representation::Dp => (partition_dp(n, &job.model.vertex_weights())?, 53, vec![]),
        Representation::Hankel => {
            let ctx = context(job, n)?;
            diagnosed(partition_hankel_mp(n, &params(job)?, &ctx)?, ctx.mantissa_bits())
        }
        Representation::Wdet => {
            let ctx = context(job, n)?;
            diagnosed(full_partition_mp(n, &params(job)?, &ctx)?, ctx.mantissa_bits())
        }
        Representation::Gauss => {
            let ctx = context(job, n)?;
            let p = params(job)?;
            let d = ctx.run(|| {
                let pm: ModelParamsMp = p.convert();
                full_partition_gauss::<Mp>(n, &pm).map(|d| d.map(|v| v.to_f64()))
            })?;
            diagnosed(d, ctx.mantissa_bits())
        }
        Representation::FredholmDisordered => {
            let p = params(job)?;
            let spec = KernelSpec::disordered(n, &p)?;
            let d = fredholm_det_auto(&spec, job.tol)?;
            diagnosed(d.map(|v| v * qgroup_prefactor(n, &p)), 53)
        }
        Representation::FredholmDiscrete => {
            let p = params(job)?;
            let (tp, tm) = discrete_phis(&p)?;
            let spec = KernelSpec::discrete(n, tp, tm)?;
            let d = fredholm_det_auto(&spec, job.tol)?;
            diagnosed(d.map(|v| v * qgroup_prefactor(n, &p)), 53)
        }
        Representation::FredholmRational => {
            let (l, e) = real_params(&params(job)?)?;
            let spec = KernelSpec::rational_from(n, l, e)?;
            let d = fredholm_det_auto(&spec, job.tol)?;
            let pref = LogScaled64::from_real(&(l + e)).powi((n * n) as i64);
            diagnosed(d.map(|v| v * pref), 53)
        }
        Representation::All => bail!("run_job handles a single representation; use run_all"),
    };
    let log_magnitude = (!value.is_zero()).then(|| *value.log_magnitude());
    Ok(ResultRecord {
        inputs: job.clone(),
        log_magnitude,
        phase: if value.is_zero() { 0.0 } else { value.angle() },
        precision_bits: bits,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        config_count,
        warnings,
    })
}

fn diagnosed(d: Diagnosed<LogScaled64>, bits: u32) -> (LogScaled64, u32, Vec<String>) {
    (d.value, bits, d.warnings.iter().map(ToString::to_string).collect())
}

pub fn model_label(m: &Model) -> String {
    match m {
        Model::Spectral { lambda, eta } => format!("lambda={},{} eta={},{}", lambda[0], lambda[1], eta[0], eta[1]),
        Model::Weights { weights } => format!("weights={weights:?}"),
    }
}
