//! Sweep runner, report files, CSV summary and manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use bicomb::PropertyReport;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::SweepConfig;
use crate::registry::{applicable, run_check, CHECKS, SPACES};

/// Version of the CSV summary layout.
pub const SUMMARY_VERSION: u32 = 1;

pub const SUMMARY_HEADER: &str = "check,space,seed,n,tol,max_violation,passed,mode";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Job {
    pub space: String,
    pub check: String,
}

#[derive(Debug, Clone)]
pub struct JobResult {
    pub job: Job,
    pub report: PropertyReport,
    pub seconds: f64,
}

/// Expand the config into jobs, in config order of spaces and registry
/// order of checks.
pub fn plan(cfg: &SweepConfig) -> Result<Vec<Job>> {
    for s in &cfg.run.spaces {
        if !SPACES.contains(&s.as_str()) {
            bail!("unknown space `{s}`; known: {}", SPACES.join(", "));
        }
    }
    for c in cfg.run.checks.iter().chain(cfg.check.keys()) {
        if !CHECKS.contains(&c.as_str()) {
            bail!("unknown check `{c}`; known: {}", CHECKS.join(", "));
        }
    }
    let wanted: Vec<&str> =
        if cfg.run.checks.is_empty() { CHECKS.to_vec() } else { cfg.run.checks.iter().map(String::as_str).collect() };
    let mut jobs = Vec::new();
    for s in &cfg.run.spaces {
        for c in &wanted {
            if applicable(s, c) {
                jobs.push(Job { space: s.clone(), check: c.to_string() });
            } else if !cfg.run.checks.is_empty() && !cfg.run.skip_inapplicable {
                bail!("check `{c}` does not apply to space `{s}`");
            }
        }
    }
    if jobs.is_empty() {
        bail!("no check applies to the selected spaces");
    }
    Ok(jobs)
}

/// Run every job on a pool of `cfg.run.parallelism` threads. Jobs fan out
/// across the pool; results come back in plan order.
pub fn execute(cfg: &SweepConfig, jobs: &[Job]) -> Result<Vec<JobResult>> {
    let pool =
        rayon::ThreadPoolBuilder::new().num_threads(cfg.run.parallelism).build().context("cannot start worker pool")?;
    pool.install(|| {
        jobs.par_iter()
            .map(|job| {
                let start = Instant::now();
                let report = run_check(cfg, &job.space, &job.check)?;
                Ok(JobResult { job: job.clone(), report, seconds: start.elapsed().as_secs_f64() })
            })
            .collect()
    })
}

pub fn report_file_name(job: &Job) -> String {
    format!("{}__{}.json", job.space, job.check)
}

pub fn summary_csv(results: &[JobResult]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in results {
        let p = &r.report;
        out.push_str(&format!(
            "{},{},{},{},{:e},{:e},{},{}\n",
            p.check, p.space, p.seed, p.n, p.tol, p.max_violation, p.passed, p.mode
        ));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRef {
    pub space: String,
    pub check: String,
    pub file: String,
    pub sha256: String,
    pub passed: bool,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub summary_version: u32,
    pub report_schema: u32,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub config_sha256: String,
    pub config: String,
    pub reports: Vec<ReportRef>,
    pub passed: bool,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Write reports, `summary.csv` and `manifest.json` into `dir`.
pub fn write_outputs(dir: &Path, cfg: &SweepConfig, results: &[JobResult]) -> Result<RunManifest> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut refs = Vec::new();
    for r in results {
        let file = report_file_name(&r.job);
        let body = r.report.to_json();
        fs::write(dir.join(&file), &body).with_context(|| format!("cannot write {file}"))?;
        refs.push(ReportRef {
            space: r.job.space.clone(),
            check: r.job.check.clone(),
            file,
            sha256: sha256_hex(body.as_bytes()),
            passed: r.report.passed,
            seconds: r.seconds,
        });
    }
    fs::write(dir.join("summary.csv"), summary_csv(results)).context("cannot write summary.csv")?;
    let config = cfg.canonical();
    let manifest = RunManifest {
        tool: "bicomb".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        summary_version: SUMMARY_VERSION,
        report_schema: bicomb::report::REPORT_SCHEMA_VERSION,
        timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        config_sha256: sha256_hex(config.as_bytes()),
        config,
        passed: results.iter().all(|r| r.report.passed),
        reports: refs,
    };
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?).context("cannot write manifest")?;
    Ok(manifest)
}

/// Every report the manifest names exists, matches its hash and parses.
pub fn validate_manifest(dir: &Path) -> Result<RunManifest> {
    let text = fs::read_to_string(dir.join("manifest.json")).context("cannot read manifest.json")?;
    let m: RunManifest = serde_json::from_str(&text).context("manifest does not parse")?;
    for r in &m.reports {
        let body = fs::read(dir.join(&r.file)).with_context(|| format!("missing report {}", r.file))?;
        if sha256_hex(&body) != r.sha256 {
            bail!("report {} does not match its recorded hash", r.file);
        }
        serde_json::from_slice::<PropertyReport>(&body).with_context(|| format!("report {} does not parse", r.file))?;
    }
    if sha256_hex(m.config.as_bytes()) != m.config_sha256 {
        bail!("embedded config does not match its hash");
    }
    Ok(m)
}

/// Config from a TOML file, or the embedded config of a `manifest.json`.
pub fn load_config(path: &Path) -> Result<SweepConfig> {
    if path.extension().is_some_and(|e| e == "json") {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        let m: RunManifest = serde_json::from_str(&text).context("manifest does not parse")?;
        SweepConfig::parse(&m.config)
    } else {
        SweepConfig::load(path)
    }
}

pub struct VerifyOutcome {
    pub dir: PathBuf,
    pub results: Vec<JobResult>,
    pub manifest: RunManifest,
}

/// Load, plan, run and persist. `Err` means a usage error.
pub fn verify(path: &Path, out: Option<&Path>) -> Result<VerifyOutcome> {
    let cfg = load_config(path)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let dir = out.map(Path::to_path_buf).unwrap_or_else(|| cfg.output_dir(base));
    verify_config(&cfg, &dir)
}

pub fn verify_config(cfg: &SweepConfig, dir: &Path) -> Result<VerifyOutcome> {
    let jobs = plan(cfg)?;
    let results = execute(cfg, &jobs)?;
    let manifest = write_outputs(dir, cfg, &results)?;
    Ok(VerifyOutcome { dir: dir.to_path_buf(), results, manifest })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> SweepConfig {
        SweepConfig::parse(text).unwrap()
    }

    #[test]
    fn plan_follows_config_order_and_skips() {
        let c = cfg("[run]\nspaces = [\"h2\", \"euclidean\"]\nchecks = [\"holonomy\", \"axioms\"]\n");
        let jobs = plan(&c).unwrap();
        let names: Vec<_> = jobs.iter().map(|j| format!("{}/{}", j.space, j.check)).collect();
        assert_eq!(names, ["h2/holonomy", "h2/axioms", "euclidean/axioms"]);
        let strict = cfg("[run]\nspaces = [\"euclidean\"]\nchecks = [\"holonomy\"]\nskip_inapplicable = false\n");
        assert!(plan(&strict).is_err());
    }

    #[test]
    fn unknown_names_are_usage_errors() {
        assert!(plan(&cfg("[run]\nspaces = [\"mars\"]\n")).is_err());
        assert!(plan(&cfg("[run]\nspaces = [\"h2\"]\nchecks = [\"vibes\"]\n")).is_err());
        assert!(plan(&cfg("[run]\nspaces = [\"h2\"]\n[check.vibes]\nn = 3\n")).is_err());
    }

    #[test]
    fn csv_has_one_row_per_job() {
        let c = cfg("[run]\nspaces = [\"euclidean\"]\nchecks = [\"axioms\"]\n[check.axioms]\nn = 50\n");
        let results = execute(&c, &plan(&c).unwrap()).unwrap();
        let csv = summary_csv(&results);
        assert!(csv.starts_with(SUMMARY_HEADER));
        assert_eq!(csv.lines().count(), 2);
        assert!(csv.lines().nth(1).unwrap().starts_with("axioms,euclidean,1,50,"));
    }
}
