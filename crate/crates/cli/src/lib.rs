//! Command-line front end for `mixent`.
//!
//! Exit codes: 0 success, 1 usage, 2 input validation, 3 numeric failure or
//! an inconclusive / failed check.

pub mod config;
pub mod format;
pub mod ingest;

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use mixent::lemma_lab::{density_check, median_knn_radius, LawCheck};
use mixent::{
    conditional_entropy, estimator::label_entropy, rank_features, run_convergence, sample, verify_conditional_law,
    EstimatorConfig, KRule, Model,
};
use serde::Serialize;
use serde_json::json;

pub use format::{sig6, OutputFormat, Units};
pub use ingest::{ingest_csv, CsvDataset};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("{0}")]
    Numeric(String),
    /// A check ran to completion but did not pass.
    #[error("{0}")]
    CheckFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input(_) => 2,
            CliError::Numeric(_) | CliError::CheckFailed(_) => 3,
        }
    }
}

impl From<mixent::Error> for CliError {
    fn from(e: mixent::Error) -> Self {
        match e {
            mixent::Error::InvalidInput(m) => CliError::Input(m),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "mixent", version, about = "k-NN conditional entropy H(Y|X) for continuous X and discrete Y")]
pub struct Cli {
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate H(Y|X) from a CSV dataset.
    Estimate(DataArgs),
    /// Estimate I(X;Y) = H(Y) - H(Y|X) from a CSV dataset.
    Mi(DataArgs),
    /// Draw a labelled sample from a model.
    Generate(GenerateArgs),
    /// Run a seeded convergence experiment.
    Convergence(ConvergenceArgs),
    /// Compare the same-label count law in a radius shell with its mixture form.
    LemmaCheck(LemmaArgs),
    /// Check the k-th neighbor distance density and CDF against simulation.
    DensityCheck(DensityArgs),
    /// Rank features by single-feature mutual information.
    RankFeatures(DataArgs),
}

#[derive(Debug, Args)]
pub struct KArgs {
    /// Fixed neighbor count.
    #[arg(long, conflicts_with_all = ["alpha", "c"])]
    pub k: Option<usize>,
    /// Schedule exponent in k = round(c * n^alpha).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Schedule constant in k = round(c * n^alpha).
    #[arg(long)]
    pub c: Option<f64>,
    /// Report max(0, estimate).
    #[arg(long)]
    pub clamp_nonnegative: bool,
    /// Count every same-label point in a tied ball instead of capping at k.
    #[arg(long)]
    pub no_tie_clamp: bool,
}

impl KArgs {
    pub fn config(&self) -> EstimatorConfig {
        let mut cfg = EstimatorConfig::default();
        if let Some(k) = self.k {
            cfg.k = KRule::Fixed(k);
        } else if self.alpha.is_some() || self.c.is_some() {
            let KRule::Schedule { alpha, c } = KRule::default() else { unreachable!() };
            cfg.k = KRule::Schedule { alpha: self.alpha.unwrap_or(alpha), c: self.c.unwrap_or(c) };
        }
        cfg.clamp_nonnegative = self.clamp_nonnegative;
        cfg.tie_clamp = !self.no_tie_clamp;
        cfg
    }
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// CSV file with a header row.
    #[arg(long)]
    pub input: PathBuf,
    /// Label column name (default: last column).
    #[arg(long)]
    pub label: Option<String>,
    #[command(flatten)]
    pub k: KArgs,
    #[arg(long, value_enum, default_value = "nats")]
    pub units: Units,
    #[arg(long, value_enum, default_value = "text")]
    pub output: OutputFormat,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Model file (schema mixent.model/1).
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    pub output: OutputFormat,
}

#[derive(Debug, Args)]
pub struct ConvergenceArgs {
    /// Run configuration (schema mixent.run/1).
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "nats")]
    pub units: Units,
    #[arg(long, value_enum, default_value = "json")]
    pub output: OutputFormat,
}

#[derive(Debug, Args)]
pub struct PointArgs {
    /// Model file (schema mixent.model/1).
    #[arg(long)]
    pub model: PathBuf,
    /// Query point, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub x: Vec<f64>,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct LemmaArgs {
    #[command(flatten)]
    pub point: PointArgs,
    /// Label whose count is studied, by name.
    #[arg(long)]
    pub label: String,
    /// Shell center (default: median simulated k-th neighbor radius).
    #[arg(long)]
    pub t: Option<f64>,
    /// Shell half-width as a fraction of t.
    #[arg(long, default_value_t = 0.1)]
    pub delta_frac: f64,
    /// Simulations used to locate the median radius.
    #[arg(long, default_value_t = 2001)]
    pub pilot: usize,
    #[arg(long, default_value_t = 40_000)]
    pub replicates: usize,
    #[arg(long, default_value_t = mixent::lemma_lab::DEFAULT_MIN_HITS)]
    pub min_hits: usize,
    #[arg(long, default_value_t = mixent::lemma_lab::DEFAULT_TV_THRESHOLD)]
    pub threshold: f64,
    #[arg(long, value_enum, default_value = "json")]
    pub output: OutputFormat,
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    #[command(flatten)]
    pub point: PointArgs,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, value_enum, default_value = "json")]
    pub output: OutputFormat,
}

/// Text for standard output and standard error.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct Output {
    pub stdout: String,
    pub stderr: String,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> (i32, Output)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                (1, Output { stdout: String::new(), stderr: text })
            } else {
                (0, Output { stdout: text, stderr: String::new() })
            };
        }
    };
    let mut out = Output::default();
    let result = match cli.threads {
        Some(0) => Err(CliError::Usage("--threads must be positive".into())),
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(|| execute(&cli.command, &mut out)),
            Err(e) => Err(CliError::Numeric(format!("thread pool: {e}"))),
        },
        None => execute(&cli.command, &mut out),
    };
    match result {
        Ok(()) => (0, out),
        Err(e) => {
            let _ = writeln!(out.stderr, "error: {e}");
            (e.exit_code(), out)
        }
    }
}

pub fn execute(command: &Command, out: &mut Output) -> Result<(), CliError> {
    match command {
        Command::Estimate(a) => estimate(a, out),
        Command::Mi(a) => mi(a, out),
        Command::Generate(a) => generate(a, out),
        Command::Convergence(a) => convergence(a, out),
        Command::LemmaCheck(a) => lemma_check(a, out),
        Command::DensityCheck(a) => density(a, out),
        Command::RankFeatures(a) => rank(a, out),
    }
}

#[derive(Serialize)]
struct LabelEntry<'a> {
    name: &'a str,
    id: u32,
}

fn label_entries(mapping: &[(String, u32)]) -> Vec<LabelEntry<'_>> {
    mapping.iter().map(|(name, id)| LabelEntry { name, id: *id }).collect()
}

fn mapping_text(mapping: &[(String, u32)]) -> String {
    mapping.iter().map(|(s, id)| format!("{s}={id}")).collect::<Vec<_>>().join(";")
}

fn estimate(a: &DataArgs, out: &mut Output) -> Result<(), CliError> {
    let data = ingest_csv(&a.input, a.label.as_deref())?;
    let cfg = a.k.config();
    let est = conditional_entropy(&data.dataset, &cfg)?;
    if est.negative_flag {
        let _ = writeln!(
            out.stderr,
            "warning: negative estimate {} {}{}",
            sig6(a.units.scale(est.raw_value)),
            a.units.name(),
            if est.clamped { " (clamped to 0)" } else { "" }
        );
    }
    let u = a.units;
    let mapping = data.label_mapping();
    match a.output {
        OutputFormat::Text => {
            let _ = writeln!(out.stdout, "{}", sig6(u.scale(est.value)));
            let _ = writeln!(out.stdout, "units: {}", u.name());
            let _ = writeln!(out.stdout, "n: {}", data.dataset.len());
            let _ = writeln!(out.stdout, "k: {}", est.k_used);
            let _ = writeln!(out.stdout, "tie_events: {}", est.tie_events);
            let _ = writeln!(out.stdout, "labels: {}", mapping_text(&mapping));
        }
        OutputFormat::Csv => {
            let _ = writeln!(out.stdout, "n,k,value,raw_value,tie_events,negative,clamped,units,labels");
            let _ = writeln!(
                out.stdout,
                "{},{},{:?},{:?},{},{},{},{},{}",
                data.dataset.len(),
                est.k_used,
                u.scale(est.value),
                u.scale(est.raw_value),
                est.tie_events,
                est.negative_flag,
                est.clamped,
                u.name(),
                mapping_text(&mapping)
            );
        }
        OutputFormat::Json => {
            let terms: Vec<f64> = est.per_point_terms.iter().map(|&t| u.scale(t)).collect();
            out.stdout.push_str(&format::to_json(&json!({
                "schema": "mixent.estimate/1",
                "units": u.name(),
                "n": data.dataset.len(),
                "k": est.k_used,
                "value": u.scale(est.value),
                "raw_value": u.scale(est.raw_value),
                "negative": est.negative_flag,
                "clamped": est.clamped,
                "tie_events": est.tie_events,
                "labels": label_entries(&mapping),
                "per_point_terms": terms,
            })));
        }
    }
    Ok(())
}

fn mi(a: &DataArgs, out: &mut Output) -> Result<(), CliError> {
    let data = ingest_csv(&a.input, a.label.as_deref())?;
    let cfg = EstimatorConfig { clamp_nonnegative: false, ..a.k.config() };
    let est = conditional_entropy(&data.dataset, &cfg)?;
    let hy = label_entropy(data.dataset.labels())?;
    let value = hy - est.value;
    let u = a.units;
    let mapping = data.label_mapping();
    match a.output {
        OutputFormat::Text => {
            let _ = writeln!(out.stdout, "{}", sig6(u.scale(value)));
            let _ = writeln!(out.stdout, "units: {}", u.name());
            let _ = writeln!(out.stdout, "H(Y): {}", sig6(u.scale(hy)));
            let _ = writeln!(out.stdout, "H(Y|X): {}", sig6(u.scale(est.value)));
            let _ = writeln!(out.stdout, "n: {}", data.dataset.len());
            let _ = writeln!(out.stdout, "k: {}", est.k_used);
            let _ = writeln!(out.stdout, "labels: {}", mapping_text(&mapping));
        }
        OutputFormat::Csv => {
            let _ = writeln!(out.stdout, "n,k,mutual_information,label_entropy,conditional_entropy,units,labels");
            let _ = writeln!(
                out.stdout,
                "{},{},{:?},{:?},{:?},{},{}",
                data.dataset.len(),
                est.k_used,
                u.scale(value),
                u.scale(hy),
                u.scale(est.value),
                u.name(),
                mapping_text(&mapping)
            );
        }
        OutputFormat::Json => {
            out.stdout.push_str(&format::to_json(&json!({
                "schema": "mixent.mi/1",
                "units": u.name(),
                "n": data.dataset.len(),
                "k": est.k_used,
                "mutual_information": u.scale(value),
                "label_entropy": u.scale(hy),
                "conditional_entropy": u.scale(est.value),
                "labels": label_entries(&mapping),
            })));
        }
    }
    Ok(())
}

fn generate(a: &GenerateArgs, out: &mut Output) -> Result<(), CliError> {
    let model = Model::new(config::load_model(&a.model)?)?;
    let ds = sample(&model, a.n, a.seed)?;
    match a.output {
        OutputFormat::Csv | OutputFormat::Text => out.stdout.push_str(&ingest::write_csv(&ds)),
        OutputFormat::Json => {
            let rows: Vec<&[f64]> = (0..ds.len()).map(|i| ds.features().point(i)).collect();
            let labels: Vec<String> = ds.labels().iter().map(|&y| ds.label_name(y)).collect();
            out.stdout.push_str(&format::to_json(&json!({
                "schema": "mixent.dataset/1",
                "seed": a.seed,
                "dim": ds.dim(),
                "features": rows,
                "labels": labels,
            })));
        }
    }
    Ok(())
}

fn convergence(a: &ConvergenceArgs, out: &mut Output) -> Result<(), CliError> {
    let plan = config::load_run_config(&a.config)?.into_plan(a.seed);
    plan.validate()?;
    let report = run_convergence(&plan)?;
    let u = a.units;
    let truth = u.scale(report.ground_truth.value);
    match a.output {
        OutputFormat::Json => {
            let mut value = serde_json::to_value(&report).expect("serializable");
            value["units"] = json!(u.name());
            if u == Units::Bits {
                rescale_report(&mut value, u);
            }
            out.stdout.push_str(&format::to_json(&value));
        }
        OutputFormat::Csv => {
            let _ =
                writeln!(out.stdout, "n,k,estimator,replicates,failures,mean,bias,mse,std_error,ground_truth,units");
            for r in &report.rows {
                let _ = writeln!(
                    out.stdout,
                    "{},{},{},{},{},{:?},{:?},{:?},{:?},{:?},{}",
                    r.n,
                    r.k,
                    r.estimator.name(),
                    r.replicates,
                    r.failures,
                    u.scale(r.mean),
                    u.scale(r.bias),
                    u.scale(u.scale(r.mse)),
                    u.scale(r.std_error),
                    truth,
                    u.name()
                );
            }
        }
        OutputFormat::Text => {
            let _ = writeln!(
                out.stdout,
                "ground truth: {} {} ({})",
                sig6(truth),
                u.name(),
                serde_json::to_value(report.ground_truth.method).expect("serializable").as_str().unwrap_or("")
            );
            let _ = writeln!(
                out.stdout,
                "{:>8} {:>5} {:<20} {:>5} {:>12} {:>12} {:>12} {:>12}",
                "n", "k", "estimator", "fail", "mean", "bias", "mse", "std_error"
            );
            for r in &report.rows {
                let _ = writeln!(
                    out.stdout,
                    "{:>8} {:>5} {:<20} {:>5} {:>12} {:>12} {:>12} {:>12}",
                    r.n,
                    r.k,
                    r.estimator.name(),
                    r.failures,
                    sig6(u.scale(r.mean)),
                    sig6(u.scale(r.bias)),
                    sig6(u.scale(u.scale(r.mse))),
                    sig6(u.scale(r.std_error))
                );
            }
        }
    }
    for r in report.rows.iter().filter(|r| r.failures > 0) {
        let _ = writeln!(
            out.stderr,
            "warning: n = {}, {}: {} of {} replicates failed ({})",
            r.n,
            r.estimator.name(),
            r.failures,
            plan.replicates,
            r.first_failure.as_deref().unwrap_or("unknown")
        );
    }
    Ok(())
}

/// Converts the entropy-valued fields of a serialized report to `units`.
fn rescale_report(value: &mut serde_json::Value, u: Units) {
    let scale = |v: &mut serde_json::Value, times: usize| {
        if let Some(x) = v.as_f64() {
            let mut x = x;
            for _ in 0..times {
                x = u.scale(x);
            }
            *v = json!(x);
        }
    };
    if let Some(gt) = value.get_mut("ground_truth") {
        for key in ["value", "error_bound"] {
            if let Some(v) = gt.get_mut(key) {
                scale(v, 1);
            }
        }
    }
    if let Some(rows) = value.get_mut("rows").and_then(|r| r.as_array_mut()) {
        for row in rows {
            for key in ["mean", "bias", "std_error"] {
                if let Some(v) = row.get_mut(key) {
                    scale(v, 1);
                }
            }
            if let Some(v) = row.get_mut("mse") {
                scale(v, 2);
            }
            if let Some(est) = row.get_mut("estimates").and_then(|e| e.as_array_mut()) {
                for v in est {
                    scale(v, 1);
                }
            }
        }
    }
}

fn label_id(model: &Model, name: &str) -> Result<u32, CliError> {
    model
        .label_names()
        .iter()
        .position(|s| s == name)
        .map(|i| i as u32)
        .ok_or_else(|| CliError::Input(format!("label '{name}' not in model alphabet {:?}", model.label_names())))
}

fn lemma_check(a: &LemmaArgs, out: &mut Output) -> Result<(), CliError> {
    let p = &a.point;
    let model = Model::new(config::load_model(&p.model)?)?;
    let y = label_id(&model, &a.label)?;
    if !(a.delta_frac > 0.0 && a.delta_frac < 1.0) {
        return Err(CliError::Input(format!("--delta-frac must lie in (0, 1), got {}", a.delta_frac)));
    }
    let t = match a.t {
        Some(t) => t,
        None => median_knn_radius(&model, &p.x, p.n, p.k, a.pilot, p.seed)?,
    };
    let mut check = LawCheck::new(p.x.clone(), y, p.n, p.k, t, t * a.delta_frac, a.replicates, p.seed);
    check.min_hits = a.min_hits;
    check.threshold = a.threshold;
    let report = verify_conditional_law(&model, &check)?;
    match a.output {
        OutputFormat::Json => out.stdout.push_str(&format::to_json(&json!({
            "schema": "mixent.lemma-check/1",
            "seed": p.seed,
            "n": p.n,
            "k": p.k,
            "x": p.x,
            "label": a.label,
            "report": report,
        }))),
        OutputFormat::Csv => {
            let _ = writeln!(out.stdout, "xi,count,empirical,analytic");
            for (j, ((c, e), m)) in
                report.counts.iter().zip(&report.empirical_pmf).zip(&report.analytic_pmf).enumerate()
            {
                let _ = writeln!(out.stdout, "{j},{c},{e:?},{m:?}");
            }
        }
        OutputFormat::Text => {
            let _ = writeln!(out.stdout, "tv_distance: {}", sig6(report.tv_distance));
            let _ = writeln!(out.stdout, "threshold: {}", sig6(report.threshold));
            let _ = writeln!(out.stdout, "accepted: {}", report.acceptance);
            let _ = writeln!(out.stdout, "shell: t = {}, delta = {}", sig6(report.shell.t), sig6(report.shell.delta));
            let _ = writeln!(out.stdout, "hits: {} of {}", report.replicates_used, report.replicates_simulated);
            let _ = writeln!(out.stdout, "{:>4} {:>8} {:>10} {:>10}", "xi", "count", "empirical", "analytic");
            for (j, ((c, e), m)) in
                report.counts.iter().zip(&report.empirical_pmf).zip(&report.analytic_pmf).enumerate()
            {
                let _ = writeln!(out.stdout, "{j:>4} {c:>8} {:>10} {:>10}", sig6(*e), sig6(*m));
            }
        }
    }
    if !report.acceptance {
        return Err(CliError::CheckFailed(format!(
            "total variation {} exceeds threshold {}",
            sig6(report.tv_distance),
            sig6(report.threshold)
        )));
    }
    Ok(())
}

fn density(a: &DensityArgs, out: &mut Output) -> Result<(), CliError> {
    let p = &a.point;
    let model = Model::new(config::load_model(&p.model)?)?;
    let report = density_check(&model, &p.x, p.n, p.k, a.samples, p.seed)?;
    match a.output {
        OutputFormat::Json => out.stdout.push_str(&format::to_json(&json!({
            "schema": "mixent.density-check/1",
            "seed": p.seed,
            "x": p.x,
            "report": report,
        }))),
        OutputFormat::Csv => {
            let _ = writeln!(out.stdout, "n,k,normalization,max_relative_gap,ks_statistic,ks_band,within_band");
            let _ = writeln!(
                out.stdout,
                "{},{},{:?},{:?},{:?},{:?},{}",
                report.n,
                report.k,
                report.normalization,
                report.max_relative_gap,
                report.ks.statistic,
                report.ks.band,
                report.ks.within_band
            );
        }
        OutputFormat::Text => {
            let _ = writeln!(out.stdout, "normalization: {}", sig6(report.normalization));
            let _ = writeln!(out.stdout, "max_relative_gap: {}", sig6(report.max_relative_gap));
            let _ = writeln!(out.stdout, "ks_statistic: {}", sig6(report.ks.statistic));
            let _ = writeln!(out.stdout, "ks_band: {}", sig6(report.ks.band));
            let _ = writeln!(out.stdout, "within_band: {}", report.ks.within_band);
        }
    }
    if !report.ks.within_band {
        return Err(CliError::CheckFailed(format!(
            "KS statistic {} outside band {}",
            sig6(report.ks.statistic),
            sig6(report.ks.band)
        )));
    }
    Ok(())
}

fn rank(a: &DataArgs, out: &mut Output) -> Result<(), CliError> {
    let data = ingest_csv(&a.input, a.label.as_deref())?;
    let ranking = rank_features(&data.dataset, &a.k.config())?;
    let u = a.units;
    match a.output {
        OutputFormat::Json => {
            let rows: Vec<_> = ranking
                .features
                .iter()
                .map(|f| {
                    json!({
                        "rank": f.rank,
                        "feature": data.feature_names[f.feature],
                        "column": f.feature,
                        "mutual_information": u.scale(f.mutual_information),
                        "degenerate": f.degenerate,
                    })
                })
                .collect();
            out.stdout.push_str(&format::to_json(&json!({
                "schema": "mixent.ranking/1",
                "units": u.name(),
                "k": ranking.k_used,
                "labels": label_entries(&data.label_mapping()),
                "features": rows,
            })));
        }
        OutputFormat::Csv => {
            let _ = writeln!(out.stdout, "rank,feature,mutual_information,degenerate,units");
            for f in &ranking.features {
                let _ = writeln!(
                    out.stdout,
                    "{},{},{:?},{},{}",
                    f.rank,
                    data.feature_names[f.feature],
                    u.scale(f.mutual_information),
                    f.degenerate,
                    u.name()
                );
            }
        }
        OutputFormat::Text => {
            for f in &ranking.features {
                let _ = writeln!(
                    out.stdout,
                    "{} {} {}{}",
                    f.rank,
                    data.feature_names[f.feature],
                    sig6(u.scale(f.mutual_information)),
                    if f.degenerate { " (constant)" } else { "" }
                );
            }
            let _ = writeln!(out.stdout, "k: {}", ranking.k_used);
            let _ = writeln!(out.stdout, "labels: {}", mapping_text(&data.label_mapping()));
        }
    }
    for f in ranking.features.iter().filter(|f| f.degenerate) {
        let _ = writeln!(out.stderr, "warning: feature '{}' is constant", data.feature_names[f.feature]);
    }
    Ok(())
}
