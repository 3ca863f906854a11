//! Reproducible command-line runs over the `qvcause` library.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use qvcause::datasets::{
    generate_ci_triplets, generate_dataset, load_cep_directory, load_manifest, read_columns,
    read_pair_file, write_dataset, LabeledPair, SimConfig, SimKind, MANIFEST_FILE,
};
use qvcause::report::{
    binomial_envelope, decision_curve, robustness_study, weighted_accuracy,
    EvaluationRow, RobustnessOptions,
};
use qvcause::seed::{derive_seed, stream};
use qvcause::{
    cond_independence_test, decide, CondIndOptions, Direction, Error, Method, MethodSettings,
    Triplet,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

const TAG_CI_DATA: u64 = 0xC1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Infer,
    Benchmark,
    Condind,
    Robustness,
    Gen,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Clone, Debug, Parser, Serialize)]
#[command(name = "qvcause", version, about = "Causal direction inference from minimal quadratic variation")]
pub struct RunConfig {
    pub command: Command,
    /// Pair file (infer), triplet file (condind), manifest or CEP directory
    /// (benchmark, robustness). Without it a synthetic dataset is generated.
    #[arg(long = "input")]
    pub input_path: Option<PathBuf>,
    /// KDE resamples per score cloud.
    #[arg(long, default_value_t = 300)]
    pub m: usize,
    /// Random bijection pairs; 0 selects the procedure without bijections.
    #[arg(long = "M", default_value_t = 100)]
    #[serde(rename = "M")]
    pub big_m: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 128)]
    pub grid_size: usize,
    #[arg(long, default_value_t = 0.15)]
    pub threshold: f64,
    #[arg(long, default_value_t = 0.01)]
    pub frac_limit: f64,
    /// Map pairs per test (condind, default 1000) or per pair (robustness, default 20).
    #[arg(long)]
    pub bijections: Option<usize>,
    /// Comma-separated: MQV, MQV-Alg1, MQV-Alg2, IGCI, Strawman, RECI.
    #[arg(long, value_delimiter = ',')]
    pub methods: Vec<String>,
    #[arg(long = "format", value_enum, default_value_t = OutputFormat::Json)]
    pub output_format: OutputFormat,
    /// Output file (directory for gen); stdout otherwise.
    #[arg(long = "out")]
    pub output_path: Option<PathBuf>,
    /// Synthetic family: SIM, SIM-c, SIM-ln, SIM-G.
    #[arg(long, default_value = "SIM")]
    pub kind: String,
    /// Number of synthetic pairs (per class for condind).
    #[arg(long, default_value_t = 100)]
    pub pairs: usize,
    /// Observations per synthetic pair.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    #[serde(skip)]
    pub threads: Option<usize>,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        let (code, prefix) = match &err {
            Error::DegenerateInput(_) => (EXIT_INPUT, "degenerate input"),
            Error::UnsupportedDimension(_) => (EXIT_INPUT, "unsupported input"),
            Error::InvalidInput(_) => (EXIT_INPUT, "invalid input"),
            Error::NumericalFailure(_) | Error::FitFailure(_) => (EXIT_INPUT, "numerical failure"),
            _ => (EXIT_IO, "i/o error"),
        };
        let message = match &err {
            Error::DegenerateInput(m) => format!("{prefix}: {m}"),
            _ => format!("{prefix}: {err}"),
        };
        CliError { code, message }
    }
}

fn usage(message: impl Into<String>) -> CliError {
    CliError {
        code: EXIT_INPUT,
        message: message.into(),
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses arguments, runs the command and writes its output; returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(cfg) => cfg,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match execute(&cfg).and_then(|out| emit(&cfg, &out)) {
        Ok(()) => EXIT_OK,
        Err(err) => {
            eprintln!("error: {err}");
            err.code
        }
    }
}

fn emit(cfg: &RunConfig, output: &str) -> CliResult<()> {
    match (&cfg.output_path, cfg.command) {
        (_, Command::Gen) | (None, _) => {
            print!("{output}");
            Ok(())
        }
        (Some(path), _) => std::fs::write(path, output).map_err(|e| CliError {
            code: EXIT_IO,
            message: format!("i/o error: {}: {e}", path.display()),
        }),
    }
}

/// Runs the configured command on a pool of `cfg.threads` workers and
/// returns the rendered report.
pub fn execute(cfg: &RunConfig) -> CliResult<String> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cfg.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| usage(format!("thread pool: {e}")))?;
    pool.install(|| match cfg.command {
        Command::Infer => cmd_infer(cfg),
        Command::Benchmark => cmd_benchmark(cfg),
        Command::Condind => cmd_condind(cfg),
        Command::Robustness => cmd_robustness(cfg),
        Command::Gen => cmd_gen(cfg),
    })
}

fn settings(cfg: &RunConfig) -> MethodSettings {
    MethodSettings {
        resamples: cfg.m,
        bijections: cfg.big_m,
        grid_size: cfg.grid_size,
    }
}

fn json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(Error::from)?;
    s.push('\n');
    Ok(s)
}

fn mqv_method(cfg: &RunConfig) -> Method {
    if cfg.big_m == 0 {
        Method::MqvAlg1
    } else {
        Method::MqvAlg2
    }
}

fn parse_methods(cfg: &RunConfig, default: &[Method]) -> CliResult<Vec<Method>> {
    if cfg.methods.is_empty() {
        return Ok(default.to_vec());
    }
    let mut out = Vec::new();
    for name in &cfg.methods {
        let m = if name.eq_ignore_ascii_case("mqv") {
            mqv_method(cfg)
        } else {
            name.parse::<Method>()?
        };
        if !out.contains(&m) {
            out.push(m);
        }
    }
    Ok(out)
}

fn sim_kind(cfg: &RunConfig) -> CliResult<SimKind> {
    Ok(cfg.kind.parse::<SimKind>()?)
}

fn require_input(cfg: &RunConfig) -> CliResult<&Path> {
    cfg.input_path
        .as_deref()
        .ok_or_else(|| usage(format!("{:?} needs --input", cfg.command)))
}

#[derive(Serialize)]
struct InferOutput<'a> {
    config: &'a RunConfig,
    p_x: f64,
    p_y: f64,
    direction: Direction,
    confidence: f64,
    m: usize,
    #[serde(rename = "M")]
    bijections: usize,
    seed: u64,
    n: usize,
    elapsed_ms: u64,
}

pub fn cmd_infer(cfg: &RunConfig) -> CliResult<String> {
    let pair = read_pair_file(require_input(cfg)?)?;
    let start = Instant::now();
    let d = decide(mqv_method(cfg), &pair, &settings(cfg), cfg.seed)?;
    let elapsed_ms = start.elapsed().as_millis() as u64;
    let p_x = d.p_x.expect("MQV decisions carry p_x");
    let out = InferOutput {
        config: cfg,
        p_x,
        p_y: 1.0 - p_x,
        direction: d.direction,
        confidence: d.confidence,
        m: cfg.m,
        bijections: cfg.big_m,
        seed: cfg.seed,
        n: pair.len(),
        elapsed_ms,
    };
    match cfg.output_format {
        OutputFormat::Json => json(&out),
        OutputFormat::Csv => Ok(format!(
            "p_x,p_y,direction,confidence,m,M,seed,n,elapsed_ms\n{},{},{},{},{},{},{},{},{}\n",
            out.p_x, out.p_y, out.direction, out.confidence, out.m, out.bijections, out.seed, out.n, out.elapsed_ms
        )),
    }
}

#[derive(Serialize)]
struct DatasetInfo {
    source: String,
    pairs: usize,
}

/// Manifest file, directory with a manifest, CEP directory, or a freshly
/// generated synthetic set.
fn load_pairs(cfg: &RunConfig) -> CliResult<(DatasetInfo, Vec<LabeledPair>)> {
    let (source, pairs) = match &cfg.input_path {
        Some(path) if path.is_dir() && path.join(MANIFEST_FILE).is_file() => {
            let (m, pairs) = load_manifest(&path.join(MANIFEST_FILE))?;
            (m.kind, pairs)
        }
        Some(path) if path.is_dir() => (path.display().to_string(), load_cep_directory(path)?),
        Some(path) => {
            let (m, pairs) = load_manifest(path)?;
            (m.kind, pairs)
        }
        None => {
            let kind = sim_kind(cfg)?;
            let mut sim = SimConfig::new(kind, cfg.pairs, cfg.seed);
            sim.n = cfg.n;
            (kind.to_string(), generate_dataset(&sim)?)
        }
    };
    if pairs.is_empty() {
        return Err(usage("dataset contains no pairs"));
    }
    Ok((
        DatasetInfo {
            source,
            pairs: pairs.len(),
        },
        pairs,
    ))
}

#[derive(Serialize)]
struct PairRecord {
    id: String,
    method: Method,
    truth: Direction,
    direction: Direction,
    correct: bool,
    confidence: f64,
    weight: f64,
    p_x: Option<f64>,
}

#[derive(Serialize)]
struct CurvePoint {
    k: usize,
    accuracy: f64,
    envelope: f64,
}

#[derive(Serialize)]
struct MethodSummary {
    method: Method,
    evaluated: usize,
    failed: usize,
    weighted_accuracy: f64,
    top_half_accuracy: f64,
    curve: Vec<CurvePoint>,
}

#[derive(Serialize)]
struct BenchmarkOutput<'a> {
    config: &'a RunConfig,
    dataset: DatasetInfo,
    methods: Vec<MethodSummary>,
    records: Vec<PairRecord>,
}

pub fn cmd_benchmark(cfg: &RunConfig) -> CliResult<String> {
    let methods = parse_methods(cfg, &[mqv_method(cfg)])?;
    let (dataset, pairs) = load_pairs(cfg)?;
    let settings = settings(cfg);

    let mut summaries = Vec::new();
    let mut records = Vec::new();
    for &method in &methods {
        let decisions: Vec<_> = pairs
            .par_iter()
            .enumerate()
            .map(|(i, p)| decide(method, &p.pair, &settings, derive_seed(cfg.seed, &[i as u64])))
            .collect();
        let mut rows = Vec::new();
        let mut failed = 0;
        for (p, d) in pairs.iter().zip(decisions) {
            match d {
                Ok(d) => {
                    let correct = d.direction == p.truth;
                    rows.push(EvaluationRow {
                        id: p.id.clone(),
                        method: method.to_string(),
                        correct,
                        confidence: d.confidence,
                        weight: p.weight,
                    });
                    records.push(PairRecord {
                        id: p.id.clone(),
                        method,
                        truth: p.truth,
                        direction: d.direction,
                        correct,
                        confidence: d.confidence,
                        weight: p.weight,
                        p_x: d.p_x,
                    });
                }
                Err(err) => {
                    log::warn!("{method} on pair {}: {err}", p.id);
                    failed += 1;
                }
            }
        }
        if rows.is_empty() {
            log::error!("{method} failed on every pair");
            continue;
        }
        if failed > 0 {
            log::warn!("{method}: {failed} pair(s) excluded");
        }
        let curve = decision_curve(&rows)?;
        let envelope = binomial_envelope(rows.len(), 0.5, 0.975);
        let top_half = rows.len().div_ceil(2);
        summaries.push(MethodSummary {
            method,
            evaluated: rows.len(),
            failed,
            weighted_accuracy: weighted_accuracy(&rows)?,
            top_half_accuracy: curve[top_half - 1].1,
            curve: curve
                .iter()
                .zip(&envelope)
                .map(|(&(k, accuracy), &(_, env))| CurvePoint {
                    k,
                    accuracy,
                    envelope: env,
                })
                .collect(),
        });
    }
    if summaries.is_empty() {
        return Err(usage("every selected method failed on every pair"));
    }
    let out = BenchmarkOutput {
        config: cfg,
        dataset,
        methods: summaries,
        records,
    };
    match cfg.output_format {
        OutputFormat::Json => json(&out),
        OutputFormat::Csv => {
            let mut s = String::from("method,k,accuracy,envelope\n");
            for m in &out.methods {
                for c in &m.curve {
                    writeln!(s, "{},{},{},{}", m.method, c.k, c.accuracy, c.envelope).unwrap();
                }
            }
            Ok(s)
        }
    }
}

#[derive(Serialize)]
struct TripletReport {
    id: String,
    /// Known ground truth for generated triplets.
    truth_independent: Option<bool>,
    independent: bool,
    exceed_fraction: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    values: Option<Vec<f64>>,
}

#[derive(Serialize, Default)]
struct Confusion {
    /// Independent triplets declared independent.
    true_positives: usize,
    false_negatives: usize,
    /// Dependent triplets declared dependent.
    true_negatives: usize,
    false_positives: usize,
}

#[derive(Serialize)]
struct CondIndOutput<'a> {
    config: &'a RunConfig,
    results: Vec<TripletReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    confusion: Option<Confusion>,
}

pub fn cmd_condind(cfg: &RunConfig) -> CliResult<String> {
    let opts = CondIndOptions {
        threshold: cfg.threshold,
        frac_limit: cfg.frac_limit,
        bijections: cfg.bijections.unwrap_or(qvcause::condind::DEFAULT_CI_BIJECTIONS),
        grid_size: cfg.grid_size,
    };
    let labeled: Vec<(String, Option<bool>, Triplet)> = match &cfg.input_path {
        Some(path) => {
            let t = Triplet::from_columns(read_columns(path)?)?;
            vec![(path.display().to_string(), None, t)]
        }
        None => {
            let mut out = Vec::new();
            for (class, with_edge) in [(0u64, false), (1, true)] {
                let mut rng = stream(cfg.seed, &[TAG_CI_DATA, class]);
                let label = if with_edge { "edge" } else { "noedge" };
                for (i, t) in generate_ci_triplets(cfg.n, cfg.pairs, with_edge, &mut rng)?
                    .into_iter()
                    .enumerate()
                {
                    out.push((format!("{label}-{:04}", i + 1), Some(!with_edge), t));
                }
            }
            out
        }
    };
    let single = labeled.len() == 1;
    let results: Vec<TripletReport> = labeled
        .par_iter()
        .enumerate()
        .map(|(i, (id, truth, t))| {
            let r = cond_independence_test(t, &opts, derive_seed(cfg.seed, &[i as u64]))?;
            Ok(TripletReport {
                id: id.clone(),
                truth_independent: *truth,
                independent: r.independent,
                exceed_fraction: r.exceed_fraction,
                values: single.then_some(r.values),
            })
        })
        .collect::<Result<_, Error>>()?;

    let confusion = results.iter().any(|r| r.truth_independent.is_some()).then(|| {
        let mut c = Confusion::default();
        for r in &results {
            match (r.truth_independent, r.independent) {
                (Some(true), true) => c.true_positives += 1,
                (Some(true), false) => c.false_negatives += 1,
                (Some(false), false) => c.true_negatives += 1,
                (Some(false), true) => c.false_positives += 1,
                (None, _) => {}
            }
        }
        c
    });
    let out = CondIndOutput {
        config: cfg,
        results,
        confusion,
    };
    match cfg.output_format {
        OutputFormat::Json => json(&out),
        OutputFormat::Csv => {
            let mut s = String::from("id,truth_independent,independent,exceed_fraction\n");
            for r in &out.results {
                let truth = r.truth_independent.map(|t| t.to_string()).unwrap_or_default();
                writeln!(s, "{},{truth},{},{}", r.id, r.independent, r.exceed_fraction).unwrap();
            }
            Ok(s)
        }
    }
}

#[derive(Serialize)]
struct RobustnessOutput<'a> {
    config: &'a RunConfig,
    dataset: DatasetInfo,
    mean_entropy: BTreeMap<String, f64>,
    rows: Vec<qvcause::report::RobustnessRow>,
}

pub fn cmd_robustness(cfg: &RunConfig) -> CliResult<String> {
    let methods = parse_methods(
        cfg,
        &[Method::MqvAlg1, Method::Igci, Method::Strawman, Method::Reci],
    )?;
    let (dataset, pairs) = load_pairs(cfg)?;
    let opts = RobustnessOptions {
        bijections: cfg.bijections.unwrap_or(20),
        settings: settings(cfg),
        identical_bijections: false,
    };
    let table = robustness_study(&pairs, &methods, &opts, cfg.seed)?;
    match cfg.output_format {
        OutputFormat::Json => json(&RobustnessOutput {
            config: cfg,
            mean_entropy: qvcause::report::entropy_by_method(&table),
            dataset,
            rows: table.rows,
        }),
        OutputFormat::Csv => {
            let mut s = String::from("method,dataset,mean_entropy\n");
            for r in &table.rows {
                writeln!(s, "{},{},{}", r.method, dataset.source, r.mean_entropy).unwrap();
            }
            Ok(s)
        }
    }
}

pub fn cmd_gen(cfg: &RunConfig) -> CliResult<String> {
    let dir = cfg
        .output_path
        .as_deref()
        .ok_or_else(|| usage("gen needs --out DIR"))?;
    let kind = sim_kind(cfg)?;
    let mut sim = SimConfig::new(kind, cfg.pairs, cfg.seed);
    sim.n = cfg.n;
    let pairs = generate_dataset(&sim)?;
    write_dataset(dir, kind.as_str(), cfg.seed, &pairs)?;
    Ok(format!(
        "wrote {} pairs to {}\n",
        pairs.len(),
        dir.join(MANIFEST_FILE).display()
    ))
}
