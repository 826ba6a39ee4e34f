//! Command line front end: argument parsing, data ingestion or generation,
//! and line-delimited JSON output.
//!
//! Every confirmed motif is written as one `{"type":"motif",...}` line the
//! moment its dimensionality is confirmed; the run ends with a single
//! `{"type":"summary",...}` line. [`RunReport::parse`] reads such a stream
//! back.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use mdmotif_core::{
    exhaustive_scan, generate_planted, load_csv, BoundKind, CsvOptions, DimRange, Discovery, DiscoveryParams,
    MotifResult, PlantedSpec, TimeSeries,
};
use serde::{Deserialize, Serialize};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_PARTIAL: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundArg {
    Tensored,
    Independent,
    HalfPrefix,
}

impl From<BoundArg> for BoundKind {
    fn from(b: BoundArg) -> Self {
        match b {
            BoundArg::Tensored => BoundKind::Tensored,
            BoundArg::Independent => BoundKind::Independent,
            BoundArg::HalfPrefix => BoundKind::HalfPrefix,
        }
    }
}

/// Parameters of a synthetic planted-motif dataset, written
/// `n=2000,D=5,d=2,w=300[,noise=0.01]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerateSpec {
    pub n: usize,
    #[serde(rename = "D")]
    pub dims: usize,
    pub d: usize,
    pub w: usize,
    pub noise: f64,
}

impl FromStr for GenerateSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (mut n, mut dims, mut d, mut w) = (None, None, None, None);
        let mut noise = PlantedSpec::new(1, 1, 1, 1).noise_sigma;
        for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| format!("expected key=value, found `{item}`"))?;
            let int = || value.parse::<usize>().map_err(|_| format!("`{value}` is not a count for `{key}`"));
            match key.trim() {
                "n" => n = Some(int()?),
                "D" => dims = Some(int()?),
                "d" => d = Some(int()?),
                "w" => w = Some(int()?),
                "noise" => {
                    noise = value
                        .parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite() && *v >= 0.0)
                        .ok_or_else(|| format!("`{value}` is not a valid noise level"))?
                }
                other => return Err(format!("unknown key `{other}` (expected n, D, d, w, noise)")),
            }
        }
        let missing = |name: &str| format!("missing `{name}`");
        Ok(Self {
            n: n.ok_or_else(|| missing("n"))?,
            dims: dims.ok_or_else(|| missing("D"))?,
            d: d.ok_or_else(|| missing("d"))?,
            w: w.ok_or_else(|| missing("w"))?,
            noise,
        })
    }
}

fn parse_dims(s: &str) -> Result<DimRange, String> {
    let bad = || format!("`{s}` is neither a dimensionality nor a range like 2..5");
    match s.split_once("..") {
        Some((low, high)) => {
            let low = low.trim().parse().map_err(|_| bad())?;
            let high = high.trim().parse().map_err(|_| bad())?;
            Ok(DimRange::new(low, high))
        }
        None => s.trim().parse().map(DimRange::single).map_err(|_| bad()),
    }
}

fn parse_delimiter(s: &str) -> Result<u8, String> {
    match s {
        "\\t" | "tab" => Ok(b'\t'),
        _ if s.len() == 1 && s.is_ascii() => Ok(s.as_bytes()[0]),
        _ => Err(format!("delimiter must be a single ASCII character, found `{s}`")),
    }
}

#[derive(Parser, Clone, Debug)]
#[command(name = "mdmotif", version, about = "Top-k subdimensional motif discovery")]
pub struct Cli {
    /// CSV file with one row per time step and one column per dimension.
    #[arg(long, value_name = "PATH", conflicts_with = "generate", required_unless_present = "generate")]
    pub input: Option<PathBuf>,
    /// Generate a planted-motif dataset, e.g. `n=2000,D=5,d=2,w=300,noise=0.01`.
    #[arg(long, value_name = "SPEC")]
    pub generate: Option<GenerateSpec>,
    /// Subsequence length (defaults to `w` of --generate).
    #[arg(long, value_name = "W")]
    pub window: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Dimensionality `3` or range `2..5` (defaults to `d` of --generate).
    #[arg(long, value_name = "D_SPEC", value_parser = parse_dims)]
    pub dims: Option<DimRange>,
    #[arg(long, default_value_t = 0.01)]
    pub delta: f64,
    /// Maximum hash concatenations K.
    #[arg(long, default_value_t = 8)]
    pub max_k: usize,
    /// Maximum repetitions L (rounded down to a perfect square).
    #[arg(long, default_value_t = 200)]
    pub max_l: usize,
    /// Quantization width; estimated from the data when omitted.
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Seed for --generate (defaults to --seed).
    #[arg(long)]
    pub data_seed: Option<u64>,
    /// Memory budget for the hash index, in bytes.
    #[arg(long, value_name = "BYTES")]
    pub memory: Option<u64>,
    /// Split δ evenly across the k motifs.
    #[arg(long)]
    pub union_bound: bool,
    /// Skip hashing and evaluate every pair.
    #[arg(long)]
    pub exact: bool,
    /// Exclusion zone for trivial matches (defaults to window/2).
    #[arg(long)]
    pub exclusion: Option<usize>,
    #[arg(long, value_enum, default_value_t = BoundArg::Tensored)]
    pub bound: BoundArg,
    /// Write records to this file instead of standard output.
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
    /// The CSV input has a header row with dimension names.
    #[arg(long)]
    pub header: bool,
    #[arg(long, default_value = ",", value_parser = parse_delimiter)]
    pub delimiter: u8,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamsEcho {
    pub input: Option<PathBuf>,
    pub generate: Option<GenerateSpec>,
    pub data_seed: Option<u64>,
    pub window: usize,
    pub k: usize,
    pub dims_low: usize,
    pub dims_high: usize,
    pub delta: f64,
    pub max_k: usize,
    pub max_l: usize,
    pub r: Option<f64>,
    pub seed: u64,
    pub memory: Option<u64>,
    pub union_bound: bool,
    pub exact: bool,
    pub exclusion: usize,
    pub bound: BoundArg,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MotifRecord {
    pub d: usize,
    pub rank: usize,
    pub a: usize,
    pub b: usize,
    pub dims: Vec<usize>,
    pub dist_d: f64,
    pub dist_d_max: f64,
    pub per_dim: Vec<f64>,
    pub failure_bound: f64,
    /// Wall time from the start of the run until confirmation.
    pub confirmed_ms: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopRecord {
    pub prefix: usize,
    pub repetition: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterRecord {
    pub distance_computations: u64,
    pub hash_comparisons: u64,
    pub candidates: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionSummary {
    pub d: usize,
    pub motifs: usize,
    pub queue_max: Option<f64>,
    pub stop: Option<StopRecord>,
    pub fallback_used: bool,
    pub partial: bool,
    pub counters: CounterRecord,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub params: ParamsEcho,
    pub n: usize,
    #[serde(rename = "D")]
    pub series_dims: usize,
    #[serde(rename = "K")]
    pub concatenations: Option<usize>,
    #[serde(rename = "L")]
    pub repetitions: Option<usize>,
    pub delta: f64,
    pub r: Option<f64>,
    pub seed: u64,
    pub planted: Option<(usize, usize)>,
    pub build_time_ms: f64,
    pub elapsed_ms: f64,
    pub counters: CounterRecord,
    pub confirmation_order: Vec<usize>,
    pub dimensions: Vec<DimensionSummary>,
    pub fallback_used: bool,
    pub partial: bool,
}

/// One output line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Record {
    Motif(MotifRecord),
    Summary(Box<Summary>),
}

/// Everything a run prints, in emission order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub motifs: Vec<MotifRecord>,
    pub summary: Summary,
}

impl RunReport {
    /// Parses a line-delimited record stream.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut motifs = Vec::new();
        let mut summary = None;
        for (no, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let record: Record = serde_json::from_str(line).map_err(|e| format!("line {}: {e}", no + 1))?;
            match record {
                Record::Motif(m) if summary.is_none() => motifs.push(m),
                Record::Motif(_) => return Err(format!("line {}: motif after summary", no + 1)),
                Record::Summary(s) if summary.is_none() => summary = Some(*s),
                Record::Summary(_) => return Err(format!("line {}: second summary", no + 1)),
            }
        }
        Ok(Self {
            motifs,
            summary: summary.ok_or("no summary record")?,
        })
    }

    /// Motifs of one dimensionality, best first.
    pub fn motifs_for(&self, d: usize) -> Vec<&MotifRecord> {
        self.motifs.iter().filter(|m| m.d == d).collect()
    }

    pub fn exit_code(&self) -> i32 {
        if self.summary.partial {
            EXIT_PARTIAL
        } else {
            EXIT_OK
        }
    }
}

/// Failure before or during a run.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(mdmotif_core::Error),
    Output(io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Output(e) => write!(f, "cannot write output: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<mdmotif_core::Error> for CliError {
    fn from(e: mdmotif_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Output(e)
    }
}

fn counter_record(c: &mdmotif_core::Counters) -> CounterRecord {
    CounterRecord {
        distance_computations: c.distance_computations,
        hash_comparisons: c.hash_comparisons,
        candidates: c.candidates,
    }
}

fn millis(d: std::time::Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

struct Emitter<'w> {
    out: &'w mut (dyn Write + Send),
    start: Instant,
    motifs: Vec<MotifRecord>,
    failed: Option<io::Error>,
}

impl Emitter<'_> {
    fn emit(&mut self, record: &Record) {
        if self.failed.is_some() {
            return;
        }
        let line = serde_json::to_string(record).expect("records serialize");
        if let Err(e) = writeln!(self.out, "{line}").and_then(|_| self.out.flush()) {
            self.failed = Some(e);
        }
    }

    fn confirm(&mut self, result: &MotifResult) {
        let confirmed_ms = millis(self.start.elapsed());
        for (rank, p) in result.motifs.iter().enumerate() {
            let record = MotifRecord {
                d: result.d,
                rank: rank + 1,
                a: p.a,
                b: p.b,
                dims: p.dims.clone(),
                dist_d: p.dist_d,
                dist_d_max: p.dist_d_max,
                per_dim: p.per_dim.clone(),
                failure_bound: p.failure_bound,
                confirmed_ms,
            };
            self.emit(&Record::Motif(record.clone()));
            self.motifs.push(record);
        }
    }
}

fn load_series(cli: &Cli) -> Result<(TimeSeries, Option<(usize, usize)>), CliError> {
    if let Some(path) = &cli.input {
        let options = CsvOptions {
            has_header: cli.header,
            delimiter: cli.delimiter,
        };
        return Ok((load_csv(path, options)?, None));
    }
    let spec = cli
        .generate
        .ok_or_else(|| CliError::Usage("one of --input or --generate is required".into()))?;
    let planted_spec = PlantedSpec::new(spec.n, spec.dims, spec.d, spec.w).with_noise(spec.noise);
    let planted = generate_planted(&planted_spec, cli.data_seed.unwrap_or(cli.seed))?;
    Ok((planted.series, Some(planted.positions)))
}

fn discovery_params(cli: &Cli, ts: &TimeSeries) -> Result<DiscoveryParams, CliError> {
    let window = cli
        .window
        .or(cli.generate.map(|g| g.w))
        .ok_or_else(|| CliError::Usage("--window is required with --input".into()))?;
    let dims = cli
        .dims
        .or(cli.generate.map(|g| DimRange::single(g.d)))
        .ok_or_else(|| CliError::Usage("--dims is required with --input".into()))?;
    if dims.high > ts.dims() {
        return Err(CliError::Usage(format!(
            "--dims {}..{} exceeds the {} dimensions of the series",
            dims.low,
            dims.high,
            ts.dims()
        )));
    }
    let mut params = DiscoveryParams::new(window, cli.k, dims.low)
        .with_dims(dims)
        .with_delta(cli.delta)
        .with_seed(cli.seed)
        .with_repetitions(cli.max_k, cli.max_l);
    params.r = cli.r;
    params.memory_limit = cli.memory;
    params.union_bound = cli.union_bound;
    params.bound = cli.bound.into();
    if let Some(e) = cli.exclusion {
        params.exclusion = e;
    }
    params.validate(ts.dims(), ts.len())?;
    Ok(params)
}

/// Runs a parsed command line, streaming records to `out` (or to
/// `--output` when given).
pub fn execute(cli: &Cli, out: &mut (dyn Write + Send)) -> Result<RunReport, CliError> {
    match cli.threads {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start {threads} threads: {e}")))?
            .install(|| execute_here(cli, out)),
        None => execute_here(cli, out),
    }
}

fn execute_here(cli: &Cli, out: &mut (dyn Write + Send)) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let (ts, planted) = load_series(cli)?;
    let params = discovery_params(cli, &ts)?;

    let mut file;
    let out: &mut (dyn Write + Send) = match &cli.output {
        Some(path) => {
            file = BufWriter::new(File::create(path)?);
            &mut file
        }
        None => out,
    };
    let mut emitter = Emitter {
        out,
        start,
        motifs: Vec::new(),
        failed: None,
    };

    let (outcome, build_time, geometry) = if cli.exact {
        let outcome = exhaustive_scan(&ts, &params)?;
        for result in &outcome.results {
            emitter.confirm(result);
        }
        (outcome, std::time::Duration::ZERO, None)
    } else {
        let discovery = Discovery::prepare(&ts, &params)?;
        let outcome = discovery.run(|result| emitter.confirm(result));
        (outcome, discovery.build_time(), Some(discovery.geometry()))
    };

    let dimensions: Vec<DimensionSummary> = outcome
        .results
        .iter()
        .map(|r| DimensionSummary {
            d: r.d,
            motifs: r.motifs.len(),
            queue_max: r.motifs.last().map(|p| p.dist_d),
            stop: r.stop.map(|s| StopRecord {
                prefix: s.prefix,
                repetition: s.repetition,
            }),
            fallback_used: r.fallback_used,
            partial: r.partial,
            counters: counter_record(&r.counters),
        })
        .collect();
    let summary = Summary {
        params: ParamsEcho {
            input: cli.input.clone(),
            generate: cli.generate,
            data_seed: cli.generate.map(|_| cli.data_seed.unwrap_or(cli.seed)),
            window: params.window,
            k: params.k,
            dims_low: params.dims.low,
            dims_high: params.dims.high,
            delta: params.delta,
            max_k: params.max_k,
            max_l: params.max_l,
            r: params.r,
            seed: params.seed,
            memory: params.memory_limit,
            union_bound: params.union_bound,
            exact: cli.exact,
            exclusion: params.exclusion,
            bound: cli.bound,
        },
        n: ts.len(),
        series_dims: ts.dims(),
        concatenations: geometry.map(|g| g.k),
        repetitions: geometry.map(|g| g.l),
        delta: params.delta,
        r: geometry.map(|g| g.r),
        seed: params.seed,
        planted,
        build_time_ms: millis(build_time),
        elapsed_ms: millis(start.elapsed()),
        counters: counter_record(&outcome.counters),
        confirmation_order: outcome.confirmation_order.clone(),
        fallback_used: dimensions.iter().any(|d| d.fallback_used),
        partial: dimensions.iter().any(|d| d.partial),
        dimensions,
    };
    emitter.emit(&Record::Summary(Box::new(summary.clone())));
    if let Some(e) = emitter.failed {
        return Err(CliError::Output(e));
    }
    Ok(RunReport {
        motifs: emitter.motifs,
        summary,
    })
}

/// Parses `args` (including the program name), runs, and returns the exit
/// code: 0 on success, 2 when fewer than k motifs exist, 1 on bad input.
pub fn run_cli<I, T>(args: I, out: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(report) => report.exit_code(),
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}
