//! Benchmark harness.
//!
//! Each run times only the library call: input generation, the per-run copy of
//! the input and verification are outside the clock. A configuration runs
//! `reps` times and reports the median of every run after the first.
//!
//! CSV columns (fixed):
//!
//! * bench rows: `algo,dist,param,n,key_bits,threads,seed,median_seconds,depth_max,verified`
//! * grid rows: the bench columns followed by `normalized,error`
//!
//! `normalized` is `median_seconds` divided by the fastest median among grid
//! rows with the same `dist,param,n`.

use std::fmt;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use semisort_core::key::KeyBits;
use semisort_core::oracle::{multiset_equal, oracle_collect_reduce, validate_semisort};
use semisort_core::{
    collect_reduce_with_metrics, semisort_with_metrics, Count, IntKey, Metrics, Mode, Record, ReduceFn, TuningParams,
};

use crate::datagen::{generate, DistributionSpec, Family};
use crate::format::{decode_header, decode_records, read_file};
use crate::word::Word;
use crate::{with_threads, Error, Rayon, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algo {
    /// Semisort with hashed keys, equality only.
    Eq,
    /// Semisort with hashed keys, sorted base cases.
    Lt,
    /// Semisort with identity-hashed integer keys.
    IntEq,
    IntLt,
    Histogram,
    CollectReduce,
}

impl Algo {
    pub const ALL: [Algo; 6] = [Algo::Eq, Algo::Lt, Algo::IntEq, Algo::IntLt, Algo::Histogram, Algo::CollectReduce];

    pub fn name(self) -> &'static str {
        match self {
            Algo::Eq => "eq",
            Algo::Lt => "lt",
            Algo::IntEq => "int-eq",
            Algo::IntLt => "int-lt",
            Algo::Histogram => "histogram",
            Algo::CollectReduce => "collect-reduce",
        }
    }

    fn sort_setup(self) -> Option<(IntKey, Mode)> {
        match self {
            Algo::Eq => Some((IntKey::HASHED, Mode::Eq)),
            Algo::Lt => Some((IntKey::HASHED, Mode::Lt)),
            Algo::IntEq => Some((IntKey::IDENTITY, Mode::Eq)),
            Algo::IntLt => Some((IntKey::IDENTITY, Mode::Lt)),
            Algo::Histogram | Algo::CollectReduce => None,
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algo::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm `{s}` (expected eq, lt, int-eq, int-lt, histogram or collect-reduce)")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Source {
    Generated(DistributionSpec),
    /// Binary record dump; the value width must be 0 or the key width.
    File(PathBuf),
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub algo: Algo,
    pub source: Source,
    /// Key width for generated input: 32, 64 or 128. Ignored for files.
    pub key_bits: u32,
    pub threads: usize,
    pub reps: usize,
    pub verify: bool,
    pub params: TuningParams,
}

impl BenchConfig {
    pub fn new(algo: Algo, spec: DistributionSpec) -> Self {
        Self {
            algo,
            source: Source::Generated(spec),
            key_bits: 64,
            threads: 1,
            reps: 4,
            verify: false,
            params: TuningParams::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::Config("reps must be >= 1".into()));
        }
        if self.threads == 0 {
            return Err(Error::Config("threads must be >= 1".into()));
        }
        if !matches!(self.key_bits, 32 | 64 | 128) {
            return Err(Error::Config(format!("key width must be 32, 64 or 128, got {}", self.key_bits)));
        }
        if let Source::Generated(spec) = &self.source {
            spec.family.validate()?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub algo: String,
    pub dist: String,
    /// Distribution parameter; empty for file input.
    pub param: Option<f64>,
    pub n: usize,
    pub key_bits: u32,
    pub threads: usize,
    /// Generation seed, or the tuning seed for file input.
    pub seed: u64,
    pub median_seconds: f64,
    pub depth_max: usize,
    /// Empty when verification was not requested.
    pub verified: Option<bool>,
}

#[derive(Clone, Debug)]
pub struct BenchOutcome {
    pub row: BenchRow,
    /// First problem reported by the oracle, if verification failed.
    pub violation: Option<String>,
}

/// Median of `times[1..]`, or of `times` when there is a single run.
///
/// Panics on an empty slice.
pub fn median_of_tail(times: &[f64]) -> f64 {
    assert!(!times.is_empty(), "no runs");
    let mut tail: Vec<f64> = if times.len() > 1 { times[1..].to_vec() } else { times.to_vec() };
    tail.sort_by(f64::total_cmp);
    let m = tail.len() / 2;
    if tail.len() % 2 == 1 {
        tail[m]
    } else {
        (tail[m - 1] + tail[m]) / 2.0
    }
}

/// Run one configuration inside its own pool of `cfg.threads` workers.
pub fn run_bench(cfg: &BenchConfig) -> Result<BenchOutcome> {
    cfg.validate()?;
    with_threads(cfg.threads, || match &cfg.source {
        Source::Generated(spec) => match cfg.key_bits {
            32 => measure(cfg, generate::<u32, u32>(spec)?),
            64 => measure(cfg, generate::<u64, u64>(spec)?),
            _ => measure(cfg, generate::<u128, u128>(spec)?),
        },
        Source::File(path) => {
            let bytes = read_file(path)?;
            let h = decode_header(&bytes)?;
            match (h.key_bits, h.value_bits) {
                (32, 0) => measure(cfg, widen(decode_records::<u32, ()>(&bytes)?)),
                (32, 32) => measure(cfg, decode_records::<u32, u32>(&bytes)?),
                (64, 0) => measure(cfg, widen(decode_records::<u64, ()>(&bytes)?)),
                (64, 64) => measure(cfg, decode_records::<u64, u64>(&bytes)?),
                (128, 0) => measure(cfg, widen(decode_records::<u128, ()>(&bytes)?)),
                (128, 128) => measure(cfg, decode_records::<u128, u128>(&bytes)?),
                (k, v) => Err(Error::Format(format!(
                    "{}: benchmark needs value width 0 or {k}, found {v}",
                    path.display()
                ))),
            }
        }
    })?
}

fn widen<K: Word>(records: Vec<Record<K, ()>>) -> Vec<Record<K, K>> {
    records.into_iter().map(|r| Record::new(r.key, K::from_u64(0))).collect()
}

fn measure<K: Word + KeyBits>(cfg: &BenchConfig, input: Vec<Record<K, K>>) -> Result<BenchOutcome> {
    let mut times = Vec::with_capacity(cfg.reps);
    let mut depth_max = 0;
    let mut violation = None;
    let last = cfg.reps - 1;
    match cfg.algo.sort_setup() {
        Some((adapter, mode)) => {
            let mut work = input.clone();
            for rep in 0..cfg.reps {
                work.copy_from_slice(&input);
                let metrics = Metrics::new();
                let t = Instant::now();
                semisort_with_metrics(&Rayon, &mut work, &adapter, mode, &cfg.params, &metrics)?;
                times.push(t.elapsed().as_secs_f64());
                depth_max = depth_max.max(metrics.report().max_depth);
                if cfg.verify && rep == last {
                    let report = validate_semisort(&input, &work, &adapter);
                    if let Some((at, what)) = report.first_violation {
                        violation = Some(format!("output index {at}: {what}"));
                    }
                }
            }
        }
        None => {
            let adapter = IntKey::HASHED;
            let sum = ReduceFn::new(0u64, |r: &Record<K, K>| r.value.to_u64(), |a: &mut u64, b| *a = a.wrapping_add(b));
            for rep in 0..cfg.reps {
                let metrics = Metrics::new();
                let check = cfg.verify && rep == last;
                let ok = if cfg.algo == Algo::Histogram {
                    let t = Instant::now();
                    let out = collect_reduce_with_metrics(&Rayon, &input, &adapter, &Count, &cfg.params, &metrics)?;
                    times.push(t.elapsed().as_secs_f64());
                    !check || multiset_equal::<Record<K, K>, _, _>(&out, &oracle_collect_reduce(&input, &adapter, &Count), &adapter)
                } else {
                    let t = Instant::now();
                    let out = collect_reduce_with_metrics(&Rayon, &input, &adapter, &sum, &cfg.params, &metrics)?;
                    times.push(t.elapsed().as_secs_f64());
                    !check || multiset_equal::<Record<K, K>, _, _>(&out, &oracle_collect_reduce(&input, &adapter, &sum), &adapter)
                };
                depth_max = depth_max.max(metrics.report().max_depth);
                if !ok {
                    violation = Some("aggregates differ from the sequential reference".into());
                }
            }
        }
    }
    let (dist, param, seed) = match &cfg.source {
        Source::Generated(spec) => (spec.family.name().to_string(), Some(spec.family.param()), spec.seed),
        Source::File(path) => (format!("file:{}", path.display()), None, cfg.params.seed),
    };
    let row = BenchRow {
        algo: cfg.algo.name().into(),
        dist,
        param,
        n: input.len(),
        key_bits: <K as Word>::BITS,
        threads: cfg.threads,
        seed,
        median_seconds: median_of_tail(&times),
        depth_max,
        verified: cfg.verify.then_some(violation.is_none()),
    };
    Ok(BenchOutcome { row, violation })
}

pub fn write_bench_rows<W: Write>(out: W, rows: &[BenchRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(BENCH_COLUMNS)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}

pub fn read_bench_rows<R: Read>(input: R) -> Result<Vec<BenchRow>> {
    csv::Reader::from_reader(input).deserialize().map(|r| r.map_err(Error::from)).collect()
}

pub const BENCH_COLUMNS: [&str; 10] =
    ["algo", "dist", "param", "n", "key_bits", "threads", "seed", "median_seconds", "depth_max", "verified"];

pub const GRID_COLUMNS: [&str; 12] = [
    "algo",
    "dist",
    "param",
    "n",
    "key_bits",
    "threads",
    "seed",
    "median_seconds",
    "depth_max",
    "verified",
    "normalized",
    "error",
];

/// Settings shared by every grid cell.
#[derive(Clone, Debug)]
pub struct GridOptions {
    pub key_bits: u32,
    pub threads: usize,
    pub reps: usize,
    pub verify: bool,
    pub seed: u64,
    pub params: TuningParams,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self { key_bits: 64, threads: 1, reps: 4, verify: false, seed: 1, params: TuningParams::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub algo: String,
    pub dist: String,
    pub param: Option<f64>,
    pub n: Option<usize>,
    pub key_bits: u32,
    pub threads: usize,
    pub seed: u64,
    pub median_seconds: Option<f64>,
    pub depth_max: Option<usize>,
    pub verified: Option<bool>,
    pub normalized: Option<f64>,
    /// Empty on success.
    pub error: String,
}

/// Run every `(dist, param, n, algo)` cell of a grid file (CSV with that
/// header). A failing cell becomes a row with `error` set; the remaining
/// cells still run.
pub fn run_grid<R: Read>(grid: R, opts: &GridOptions) -> Result<Vec<GridRow>> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(grid);
    let header = reader.headers()?.clone();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Format(format!("grid file has no `{name}` column")))
    };
    let cols = [col("dist")?, col("param")?, col("n")?, col("algo")?];

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let field = |i: usize| record.get(cols[i]).unwrap_or("");
        let mut row = GridRow {
            algo: field(3).into(),
            dist: field(0).into(),
            param: field(1).parse().ok(),
            n: field(2).parse().ok(),
            key_bits: opts.key_bits,
            threads: opts.threads,
            seed: opts.seed,
            median_seconds: None,
            depth_max: None,
            verified: None,
            normalized: None,
            error: String::new(),
        };
        match run_cell(field(0), field(1), field(2), field(3), opts) {
            Ok(outcome) => {
                row.median_seconds = Some(outcome.row.median_seconds);
                row.depth_max = Some(outcome.row.depth_max);
                row.verified = outcome.row.verified;
                if let Some(v) = outcome.violation {
                    row.error = format!("verification failed: {v}");
                }
            }
            Err(e) => row.error = e.to_string(),
        }
        rows.push(row);
    }
    normalize(&mut rows);
    Ok(rows)
}

fn run_cell(dist: &str, param: &str, n: &str, algo: &str, opts: &GridOptions) -> Result<BenchOutcome> {
    let param: f64 = param.parse().map_err(|_| Error::Config(format!("bad param `{param}`")))?;
    let n: usize = n.parse().map_err(|_| Error::Config(format!("bad n `{n}`")))?;
    let family = Family::parse(dist, param)?;
    let mut cfg = BenchConfig::new(algo.parse()?, DistributionSpec { family, n, seed: opts.seed });
    cfg.key_bits = opts.key_bits;
    cfg.threads = opts.threads;
    cfg.reps = opts.reps;
    cfg.verify = opts.verify;
    cfg.params = opts.params.clone();
    run_bench(&cfg)
}

fn normalize(rows: &mut [GridRow]) {
    for i in 0..rows.len() {
        let Some(t) = rows[i].median_seconds else { continue };
        let group = |r: &GridRow| r.dist == rows[i].dist && r.param == rows[i].param && r.n == rows[i].n;
        let best = rows
            .iter()
            .filter(|r| group(r))
            .filter_map(|r| r.median_seconds)
            .fold(f64::INFINITY, f64::min);
        rows[i].normalized = Some(if best > 0.0 { t / best } else { 1.0 });
    }
}

pub fn write_grid_rows<W: Write>(out: W, rows: &[GridRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(GRID_COLUMNS)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}

pub fn read_grid_rows<R: Read>(input: R) -> Result<Vec<GridRow>> {
    csv::Reader::from_reader(input).deserialize().map(|r| r.map_err(Error::from)).collect()
}
