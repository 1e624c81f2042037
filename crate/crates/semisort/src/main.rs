//! `semisort` command line.
//!
//! Tuning defaults can be overridden with the environment variables
//! `SEMISORT_LIGHT_BITS`, `SEMISORT_ALPHA`, `SEMISORT_SUBARRAY_LEN`,
//! `SEMISORT_MAX_HEAVY`, `SEMISORT_SAMPLE_FACTOR` and `SEMISORT_SEED`, or the
//! matching flags.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use semisort::apps::graph::{transpose, transpose_oracle, CsrGraph};
use semisort::apps::ngram::build_ngrams;
use semisort::bench::{
    read_bench_rows, run_bench, run_grid, write_bench_rows, write_grid_rows, Algo, BenchConfig, GridOptions, Source,
};
use semisort::datagen::{compute_stats, generate, DistributionSpec, Family};
use semisort::format::{decode_csr, decode_header, decode_records, encode_csr, encode_records, read_edge_list};
use semisort::format::{read_file, write_edge_list, write_file};
use semisort::word::Word;
use semisort::{with_threads, Rayon};
use semisort_core::key::KeyBits;
use semisort_core::oracle::{multiset_equal, oracle_collect_reduce, validate_semisort};
use semisort_core::{collect_reduce, histogram, semisort, Count, IntKey, KeyedResult, Mode, Record, ReduceFn};
use semisort_core::{KeyAdapter, TuningParams};

#[derive(Parser, Debug)]
#[command(name = "semisort", version, about = "Parallel semisort, histogram and collect-reduce toolkit")]
struct Cli {
    /// Worker threads; defaults to the number of available cores.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(flatten)]
    tuning: Tuning,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Tuning {
    /// log2 of the number of light buckets.
    #[arg(long, global = true, env = "SEMISORT_LIGHT_BITS")]
    light_bits: Option<u32>,
    /// Base-case threshold.
    #[arg(long, global = true, env = "SEMISORT_ALPHA")]
    alpha: Option<usize>,
    /// Records per counting subarray.
    #[arg(long, global = true, env = "SEMISORT_SUBARRAY_LEN")]
    subarray_len: Option<usize>,
    #[arg(long, global = true, env = "SEMISORT_MAX_HEAVY")]
    max_heavy: Option<usize>,
    /// Samples per log2 n.
    #[arg(long, global = true, env = "SEMISORT_SAMPLE_FACTOR")]
    sample_factor: Option<usize>,
    /// Seed for sampling.
    #[arg(long, global = true, env = "SEMISORT_SEED")]
    tuning_seed: Option<u64>,
}

impl Tuning {
    fn params(&self) -> TuningParams {
        let d = TuningParams::default();
        TuningParams {
            light_bits: self.light_bits.unwrap_or(d.light_bits),
            subarray_len: self.subarray_len.or(d.subarray_len),
            alpha: self.alpha.unwrap_or(d.alpha),
            max_heavy: self.max_heavy.unwrap_or(d.max_heavy),
            sample_factor: self.sample_factor.unwrap_or(d.sample_factor),
            seed: self.tuning_seed.unwrap_or(d.seed),
        }
    }
}

#[derive(Args, Debug, Clone)]
struct DistArgs {
    /// Distribution as `family:param`, e.g. `uniform:1000`, `exponential:0.001`, `zipfian:1.2`.
    #[arg(long)]
    dist: Option<Family>,
    /// Number of records to generate.
    #[arg(short, long, default_value_t = 1_000_000)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

impl DistArgs {
    fn spec(&self) -> Option<DistributionSpec> {
        self.dist.map(|family| DistributionSpec { family, n: self.n, seed: self.seed })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SortMode {
    Eq,
    Lt,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a binary record file.
    Gen {
        #[command(flatten)]
        dist: DistArgs,
        #[arg(long, default_value_t = 64)]
        key_bits: u32,
        /// 0 for key-only records, or the key width.
        #[arg(long, default_value_t = 0)]
        value_bits: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Semisort a binary record file.
    Sort {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = SortMode::Eq)]
        mode: SortMode,
        /// Use integer keys as their own hash.
        #[arg(long)]
        identity: bool,
        #[arg(long)]
        verify: bool,
    },
    /// Count records per key; writes `key,aggregate` CSV.
    Histogram {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        verify: bool,
    },
    /// Sum values per key (wrapping, low 64 bits); writes `key,aggregate` CSV.
    Reduce {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        verify: bool,
    },
    /// Reverse the edges of a graph. Files ending in `.csr` are binary CSR,
    /// anything else is a text edge list.
    Transpose {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        verify: bool,
    },
    /// Group the n-grams of a text by their first n-1 words; writes
    /// `key,next` CSV in grouped order.
    Ngram {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        gram_size: usize,
        #[arg(long)]
        verify: bool,
    },
    /// Time one configuration; writes one CSV row.
    Bench {
        #[arg(long, default_value = "eq")]
        algo: Algo,
        #[command(flatten)]
        dist: DistArgs,
        /// Record file to use instead of generated input.
        #[arg(long = "in", conflicts_with = "dist")]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 64)]
        key_bits: u32,
        #[arg(long, default_value_t = 4)]
        reps: usize,
        #[arg(long)]
        verify: bool,
        /// Append to this CSV file (header written when it is new).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every cell of a `dist,param,n,algo` CSV grid.
    Grid {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 64)]
        key_bits: u32,
        #[arg(long, default_value_t = 4)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        verify: bool,
    },
    /// Workload statistics of a record file or a generated distribution.
    Stats {
        #[command(flatten)]
        dist: DistArgs,
        #[arg(long = "in", conflicts_with = "dist")]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 64)]
        key_bits: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Verification outcome; `Err` carries the first violation.
type Verdict = Result<(), String>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let params = cli.tuning.params();
    let result = with_threads(threads, || run(cli.command, &params, threads))
        .map_err(anyhow::Error::from)
        .and_then(|r| r);
    match result {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(violation)) => {
            eprintln!("verification failed: {violation}");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Expand `$go!(K, V)` for the record widths in the file header.
macro_rules! with_widths {
    ($bytes:expr, $path:expr, $go:ident) => {{
        let h = decode_header($bytes)?;
        match (h.key_bits, h.value_bits) {
            (32, 0) => $go!(u32, ()),
            (32, 32) => $go!(u32, u32),
            (64, 0) => $go!(u64, ()),
            (64, 64) => $go!(u64, u64),
            (128, 0) => $go!(u128, ()),
            (128, 128) => $go!(u128, u128),
            (k, v) => bail!("{}: unsupported widths: key {k}, value {v}", $path.display()),
        }
    }};
}

fn run(cmd: Command, params: &TuningParams, threads: usize) -> anyhow::Result<Verdict> {
    match cmd {
        Command::Gen { dist, key_bits, value_bits, out } => {
            let spec = dist.spec().context("--dist is required")?;
            let bytes = match (key_bits, value_bits) {
                (32, 0) => encode_records(&generate::<u32, ()>(&spec)?),
                (32, 32) => encode_records(&generate::<u32, u32>(&spec)?),
                (64, 0) => encode_records(&generate::<u64, ()>(&spec)?),
                (64, 64) => encode_records(&generate::<u64, u64>(&spec)?),
                (128, 0) => encode_records(&generate::<u128, ()>(&spec)?),
                (128, 128) => encode_records(&generate::<u128, u128>(&spec)?),
                (k, v) => bail!("unsupported widths: key {k}, value {v} (key 32/64/128, value 0 or the key width)"),
            };
            write_file(&out, &bytes)?;
            Ok(Ok(()))
        }
        Command::Sort { input, out, mode, identity, verify } => {
            let bytes = read_file(&input)?;
            let adapter = if identity { IntKey::IDENTITY } else { IntKey::HASHED };
            let mode = if mode == SortMode::Eq { Mode::Eq } else { Mode::Lt };
            macro_rules! go {
                ($k:ty, $v:ty) => {
                    sort_file::<$k, $v>(&bytes, &out, adapter, mode, verify, params)
                };
            }
            with_widths!(&bytes, &input, go)
        }
        Command::Histogram { input, out, verify } => {
            let bytes = read_file(&input)?;
            macro_rules! go {
                ($k:ty, $v:ty) => {{
                    let data = decode_records::<$k, $v>(&bytes)?;
                    let adapter = IntKey::HASHED;
                    let result = histogram(&Rayon, &data, &adapter, params)?;
                    let verdict = check_keyed(verify, &data, &adapter, &result, &Count);
                    write_keyed(out.as_deref(), &result)?;
                    Ok(verdict)
                }};
            }
            with_widths!(&bytes, &input, go)
        }
        Command::Reduce { input, out, verify } => {
            let bytes = read_file(&input)?;
            if decode_header(&bytes)?.value_bits == 0 {
                bail!("{}: reduce needs records with values", input.display());
            }
            macro_rules! go {
                ($k:ty, $v:ty) => {{
                    let data = decode_records::<$k, $v>(&bytes)?;
                    let adapter = IntKey::HASHED;
                    let sum = ReduceFn::new(
                        0u64,
                        |r: &Record<$k, $v>| r.value.low_u64(),
                        |a: &mut u64, b| *a = a.wrapping_add(b),
                    );
                    let result = collect_reduce(&Rayon, &data, &adapter, &sum, params)?;
                    let verdict = check_keyed(verify, &data, &adapter, &result, &sum);
                    write_keyed(out.as_deref(), &result)?;
                    Ok(verdict)
                }};
            }
            with_widths!(&bytes, &input, go)
        }
        Command::Transpose { input, out, verify } => {
            let g = read_graph(&input)?;
            let t = transpose(&Rayon, &g, params)?;
            let verdict = if verify && t != transpose_oracle(&g) {
                Err("transpose differs from the sequential reference".to_string())
            } else {
                Ok(())
            };
            write_graph(&out, &t)?;
            Ok(verdict)
        }
        Command::Ngram { input, out, gram_size, verify } => {
            if gram_size < 2 {
                bail!("--gram-size must be at least 2");
            }
            let text = read_file(&input)?;
            let corpus = build_ngrams(&text, gram_size);
            let mut grouped = corpus.records.clone();
            semisort(&Rayon, &mut grouped, &corpus.adapter(), Mode::Eq, params)?;
            let verdict = if verify {
                validation_verdict(validate_semisort(&corpus.records, &grouped, &corpus.adapter()).first_violation)
            } else {
                Ok(())
            };
            let mut w = csv::Writer::from_writer(sink(out.as_deref())?);
            w.write_record(["key", "next"])?;
            for r in &grouped {
                w.write_record([corpus.key_text(r), corpus.value_text(r)])?;
            }
            w.flush()?;
            Ok(verdict)
        }
        Command::Bench { algo, dist, input, key_bits, reps, verify, out } => {
            let source = match (input, dist.spec()) {
                (Some(path), _) => Source::File(path),
                (None, Some(spec)) => Source::Generated(spec),
                (None, None) => bail!("bench needs --dist or --in"),
            };
            let cfg = BenchConfig { algo, source, key_bits, threads, reps, verify, params: params.clone() };
            let outcome = run_bench(&cfg)?;
            match out {
                Some(path) => append_bench_row(&path, &outcome.row)?,
                None => write_bench_rows(io::stdout().lock(), &[outcome.row])?,
            }
            Ok(outcome.violation.map_or(Ok(()), Err))
        }
        Command::Grid { input, out, key_bits, reps, seed, verify } => {
            let f = fs::File::open(&input).with_context(|| input.display().to_string())?;
            let opts = GridOptions { key_bits, threads, reps, verify, seed, params: params.clone() };
            let rows = run_grid(f, &opts)?;
            write_grid_rows(sink(out.as_deref())?, &rows)?;
            let failed = rows.iter().filter(|r| r.verified == Some(false)).count();
            Ok(if failed == 0 { Ok(()) } else { Err(format!("{failed} grid cells failed verification")) })
        }
        Command::Stats { dist, input, key_bits, out } => {
            let adapter = IntKey::HASHED;
            let stats = match (input, dist.spec()) {
                (Some(path), _) => {
                    let bytes = read_file(&path)?;
                    macro_rules! go {
                        ($k:ty, $v:ty) => {
                            anyhow::Ok(compute_stats(&decode_records::<$k, $v>(&bytes)?, &adapter))
                        };
                    }
                    with_widths!(&bytes, &path, go)?
                }
                (None, Some(spec)) => match key_bits {
                    32 => compute_stats(&generate::<u32, ()>(&spec)?, &adapter),
                    64 => compute_stats(&generate::<u64, ()>(&spec)?, &adapter),
                    128 => compute_stats(&generate::<u128, ()>(&spec)?, &adapter),
                    k => bail!("key width must be 32, 64 or 128, got {k}"),
                },
                (None, None) => bail!("stats needs --dist or --in"),
            };
            let mut w = csv::Writer::from_writer(sink(out.as_deref())?);
            w.write_record(["n", "distinct_keys", "max_frequency", "heavy_freq_ratio"])?;
            w.write_record([
                stats.n.to_string(),
                stats.distinct_keys.to_string(),
                stats.max_frequency.to_string(),
                stats.heavy_freq_ratio.to_string(),
            ])?;
            w.flush()?;
            Ok(Ok(()))
        }
    }
}

fn sort_file<K: Word + KeyBits, V: Word>(
    bytes: &[u8],
    out: &Path,
    adapter: IntKey,
    mode: Mode,
    verify: bool,
    params: &TuningParams,
) -> anyhow::Result<Verdict> {
    let input = decode_records::<K, V>(bytes)?;
    let mut data = input.clone();
    semisort(&Rayon, &mut data, &adapter, mode, params)?;
    let verdict =
        if verify { validation_verdict(validate_semisort(&input, &data, &adapter).first_violation) } else { Ok(()) };
    write_file(out, &encode_records(&data))?;
    Ok(verdict)
}

fn validation_verdict(first: Option<(usize, &'static str)>) -> Verdict {
    match first {
        None => Ok(()),
        Some((at, what)) => Err(format!("output index {at}: {what}")),
    }
}

fn check_keyed<R, A, F>(verify: bool, data: &[R], adapter: &A, result: &KeyedResult<A::Key, F::Value>, reducer: &F) -> Verdict
where
    A: KeyAdapter<R>,
    F: semisort_core::Reducer<R>,
    F::Value: PartialEq,
{
    if !verify || multiset_equal::<R, _, _>(result, &oracle_collect_reduce(data, adapter, reducer), adapter) {
        Ok(())
    } else {
        Err("aggregates differ from the sequential reference".into())
    }
}

fn write_keyed<K: Word>(out: Option<&Path>, result: &KeyedResult<K, u64>) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(sink(out)?);
    w.write_record(["key", "aggregate"])?;
    let mut key = String::new();
    for (k, v) in &result.pairs {
        key.clear();
        k.write_text(&mut key);
        w.write_record([key.as_str(), &v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn sink(out: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(fs::File::create(p).with_context(|| p.display().to_string())?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn append_bench_row(path: &Path, row: &semisort::bench::BenchRow) -> anyhow::Result<()> {
    let mut rows = if path.exists() {
        read_bench_rows(fs::File::open(path).with_context(|| path.display().to_string())?)?
    } else {
        Vec::new()
    };
    rows.push(row.clone());
    let f = fs::File::create(path).with_context(|| path.display().to_string())?;
    write_bench_rows(f, &rows)?;
    Ok(())
}

fn is_binary_csr(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "csr")
}

fn read_graph(path: &Path) -> anyhow::Result<CsrGraph> {
    Ok(if is_binary_csr(path) { decode_csr(&read_file(path)?)? } else { read_edge_list(path)? })
}

fn write_graph(path: &Path, g: &CsrGraph) -> anyhow::Result<()> {
    if is_binary_csr(path) {
        write_file(path, &encode_csr(g))?;
    } else {
        write_edge_list(path, g)?;
    }
    Ok(())
}
