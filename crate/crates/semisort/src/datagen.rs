//! Synthetic workloads and their statistics.
//!
//! Record `i` of a workload is drawn from its own counter-based stream
//! `CounterRng::stream(seed, i)`, so the output is the same for any number of
//! workers or block size.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand_core::RngCore;
use rand_distr::{Distribution, Exp, Zipf};
use rayon::prelude::*;
use semisort_core::key::KeyAdapter;
use semisort_core::params::log2;
use semisort_core::rng::CounterRng;
use semisort_core::Record;

use crate::word::Word;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Family {
    /// Keys uniform on `[0, mu)`.
    Uniform { mu: u64 },
    /// `floor(X)` with `X ~ Exponential(lambda)`.
    Exponential { lambda: f64 },
    /// Ranks `1..=n` with `P(r) ~ r^-s`.
    Zipfian { s: f64 },
}

impl Family {
    pub fn parse(name: &str, param: f64) -> Result<Self> {
        let f = match name {
            "uniform" => {
                if param.is_nan() || param < 1.0 || param.fract() != 0.0 || param > u64::MAX as f64 {
                    return Err(Error::Config(format!("uniform parameter must be a positive integer, got {param}")));
                }
                Family::Uniform { mu: param as u64 }
            }
            "exponential" => Family::Exponential { lambda: param },
            "zipfian" | "zipf" => Family::Zipfian { s: param },
            other => return Err(Error::Config(format!("unknown distribution `{other}`"))),
        };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Family::Uniform { mu: 0 } => Err(Error::Config("uniform mu must be >= 1".into())),
            Family::Exponential { lambda } if !(lambda > 0.0 && lambda.is_finite()) => {
                Err(Error::Config(format!("exponential lambda must be > 0, got {lambda}")))
            }
            Family::Zipfian { s } if !(s > 0.0 && s.is_finite()) => {
                Err(Error::Config(format!("zipfian s must be > 0, got {s}")))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Uniform { .. } => "uniform",
            Family::Exponential { .. } => "exponential",
            Family::Zipfian { .. } => "zipfian",
        }
    }

    pub fn param(&self) -> f64 {
        match *self {
            Family::Uniform { mu } => mu as f64,
            Family::Exponential { lambda } => lambda,
            Family::Zipfian { s } => s,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.name(), self.param())
    }
}

/// `family:param`, e.g. `zipfian:1.2`.
impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, param) = s
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("expected `family:param`, got `{s}`")))?;
        let param: f64 = param.parse().map_err(|_| Error::Config(format!("bad parameter `{param}`")))?;
        Family::parse(name, param)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistributionSpec {
    pub family: Family,
    pub n: usize,
    pub seed: u64,
}

/// `RngCore` view of a [`CounterRng`].
pub struct StreamRng(pub CounterRng);

impl RngCore for StreamRng {
    fn next_u32(&mut self) -> u32 {
        (self.0.next_u64() >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(8) {
            let w = self.0.next_u64().to_le_bytes();
            chunk.copy_from_slice(&w[..chunk.len()]);
        }
    }
}

enum Sampler {
    Uniform(u64),
    Exponential(Exp<f64>),
    Zipfian(Zipf<f64>),
}

impl Sampler {
    fn new(spec: &DistributionSpec) -> Result<Self> {
        spec.family.validate()?;
        Ok(match spec.family {
            Family::Uniform { mu } => Sampler::Uniform(mu),
            Family::Exponential { lambda } => {
                Sampler::Exponential(Exp::new(lambda).map_err(|e| Error::Config(e.to_string()))?)
            }
            Family::Zipfian { s } => Sampler::Zipfian(
                Zipf::new(spec.n.max(1) as f64, s).map_err(|e| Error::Config(e.to_string()))?,
            ),
        })
    }

    #[inline]
    fn key(&self, rng: &mut StreamRng) -> u64 {
        match self {
            Sampler::Uniform(mu) => rng.0.below(*mu),
            Sampler::Exponential(d) => d.sample(rng).floor() as u64,
            Sampler::Zipfian(d) => d.sample(rng) as u64,
        }
    }
}

/// Generate `spec.n` records. Values come from the same per-record stream as
/// the key.
pub fn generate<K: Word, V: Word>(spec: &DistributionSpec) -> Result<Vec<Record<K, V>>> {
    let sampler = Sampler::new(spec)?;
    Ok((0..spec.n)
        .into_par_iter()
        .with_min_len(4096)
        .map(|i| {
            let mut rng = StreamRng(CounterRng::stream(spec.seed, i as u64));
            let key = sampler.key(&mut rng);
            let (lo, hi) = (rng.0.next_u64(), rng.0.next_u64());
            Record::new(K::from_u64(key), V::from_pair(lo, hi))
        })
        .collect())
}

/// Workload statistics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InputStats {
    pub n: usize,
    pub distinct_keys: usize,
    pub max_frequency: usize,
    /// Fraction of records whose key occurs more than `500 * log2 n` times.
    pub heavy_freq_ratio: f64,
}

pub const HEAVY_STATS_FACTOR: f64 = 500.0;

/// Exact statistics from one sequential counting pass.
pub fn compute_stats<R, A>(data: &[R], adapter: &A) -> InputStats
where
    A: KeyAdapter<R>,
{
    let mut table: HashMap<u64, Vec<(A::Key, usize)>> = HashMap::new();
    for r in data {
        let k = adapter.key(r);
        let slot = table.entry(adapter.hash(&k)).or_default();
        match slot.iter_mut().find(|(other, _)| adapter.eq(other, &k)) {
            Some((_, c)) => *c += 1,
            None => slot.push((k, 1)),
        }
    }
    let n = data.len();
    let threshold = HEAVY_STATS_FACTOR * log2(n);
    let mut distinct = 0;
    let mut max_frequency = 0;
    let mut heavy = 0;
    for &(_, c) in table.values().flatten() {
        distinct += 1;
        max_frequency = max_frequency.max(c);
        if c as f64 > threshold {
            heavy += c;
        }
    }
    InputStats {
        n,
        distinct_keys: distinct,
        max_frequency,
        heavy_freq_ratio: if n == 0 { 0.0 } else { heavy as f64 / n as f64 },
    }
}
