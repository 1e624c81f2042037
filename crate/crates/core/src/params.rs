use crate::error::Error;

/// Knobs of the bucketing scheme.
///
/// `light_bits` and the subarray length are fixed for every recursion level;
/// the subarray length is derived once from the top-level input size unless
/// set explicitly.
#[derive(Clone, Debug, PartialEq)]
pub struct TuningParams {
    /// `log2` of the number of light buckets.
    pub light_bits: u32,
    /// Subarray length; `None` derives `ceil(n / 5000)`, raised to at least
    /// the number of light buckets.
    pub subarray_len: Option<usize>,
    /// Subproblems shorter than this go straight to a base case.
    pub alpha: usize,
    /// Upper bound on heavy buckets per recursion node.
    pub max_heavy: usize,
    /// Sample count is `sample_factor * log2(n')`, clamped to `n'`.
    pub sample_factor: usize,
    pub seed: u64,
}

pub const DEFAULT_LIGHT_BITS: u32 = 10;
pub const DEFAULT_ALPHA: usize = 1 << 14;
pub const DEFAULT_MAX_HEAVY: usize = 500;
pub const DEFAULT_SAMPLE_FACTOR: usize = 500;
pub const DEFAULT_SEED: u64 = 0x5eed_5eed;
/// Target number of subarrays per level when the length is derived.
pub const SUBARRAYS_PER_LEVEL: usize = 5000;
/// Bucket ids are cached as `u16`.
pub const MAX_BUCKETS: usize = 1 << 16;

impl Default for TuningParams {
    fn default() -> Self {
        Self {
            light_bits: DEFAULT_LIGHT_BITS,
            subarray_len: None,
            alpha: DEFAULT_ALPHA,
            max_heavy: DEFAULT_MAX_HEAVY,
            sample_factor: DEFAULT_SAMPLE_FACTOR,
            seed: DEFAULT_SEED,
        }
    }
}

impl TuningParams {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn light_buckets(&self) -> usize {
        1usize << self.light_bits
    }

    /// Validate and fix all sizes for a top-level input of `n` records.
    pub fn resolve(&self, n: usize) -> Result<Resolved, Error> {
        if self.light_bits == 0 || self.light_bits > 15 {
            return Err(Error::Config("light_bits must be in 1..=15"));
        }
        let light = self.light_buckets();
        if light + self.max_heavy > MAX_BUCKETS {
            return Err(Error::Config("light + heavy bucket count exceeds 65536"));
        }
        if self.alpha == 0 {
            return Err(Error::Config("alpha must be at least 1"));
        }
        if self.sample_factor == 0 {
            return Err(Error::Config("sample_factor must be at least 1"));
        }
        let subarray_len = match self.subarray_len {
            Some(0) => return Err(Error::Config("subarray length must be at least 1")),
            Some(l) if l < light => {
                return Err(Error::Config("subarray length smaller than the light bucket count"))
            }
            Some(l) => l,
            None => n.div_ceil(SUBARRAYS_PER_LEVEL).max(light),
        };
        let log2_n = log2(n);
        Ok(Resolved {
            light_bits: self.light_bits,
            light_buckets: light,
            subarray_len,
            alpha: self.alpha,
            max_heavy: self.max_heavy,
            sample_factor: self.sample_factor,
            seed: self.seed,
            top_n: n,
            heavy_threshold: libm_ceil(log2_n).max(1.0) as usize,
        })
    }
}

/// Parameters fixed for one top-level call.
#[derive(Clone, Debug, PartialEq)]
pub struct Resolved {
    pub light_bits: u32,
    pub light_buckets: usize,
    pub subarray_len: usize,
    pub alpha: usize,
    pub max_heavy: usize,
    pub sample_factor: usize,
    pub seed: u64,
    pub top_n: usize,
    /// Minimum sample occurrences for a key to be heavy: `ceil(log2 n)` of the
    /// top-level `n`.
    pub heavy_threshold: usize,
}

impl Resolved {
    /// Number of samples drawn from a subproblem of `len` records.
    pub fn sample_count(&self, len: usize) -> usize {
        let s = self.sample_factor as f64 * log2(len);
        (s as usize).min(len)
    }

    pub fn subarrays(&self, len: usize) -> usize {
        len.div_ceil(self.subarray_len)
    }

    /// Counting-matrix budget per recursion level.
    pub fn matrix_budget(&self) -> usize {
        (self.light_buckets + self.max_heavy) * self.top_n.div_ceil(self.subarray_len)
    }
}

/// Base-2 logarithm of `n` (0 for `n <= 1`).
pub fn log2(n: usize) -> f64 {
    if n <= 1 {
        return 0.0;
    }
    // exact integer part plus a short series for the fraction keeps this
    // usable without `std`
    let int = usize::BITS - 1 - n.leading_zeros();
    let frac = n as f64 / (1u64 << int) as f64;
    int as f64 + ln(frac) / core::f64::consts::LN_2
}

/// Natural log on `[1, 2)` via the atanh series.
fn ln(x: f64) -> f64 {
    let y = (x - 1.0) / (x + 1.0);
    let y2 = y * y;
    let mut term = y;
    let mut sum = 0.0;
    let mut k = 1.0;
    while k < 60.0 {
        sum += term / k;
        term *= y2;
        k += 2.0;
    }
    2.0 * sum
}

fn libm_ceil(x: f64) -> f64 {
    let t = x as i64 as f64;
    if t < x {
        t + 1.0
    } else {
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log2_matches_known_values() {
        assert_eq!(log2(1), 0.0);
        assert_eq!(log2(1024), 10.0);
        assert!((log2(1_000_000) - 19.931_568_569_324_174).abs() < 1e-9);
        assert!((log2(3) - 1.584_962_500_721_156).abs() < 1e-12);
        assert!((log2(1_000_000_000) - 29.897_352_853_986_26).abs() < 1e-9);
    }

    #[test]
    fn defaults_resolve() {
        let r = TuningParams::default().resolve(10_000_000).unwrap();
        assert_eq!(r.light_buckets, 1024);
        assert_eq!(r.subarray_len, 2000);
        assert_eq!(r.heavy_threshold, 24);
        assert_eq!(r.sample_count(10_000_000), 11_626);
    }

    #[test]
    fn derived_subarray_len_is_floored_at_light_buckets() {
        let r = TuningParams::default().resolve(100_000).unwrap();
        assert_eq!(r.subarray_len, 1024);
        let r = TuningParams::default().resolve(0).unwrap();
        assert_eq!(r.subarray_len, 1024);
    }

    #[test]
    fn explicit_subarray_shorter_than_light_buckets_is_rejected() {
        let p = TuningParams { subarray_len: Some(100), ..Default::default() };
        assert!(matches!(p.resolve(1000), Err(Error::Config(_))));
    }

    #[test]
    fn bad_params_are_rejected() {
        for p in [
            TuningParams { light_bits: 0, ..Default::default() },
            TuningParams { light_bits: 16, ..Default::default() },
            TuningParams { alpha: 0, ..Default::default() },
            TuningParams { max_heavy: 65_000, ..Default::default() },
            TuningParams { subarray_len: Some(0), ..Default::default() },
        ] {
            assert!(p.resolve(10).is_err(), "{p:?}");
        }
    }

    #[test]
    fn sample_count_is_clamped() {
        let r = TuningParams::default().resolve(100).unwrap();
        assert_eq!(r.sample_count(100), 100);
        assert_eq!(r.sample_count(1), 0);
    }
}
