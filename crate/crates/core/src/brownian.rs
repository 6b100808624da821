//! Monte Carlo over time-augmented Brownian paths.
//!
//! Path `k` draws its normals from its own ChaCha stream, so results do not
//! depend on how paths are scheduled across threads. Sums are reduced
//! pairwise in path order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Result, SigError};
use crate::path_signature::{SampledPath, SigAccumulator, SigPlan};

/// Excluded-path fraction above which a run is flagged unstable.
pub const UNSTABLE_FRACTION: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq)]
pub struct MCConfig {
    pub n_paths: usize,
    /// Time steps per unit of time.
    pub n_steps: usize,
    pub horizon: f64,
    pub seed: u64,
    /// Pair path `2k + 1` with the mirror image of path `2k`.
    pub antithetic: bool,
}

impl MCConfig {
    pub fn new(n_paths: usize, n_steps: usize, horizon: f64, seed: u64) -> Result<Self> {
        let cfg = MCConfig { n_paths, n_steps, horizon, seed, antithetic: false };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_paths < 2 {
            return Err(SigError::InvalidParameter("need at least two paths".into()));
        }
        if self.n_steps < 2 {
            return Err(SigError::InvalidParameter("need at least two steps per unit time".into()));
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(SigError::InvalidParameter("horizon must be positive".into()));
        }
        Ok(())
    }

    /// Number of steps on `[0, horizon]`.
    pub fn total_steps(&self) -> usize {
        ((self.n_steps as f64 * self.horizon).round() as usize).max(2)
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.total_steps() as f64
    }
}

/// Increments of path `idx`: `total_steps` rows of `d + 1` numbers, time first.
pub fn fill_increments(cfg: &MCConfig, d: usize, idx: usize, out: &mut [f64]) {
    let (stream, sign) = if cfg.antithetic { ((idx / 2) as u64, if idx % 2 == 1 { -1.0 } else { 1.0 }) } else { (idx as u64, 1.0) };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream);
    let dt = cfg.dt();
    let sq = dt.sqrt() * sign;
    for row in out.chunks_exact_mut(d + 1) {
        row[0] = dt;
        for x in &mut row[1..] {
            let z: f64 = rng.sample(StandardNormal);
            *x = sq * z;
        }
    }
}

/// Path `idx` as samples on the uniform grid.
pub fn brownian_path(cfg: &MCConfig, d: usize, idx: usize) -> SampledPath<f64> {
    let n = cfg.total_steps();
    let mut inc = vec![0.0; n * (d + 1)];
    fill_increments(cfg, d, idx, &mut inc);
    let mut times = Vec::with_capacity(n + 1);
    let mut values = Vec::with_capacity(n + 1);
    let mut t = 0.0;
    let mut x = vec![0.0; d];
    times.push(t);
    values.push(x.clone());
    for (k, row) in inc.chunks_exact(d + 1).enumerate() {
        t = cfg.horizon * (k + 1) as f64 / n as f64;
        for (xi, &dx) in x.iter_mut().zip(&row[1..]) {
            *xi += dx;
        }
        times.push(t);
        values.push(x.clone());
    }
    SampledPath::new(times, values).expect("uniform grid is increasing")
}

/// Every path of the run, materialized.
pub fn simulate_brownian(cfg: &MCConfig, d: usize) -> impl Iterator<Item = SampledPath<f64>> + '_ {
    (0..cfg.n_paths).map(move |k| brownian_path(cfg, d, k))
}

/// Sum in a fixed binary tree, independent of thread count.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub n: usize,
    pub estimate: f64,
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimatorResult {
    pub tag: String,
    pub estimate: f64,
    pub std_error: f64,
    pub n_used: usize,
    pub n_excluded: usize,
    pub checkpoints: Vec<Checkpoint>,
}

impl EstimatorResult {
    /// More than [`UNSTABLE_FRACTION`] of the paths were excluded.
    pub fn unstable(&self) -> bool {
        let n = self.n_used + self.n_excluded;
        n > 0 && self.n_excluded as f64 > UNSTABLE_FRACTION * n as f64
    }

    /// `|a - b| ≤ k sqrt(se_a² + se_b²)`.
    pub fn consistent_with(&self, other: &EstimatorResult, k: f64) -> bool {
        (self.estimate - other.estimate).abs() <= k * self.std_error.hypot(other.std_error)
    }
}

/// Twenty geometrically spaced sample counts from 100 to `n_max`.
pub fn checkpoints(n_max: usize) -> Vec<usize> {
    if n_max <= 100 {
        return vec![n_max];
    }
    let (lo, hi) = (100f64.ln(), (n_max as f64).ln());
    let mut out: Vec<usize> = (0..20).map(|k| (lo + (hi - lo) * k as f64 / 19.0).exp().round() as usize).collect();
    out.dedup();
    *out.last_mut().unwrap() = n_max;
    out
}

fn mean_se(xs: &[f64], antithetic: bool) -> (f64, f64, usize) {
    let used: Vec<f64> = xs.iter().copied().filter(|x| !x.is_nan()).collect();
    let n = used.len();
    if n == 0 {
        return (f64::NAN, f64::NAN, 0);
    }
    let mean = pairwise_sum(&used) / n as f64;
    // antithetic pairs are averaged first; the error bar comes from those
    let samples: Vec<f64> = if antithetic {
        xs.chunks(2).filter(|c| c.len() == 2 && !c[0].is_nan() && !c[1].is_nan()).map(|c| 0.5 * (c[0] + c[1])).collect()
    } else {
        used
    };
    let m = samples.len();
    if m < 2 {
        return (mean, f64::NAN, n);
    }
    let mu = pairwise_sum(&samples) / m as f64;
    let sq: Vec<f64> = samples.iter().map(|x| (x - mu) * (x - mu)).collect();
    let var = pairwise_sum(&sq) / (m - 1) as f64;
    (mean, (var / m as f64).sqrt(), n)
}

/// Summarize per-path samples; `NaN` marks an excluded path.
pub fn summarize(tag: &str, samples: &[f64], antithetic: bool) -> EstimatorResult {
    let (estimate, std_error, n_used) = mean_se(samples, antithetic);
    let cps = checkpoints(samples.len())
        .into_iter()
        .map(|n| {
            let (e, s, _) = mean_se(&samples[..n], antithetic);
            Checkpoint { n, estimate: e, std_error: s }
        })
        .collect();
    EstimatorResult { tag: tag.to_string(), estimate, std_error, n_used, n_excluded: samples.len() - n_used, checkpoints: cps }
}

/// Run `per_path` on the signature of every path and return the samples as
/// `n_paths` rows of `n_out` values. `per_path` writes `NaN` to exclude a path
/// from one output.
pub fn sample_signatures<F>(plan: &SigPlan, cfg: &MCConfig, n_out: usize, per_path: F) -> Result<Vec<f64>>
where
    F: Fn(usize, &SigAccumulator<'_>, &mut [f64]) + Sync,
{
    cfg.validate()?;
    let d = plan.d();
    let steps = cfg.total_steps();
    let mut out = vec![0.0; cfg.n_paths * n_out.max(1)];
    out.par_chunks_mut(n_out.max(1)).enumerate().for_each_init(
        || (plan.accumulator(), vec![0.0; steps * (d + 1)]),
        |(acc, inc), (idx, row)| {
            fill_increments(cfg, d, idx, inc);
            acc.reset();
            for delta in inc.chunks_exact(d + 1) {
                acc.push(delta);
            }
            per_path(idx, acc, row);
        },
    );
    Ok(out)
}

/// Column `j` of a row-major sample matrix.
pub fn column(samples: &[f64], n_out: usize, j: usize) -> Vec<f64> {
    samples.iter().skip(j).step_by(n_out).copied().collect()
}

/// `E[F(W)]` for a general path functional, with standard error.
pub fn mc_expect<F>(functional: F, cfg: &MCConfig, d: usize) -> Result<EstimatorResult>
where
    F: Fn(usize, &SampledPath<f64>) -> Result<f64> + Sync,
{
    cfg.validate()?;
    let vals: Vec<Result<f64>> = (0..cfg.n_paths).into_par_iter().map(|k| functional(k, &brownian_path(cfg, d, k))).collect();
    let mut xs = Vec::with_capacity(vals.len());
    for (k, v) in vals.into_iter().enumerate() {
        match v {
            Ok(x) => xs.push(x),
            Err(e) => return Err(SigError::FunctionalFailed { path: k, msg: e.to_string() }),
        }
    }
    Ok(summarize("mc", &xs, cfg.antithetic))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor_algebra::TensorPoly;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let cfg = MCConfig::new(4, 10, 1.0, 7).unwrap();
        let a = brownian_path(&cfg, 2, 1);
        assert_eq!(a, brownian_path(&cfg, 2, 1));
        assert_ne!(a, brownian_path(&cfg, 2, 2));
    }

    #[test]
    fn antithetic_pairs_mirror() {
        let mut cfg = MCConfig::new(4, 10, 1.0, 7).unwrap();
        cfg.antithetic = true;
        let a = brownian_path(&cfg, 1, 2);
        let b = brownian_path(&cfg, 1, 3);
        for (x, y) in a.values().iter().zip(b.values()) {
            assert_eq!(x[0], -y[0]);
        }
    }

    #[test]
    fn checkpoint_grid() {
        let c = checkpoints(100_000);
        assert_eq!(c.len(), 20);
        assert_eq!(c[0], 100);
        assert_eq!(*c.last().unwrap(), 100_000);
        assert!(c.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn config_validation() {
        assert!(MCConfig::new(10, 1, 1.0, 0).is_err());
        assert!(MCConfig::new(1, 10, 1.0, 0).is_err());
        assert!(MCConfig::new(10, 10, 0.0, 0).is_err());
    }

    #[test]
    fn functional_errors_name_the_path() {
        let cfg = MCConfig::new(5, 4, 1.0, 1).unwrap();
        let r = mc_expect(|k, _| if k == 3 { Err(SigError::ZeroDenominator { path: k }) } else { Ok(1.0) }, &cfg, 1);
        assert!(matches!(r, Err(SigError::FunctionalFailed { path: 3, .. })));
    }

    #[test]
    fn terminal_value_mean_is_near_zero() {
        let cfg = MCConfig::new(4000, 10, 1.0, 3).unwrap();
        let l = TensorPoly::word(1, &[1]);
        let plan = SigPlan::new(1, &[&l]).unwrap();
        let c = plan.compile(&l).unwrap();
        let s = sample_signatures(&plan, &cfg, 1, |_, acc, row| row[0] = acc.pair(&c)).unwrap();
        let r = summarize("w", &s, false);
        assert!(r.estimate.abs() < 4.0 * r.std_error);
        assert!((r.std_error - (1.0f64 / 4000.0).sqrt()).abs() < 2e-3);
    }

    #[test]
    fn excluded_paths_counted() {
        let xs = vec![1.0, f64::NAN, 3.0, 2.0];
        let r = summarize("x", &xs, false);
        assert_eq!(r.n_used, 3);
        assert_eq!(r.n_excluded, 1);
        assert!(r.unstable());
        assert!((r.estimate - 2.0).abs() < 1e-15);
    }
}
