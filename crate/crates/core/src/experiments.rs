//! Monte-Carlo statistics of the best-relay ratio `C_1 / C_n` on random
//! fading networks.
//!
//! Every trial draws from its own ChaCha8 stream, keyed by `(seed, n,
//! trial)`, so results do not depend on how trials are scheduled across
//! threads.

use log::{debug, info};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::capacity::ratio;
use crate::error::{invalid, Result};
use crate::format::format_g;
use crate::network::{DiamondNetwork, RelayLinks};
use crate::theory::bound;

/// Largest network size accepted by [`monte_carlo`].
pub const MAX_MC_RELAYS: usize = 10;

/// Generator description written to the metadata sidecar.
pub const RNG_DESCRIPTION: &str =
    "rand_chacha::ChaCha8Rng, seed_from_u64(seed), set_stream((n << 32) | trial); Rayleigh by inverse CDF";

/// Random stream for one trial.
pub fn trial_rng(seed: u64, n: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((n as u64) << 32) | trial as u64);
    rng
}

/// One Rayleigh(`sigma`) magnitude, `sigma sqrt(-2 ln(1 - U))`.
pub fn sample_rayleigh<R: Rng + ?Sized>(rng: &mut R, sigma: f64) -> f64 {
    let u: f64 = rng.random();
    sigma * (-2.0 * (-u).ln_1p()).sqrt()
}

/// Network whose gain magnitudes are i.i.d. Rayleigh(`sigma`).
pub fn sample_rayleigh_network<R: Rng + ?Sized>(n: usize, sigma: f64, rng: &mut R) -> Result<DiamondNetwork> {
    if n == 0 {
        return invalid("n must be at least 1");
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return invalid(format!("sigma must be positive, got {sigma}"));
    }
    let gains: Vec<(f64, f64)> = (0..n).map(|_| (sample_rayleigh(rng, sigma), sample_rayleigh(rng, sigma))).collect();
    DiamondNetwork::from_gains(&gains)
}

/// Network whose link capacities are i.i.d. log-uniform on `[lo, hi]`.
pub fn sample_log_uniform_network<R: Rng + ?Sized>(n: usize, lo: f64, hi: f64, rng: &mut R) -> Result<DiamondNetwork> {
    if n == 0 {
        return invalid("n must be at least 1");
    }
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return invalid(format!("need 0 < lo <= hi, got [{lo}, {hi}]"));
    }
    let (a, b) = (lo.ln(), hi.ln());
    let mut draw = || (a + (b - a) * rng.random::<f64>()).exp();
    let relays = (0..n).map(|_| RelayLinks::new(draw(), draw())).collect();
    DiamondNetwork::new(relays)
}

/// Linear interpolation between closest ranks on sorted input.
pub fn percentile(sorted: &[f64], p: f64) -> Result<f64> {
    if sorted.is_empty() {
        return invalid("percentile of an empty sample");
    }
    if !(0.0..=100.0).contains(&p) {
        return invalid(format!("percentile {p} outside [0, 100]"));
    }
    let pos = (sorted.len() - 1) as f64 * p / 100.0;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Ok(sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioStats {
    pub n: usize,
    pub trials: usize,
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
    pub whisker_lo: f64,
    pub whisker_hi: f64,
    pub outlier_count: usize,
    pub worst_case_bound: f64,
}

impl RatioStats {
    pub const CSV_HEADER: &'static str = "n,trials,min,q25,median,q75,max,whisker_lo,whisker_hi,outliers,bound";

    /// Box-plot summary. Whiskers reach the furthest observation within
    /// 1.5 IQR of the box; anything beyond is an outlier.
    pub fn from_ratios(n: usize, ratios: &[f64]) -> Result<Self> {
        let mut v = ratios.to_vec();
        v.sort_by(f64::total_cmp);
        let q25 = percentile(&v, 25.0)?;
        let q75 = percentile(&v, 75.0)?;
        let iqr = q75 - q25;
        let (lo_lim, hi_lim) = (q25 - 1.5 * iqr, q75 + 1.5 * iqr);
        let whisker_lo = v.iter().copied().find(|&x| x >= lo_lim).unwrap_or(q25).min(q25);
        let whisker_hi = v.iter().rev().copied().find(|&x| x <= hi_lim).unwrap_or(q75).max(q75);
        Ok(Self {
            n,
            trials: v.len(),
            min: v[0],
            q25,
            median: percentile(&v, 50.0)?,
            q75,
            max: v[v.len() - 1],
            whisker_lo,
            whisker_hi,
            outlier_count: v.iter().filter(|&&x| x < whisker_lo || x > whisker_hi).count(),
            worst_case_bound: bound(n)?,
        })
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.n,
            self.trials,
            format_g(self.min),
            format_g(self.q25),
            format_g(self.median),
            format_g(self.q75),
            format_g(self.max),
            format_g(self.whisker_lo),
            format_g(self.whisker_hi),
            self.outlier_count,
            format_g(self.worst_case_bound)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fading {
    /// Rayleigh gain magnitudes converted with `log2(1 + |h|^2)`.
    Rayleigh { sigma: f64 },
    /// Link capacities log-uniform on `[lo, hi]`.
    LogUniform { lo: f64, hi: f64 },
}

impl Fading {
    pub const UNIT_RAYLEIGH: Fading = Fading::Rayleigh { sigma: 1.0 };

    fn sample(self, n: usize, rng: &mut ChaCha8Rng) -> Result<DiamondNetwork> {
        match self {
            Fading::Rayleigh { sigma } => sample_rayleigh_network(n, sigma, rng),
            Fading::LogUniform { lo, hi } => sample_log_uniform_network(n, lo, hi, rng),
        }
    }

    fn describe(self) -> serde_json::Value {
        match self {
            Fading::Rayleigh { sigma } => json!({"model": "rayleigh", "sigma": sigma}),
            Fading::LogUniform { lo, hi } => json!({"model": "log-uniform", "lo": lo, "hi": hi}),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloConfig {
    pub n_list: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub fading: Fading,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloOutput {
    pub stats: Vec<RatioStats>,
    /// `(n, trial, ratio)` in `(n, trial)` order.
    pub raw: Vec<(usize, usize, f64)>,
    /// Draws rejected because some link came out as exactly zero.
    pub resampled: usize,
}

fn one_trial(fading: Fading, seed: u64, n: usize, trial: usize) -> Result<(f64, usize)> {
    let mut rng = trial_rng(seed, n, trial);
    let mut rejected = 0;
    loop {
        let net = fading.sample(n, &mut rng)?;
        if net.relays().iter().all(|l| l.ell > 0.0 && l.r > 0.0) {
            return Ok((ratio(&net)?, rejected));
        }
        rejected += 1;
    }
}

pub fn run_monte_carlo(cfg: &MonteCarloConfig) -> Result<MonteCarloOutput> {
    if cfg.trials == 0 {
        return invalid("trials must be at least 1");
    }
    for &n in &cfg.n_list {
        if n == 0 || n > MAX_MC_RELAYS {
            return invalid(format!("n = {n} outside [1:{MAX_MC_RELAYS}]"));
        }
    }
    let jobs: Vec<(usize, usize)> =
        cfg.n_list.iter().flat_map(|&n| (0..cfg.trials).map(move |t| (n, t))).collect();
    info!("running {} trials over n = {:?}", jobs.len(), cfg.n_list);
    let results: Vec<(f64, usize)> = jobs
        .par_iter()
        .map(|&(n, t)| one_trial(cfg.fading, cfg.seed, n, t))
        .collect::<Result<Vec<_>>>()?;

    let resampled = results.iter().map(|r| r.1).sum();
    if resampled > 0 {
        info!("resampled {resampled} degenerate draws");
    }
    let raw: Vec<(usize, usize, f64)> = jobs.iter().zip(&results).map(|(&(n, t), r)| (n, t, r.0)).collect();
    let stats = cfg
        .n_list
        .iter()
        .map(|&n| {
            let ratios: Vec<f64> = raw.iter().filter(|r| r.0 == n).map(|r| r.2).collect();
            let s = RatioStats::from_ratios(n, &ratios)?;
            debug!("n = {n}: median {}", s.median);
            Ok(s)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MonteCarloOutput { stats, raw, resampled })
}

/// Rayleigh(1) study of the given network sizes.
pub fn monte_carlo(n_list: &[usize], trials: usize, seed: u64) -> Result<Vec<RatioStats>> {
    let cfg = MonteCarloConfig { n_list: n_list.to_vec(), trials, seed, fading: Fading::UNIT_RAYLEIGH };
    Ok(run_monte_carlo(&cfg)?.stats)
}

pub fn stats_csv(stats: &[RatioStats]) -> String {
    let mut out = String::from(RatioStats::CSV_HEADER);
    out.push('\n');
    for s in stats {
        out.push_str(&s.csv_row());
        out.push('\n');
    }
    out
}

pub fn raw_csv(raw: &[(usize, usize, f64)]) -> String {
    let mut out = String::from("n,trial,ratio\n");
    for (n, t, r) in raw {
        out.push_str(&format!("{n},{t},{}\n", format_g(*r)));
    }
    out
}

/// Reproducibility record for a run.
pub fn metadata_json(cfg: &MonteCarloConfig, out: &MonteCarloOutput) -> String {
    let v = json!({
        "generator": RNG_DESCRIPTION,
        "seed": cfg.seed,
        "trials": cfg.trials,
        "n": cfg.n_list,
        "fading": cfg.fading.describe(),
        "percentile_method": "linear interpolation between closest ranks",
        "whisker_rule": "furthest observation within 1.5 IQR of the box",
        "resampled": out.resampled,
    });
    serde_json::to_string_pretty(&v).expect("serializable")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentiles() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(percentile(&v, 50.0).unwrap(), 2.5);
        assert_eq!(percentile(&v, 25.0).unwrap(), 1.75);
        assert_eq!(percentile(&v, 0.0).unwrap(), 1.0);
        assert_eq!(percentile(&v, 100.0).unwrap(), 4.0);
        assert_eq!(percentile(&[5.0], 37.0).unwrap(), 5.0);
        assert!(percentile(&[], 50.0).is_err());
    }

    #[test]
    fn box_stats() {
        let mut v: Vec<f64> = (1..=20).map(|x| x as f64).collect();
        v.push(100.0);
        let s = RatioStats::from_ratios(2, &v).unwrap();
        assert_eq!((s.q25, s.median, s.q75), (6.0, 11.0, 16.0));
        assert_eq!(s.whisker_lo, 1.0);
        assert_eq!(s.whisker_hi, 20.0);
        assert_eq!(s.outlier_count, 1);
        assert_eq!(s.max, 100.0);
        let flat = RatioStats::from_ratios(1, &[1.0; 5]).unwrap();
        assert_eq!((flat.whisker_lo, flat.whisker_hi, flat.outlier_count), (1.0, 1.0, 0));
    }

    #[test]
    fn rayleigh_second_moment() {
        let mut rng = trial_rng(7, 1, 0);
        let draws = 100_000;
        let mean: f64 = (0..draws).map(|_| sample_rayleigh(&mut rng, 1.0).powi(2)).sum::<f64>() / draws as f64;
        assert!((mean - 2.0).abs() < 0.05, "{mean}");
    }

    #[test]
    fn sampling_is_reproducible() {
        let a = sample_rayleigh_network(1, 1.0, &mut trial_rng(42, 1, 0)).unwrap();
        let b = sample_rayleigh_network(1, 1.0, &mut trial_rng(42, 1, 0)).unwrap();
        assert_eq!(a, b);
        let c = sample_rayleigh_network(1, 1.0, &mut trial_rng(42, 1, 1)).unwrap();
        assert_ne!(a, c);
        assert!(sample_rayleigh_network(0, 1.0, &mut trial_rng(42, 1, 0)).is_err());
        assert!(sample_log_uniform_network(2, 0.0, 1.0, &mut trial_rng(1, 2, 0)).is_err());
    }

    #[test]
    fn single_relay_is_degenerate() {
        let s = monte_carlo(&[1], 50, 3).unwrap();
        assert_eq!((s[0].min, s[0].max), (1.0, 1.0));
        assert_eq!(s[0].q75 - s[0].q25, 0.0);
    }

    #[test]
    fn rejects_bad_config() {
        assert!(monte_carlo(&[11], 10, 0).is_err());
        assert!(monte_carlo(&[0], 10, 0).is_err());
        assert!(monte_carlo(&[2], 0, 0).is_err());
    }
}
