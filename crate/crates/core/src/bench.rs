//! Overhead benchmark over random bounded-degree graphs.

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embed::{embed, EmbedConfig, MAX_DEGREE};
use crate::error::EmbedError;
use crate::graph::generate_er_bounded;
use crate::numfmt::fmt_sig;

pub const MAX_BENCH_SIZE: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub n: usize,
    pub p: f64,
    /// Successful embeddings behind the means.
    pub samples: usize,
    pub mean_n_plus: f64,
    pub std_n_plus: f64,
    pub mean_runtime: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub records: Vec<BenchRecord>,
    pub fit: Option<LinearFit>,
    pub failures: usize,
}

/// SplitMix64 finalizer; decorrelates per-instance seeds.
fn mix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Seed of the `sample`-th graph of size `n`.
pub fn instance_seed(seed: u64, n: usize, sample: usize) -> u64 {
    mix(mix(mix(seed) ^ n as u64) ^ sample as u64)
}

/// Embeds `samples` random graphs per size in parallel. Results are merged
/// in `(size, sample)` order so the output does not depend on scheduling.
pub fn run_bench(sizes: &[usize], p: f64, samples: usize, seed: u64, config: &EmbedConfig) -> Result<BenchReport, EmbedError> {
    if samples == 0 {
        return Err(EmbedError::Config("samples must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(EmbedError::Config(format!("edge probability {p} is outside [0, 1]")));
    }
    if let Some(&n) = sizes.iter().find(|&&n| n > MAX_BENCH_SIZE) {
        return Err(EmbedError::Config(format!("size {n} exceeds the benchmark limit of {MAX_BENCH_SIZE}")));
    }

    let jobs: Vec<(usize, usize)> = sizes.iter().flat_map(|&n| (0..samples).map(move |i| (n, i))).collect();
    let results: Vec<Result<(usize, f64), EmbedError>> = jobs
        .par_iter()
        .map(|&(n, i)| {
            let s = instance_seed(seed, n, i);
            let g = generate_er_bounded(n, p, MAX_DEGREE, s);
            let cfg = EmbedConfig { seed: s, ..*config };
            embed(&g, &cfg).map(|e| (e.stats.n_plus, e.stats.runtime_s))
        })
        .collect();

    let mut failures = 0;
    let mut records = Vec::with_capacity(sizes.len());
    for (k, &n) in sizes.iter().enumerate() {
        let chunk = &results[k * samples..(k + 1) * samples];
        let mut ok = Vec::with_capacity(samples);
        for (i, r) in chunk.iter().enumerate() {
            match r {
                Ok(v) => ok.push(*v),
                Err(e) => {
                    warn!("excluding size {n} sample {i}: {e}");
                    failures += 1;
                }
            }
        }
        if ok.is_empty() {
            warn!("every sample of size {n} failed; no record emitted");
            continue;
        }
        let m = ok.len() as f64;
        let mean = ok.iter().map(|&(x, _)| x as f64).sum::<f64>() / m;
        let var = ok.iter().map(|&(x, _)| (x as f64 - mean).powi(2)).sum::<f64>() / m;
        records.push(BenchRecord {
            n,
            p,
            samples: ok.len(),
            mean_n_plus: mean,
            std_n_plus: var.sqrt(),
            mean_runtime: ok.iter().map(|&(_, t)| t).sum::<f64>() / m,
        });
    }
    let points: Vec<(f64, f64)> = records.iter().map(|r| (r.n as f64, r.mean_n_plus)).collect();
    Ok(BenchReport {
        fit: linear_fit(&points),
        records,
        failures,
    })
}

/// Ordinary least squares of `y` on `x`. `None` with fewer than two
/// distinct abscissae. A perfect fit of constant `y` reports `R² = 1`.
pub fn linear_fit(points: &[(f64, f64)]) -> Option<LinearFit> {
    let m = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Some(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}

pub const CSV_HEADER: &str = "n,p,samples,mean_n_plus,std_n_plus,mean_runtime";

impl BenchReport {
    /// Records, one per line, then the fit as `#` comment lines.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.n,
                fmt_sig(r.p),
                r.samples,
                fmt_sig(r.mean_n_plus),
                fmt_sig(r.std_n_plus),
                fmt_sig(r.mean_runtime)
            ));
        }
        if let Some(f) = self.fit {
            out.push_str(&format!(
                "# fit mean_n_plus = slope * n + intercept: slope={}, intercept={}, r_squared={}\n",
                fmt_sig(f.slope),
                fmt_sig(f.intercept),
                fmt_sig(f.r_squared)
            ));
        }
        out.push_str(&format!("# failures={}\n", self.failures));
        out
    }
}
