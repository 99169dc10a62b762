//! Reproducible simulation of the U-max statistic and its limit behaviour.
//!
//! Every trial draws its points from its own ChaCha8 stream, so a run is a
//! pure function of its [`SimConfig`] no matter how rayon schedules the
//! trials. Results are collected in trial order.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geometry::{self, DiskPoint, Objective};
use crate::limits::{law_for, LimitLaw};
use crate::sampler::{sample_batch, sample_point, BetaParams, SeedPolicy};

/// Default empirical-quantile window for the shape regression.
pub const DEFAULT_FIT_WINDOW: (f64, f64) = (0.05, 0.6);
/// Fewest points the shape regression accepts inside its window.
pub const MIN_FIT_POINTS: usize = 100;
/// Fewest expected hits per ε the tail probe accepts.
pub const MIN_EXPECTED_HITS: f64 = 100.0;
/// Draws per independently seeded chunk in the tail probe.
const TAIL_CHUNK: u64 = 1 << 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub objective: Objective,
    pub n: usize,
    pub beta: f64,
    pub sample_sizes: Vec<usize>,
    pub trials: usize,
    pub master_seed: u64,
    /// Record per-trial wall time. Off by default: timings are the only
    /// nondeterministic field of a [`TrialRecord`].
    pub record_timing: bool,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        BetaParams::new(self.beta)?;
        law_for(self.objective, self.n, self.beta)?;
        if self.trials == 0 {
            return Err(domain("trials", "need at least one trial"));
        }
        if self.sample_sizes.is_empty() {
            return Err(domain("N", "no sample sizes given"));
        }
        if let Some(&bad) = self.sample_sizes.iter().find(|&&s| s < self.n) {
            return Err(domain("N", format!("sample size {bad} is below n = {}", self.n)));
        }
        if self.sample_sizes.len() > u32::MAX as usize || self.trials > u32::MAX as usize {
            return Err(domain("trials", "too many trials or sample sizes"));
        }
        Ok(())
    }

    pub fn law(&self) -> Result<LimitLaw> {
        law_for(self.objective, self.n, self.beta)
    }
}

/// Generator stream for trial `trial` at the `size_index`-th sample size.
pub fn trial_stream(size_index: usize, trial: usize) -> u64 {
    ((size_index as u64) << 32) | trial as u64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub sample_size: usize,
    pub trial_index: usize,
    /// U-max value `H_N`.
    pub h: f64,
    /// Scaled statistic `N^A · (M − H_N)`.
    pub t: f64,
    pub hull_size: usize,
    pub wall_micros: Option<u64>,
}

/// One trial: sample, take the exact U-max, scale.
pub fn run_trial(
    config: &SimConfig,
    law: &LimitLaw,
    size_index: usize,
    trial: usize,
) -> Result<TrialRecord> {
    let sample_size = config.sample_sizes[size_index];
    let start = config.record_timing.then(Instant::now);
    let params = BetaParams::new(config.beta)?;
    let points = sample_batch(
        params,
        sample_size,
        SeedPolicy::new(config.master_seed),
        trial_stream(size_index, trial),
    )?;
    let hull = geometry::convex_hull(&points)?;
    let best = geometry::max_kgon(&hull, &points, config.n, config.objective)?;
    Ok(TrialRecord {
        sample_size,
        trial_index: trial,
        h: best.value,
        t: law.scale(sample_size, best.value),
        hull_size: hull.len(),
        wall_micros: start.map(|s| s.elapsed().as_micros() as u64),
    })
}

/// All trials for every sample size, ordered by sample size then trial.
pub fn run_trials(config: &SimConfig) -> Result<Vec<TrialRecord>> {
    config.validate()?;
    let law = config.law()?;
    let mut records = Vec::with_capacity(config.sample_sizes.len() * config.trials);
    for size_index in 0..config.sample_sizes.len() {
        let batch: Vec<TrialRecord> = (0..config.trials)
            .into_par_iter()
            .map(|trial| run_trial(config, &law, size_index, trial))
            .collect::<Result<_>>()?;
        records.extend(batch);
    }
    Ok(records)
}

/// Right-continuous empirical distribution function of a sample.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InsufficientData("empirical CDF of an empty sample".into()));
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::NonFinite("NaN in empirical sample".into()));
        }
        values.sort_by(|a, b| a.total_cmp(b));
        Ok(Self { sorted: values })
    }

    pub fn sorted_values(&self) -> &[f64] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Fraction of the sample `≤ t`.
    pub fn evaluate(&self, t: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= t) as f64 / self.sorted.len() as f64
    }

    /// Sample quantile by the nearest-rank rule.
    pub fn quantile(&self, p: f64) -> f64 {
        let m = self.sorted.len();
        let rank = (p * m as f64).ceil().clamp(1.0, m as f64) as usize;
        self.sorted[rank - 1]
    }

    /// Midpoint median.
    pub fn median(&self) -> f64 {
        let m = self.sorted.len();
        if m % 2 == 1 {
            self.sorted[m / 2]
        } else {
            0.5 * (self.sorted[m / 2 - 1] + self.sorted[m / 2])
        }
    }
}

/// Kolmogorov–Smirnov distance `sup_t |F̂(t) − F(t)|` against the limit law,
/// evaluated on both sides of every jump.
pub fn ks_distance(ecdf: &EmpiricalCdf, law: &LimitLaw) -> f64 {
    ks_distance_with(ecdf, |t| law.cdf(t))
}

pub fn ks_distance_with(ecdf: &EmpiricalCdf, cdf: impl Fn(f64) -> f64) -> f64 {
    let m = ecdf.len() as f64;
    ecdf.sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            ((i + 1) as f64 / m - f).max(f - i as f64 / m)
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeFit {
    pub c_hat: f64,
    pub c_se: f64,
    pub b_hat: f64,
    pub b_se: f64,
    pub ln_b_hat: f64,
    pub ln_b_se: f64,
    pub points_used: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub intercept_se: f64,
}

/// Ordinary least squares with standard errors from the residual variance.
pub fn least_squares(x: &[f64], y: &[f64]) -> Result<LineFit> {
    let m = x.len();
    if m != y.len() || m < 2 {
        return Err(Error::InsufficientData(format!("{m} points for a line fit")));
    }
    let mf = m as f64;
    let mx = x.iter().sum::<f64>() / mf;
    let my = y.iter().sum::<f64>() / mf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InsufficientData("abscissae have no spread".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let (slope_se, intercept_se) = if m > 2 {
        let rss: f64 = x
            .iter()
            .zip(y)
            .map(|(a, b)| (b - intercept - slope * a).powi(2))
            .sum();
        let s2 = rss / (mf - 2.0);
        ((s2 / sxx).sqrt(), (s2 * (1.0 / mf + mx * mx / sxx)).sqrt())
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(LineFit {
        slope,
        intercept,
        slope_se,
        intercept_se,
    })
}

/// Regresses `ln(−ln(1 − p))` on `ln t` over sample points whose plotting
/// position `p = i/(m+1)` lies in `window`; slope estimates `C`, intercept
/// estimates `ln B`.
pub fn fit_shape(ecdf: &EmpiricalCdf, window: (f64, f64)) -> Result<ShapeFit> {
    let (lo, hi) = window;
    if !(0.0 < lo && lo < hi && hi < 1.0) {
        return Err(domain("window", format!("({lo}, {hi}) must satisfy 0 < lo < hi < 1")));
    }
    let m = ecdf.len() as f64;
    let (xs, ys): (Vec<f64>, Vec<f64>) = ecdf
        .sorted
        .iter()
        .enumerate()
        .filter_map(|(i, &t)| {
            let p = (i + 1) as f64 / (m + 1.0);
            (p >= lo && p <= hi && t > 0.0).then(|| (t.ln(), (-(-p).ln_1p()).ln()))
        })
        .unzip();
    if xs.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData(format!(
            "{} points in quantile window ({lo}, {hi}); need {MIN_FIT_POINTS}",
            xs.len()
        )));
    }
    let line = least_squares(&xs, &ys)?;
    let b_hat = line.intercept.exp();
    Ok(ShapeFit {
        c_hat: line.slope,
        c_se: line.slope_se,
        b_hat,
        b_se: b_hat * line.intercept_se,
        ln_b_hat: line.intercept,
        ln_b_se: line.intercept_se,
        points_used: xs.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub sample_size: usize,
    pub trials: usize,
    pub delta: f64,
    /// Fraction of trials with `M − H_N < δ`.
    pub fraction_below: f64,
    /// `(p, quantile of M − H_N)` pairs.
    pub deficiency_quantiles: Vec<(f64, f64)>,
}

pub const REPORT_QUANTILES: [f64; 7] = [0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99];

/// How close `H_N` gets to `M` at the largest sample size in `records`.
pub fn consistency_check(records: &[TrialRecord], m: f64, delta: f64) -> Result<ConsistencyReport> {
    let largest = records
        .iter()
        .map(|r| r.sample_size)
        .max()
        .ok_or_else(|| Error::InsufficientData("no trial records".into()))?;
    let deficits: Vec<f64> = records
        .iter()
        .filter(|r| r.sample_size == largest)
        .map(|r| m - r.h)
        .collect();
    let below = deficits.iter().filter(|&&d| d < delta).count();
    let trials = deficits.len();
    let ecdf = EmpiricalCdf::new(deficits)?;
    Ok(ConsistencyReport {
        sample_size: largest,
        trials,
        delta,
        fraction_below: below as f64 / trials as f64,
        deficiency_quantiles: REPORT_QUANTILES.iter().map(|&p| (p, ecdf.quantile(p))).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeSummary {
    pub sample_size: usize,
    pub trials: usize,
    pub ks_distance: f64,
    pub median_t: f64,
    pub law_median: f64,
    pub mean_hull_size: f64,
    pub shape_fit: Option<ShapeFit>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimSummary {
    pub config: SimConfig,
    pub law: LimitLaw,
    pub fit_window: (f64, f64),
    pub per_size: Vec<SizeSummary>,
    pub consistency: ConsistencyReport,
}

/// Per-sample-size KS distance, medians and shape fits, plus the
/// consistency report at the largest size.
pub fn summarize(
    config: &SimConfig,
    records: &[TrialRecord],
    window: (f64, f64),
    delta: f64,
) -> Result<SimSummary> {
    let law = config.law()?;
    let mut per_size = Vec::with_capacity(config.sample_sizes.len());
    for &size in &config.sample_sizes {
        let rows: Vec<&TrialRecord> = records.iter().filter(|r| r.sample_size == size).collect();
        let ecdf = EmpiricalCdf::new(rows.iter().map(|r| r.t).collect())?;
        let shape_fit = match fit_shape(&ecdf, window) {
            Ok(f) => Some(f),
            Err(e) => {
                log::warn!("shape fit skipped at N = {size}: {e}");
                None
            }
        };
        per_size.push(SizeSummary {
            sample_size: size,
            trials: rows.len(),
            ks_distance: ks_distance(&ecdf, &law),
            median_t: ecdf.median(),
            law_median: law.median(),
            mean_hull_size: rows.iter().map(|r| r.hull_size as f64).sum::<f64>() / rows.len() as f64,
            shape_fit,
        });
    }
    Ok(SimSummary {
        config: config.clone(),
        law,
        fit_window: window,
        per_size,
        consistency: consistency_check(records, law.m, delta)?,
    })
}

/// `(t, F̂(t), F(t))` at every sample point.
pub fn ecdf_rows(ecdf: &EmpiricalCdf, law: &LimitLaw) -> Vec<(f64, f64, f64)> {
    ecdf.sorted
        .iter()
        .map(|&t| (t, ecdf.evaluate(t), law.cdf(t)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub epsilon: f64,
    pub draws: u64,
    pub hits: u64,
    pub probability: f64,
    /// Binomial standard error of `probability`.
    pub standard_error: f64,
    /// `n! · K_n · I · ε^C`.
    pub predicted: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailProbeResult {
    pub objective: Objective,
    pub n: usize,
    pub beta: f64,
    pub seed: u64,
    /// Rows by strictly decreasing ε.
    pub rows: Vec<TailRow>,
    /// ε values left out of the fit because nothing hit.
    pub dropped: Vec<f64>,
    pub fitted_slope: f64,
    pub slope_se: f64,
    pub fitted_log_prefactor: f64,
    pub log_prefactor_se: f64,
    /// `ln(n! · K_n · I)`.
    pub predicted_log_prefactor: f64,
    pub predicted_slope: f64,
}

impl TailProbeResult {
    pub fn epsilon_grid(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.epsilon).collect()
    }

    pub fn hit_probabilities(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.probability).collect()
    }
}

/// `n! · K_n · I`, the coefficient of `ε^C` in `P[f ≥ M − ε]`.
pub fn tail_prefactor(law: &LimitLaw) -> f64 {
    let fact: f64 = (1..=law.n).map(|k| k as f64).product();
    fact * law.k_n * law.i
}

/// Counts draws of `n` independent points whose kernel value reaches
/// `M − ε`. Draws are split into fixed chunks, each with its own stream, and
/// the integer counts are summed, so the result does not depend on
/// scheduling.
pub fn count_hits(
    objective: Objective,
    n: usize,
    beta: f64,
    epsilon: f64,
    draws: u64,
    seed_policy: SeedPolicy,
    stream_base: u64,
) -> Result<u64> {
    let params = BetaParams::new(beta)?;
    let m = crate::limits::extremal_value(objective, n)?;
    let threshold = m - epsilon;
    let chunks = draws.div_ceil(TAIL_CHUNK);
    let hits = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = seed_policy.trial_rng(stream_base + chunk);
            let count = TAIL_CHUNK.min(draws - chunk * TAIL_CHUNK);
            let mut pts: Vec<DiskPoint<f64>> = vec![DiskPoint::new(0.0, 0.0); n];
            let mut hits = 0u64;
            for _ in 0..count {
                for p in pts.iter_mut() {
                    *p = sample_point(params, &mut rng);
                }
                let hull = geometry::convex_hull(&pts).expect("finite sample");
                if geometry::polygon_objective(&hull, &pts, objective) >= threshold {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    Ok(hits)
}

/// Estimates `P[f(U₁,…,Uₙ) ≥ M − ε]` on a grid of ε and fits
/// `ln P = ln(prefactor) + slope · ln ε`.
pub fn tail_probe(
    objective: Objective,
    n: usize,
    beta: f64,
    epsilon_grid: &[f64],
    draws_per_epsilon: u64,
    seed: u64,
) -> Result<TailProbeResult> {
    let law = law_for(objective, n, beta)?;
    if epsilon_grid.is_empty() {
        return Err(domain("eps", "empty ε grid"));
    }
    if draws_per_epsilon == 0 {
        return Err(domain("draws", "need at least one draw per ε"));
    }
    let mut grid = epsilon_grid.to_vec();
    if grid.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
        return Err(domain("eps", "ε values must be finite and non-negative"));
    }
    grid.sort_by(|a, b| b.total_cmp(a));
    grid.dedup();
    if grid.len() as u64 > (1 << 23) {
        return Err(domain("eps", "ε grid too large"));
    }

    let prefactor = tail_prefactor(&law);
    let policy = SeedPolicy::new(seed);
    let mut rows = Vec::with_capacity(grid.len());
    for (k, &epsilon) in grid.iter().enumerate() {
        let predicted = prefactor * epsilon.powf(law.c);
        if epsilon > 0.0 && (draws_per_epsilon as f64) * predicted.min(1.0) < MIN_EXPECTED_HITS {
            return Err(Error::InsufficientData(format!(
                "ε = {epsilon}: {draws_per_epsilon} draws give {:.1} expected hits; need at least {}",
                draws_per_epsilon as f64 * predicted,
                (MIN_EXPECTED_HITS / predicted).ceil()
            )));
        }
        let hits = count_hits(
            objective,
            n,
            beta,
            epsilon,
            draws_per_epsilon,
            policy,
            (k as u64) << 40,
        )?;
        let p = hits as f64 / draws_per_epsilon as f64;
        rows.push(TailRow {
            epsilon,
            draws: draws_per_epsilon,
            hits,
            probability: p,
            standard_error: (p * (1.0 - p) / draws_per_epsilon as f64).sqrt(),
            predicted,
        });
    }

    let mut dropped = Vec::new();
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| {
            let keep = r.hits > 0 && r.epsilon > 0.0;
            if !keep {
                log::warn!("ε = {} dropped from the tail fit: no hits", r.epsilon);
                dropped.push(r.epsilon);
            }
            keep
        })
        .map(|r| (r.epsilon.ln(), r.probability.ln()))
        .unzip();
    let line = least_squares(&xs, &ys)?;

    Ok(TailProbeResult {
        objective,
        n,
        beta,
        seed,
        rows,
        dropped,
        fitted_slope: line.slope,
        slope_se: line.slope_se,
        fitted_log_prefactor: line.intercept,
        log_prefactor_se: line.intercept_se,
        predicted_log_prefactor: prefactor.ln(),
        predicted_slope: law.c,
    })
}
