//! Sampling experiments on uniformly random facet functions.
//!
//! Every sample derives its own seeds from the master seed and its index, and
//! results are collected in index order, so reports are bit-identical for any
//! worker count.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::boolfn::{is_trivial_facet, random_f};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};
use crate::spectrum::{
    bell_polynomial, eigenvalue, maximize_norm, mk_ceiling, AngleConfig, OmegaVector,
    OptimizeOptions,
};

/// Two-sided 95% standard normal quantile.
pub const Z95: f64 = 1.959963984540054;

/// Party-count cap for sampling at the default budgets.
pub const SAMPLE_MAX_N: usize = 12;

/// One optimized sample, also the CSV row layout.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleRecord {
    pub sample_index: usize,
    pub f_hex: String,
    pub norm: f64,
    pub sweeps: usize,
    pub restarts_used: usize,
    pub converged: bool,
}

/// Summary statistics of the optimized norms at one `n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingRow {
    pub n: usize,
    pub samples: usize,
    pub restarts: usize,
    pub median: f64,
    pub mean: f64,
    pub p95: f64,
    pub max: f64,
    /// `median / √(n ln n)`; absent at `n = 1`.
    pub ratio_to_root_nlogn: Option<f64>,
    /// `median / √(2^{n-1})`.
    pub ratio_to_ceiling: f64,
    pub mk_ceiling: f64,
    pub trivial: usize,
    pub unconverged: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleRun {
    pub row: ScalingRow,
    pub records: Vec<SampleRecord>,
}

/// Empirical tail probability against a threshold.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailReport {
    pub n: usize,
    pub samples: usize,
    /// `C` for norm exceedance, `M` for eigenvalue tails.
    pub parameter: f64,
    pub threshold: f64,
    pub exceedances: usize,
    pub empirical_probability: f64,
    pub wilson_ci_95: [f64; 2],
    /// Theoretical upper bound on the probability, where one exists.
    pub bound: Option<f64>,
    /// `bound + 4σ` with `σ` the binomial standard error at the bound.
    pub tolerance: Option<f64>,
    pub consistent: Option<bool>,
}

/// Worker pool sized by `workers` (`None` uses the rayon default).
fn with_pool<T: Send>(workers: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        if w == 0 {
            return Err(Error::InvalidInput("workers must be at least 1".into()));
        }
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    Ok(pool.install(job))
}

fn check_sampling(n: usize, samples: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    if n > SAMPLE_MAX_N {
        return Err(Error::TooLarge {
            what: "sampling",
            n,
            limit: SAMPLE_MAX_N,
        });
    }
    if samples == 0 {
        return Err(Error::InvalidInput("samples must be at least 1".into()));
    }
    Ok(())
}

/// Wilson score interval for `k` successes in `total` trials.
pub fn wilson_interval(k: usize, total: usize) -> [f64; 2] {
    let nn = total as f64;
    let p = k as f64 / nn;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / nn;
    let center = (p + z2 / (2.0 * nn)) / denom;
    let half = Z95 / denom * (p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)).sqrt();
    [(center - half).clamp(0.0, p), (center + half).clamp(p, 1.0)]
}

fn tail(
    n: usize,
    parameter: f64,
    threshold: f64,
    values: &[f64],
    bound: Option<f64>,
) -> TailReport {
    let samples = values.len();
    let exceedances = values.iter().filter(|&&v| v > threshold).count();
    let empirical_probability = exceedances as f64 / samples as f64;
    let tolerance = bound.map(|b| b + 4.0 * (b * (1.0 - b) / samples as f64).sqrt());
    TailReport {
        n,
        samples,
        parameter,
        threshold,
        exceedances,
        empirical_probability,
        wilson_ci_95: wilson_interval(exceedances, samples),
        bound,
        tolerance,
        consistent: tolerance.map(|t| empirical_probability <= t),
    }
}

/// `k`-th smallest with `k = ⌈q·N⌉` (nearest rank).
fn nearest_rank(sorted: &[f64], q: f64) -> f64 {
    let rank = (q * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

fn median(sorted: &[f64]) -> f64 {
    let m = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[m]
    } else {
        0.5 * (sorted[m - 1] + sorted[m])
    }
}

/// Draws `samples` uniform `f` and maximizes each norm.
///
/// Sample `i` uses `random_f` seed `derive_seed(seed, 2i)` and optimizer seed
/// `derive_seed(seed, 2i + 1)`. Unconverged samples are kept and counted.
pub fn sample_max_norms(
    n: usize,
    samples: usize,
    seed: u64,
    opts: &OptimizeOptions,
    workers: Option<usize>,
) -> Result<SampleRun> {
    check_sampling(n, samples)?;
    opts.validate()?;
    let draws: Vec<Result<(SampleRecord, bool)>> = with_pool(workers, || {
        (0..samples)
            .into_par_iter()
            .map(|i| {
                let f = random_f(n, derive_seed(seed, 2 * i as u64))?;
                let local = OptimizeOptions {
                    seed: derive_seed(seed, 2 * i as u64 + 1),
                    ..*opts
                };
                let report = maximize_norm(&f, &local)?;
                let record = SampleRecord {
                    sample_index: i,
                    f_hex: f.to_hex(),
                    norm: report.best_norm,
                    sweeps: report.sweeps,
                    restarts_used: report.restarts_used,
                    converged: report.converged,
                };
                Ok((record, is_trivial_facet(&f)))
            })
            .collect()
    })?;
    let mut records = Vec::with_capacity(samples);
    let mut trivial = 0;
    for d in draws {
        let (record, is_trivial) = d?;
        trivial += usize::from(is_trivial);
        records.push(record);
    }
    let mut norms: Vec<f64> = records.iter().map(|r| r.norm).collect();
    norms.sort_by(f64::total_cmp);
    let med = median(&norms);
    let nf = n as f64;
    let ceiling = mk_ceiling(n);
    let row = ScalingRow {
        n,
        samples,
        restarts: opts.restarts,
        median: med,
        mean: norms.iter().sum::<f64>() / samples as f64,
        p95: nearest_rank(&norms, 0.95),
        max: norms[samples - 1],
        ratio_to_root_nlogn: (n > 1).then(|| med / (nf * nf.ln()).sqrt()),
        ratio_to_ceiling: med / ceiling,
        mk_ceiling: ceiling,
        trivial,
        unconverged: records.iter().filter(|r| !r.converged).count(),
    };
    Ok(SampleRun { row, records })
}

/// Writes per-sample records as CSV with a header row.
pub fn write_records_csv<W: Write>(records: &[SampleRecord], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for r in records {
        writer.serialize(r)?;
    }
    writer.flush()?;
    Ok(())
}

/// Exceedance of `C√(n ln n)` for each run and each `C`.
pub fn theorem1_exceedance(runs: &[SampleRun], c_grid: &[f64]) -> Result<Vec<TailReport>> {
    if c_grid.is_empty() || c_grid.iter().any(|&c| c <= 0.0 || !c.is_finite()) {
        return Err(Error::InvalidInput(
            "C grid must be non-empty and positive".into(),
        ));
    }
    let mut out = Vec::with_capacity(runs.len() * c_grid.len());
    for &c in c_grid {
        for run in runs {
            let n = run.row.n as f64;
            let norms: Vec<f64> = run.records.iter().map(|r| r.norm).collect();
            out.push(tail(run.row.n, c, c * (n * n.ln()).sqrt(), &norms, None));
        }
    }
    Ok(out)
}

/// Exceedance trend for one `C`, with `n` ascending.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrendCheck {
    pub parameter: f64,
    pub ns: Vec<usize>,
    pub probabilities: Vec<f64>,
    /// For every consecutive pair, the larger-`n` lower CI end does not
    /// exceed the smaller-`n` upper CI end.
    pub non_increasing: bool,
}

pub fn exceedance_trend(reports: &[TailReport], parameter: f64) -> TrendCheck {
    let mut rows: Vec<&TailReport> = reports
        .iter()
        .filter(|r| r.parameter == parameter)
        .collect();
    rows.sort_by_key(|r| r.n);
    let non_increasing = rows
        .windows(2)
        .all(|w| w[1].wilson_ci_95[0] <= w[0].wilson_ci_95[1]);
    TrendCheck {
        parameter,
        ns: rows.iter().map(|r| r.n).collect(),
        probabilities: rows.iter().map(|r| r.empirical_probability).collect(),
        non_increasing,
    }
}

/// True iff `median / √(2^{n-1})` strictly decreases with `n`.
pub fn ceiling_ratio_decreasing(rows: &[ScalingRow]) -> bool {
    let mut sorted: Vec<&ScalingRow> = rows.iter().collect();
    sorted.sort_by_key(|r| r.n);
    sorted
        .windows(2)
        .all(|w| w[1].ratio_to_ceiling < w[0].ratio_to_ceiling)
}

/// Fixed angles and `ω` for eigenvalue tails, drawn from stream 0 of `seed`.
pub fn prop2_direction(n: usize, seed: u64) -> (AngleConfig, OmegaVector) {
    let mut rng = rng_from_seed(derive_seed(seed, 0));
    let angles = AngleConfig::random(n, &mut rng);
    let signs = (0..n)
        .map(|_| if rng.random::<bool>() { 1 } else { -1 })
        .collect();
    (angles, OmegaVector::new(signs).expect("±1 signs"))
}

/// Tail of `|λ_f(ω)|` at fixed angles and `ω` against `1/M²`.
///
/// Sample `i` uses `random_f` seed `derive_seed(seed, i + 1)`.
pub fn prop2_tail(
    n: usize,
    samples: usize,
    m_grid: &[f64],
    seed: u64,
    workers: Option<usize>,
) -> Result<Vec<TailReport>> {
    check_sampling(n, samples)?;
    if m_grid.is_empty() || m_grid.iter().any(|&m| m <= 1.0 || !m.is_finite()) {
        return Err(Error::InvalidInput(
            "M values must be finite and greater than 1".into(),
        ));
    }
    let (angles, omega) = prop2_direction(n, seed);
    let magnitudes: Vec<Result<f64>> = with_pool(workers, || {
        (0..samples)
            .into_par_iter()
            .map(|i| {
                let f = random_f(n, derive_seed(seed, i as u64 + 1))?;
                Ok(eigenvalue(&f, &angles, &omega)?.0)
            })
            .collect()
    })?;
    let magnitudes = magnitudes.into_iter().collect::<Result<Vec<f64>>>()?;
    Ok(m_grid
        .iter()
        .map(|&m| tail(n, m, m, &magnitudes, Some(1.0 / (m * m))))
        .collect())
}

const SZK_NOTE: &str = "The theoretical ceiling is astronomically small at these sizes, so this \
is a sanity report rather than a sharp test. Optimized norms are lower bounds on the true \
maxima, which biases exceedance downward.";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SzkReport {
    pub n: usize,
    pub samples: usize,
    pub restarts: usize,
    /// `1/(n² e^{2n})`.
    pub ceiling: f64,
    /// Thresholds `C√(2n ln n)`.
    pub tails: Vec<TailReport>,
    /// Largest gap between the optimized norm and `|Σ_ε f(ε) g_ε(t)|` at
    /// the optimizing angles.
    pub identity_max_gap: f64,
    pub note: &'static str,
}

/// Sup-norm tail of the random trigonometric polynomial `Σ_ε f(ε) g_ε`.
///
/// Uses the same samples as [`sample_max_norms`] for the same seed.
pub fn szk_tail(
    n: usize,
    samples: usize,
    seed: u64,
    opts: &OptimizeOptions,
    c_grid: &[f64],
    workers: Option<usize>,
) -> Result<SzkReport> {
    if n < 2 {
        return Err(Error::InvalidInput("the threshold needs n >= 2".into()));
    }
    if c_grid.is_empty() || c_grid.iter().any(|&c| c <= 0.0 || !c.is_finite()) {
        return Err(Error::InvalidInput(
            "C grid must be non-empty and positive".into(),
        ));
    }
    check_sampling(n, samples)?;
    opts.validate()?;
    let gaps: Vec<Result<(f64, f64)>> = with_pool(workers, || {
        (0..samples)
            .into_par_iter()
            .map(|i| {
                let f = random_f(n, derive_seed(seed, 2 * i as u64))?;
                let local = OptimizeOptions {
                    seed: derive_seed(seed, 2 * i as u64 + 1),
                    ..*opts
                };
                let report = maximize_norm(&f, &local)?;
                let sup = bell_polynomial(&f, &report.best_angles)?.norm();
                Ok((report.best_norm, (sup - report.best_norm).abs()))
            })
            .collect()
    })?;
    let pairs = gaps.into_iter().collect::<Result<Vec<(f64, f64)>>>()?;
    let norms: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let nf = n as f64;
    let ceiling = 1.0 / (nf * nf * (2.0 * nf).exp());
    let tails = c_grid
        .iter()
        .map(|&c| tail(n, c, c * (2.0 * nf * nf.ln()).sqrt(), &norms, Some(ceiling)))
        .map(|mut t| {
            // The ceiling is far below one sample's resolution; no verdict.
            t.tolerance = None;
            t.consistent = None;
            t
        })
        .collect();
    Ok(SzkReport {
        n,
        samples,
        restarts: opts.restarts,
        ceiling,
        tails,
        identity_max_gap: pairs.iter().map(|p| p.1).fold(0.0, f64::max),
        note: SZK_NOTE,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubnormalRow {
    pub lambda: f64,
    pub cosh: f64,
    pub gaussian_bound: f64,
    pub analytic_ok: bool,
    pub empirical_mean: f64,
    /// `|sinh λ| / √N`, the standard error of the empirical mean.
    pub sigma: f64,
    pub within_4_sigma: bool,
}

/// Checks `E exp(λξ) = cosh λ ≤ exp(λ²/2)` for uniform signs `ξ`.
///
/// The signs are the values of `random_f(10, derive_seed(seed, k))` for
/// `k = 0, 1, ...`, truncated to `samples`.
pub fn subnormal_check(
    lambda_grid: &[f64],
    samples: usize,
    seed: u64,
) -> Result<Vec<SubnormalRow>> {
    if samples == 0 {
        return Err(Error::InvalidInput("samples must be at least 1".into()));
    }
    if lambda_grid.iter().any(|l| !l.is_finite()) {
        return Err(Error::InvalidInput("λ values must be finite".into()));
    }
    let mut signs = Vec::with_capacity(samples);
    let mut k = 0;
    while signs.len() < samples {
        signs.extend(
            random_f(10, derive_seed(seed, k))?
                .values()
                .iter()
                .map(|&v| f64::from(v)),
        );
        k += 1;
    }
    signs.truncate(samples);
    Ok(lambda_grid
        .iter()
        .map(|&lambda| {
            let cosh = lambda.cosh();
            let gaussian_bound = (0.5 * lambda * lambda).exp();
            let empirical_mean =
                signs.iter().map(|x| (lambda * x).exp()).sum::<f64>() / samples as f64;
            let sigma = lambda.sinh().abs() / (samples as f64).sqrt();
            SubnormalRow {
                lambda,
                cosh,
                gaussian_bound,
                analytic_ok: cosh <= gaussian_bound,
                empirical_mean,
                sigma,
                within_4_sigma: (empirical_mean - cosh).abs() <= 4.0 * sigma + 1e-12 * cosh,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    fn quick() -> OptimizeOptions {
        OptimizeOptions {
            restarts: 8,
            ..OptimizeOptions::default()
        }
    }

    #[test]
    fn wilson_examples() {
        // Reference values from the closed form evaluated by hand.
        let [lo, hi] = wilson_interval(0, 100);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.036994).abs() < 1e-5);
        let [lo, hi] = wilson_interval(50, 100);
        assert!((lo - 0.403832).abs() < 1e-5 && (hi - 0.596168).abs() < 1e-5);
        let [lo, hi] = wilson_interval(100, 100);
        assert!((lo - 0.963006).abs() < 1e-5);
        assert_eq!(hi, 1.0);
    }

    #[test]
    fn wilson_width_shrinks() {
        let w = |n: usize| {
            let [lo, hi] = wilson_interval(n / 4, n);
            hi - lo
        };
        assert!(w(400) < w(100) && w(1600) < w(400));
        let ratio = w(100) / w(10_000);
        assert!((ratio - 10.0).abs() < 0.5, "{ratio}");
    }

    #[test]
    fn nearest_rank_and_median() {
        let v: Vec<f64> = (1..=20).map(f64::from).collect();
        assert_eq!(nearest_rank(&v, 0.95), 19.0);
        assert_eq!(median(&v), 10.5);
        assert_eq!(median(&[3.0]), 3.0);
        assert_eq!(nearest_rank(&[3.0], 0.95), 3.0);
    }

    #[test]
    fn n2_samples_respect_the_ceiling() {
        let run = sample_max_norms(2, 100, 11, &quick(), Some(1)).unwrap();
        assert_eq!(run.records.len(), 100);
        assert!(run.row.max <= SQRT_2 + 1e-9);
        for r in &run.records {
            assert!(
                r.norm == 1.0 || (r.norm > 1.0 && r.norm <= SQRT_2 + 1e-9),
                "{}",
                r.norm
            );
        }
        // Non-trivial n = 2 facets are all CHSH-type and reach √2.
        let chsh = run.records.iter().filter(|r| r.norm > 1.0).count();
        assert_eq!(chsh + run.row.trivial, 100);
        assert!(run
            .records
            .iter()
            .filter(|r| r.norm > 1.0)
            .all(|r| (r.norm - SQRT_2).abs() < 1e-9));
        let r = &run.row;
        assert!(r.median <= r.p95 && r.p95 <= r.max);
    }

    #[test]
    fn trivial_frequency_at_n2() {
        // 8 of 16 functions are signed characters; binomial σ = √(N/4).
        let samples = 1000;
        let run = sample_max_norms(2, samples, 5, &quick(), None).unwrap();
        let sigma = (samples as f64 * 0.25).sqrt();
        let dev = (run.row.trivial as f64 - 0.5 * samples as f64).abs();
        assert!(dev <= 4.0 * sigma, "{}", run.row.trivial);
    }

    #[test]
    fn sampling_is_deterministic_across_workers() {
        let a = sample_max_norms(4, 12, 3, &quick(), Some(1)).unwrap();
        let b = sample_max_norms(4, 12, 3, &quick(), Some(3)).unwrap();
        assert_eq!(a, b);
        let mut x = Vec::new();
        let mut y = Vec::new();
        write_records_csv(&a.records, &mut x).unwrap();
        write_records_csv(&b.records, &mut y).unwrap();
        assert_eq!(x, y);
        let text = String::from_utf8(x).unwrap();
        assert!(text.starts_with("sample_index,f_hex,norm,sweeps,restarts_used,converged\n"));
        assert_eq!(text.lines().count(), 13);
    }

    #[test]
    fn sampling_rejects_bad_input() {
        assert!(matches!(
            sample_max_norms(2, 0, 0, &quick(), None),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            sample_max_norms(13, 1, 0, &quick(), None),
            Err(Error::TooLarge { .. })
        ));
        assert!(matches!(
            sample_max_norms(2, 1, 0, &quick(), Some(0)),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn huge_c_never_exceeded_and_tiny_c_always() {
        let run = sample_max_norms(2, 50, 2, &quick(), None).unwrap();
        let reports = theorem1_exceedance(std::slice::from_ref(&run), &[100.0, 0.5]).unwrap();
        assert_eq!(reports[0].exceedances, 0);
        // 0.5·√(2 ln 2) < 1 < every witness norm.
        let witnesses = run.records.iter().filter(|r| r.norm > 1.0).count();
        assert!(reports[1].exceedances >= witnesses);
        assert!(theorem1_exceedance(&[run], &[]).is_err());
    }

    #[test]
    fn trend_detection() {
        let mk = |n: usize, k: usize| tail(n, 4.0, 1.0, &vec_with(k, 200), None);
        let flat = [mk(4, 10), mk(6, 10), mk(8, 5)];
        assert!(exceedance_trend(&flat, 4.0).non_increasing);
        let rising = [mk(4, 0), mk(6, 60)];
        assert!(!exceedance_trend(&rising, 4.0).non_increasing);
    }

    fn vec_with(exceed: usize, total: usize) -> Vec<f64> {
        (0..total)
            .map(|i| if i < exceed { 2.0 } else { 0.0 })
            .collect()
    }

    #[test]
    fn tail_report_invariants() {
        let t = tail(3, 2.0, 2.0, &[0.0, 3.0, 1.0, 2.5], Some(0.25));
        assert_eq!(t.exceedances, 2);
        assert_eq!(t.empirical_probability, 0.5);
        assert!(t.wilson_ci_95[0] <= 0.5 && 0.5 <= t.wilson_ci_95[1]);
        assert_eq!(t.bound, Some(0.25));
    }

    #[test]
    fn prop2_bounds() {
        let reports = prop2_tail(6, 2000, &[2.0, 5.0], 1, None).unwrap();
        assert_eq!(reports[0].bound, Some(0.25));
        assert_eq!(reports[1].bound, Some(0.04));
        assert!(reports.iter().all(|r| r.consistent == Some(true)));
        assert!(prop2_tail(6, 10, &[1.0], 1, None).is_err());
    }

    #[test]
    fn prop2_second_moment() {
        // E|λ|² = Σ_ε |g_ε|² = 1 at fixed angles.
        let (angles, omega) = prop2_direction(5, 9);
        let mean: f64 = (0..4000u64)
            .map(|i| {
                eigenvalue(&random_f(5, 10_000 + i).unwrap(), &angles, &omega)
                    .unwrap()
                    .0
                    .powi(2)
            })
            .sum::<f64>()
            / 4000.0;
        assert!((mean - 1.0).abs() < 0.1, "{mean}");
    }

    #[test]
    fn szk_report() {
        let r = szk_tail(6, 20, 4, &quick(), &[1.0, 10.0], None).unwrap();
        assert!((r.ceiling - 1.0 / (36.0 * 12f64.exp())).abs() < 1e-20);
        assert!((r.ceiling - 1.7e-7).abs() < 0.05e-7);
        assert_eq!(r.tails[1].exceedances, 0);
        assert!(r.identity_max_gap < 1e-9);
        assert!(r.note.contains("sanity report"));
        let same = sample_max_norms(6, 20, 4, &quick(), None).unwrap();
        let norms: Vec<f64> = same.records.iter().map(|x| x.norm).collect();
        let t = tail(6, 1.0, (12.0 * 6f64.ln()).sqrt(), &norms, None);
        assert_eq!(t.exceedances, r.tails[0].exceedances);
    }

    #[test]
    fn subnormal_examples() {
        let rows = subnormal_check(&[0.0, 1.0, 3.0, -2.0], 20_000, 6).unwrap();
        assert_eq!(rows[0].cosh, 1.0);
        assert_eq!(rows[0].gaussian_bound, 1.0);
        assert_eq!(rows[0].empirical_mean, 1.0);
        assert!(
            (rows[1].cosh - 1.5431).abs() < 1e-4 && (rows[1].gaussian_bound - 1.6487).abs() < 1e-4
        );
        assert!(
            (rows[2].cosh - 10.068).abs() < 1e-3 && (rows[2].gaussian_bound - 90.017).abs() < 1e-3
        );
        assert!(rows.iter().all(|r| r.analytic_ok && r.within_4_sigma));
    }

    #[test]
    fn ceiling_ratio_check() {
        let row = |n: usize, r: f64| ScalingRow {
            n,
            samples: 1,
            restarts: 1,
            median: r,
            mean: r,
            p95: r,
            max: r,
            ratio_to_root_nlogn: None,
            ratio_to_ceiling: r,
            mk_ceiling: 1.0,
            trivial: 0,
            unconverged: 0,
        };
        assert!(ceiling_ratio_decreasing(&[row(6, 0.5), row(4, 0.6)]));
        assert!(!ceiling_ratio_decreasing(&[row(4, 0.5), row(6, 0.5)]));
    }
}
