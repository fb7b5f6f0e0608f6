//! Reproducible frame-level Monte Carlo sweeps.
//!
//! Each (scheme, grid point) draws its trials in fixed-size chunks. A chunk's
//! random stream is addressed by (master seed, scheme, grid index, chunk
//! index), and the per-link outage counts are summed, so results do not
//! depend on how chunks are scheduled or how many workers run them.

use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::analysis::{analytic_outages, outage_throughput, OutageSet, QuadratureConfig};
use crate::channel::{sample_realization, StreamKey};
use crate::error::{Error, Result};
use crate::schemes::{evaluate_frame, Link, Scheme, SinrThresholds};
use crate::{db_to_linear, SystemParams};

pub const DEFAULT_CHUNK_SIZE: u64 = 65_536;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    snr_grid_db: Vec<f64>,
    trials_per_point: u64,
    master_seed: u64,
    schemes: Vec<Scheme>,
    chunk_size: u64,
}

impl SweepSpec {
    pub fn new(
        snr_grid_db: Vec<f64>,
        trials_per_point: u64,
        master_seed: u64,
        schemes: Vec<Scheme>,
    ) -> Result<Self> {
        if snr_grid_db.is_empty() {
            return Err(Error::param("snr_grid_db", "grid is empty"));
        }
        if let Some(bad) = snr_grid_db.iter().find(|x| !x.is_finite()) {
            return Err(Error::param("snr_grid_db", format!("non-finite SNR {bad}")));
        }
        if snr_grid_db.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::param(
                "snr_grid_db",
                "grid must be strictly increasing",
            ));
        }
        if trials_per_point == 0 {
            return Err(Error::param("trials", "need at least one trial per point"));
        }
        if schemes.is_empty() {
            return Err(Error::param("schemes", "no scheme selected"));
        }
        let mut seen = schemes.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != schemes.len() {
            return Err(Error::param("schemes", "scheme listed twice"));
        }
        Ok(SweepSpec {
            snr_grid_db,
            trials_per_point,
            master_seed,
            schemes,
            chunk_size: DEFAULT_CHUNK_SIZE,
        })
    }

    pub fn with_chunk_size(mut self, chunk_size: u64) -> Result<Self> {
        if chunk_size == 0 {
            return Err(Error::param("chunk_size", "must be positive"));
        }
        self.chunk_size = chunk_size;
        Ok(self)
    }

    pub fn snr_grid_db(&self) -> &[f64] {
        &self.snr_grid_db
    }
    pub fn trials_per_point(&self) -> u64 {
        self.trials_per_point
    }
    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }
    pub fn schemes(&self) -> &[Scheme] {
        &self.schemes
    }
    pub fn chunk_size(&self) -> u64 {
        self.chunk_size
    }
}

/// Inclusive grid `lo, lo + step, ..., hi`. Points are computed as `lo + k·step`
/// so there is no accumulated drift.
pub fn snr_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && step.is_finite()) || step <= 0.0 || hi < lo {
        return Err(Error::param(
            "snr",
            format!("invalid range {lo}:{hi}:{step}"),
        ));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| lo + k as f64 * step).collect())
}

/// Wilson score interval for `successes` out of `trials` at two-sided `confidence`.
pub fn wilson_interval(successes: u64, trials: u64, confidence: f64) -> (f64, f64) {
    assert!(
        trials >= 1 && successes <= trials,
        "need 0 <= successes <= trials, trials >= 1"
    );
    assert!(
        confidence > 0.0 && confidence < 1.0,
        "confidence must lie in (0, 1)"
    );
    let z = Normal::standard().inverse_cdf(0.5 + 0.5 * confidence);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2n = z * z / n;
    let center = (p + 0.5 * z2n) / (1.0 + z2n);
    let half = z * (p * (1.0 - p) / n + 0.25 * z2n / n).sqrt() / (1.0 + z2n);
    let low = if successes == 0 {
        0.0
    } else {
        (center - half).clamp(0.0, p)
    };
    let high = if successes == trials {
        1.0
    } else {
        (center + half).clamp(p, 1.0)
    };
    (low, high)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkEstimate {
    pub link: Link,
    pub outages: u64,
    pub mc_estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Closed-form value, `None` where no closed form is attached.
    pub analytic: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutagePoint {
    pub snr_db: f64,
    pub trials: u64,
    pub links: Vec<LinkEstimate>,
    pub throughput_mc: f64,
    pub throughput_analytic: Option<f64>,
}

impl OutagePoint {
    pub fn link(&self, link: Link) -> Option<&LinkEstimate> {
        self.links.iter().find(|e| e.link == link)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub scheme: Scheme,
    pub points: Vec<OutagePoint>,
}

/// A sweep that stopped early. `completed` holds every finished scheme in
/// full, plus the finished points of the scheme that was running.
#[derive(Debug, Error)]
#[error("sweep stopped after {} completed point(s): {cause}", completed.iter().map(|r| r.points.len()).sum::<usize>())]
pub struct PartialSweep {
    pub completed: Vec<SweepResult>,
    #[source]
    pub cause: Error,
}

/// Whether `run_sweep` attaches closed forms to a scheme. The non-cooperative
/// baseline has no closed forms of its own and stays Monte Carlo only.
pub fn has_analytic(scheme: Scheme) -> bool {
    matches!(scheme, Scheme::HduCnoma | Scheme::ConventionalCnoma)
}

/// Per-link outage counts from one chunk, indexed by [`Link::index`].
pub fn simulate_chunk(
    scheme: Scheme,
    params: &SystemParams,
    rho: f64,
    key: StreamKey,
    trials: u64,
) -> [u64; 5] {
    let th = SinrThresholds::for_scheme(&params.rates, scheme);
    let mut rng = key.rng();
    let mut counts = [0u64; 5];
    for _ in 0..trials {
        let ch = sample_realization(&params.stats, &mut rng);
        let outcome = evaluate_frame(scheme, &params.power, &th, &ch, rho);
        for &link in scheme.links() {
            if outcome.ok(link) == Some(false) {
                counts[link.index()] += 1;
            }
        }
    }
    counts
}

fn count_point(scheme: Scheme, params: &SystemParams, spec: &SweepSpec, point: usize) -> [u64; 5] {
    let rho = db_to_linear(spec.snr_grid_db[point]);
    let chunks = spec.trials_per_point.div_ceil(spec.chunk_size);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let trials = spec
                .chunk_size
                .min(spec.trials_per_point - c * spec.chunk_size);
            let key = StreamKey::new(spec.master_seed, scheme.index(), point as u64, c);
            simulate_chunk(scheme, params, rho, key, trials)
        })
        .reduce(
            || [0u64; 5],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        )
}

fn summarize(
    scheme: Scheme,
    params: &SystemParams,
    quad: &QuadratureConfig,
    snr_db: f64,
    trials: u64,
    counts: [u64; 5],
) -> OutagePoint {
    let analytic =
        has_analytic(scheme).then(|| analytic_outages(scheme, params, db_to_linear(snr_db), quad));
    let mut mc = OutageSet::new();
    let links = scheme
        .links()
        .iter()
        .map(|&link| {
            let outages = counts[link.index()];
            let estimate = outages as f64 / trials as f64;
            let (ci_low, ci_high) = wilson_interval(outages, trials, 0.95);
            mc.set(link, estimate);
            LinkEstimate {
                link,
                outages,
                mc_estimate: estimate,
                ci_low,
                ci_high,
                analytic: analytic.as_ref().and_then(|a| a.value(link)),
            }
        })
        .collect();
    OutagePoint {
        snr_db,
        trials,
        links,
        throughput_mc: outage_throughput(&mc, &params.rates, scheme)
            .expect("every link is estimated"),
        // Only defined when every link of the scheme has a closed form.
        throughput_analytic: analytic
            .and_then(|a| outage_throughput(&a, &params.rates, scheme).ok()),
    }
}

/// Runs every scheme of `spec` over its SNR grid.
///
/// `workers` caps the thread count (`None` uses the machine default); it
/// never changes the results.
pub fn run_sweep(
    params: &SystemParams,
    spec: &SweepSpec,
    quad: &QuadratureConfig,
    workers: Option<usize>,
) -> std::result::Result<Vec<SweepResult>, PartialSweep> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder.build().map_err(|e| PartialSweep {
        completed: Vec::new(),
        cause: Error::Io(std::io::Error::other(format!(
            "cannot start worker pool: {e}"
        ))),
    })?;

    let mut results = Vec::with_capacity(spec.schemes.len());
    for &scheme in &spec.schemes {
        let points = pool.install(|| {
            (0..spec.snr_grid_db.len())
                .map(|i| {
                    let counts = count_point(scheme, params, spec, i);
                    summarize(
                        scheme,
                        params,
                        quad,
                        spec.snr_grid_db[i],
                        spec.trials_per_point,
                        counts,
                    )
                })
                .collect()
        });
        results.push(SweepResult { scheme, points });
    }
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn wilson_examples() {
        assert_eq!(wilson_interval(0, 50, 0.95).0, 0.0);
        assert_eq!(wilson_interval(50, 50, 0.95).1, 1.0);
        let (lo, hi) = wilson_interval(500, 1000, 0.95);
        assert_relative_eq!(lo, 0.4690, epsilon = 1e-4);
        assert_relative_eq!(hi, 0.5310, epsilon = 1e-4);
        // z = 1.959964 reproduces the textbook formula.
        let (n, p, z) = (1000.0f64, 0.5f64, 1.959_963_984_540_054f64);
        let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / (1.0 + z * z / n);
        assert_relative_eq!(hi - lo, 2.0 * half, epsilon = 1e-12);
    }

    #[test]
    fn grid_construction() {
        let g = snr_grid(0.0, 40.0, 2.0).unwrap();
        assert_eq!(g.len(), 21);
        assert_eq!(g[20], 40.0);
        assert_eq!(snr_grid(0.0, 1.0, 0.1).unwrap().len(), 11);
        assert_eq!(snr_grid(5.0, 5.0, 1.0).unwrap(), vec![5.0]);
        assert!(snr_grid(1.0, 0.0, 1.0).is_err());
        assert!(snr_grid(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn spec_validation() {
        let all = Scheme::ALL.to_vec();
        assert!(SweepSpec::new(vec![0.0, 1.0], 1, 0, all.clone()).is_ok());
        assert!(SweepSpec::new(vec![1.0, 1.0], 1, 0, all.clone()).is_err());
        assert!(SweepSpec::new(vec![], 1, 0, all.clone()).is_err());
        assert!(SweepSpec::new(vec![0.0], 0, 0, all.clone()).is_err());
        assert!(SweepSpec::new(vec![0.0], 1, 0, vec![]).is_err());
        assert!(SweepSpec::new(vec![0.0], 1, 0, vec![Scheme::HduCnoma, Scheme::HduCnoma]).is_err());
        assert!(SweepSpec::new(vec![0.0], 1, 0, all)
            .unwrap()
            .with_chunk_size(0)
            .is_err());
    }

    #[test]
    fn single_trial_estimates_are_binary() {
        let spec = SweepSpec::new(vec![0.0, 10.0, 20.0], 1, 99, Scheme::ALL.to_vec()).unwrap();
        let out = run_sweep(
            &SystemParams::default(),
            &spec,
            &QuadratureConfig::default(),
            Some(2),
        )
        .unwrap();
        for r in &out {
            for p in &r.points {
                assert_eq!(p.links.len(), r.scheme.links().len());
                for e in &p.links {
                    assert!(e.mc_estimate == 0.0 || e.mc_estimate == 1.0);
                    assert!(e.ci_low <= e.mc_estimate && e.mc_estimate <= e.ci_high);
                }
            }
        }
    }

    #[test]
    fn chunking_is_invisible_to_totals_per_stream() {
        // Same chunk layout, different worker counts: identical counts.
        let params = SystemParams::default();
        let spec = SweepSpec::new(vec![12.0], 10_000, 5, vec![Scheme::HduCnoma])
            .unwrap()
            .with_chunk_size(1000)
            .unwrap();
        let a = run_sweep(&params, &spec, &QuadratureConfig::default(), Some(1)).unwrap();
        let b = run_sweep(&params, &spec, &QuadratureConfig::default(), Some(3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn noncoop_has_no_analytic_column() {
        let spec = SweepSpec::new(vec![10.0], 100, 1, Scheme::ALL.to_vec()).unwrap();
        let out = run_sweep(
            &SystemParams::default(),
            &spec,
            &QuadratureConfig::default(),
            None,
        )
        .unwrap();
        let nc = out
            .iter()
            .find(|r| r.scheme == Scheme::NonCoopNoma)
            .unwrap();
        assert!(nc.points[0].links.iter().all(|e| e.analytic.is_none()));
        assert!(nc.points[0].throughput_analytic.is_none());
        let hdu = out.iter().find(|r| r.scheme == Scheme::HduCnoma).unwrap();
        assert!(hdu.points[0].links.iter().all(|e| e.analytic.is_some()));
    }

    /// Synthetic Bernoulli runs at known p: the 95% Wilson interval should
    /// cover p in at least 90% of 200 runs.
    #[test]
    fn wilson_coverage_calibration() {
        use rand::Rng;
        for (i, p) in [0.002, 0.05, 0.3].into_iter().enumerate() {
            let mut covered = 0;
            for run in 0..200u64 {
                let mut rng = StreamKey::new(17, i as u64, run, 0).rng();
                let n = 2000;
                let k = (0..n).filter(|_| rng.random::<f64>() < p).count() as u64;
                let (lo, hi) = wilson_interval(k, n, 0.95);
                if lo <= p && p <= hi {
                    covered += 1;
                }
            }
            assert!(covered >= 180, "p = {p}: covered {covered}/200");
        }
    }

    #[test]
    fn interval_width_halves_when_trials_quadruple() {
        let params = SystemParams::default();
        let quad = QuadratureConfig::default();
        let width = |trials| {
            let spec =
                SweepSpec::new(vec![10.0, 20.0, 30.0], trials, 8, vec![Scheme::HduCnoma]).unwrap();
            let r = run_sweep(&params, &spec, &quad, None).unwrap();
            let ws: Vec<f64> = r[0]
                .points
                .iter()
                .flat_map(|p| p.links.iter().map(|e| e.ci_high - e.ci_low))
                .collect();
            ws.iter().sum::<f64>() / ws.len() as f64
        };
        let ratio = width(40_000) / width(160_000);
        assert!((ratio - 2.0).abs() <= 0.4, "width ratio {ratio}");
    }

    proptest! {
        #[test]
        fn wilson_contains_estimate(trials in 1u64..100_000, frac in 0.0f64..=1.0) {
            let k = ((trials as f64) * frac).floor() as u64;
            let (lo, hi) = wilson_interval(k, trials, 0.95);
            let p = k as f64 / trials as f64;
            prop_assert!(0.0 <= lo && lo <= p && p <= hi && hi <= 1.0);
        }
    }
}
