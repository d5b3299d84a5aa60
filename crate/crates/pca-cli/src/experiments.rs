//! Experiment drivers: the two-cell agreement curve of windowed majority
//! restrictions and the shift-covariance decay of perfect samples. All
//! estimates carry intervals; sampler timeouts surface in every row.

use pca::cftp::{SampleOutcome, SamplerBudget};
use pca::error::{Error, Result};
use pca::models;
use pca::nhpca;
use pca::noise::derive_seed;
use pca::rule::LocalRule;
use pca::stats::wilson_interval;
use rayon::prelude::*;

/// One run of the agreement-curve experiment for a single `alpha`.
#[derive(Debug, Clone)]
pub struct CnConfig {
    pub alpha: f64,
    /// Window half-widths: each `n` builds the domain `{-n, …, n}`.
    pub sizes: Vec<usize>,
    pub samples: u64,
    pub seed: u64,
    pub max_depth: u64,
}

/// One CSV row: counts of the two agreement events at cells 0 and 1 among
/// perfect samples of the restriction to `{-n, …, n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CnPoint {
    pub alpha: f64,
    pub n: usize,
    pub samples: u64,
    pub successes_00: u64,
    pub successes_11: u64,
    pub failures: u64,
    pub timeouts: u64,
    /// Wilson interval of `P(x_0 = x_1)` over the completed samples, absent
    /// when every sample timed out.
    pub estimate: Option<(f64, f64, f64)>,
    /// Deepest coalescence horizon observed.
    pub max_depth_seen: u64,
}

pub const CN_CSV_HEADER: &str =
    "alpha,n,samples,successes_00,successes_11,failures,timeouts,estimate,ci_low,ci_high,max_depth";

/// Draw `samples` perfect samples of the majority restriction per window
/// size and count the agreement events at cells 0 and 1.
pub fn experiment_cn(config: &CnConfig) -> Result<Vec<CnPoint>> {
    let rule = models::majority(config.alpha)?;
    let budget = SamplerBudget::new(config.max_depth)?;
    let mut points = Vec::with_capacity(config.sizes.len());
    for &n in &config.sizes {
        if n < 1 {
            return Err(Error::WindowTooSmall {
                detail: "the agreement event reads cells 0 and 1, so the domain \
                         {-n, …, n} needs n >= 1"
                    .into(),
            });
        }
        let domain: Vec<i64> = (-(n as i64)..=n as i64).collect();
        let restriction = nhpca::restrict(&rule, &domain, &[0.5, 0.5])?;
        let point_seed = derive_seed(config.seed, n as u64);

        #[derive(Default)]
        struct Tally {
            zeros: u64,
            ones: u64,
            failures: u64,
            timeouts: u64,
            max_depth: u64,
        }
        let tally = (0..config.samples)
            .into_par_iter()
            .map(|trial| {
                let outcome = nhpca::sample_restriction(
                    restriction.nh(),
                    derive_seed(point_seed, trial),
                    &budget,
                )
                .expect("binary restriction");
                let mut t = Tally::default();
                match outcome {
                    SampleOutcome::Sample(s) => {
                        t.max_depth = s.depth;
                        let pair = nhpca::extend_measure_window(&s, &[0, 1])
                            .expect("domain contains 0 and 1");
                        match (pair[0], pair[1]) {
                            (0, 0) => t.zeros = 1,
                            (1, 1) => t.ones = 1,
                            _ => t.failures = 1,
                        }
                    }
                    SampleOutcome::Timeout { .. } => t.timeouts = 1,
                }
                t
            })
            .reduce(Tally::default, |a, b| Tally {
                zeros: a.zeros + b.zeros,
                ones: a.ones + b.ones,
                failures: a.failures + b.failures,
                timeouts: a.timeouts + b.timeouts,
                max_depth: a.max_depth.max(b.max_depth),
            });

        let completed = config.samples - tally.timeouts;
        let estimate = if completed > 0 {
            let w = wilson_interval(tally.zeros + tally.ones, completed)?;
            Some((w.estimate, w.low, w.high))
        } else {
            None
        };
        points.push(CnPoint {
            alpha: config.alpha,
            n,
            samples: config.samples,
            successes_00: tally.zeros,
            successes_11: tally.ones,
            failures: tally.failures,
            timeouts: tally.timeouts,
            estimate,
            max_depth_seen: tally.max_depth,
        });
    }
    Ok(points)
}

pub fn cn_csv(points: &[CnPoint]) -> String {
    let mut out = String::from(CN_CSV_HEADER);
    out.push('\n');
    for p in points {
        let (est, low, high) = match p.estimate {
            Some((e, l, h)) => (format!("{e:.8}"), format!("{l:.8}"), format!("{h:.8}")),
            None => (String::new(), String::new(), String::new()),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            p.alpha,
            p.n,
            p.samples,
            p.successes_00,
            p.successes_11,
            p.failures,
            p.timeouts,
            est,
            low,
            high,
            p.max_depth_seen,
        ));
    }
    out
}

/// A finite-dimensional event: the sample restricted to `cells` equals
/// `letters`. Empty cells means the sure event.
#[derive(Debug, Clone, PartialEq)]
pub struct Cylinder {
    pub cells: Vec<i64>,
    pub letters: Vec<u8>,
}

impl Cylinder {
    pub fn new(cells: Vec<i64>, letters: Vec<u8>) -> Result<Self> {
        if cells.len() != letters.len() {
            return Err(Error::WindowTooSmall {
                detail: format!("{} cells but {} letters", cells.len(), letters.len()),
            });
        }
        let mut sorted = cells.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != cells.len() {
            return Err(Error::WindowTooSmall {
                detail: "cylinder cells must be distinct".into(),
            });
        }
        Ok(Cylinder { cells, letters })
    }

    fn shifted(&self, shift: i64) -> Cylinder {
        Cylinder {
            cells: self.cells.iter().map(|c| c + shift).collect(),
            letters: self.letters.clone(),
        }
    }

    fn matches(&self, cells: &[i64], letters: &[u8]) -> bool {
        self.cells.iter().zip(&self.letters).all(|(&c, &a)| {
            let p = cells.binary_search(&c).expect("sampling window covers the cylinder");
            letters[p] == a
        })
    }
}

#[derive(Debug, Clone)]
pub struct DecayConfig {
    pub shifts: Vec<i64>,
    pub samples: u64,
    pub seed: u64,
    pub max_depth: u64,
}

/// Covariance estimate of `1_U` and `1_{shifted W}` under joint perfect
/// samples, with a 99.9% normal interval on the mean of the centered
/// products.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayPoint {
    pub shift: i64,
    pub samples: u64,
    pub timeouts: u64,
    pub mean_u: f64,
    pub mean_w: f64,
    pub covariance: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub max_depth_seen: u64,
}

/// Normal quantile for the covariance interval: 99.9% two-sided, so that a
/// sweep over many shifts keeps a small family-wise false-alarm rate.
pub const DECAY_Z: f64 = 3.290527;

pub const DECAY_CSV_HEADER: &str =
    "shift,samples,timeouts,mean_u,mean_w,covariance,ci_low,ci_high,max_depth";

/// Estimate `μ(U ∩ τ^{-n} W) − μ(U) μ(W)` per shift `n` from perfect
/// samples drawn jointly over a window covering both cylinders.
pub fn experiment_correlation_decay(
    rule: &LocalRule,
    u: &Cylinder,
    w: &Cylinder,
    config: &DecayConfig,
) -> Result<Vec<DecayPoint>> {
    let budget = SamplerBudget::new(config.max_depth)?;
    let mut points = Vec::with_capacity(config.shifts.len());
    for &shift in &config.shifts {
        let w_shifted = w.shifted(shift);
        let mut window: Vec<i64> = u.cells.iter().chain(&w_shifted.cells).copied().collect();
        window.sort_unstable();
        window.dedup();

        if window.is_empty() {
            // Both cylinders are the sure event: the covariance is exactly 0.
            points.push(DecayPoint {
                shift,
                samples: config.samples,
                timeouts: 0,
                mean_u: 1.0,
                mean_w: 1.0,
                covariance: 0.0,
                ci_low: 0.0,
                ci_high: 0.0,
                max_depth_seen: 0,
            });
            continue;
        }

        let point_seed = derive_seed(config.seed, shift as u64);
        let outcomes: Vec<Option<(bool, bool, u64)>> = (0..config.samples)
            .into_par_iter()
            .map(|trial| {
                let outcome = pca::cftp::sample_epca_infinite(
                    rule,
                    &window,
                    derive_seed(point_seed, trial),
                    &budget,
                )
                .expect("window is nonempty");
                outcome.sample().map(|s| {
                    (
                        u.matches(&s.cells, &s.letters),
                        w_shifted.matches(&s.cells, &s.letters),
                        s.depth,
                    )
                })
            })
            .collect();

        let timeouts = outcomes.iter().filter(|o| o.is_none()).count() as u64;
        let complete: Vec<(f64, f64)> = outcomes
            .iter()
            .flatten()
            .map(|&(zu, zw, _)| (zu as u8 as f64, zw as u8 as f64))
            .collect();
        let max_depth_seen = outcomes.iter().flatten().map(|&(_, _, d)| d).max().unwrap_or(0);
        let j = complete.len() as f64;
        if complete.is_empty() {
            points.push(DecayPoint {
                shift,
                samples: config.samples,
                timeouts,
                mean_u: f64::NAN,
                mean_w: f64::NAN,
                covariance: f64::NAN,
                ci_low: f64::NAN,
                ci_high: f64::NAN,
                max_depth_seen,
            });
            continue;
        }
        let mean_u = complete.iter().map(|&(a, _)| a).sum::<f64>() / j;
        let mean_w = complete.iter().map(|&(_, b)| b).sum::<f64>() / j;
        // Centered products: their mean is the covariance and their spread
        // gives its standard error.
        let products: Vec<f64> =
            complete.iter().map(|&(a, b)| (a - mean_u) * (b - mean_w)).collect();
        let covariance = products.iter().sum::<f64>() / j;
        let se = if j > 1.0 {
            let var =
                products.iter().map(|d| (d - covariance).powi(2)).sum::<f64>() / (j - 1.0);
            (var / j).sqrt()
        } else {
            f64::INFINITY
        };
        points.push(DecayPoint {
            shift,
            samples: config.samples,
            timeouts,
            mean_u,
            mean_w,
            covariance,
            ci_low: covariance - DECAY_Z * se,
            ci_high: covariance + DECAY_Z * se,
            max_depth_seen,
        });
    }
    Ok(points)
}

pub fn decay_csv(points: &[DecayPoint]) -> String {
    let mut out = String::from(DECAY_CSV_HEADER);
    out.push('\n');
    for p in points {
        out.push_str(&format!(
            "{},{},{},{:.8},{:.8},{:.8},{:.8},{:.8},{}\n",
            p.shift,
            p.samples,
            p.timeouts,
            p.mean_u,
            p.mean_w,
            p.covariance,
            p.ci_low,
            p.ci_high,
            p.max_depth_seen,
        ));
    }
    out
}
