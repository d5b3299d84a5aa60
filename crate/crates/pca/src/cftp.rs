//! Perfect sampling from the invariant measure by coupling from the past.
//!
//! Four samplers share one noise discipline: the update writing time `j + 1`
//! consumes `uniform_at(seed, j, k)` for output cell `k`, so restarting from
//! a deeper horizon re-reads exactly the same randomness on the overlap —
//! the property coupling from the past needs to produce unbiased samples.
//! Horizons follow a geometric doubling schedule capped by the budget.
//!
//! * [`cftp_basic_finite`]: track the set of images of *all* ring states
//!   under the shared noise; coalesced when a single state remains.
//! * [`cftp_basic_infinite`]: the same over the dependence cone of a finite
//!   target window on the line, enumerating every configuration of the cone.
//! * [`sample_epca_finite`] / [`sample_epca_infinite`]: drive a single
//!   envelope trajectory from all-`?` instead of enumerating states. When the
//!   envelope run determines every target cell, the basic coupling has
//!   coalesced to the same letters under the same noise, so the two families
//!   agree seed for seed whenever both halt.

use std::time::{Duration, Instant};

use crate::envelope::{set_image_update, EnvelopeLetter, EnvelopeRule};
use crate::error::{Error, Result};
use crate::lattice::{Lattice, Neighborhood};
use crate::noise::NoiseField;
use crate::rule::LocalRule;

/// Guard on exhaustive state enumeration in the basic samplers.
pub const ENUMERATION_GUARD: u128 = 1 << 20;

/// Restart schedule and depth cap for one sampler call.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplerBudget {
    max_depth: u64,
}

impl SamplerBudget {
    pub fn new(max_depth: u64) -> Result<Self> {
        if max_depth == 0 {
            return Err(Error::ParamRange {
                param: "max_depth",
                value: 0.0,
                expected: "at least 1",
            });
        }
        Ok(SamplerBudget { max_depth })
    }

    pub fn max_depth(&self) -> u64 {
        self.max_depth
    }

    /// Strictly increasing horizons `1, 2, 4, ..` ending exactly at
    /// `max_depth`.
    pub fn horizons(&self) -> impl Iterator<Item = u64> {
        let max = self.max_depth;
        let mut next = 1u64;
        let mut done = false;
        std::iter::from_fn(move || {
            if done {
                return None;
            }
            if next >= max {
                done = true;
                return Some(max);
            }
            let h = next;
            next = next.saturating_mul(2);
            Some(h)
        })
    }
}

impl Default for SamplerBudget {
    fn default() -> Self {
        SamplerBudget { max_depth: 1 << 16 }
    }
}

/// A draw from the invariant measure, with the work it took.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PerfectSample {
    /// The sampled cells, in order.
    pub cells: Vec<i64>,
    /// One letter per cell.
    pub letters: Vec<u8>,
    /// Horizon at which the run coalesced.
    pub depth: u64,
    /// Number of horizons attempted (restarts including the successful one).
    pub restarts: u32,
    /// Wall-clock time of the whole call.
    pub elapsed: Duration,
}

/// Outcome of a sampler call: timing out is an expected result for
/// non-ergodic rules, not an error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SampleOutcome {
    Sample(PerfectSample),
    Timeout { depth: u64, restarts: u32 },
}

impl SampleOutcome {
    pub fn is_timeout(&self) -> bool {
        matches!(self, SampleOutcome::Timeout { .. })
    }

    pub fn sample(self) -> Option<PerfectSample> {
        match self {
            SampleOutcome::Sample(s) => Some(s),
            SampleOutcome::Timeout { .. } => None,
        }
    }

    pub fn as_sample(&self) -> Option<&PerfectSample> {
        match self {
            SampleOutcome::Sample(s) => Some(s),
            SampleOutcome::Timeout { .. } => None,
        }
    }
}

/// The cells that can influence `target` after `depth` more steps: iterate
/// `W_{d} = V + W_{d-1}` starting from the target itself. Ring indices wrap.
pub fn dependence_cone(
    lattice: Lattice,
    target: &[i64],
    neighborhood: &Neighborhood,
    depth: u32,
) -> Vec<i64> {
    let mut window: std::collections::BTreeSet<i64> =
        target.iter().map(|&c| lattice.canonical(c)).collect();
    for _ in 0..depth {
        let mut next = std::collections::BTreeSet::new();
        for &c in &window {
            for v in neighborhood.iter() {
                next.insert(lattice.canonical(c + v));
            }
        }
        window = next;
    }
    window.into_iter().collect()
}

/// Lazily grown stack of dependence-cone windows on the line:
/// `window(d)` is sorted and `window(d+1) = V + window(d)`.
pub struct ConeSchedule {
    neighborhood: Neighborhood,
    windows: Vec<Vec<i64>>,
}

impl ConeSchedule {
    pub fn new(target: &[i64], neighborhood: &Neighborhood) -> Result<Self> {
        if target.is_empty() {
            return Err(Error::WindowTooSmall {
                detail: "sampling target must contain at least one cell".into(),
            });
        }
        let mut w0: Vec<i64> = target.to_vec();
        w0.sort_unstable();
        w0.dedup();
        Ok(ConeSchedule {
            neighborhood: neighborhood.clone(),
            windows: vec![w0],
        })
    }

    pub fn window(&mut self, depth: usize) -> &[i64] {
        while self.windows.len() <= depth {
            let last = self.windows.last().expect("nonempty");
            let mut next: std::collections::BTreeSet<i64> = std::collections::BTreeSet::new();
            for &c in last {
                for v in self.neighborhood.iter() {
                    next.insert(c + v);
                }
            }
            self.windows.push(next.into_iter().collect());
        }
        &self.windows[depth]
    }
}

fn decode_base<const CHECK: bool>(mut index: u64, k: u64, out: &mut [u8]) {
    for slot in out.iter_mut().rev() {
        *slot = (index % k) as u8;
        index /= k;
    }
    if CHECK {
        debug_assert_eq!(index, 0);
    }
}

fn ring_guard(k: u8, n: usize) -> Result<u64> {
    if n == 0 {
        return Err(Error::WindowTooSmall {
            detail: "ring size must be at least 1".into(),
        });
    }
    let states = (k as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if states > ENUMERATION_GUARD {
        return Err(Error::StateSpaceGuard { states, guard: ENUMERATION_GUARD });
    }
    Ok(states as u64)
}

/// Basic coupling from the past on a ring: push the set of *all* `|A|^n`
/// states through the shared noise from each horizon; return the sample once
/// a single image remains at time zero.
mod basic_finite {
    use super::*;

    pub(super) struct Stepper<'a> {
        rule: &'a LocalRule,
        n: usize,
        k: u64,
        /// Per output cell, the ring positions its word reads.
        reads: Vec<Vec<usize>>,
        letters: Vec<u8>,
        word: Vec<u8>,
    }

    impl<'a> Stepper<'a> {
        pub(super) fn new(rule: &'a LocalRule, n: usize) -> Self {
            let reads = (0..n)
                .map(|c| {
                    rule.neighborhood()
                        .iter()
                        .map(|v| (c as i64 + v).rem_euclid(n as i64) as usize)
                        .collect()
                })
                .collect();
            Stepper {
                rule,
                n,
                k: rule.alphabet().size() as u64,
                reads,
                letters: vec![0; n],
                word: vec![0; rule.neighborhood().len()],
            }
        }

        pub(super) fn apply(&mut self, state: u64, noise_row: &[f64]) -> u64 {
            decode_base::<true>(state, self.k, &mut self.letters);
            let mut out = 0u64;
            for c in 0..self.n {
                for (slot, &p) in self.word.iter_mut().zip(&self.reads[c]) {
                    *slot = self.letters[p];
                }
                out = out * self.k + self.rule.update(&self.word, noise_row[c]) as u64;
            }
            out
        }
    }
}

pub fn cftp_basic_finite(
    rule: &LocalRule,
    n: usize,
    seed: u64,
    budget: &SamplerBudget,
) -> Result<SampleOutcome> {
    let start = Instant::now();
    let k = rule.alphabet().size();
    let states = ring_guard(k, n)?;
    let noise = NoiseField::new(seed);
    let mut stepper = basic_finite::Stepper::new(rule, n);
    let mut restarts = 0u32;
    let mut noise_row = vec![0.0f64; n];
    for horizon in budget.horizons() {
        restarts += 1;
        let mut set: Vec<u64> = (0..states).collect();
        for j in -(horizon as i64)..0 {
            for (c, slot) in noise_row.iter_mut().enumerate() {
                *slot = noise.at(j, c as i64);
            }
            let mut image: Vec<u64> = set.iter().map(|&s| stepper.apply(s, &noise_row)).collect();
            image.sort_unstable();
            image.dedup();
            set = image;
        }
        if set.len() == 1 {
            let mut letters = vec![0u8; n];
            decode_base::<true>(set[0], k as u64, &mut letters);
            return Ok(SampleOutcome::Sample(PerfectSample {
                cells: (0..n as i64).collect(),
                letters,
                depth: horizon,
                restarts,
                elapsed: start.elapsed(),
            }));
        }
    }
    Ok(SampleOutcome::Timeout { depth: budget.max_depth, restarts })
}

/// Basic coupling from the past for a finite window of the line: enumerate
/// every configuration of the dependence cone and push the set forward level
/// by level. The enumeration guard caps how deep a horizon can be probed; if
/// the cap is reached without coalescence the run reports `Timeout` at the
/// capped depth. `StateSpaceGuard` is returned only when not even the
/// horizon-one cone fits the guard.
pub fn cftp_basic_infinite(
    rule: &LocalRule,
    target: &[i64],
    seed: u64,
    budget: &SamplerBudget,
) -> Result<SampleOutcome> {
    let start = Instant::now();
    let k = rule.alphabet().size() as u64;
    let noise = NoiseField::new(seed);
    let mut cone = ConeSchedule::new(target, rule.neighborhood())?;

    // Deepest horizon whose cone enumeration fits the guard.
    let fits = |cells: usize| (k as u128).checked_pow(cells as u32).is_some_and(|s| s <= ENUMERATION_GUARD);
    if !fits(cone.window(1).len()) {
        return Err(Error::StateSpaceGuard {
            states: (k as u128).saturating_pow(cone.window(1).len() as u32),
            guard: ENUMERATION_GUARD,
        });
    }
    let mut depth_cap = 1u64;
    while depth_cap < budget.max_depth && fits(cone.window(depth_cap as usize + 1).len()) {
        depth_cap += 1;
    }

    let mut restarts = 0u32;
    let mut deepest = 0u64;
    for horizon in budget.horizons() {
        let horizon = horizon.min(depth_cap);
        if horizon <= deepest {
            // The guard cap was already probed; deeper horizons are out of reach.
            return Ok(SampleOutcome::Timeout { depth: deepest, restarts });
        }
        deepest = horizon;
        restarts += 1;

        // Per level d (stepping into depth d-1): positions of each output
        // cell's word inside the source window.
        let mut set: Vec<u64> = {
            let cells = cone.window(horizon as usize).len();
            (0..k.pow(cells as u32)).collect()
        };
        let mut src_letters: Vec<u8> = vec![0; cone.window(horizon as usize).len()];
        let mut word = vec![0u8; rule.neighborhood().len()];
        for d in (1..=horizon as usize).rev() {
            let (src, dst) = {
                // Split borrows: windows are already materialised.
                let src = cone.window(d).to_vec();
                let dst = cone.window(d - 1).to_vec();
                (src, dst)
            };
            let reads: Vec<Vec<usize>> = dst
                .iter()
                .map(|&c| {
                    rule.neighborhood()
                        .iter()
                        .map(|v| src.binary_search(&(c + v)).expect("cone contains the word"))
                        .collect()
                })
                .collect();
            let j = -(d as i64);
            let noise_row: Vec<f64> = dst.iter().map(|&c| noise.at(j, c)).collect();
            src_letters.resize(src.len(), 0);
            let mut image: Vec<u64> = set
                .iter()
                .map(|&s| {
                    decode_base::<true>(s, k, &mut src_letters);
                    let mut out = 0u64;
                    for (i, r) in reads.iter().zip(&noise_row) {
                        for (slot, &p) in word.iter_mut().zip(i) {
                            *slot = src_letters[p];
                        }
                        out = out * k + rule.update(&word, *r) as u64;
                    }
                    out
                })
                .collect();
            image.sort_unstable();
            image.dedup();
            set = image;
        }
        if set.len() == 1 {
            let cells = cone.window(0).to_vec();
            let mut letters = vec![0u8; cells.len()];
            decode_base::<true>(set[0], k, &mut letters);
            return Ok(SampleOutcome::Sample(PerfectSample {
                cells,
                letters,
                depth: horizon,
                restarts,
                elapsed: start.elapsed(),
            }));
        }
    }
    Ok(SampleOutcome::Timeout { depth: deepest, restarts })
}

const UNKNOWN_DIGIT: u8 = 2;

/// Envelope coupling from the past on a ring: a single trajectory from the
/// all-`?` configuration. Binary rules use the precomputed `(q0, q1)` table;
/// larger alphabets fall back to the set-image coupling.
pub fn sample_epca_finite(
    rule: &LocalRule,
    n: usize,
    seed: u64,
    budget: &SamplerBudget,
) -> Result<SampleOutcome> {
    if n == 0 {
        return Err(Error::WindowTooSmall {
            detail: "ring size must be at least 1".into(),
        });
    }
    let start = Instant::now();
    let noise = NoiseField::new(seed);
    let reads: Vec<Vec<usize>> = (0..n)
        .map(|c| {
            rule.neighborhood()
                .iter()
                .map(|v| (c as i64 + v).rem_euclid(n as i64) as usize)
                .collect()
        })
        .collect();

    if rule.alphabet().is_binary() {
        let env = EnvelopeRule::binary(rule)?;
        let rows = env.binary_rows();
        let mut current = vec![0u8; n];
        let mut next = vec![0u8; n];
        let mut restarts = 0u32;
        for horizon in budget.horizons() {
            restarts += 1;
            current.iter_mut().for_each(|c| *c = UNKNOWN_DIGIT);
            for j in -(horizon as i64)..0 {
                for c in 0..n {
                    let mut idx = 0usize;
                    for &p in &reads[c] {
                        idx = idx * 3 + current[p] as usize;
                    }
                    let [q0, q1] = rows[idx];
                    let r = noise.at(j, c as i64);
                    next[c] = if r < q0 {
                        0
                    } else if r >= 1.0 - q1 {
                        1
                    } else {
                        UNKNOWN_DIGIT
                    };
                }
                std::mem::swap(&mut current, &mut next);
            }
            if current.iter().all(|&c| c != UNKNOWN_DIGIT) {
                return Ok(SampleOutcome::Sample(PerfectSample {
                    cells: (0..n as i64).collect(),
                    letters: current,
                    depth: horizon,
                    restarts,
                    elapsed: start.elapsed(),
                }));
            }
        }
        return Ok(SampleOutcome::Timeout { depth: budget.max_depth, restarts });
    }

    // General alphabets: set-image coupling over subset letters.
    let full = EnvelopeLetter::unknown(rule.alphabet().size());
    let mut current = vec![full; n];
    let mut next = vec![full; n];
    let mut word = vec![full; rule.neighborhood().len()];
    let mut restarts = 0u32;
    for horizon in budget.horizons() {
        restarts += 1;
        current.iter_mut().for_each(|c| *c = full);
        for j in -(horizon as i64)..0 {
            for c in 0..n {
                for (slot, &p) in word.iter_mut().zip(&reads[c]) {
                    *slot = current[p];
                }
                next[c] = set_image_update(rule, &word, noise.at(j, c as i64));
            }
            std::mem::swap(&mut current, &mut next);
        }
        if current.iter().all(|c| c.is_singleton()) {
            return Ok(SampleOutcome::Sample(PerfectSample {
                cells: (0..n as i64).collect(),
                letters: current.iter().map(|c| c.as_letter().expect("singleton")).collect(),
                depth: horizon,
                restarts,
                elapsed: start.elapsed(),
            }));
        }
    }
    Ok(SampleOutcome::Timeout { depth: budget.max_depth, restarts })
}

/// Envelope coupling from the past for a finite window of the line: one
/// all-`?` trajectory over the dependence cone per horizon. No enumeration,
/// so no state-space guard: unlike [`cftp_basic_infinite`] this probes any
/// depth the budget allows.
pub fn sample_epca_infinite(
    rule: &LocalRule,
    target: &[i64],
    seed: u64,
    budget: &SamplerBudget,
) -> Result<SampleOutcome> {
    let start = Instant::now();
    let noise = NoiseField::new(seed);
    let mut cone = ConeSchedule::new(target, rule.neighborhood())?;
    let binary = rule.alphabet().is_binary();
    let env = if binary { Some(EnvelopeRule::binary(rule)?) } else { None };
    let full = EnvelopeLetter::unknown(rule.alphabet().size());

    let mut restarts = 0u32;
    for horizon in budget.horizons() {
        restarts += 1;
        let top = cone.window(horizon as usize).len();
        // Subset letters as digits (binary) or masks (general), over the
        // shrinking windows.
        let mut current: Vec<u16> = vec![if binary { UNKNOWN_DIGIT as u16 } else { full.mask() }; top];
        let mut word_masks = vec![full; rule.neighborhood().len()];
        for d in (1..=horizon as usize).rev() {
            let src = cone.window(d).to_vec();
            let dst = cone.window(d - 1).to_vec();
            let j = -(d as i64);
            let mut next: Vec<u16> = Vec::with_capacity(dst.len());
            for &c in &dst {
                let r = noise.at(j, c);
                if let Some(env) = &env {
                    let mut idx = 0usize;
                    for v in rule.neighborhood().iter() {
                        let p = src.binary_search(&(c + v)).expect("cone contains the word");
                        idx = idx * 3 + current[p] as usize;
                    }
                    let (q0, q1) = env.binary_row(idx);
                    next.push(if r < q0 {
                        0
                    } else if r >= 1.0 - q1 {
                        1
                    } else {
                        UNKNOWN_DIGIT as u16
                    });
                } else {
                    for (slot, v) in word_masks.iter_mut().zip(rule.neighborhood().iter()) {
                        let p = src.binary_search(&(c + v)).expect("cone contains the word");
                        *slot = EnvelopeLetter::from_mask(current[p]).expect("nonempty");
                    }
                    next.push(set_image_update(rule, &word_masks, r).mask());
                }
            }
            current = next;
        }
        let determined = if binary {
            current.iter().all(|&c| c != UNKNOWN_DIGIT as u16)
        } else {
            current.iter().all(|&c| u16::is_power_of_two(c))
        };
        if determined {
            let letters = if binary {
                current.iter().map(|&c| c as u8).collect()
            } else {
                current.iter().map(|&c| c.trailing_zeros() as u8).collect()
            };
            return Ok(SampleOutcome::Sample(PerfectSample {
                cells: cone.window(0).to_vec(),
                letters,
                depth: horizon,
                restarts,
                elapsed: start.elapsed(),
            }));
        }
    }
    Ok(SampleOutcome::Timeout { depth: budget.max_depth, restarts })
}
