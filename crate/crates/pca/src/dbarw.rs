//! Double branching annihilating random walk and its duality with the
//! two-point statistics of the flip-if-not-all-equal rule.
//!
//! The walk lives on ℤ: each particle independently moves left (α/2), moves
//! right (α/2), stays and branches to both sides (α/2), or stays put
//! (1 − 3α/2); afterwards every site keeps one particle if an odd number
//! landed there and none otherwise. The duality says the probability that
//! two tagged cells disagree at time `t` under the flip rule started from
//! `1_A` equals the probability that an odd number of walk particles sit in
//! `A` at time `t` when the walk starts from `{k, l}`.

use std::collections::{BTreeMap, BTreeSet};

use crate::cftp::dependence_cone;
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::models;
use crate::noise::{derive_seed, NoiseField};
use crate::stats::{wilson_interval, WilsonInterval};

/// Walk parameter; all four move probabilities are nonnegative exactly when
/// α ≤ 2/3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DbarwParams {
    alpha: f64,
}

impl DbarwParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 || alpha > 2.0 / 3.0 {
            return Err(Error::ParamRange {
                param: "alpha",
                value: alpha,
                expected: "in (0, 2/3]",
            });
        }
        Ok(DbarwParams { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// Finite set of occupied sites.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ParticleState {
    occupied: BTreeSet<i64>,
}

impl ParticleState {
    pub fn new(cells: impl IntoIterator<Item = i64>) -> Self {
        ParticleState { occupied: cells.into_iter().collect() }
    }

    pub fn empty() -> Self {
        ParticleState::default()
    }

    pub fn occupied(&self) -> impl Iterator<Item = i64> + '_ {
        self.occupied.iter().copied()
    }

    pub fn contains(&self, cell: i64) -> bool {
        self.occupied.contains(&cell)
    }

    pub fn len(&self) -> usize {
        self.occupied.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occupied.is_empty()
    }
}

/// One synchronous step: all moves resolve first (one uniform per particle,
/// addressed by the particle's site), then each site keeps the parity of the
/// particles that arrived.
pub fn dbarw_step(
    state: &ParticleState,
    params: &DbarwParams,
    noise: impl Fn(i64) -> f64,
) -> ParticleState {
    let a = params.alpha;
    let mut landed: BTreeMap<i64, u32> = BTreeMap::new();
    for k in state.occupied() {
        let r = noise(k);
        if r < a / 2.0 {
            *landed.entry(k - 1).or_default() += 1;
        } else if r < a {
            *landed.entry(k + 1).or_default() += 1;
        } else if r < 1.5 * a {
            for site in [k - 1, k, k + 1] {
                *landed.entry(site).or_default() += 1;
            }
        } else {
            *landed.entry(k).or_default() += 1;
        }
    }
    ParticleState {
        occupied: landed
            .into_iter()
            .filter(|(_, count)| count % 2 == 1)
            .map(|(site, _)| site)
            .collect(),
    }
}

/// A Monte-Carlo frequency with its 95% score interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub successes: u64,
    pub trials: u64,
    pub interval: WilsonInterval,
}

impl Estimate {
    fn from_counts(successes: u64, trials: u64) -> Result<Self> {
        Ok(Estimate { successes, trials, interval: wilson_interval(successes, trials)? })
    }

    pub fn value(&self) -> f64 {
        self.interval.estimate
    }
}

/// Frequency of `x_k^t ≠ x_l^t` under the flip-if-not-all-equal rule with
/// parameter `params.alpha`, started from the indicator of `A`, simulated
/// exactly on the dependence cone of `{k, l}` at horizon `t`.
pub fn finae_two_point(
    params: &DbarwParams,
    initial: &[i64],
    k: i64,
    l: i64,
    t: u32,
    trials: u64,
    seed: u64,
) -> Result<Estimate> {
    let rule = models::finae(params.alpha)?;
    let occupied: BTreeSet<i64> = initial.iter().copied().collect();
    // Windows shrink toward the two observed cells as time advances.
    let windows: Vec<Vec<i64>> = (0..=t)
        .map(|s| dependence_cone(Lattice::Line, &[k, l], rule.neighborhood(), t - s))
        .collect();
    let stream = derive_seed(seed, 1);
    let mut successes = 0u64;
    let mut word = vec![0u8; rule.neighborhood().len()];
    for trial in 0..trials {
        let noise = NoiseField::new(derive_seed(stream, trial));
        let mut current: Vec<u8> = windows[0]
            .iter()
            .map(|c| occupied.contains(c) as u8)
            .collect();
        for s in 0..t as usize {
            let (src, dst) = (&windows[s], &windows[s + 1]);
            let mut next = Vec::with_capacity(dst.len());
            for &c in dst {
                for (slot, v) in word.iter_mut().zip(rule.neighborhood().iter()) {
                    let p = src.binary_search(&(c + v)).expect("cone contains the word");
                    *slot = current[p];
                }
                next.push(rule.update(&word, noise.at(s as i64, c)));
            }
            current = next;
        }
        let last = &windows[t as usize];
        let xk = current[last.binary_search(&k).expect("target in window")];
        let xl = current[last.binary_search(&l).expect("target in window")];
        if xk != xl {
            successes += 1;
        }
    }
    Estimate::from_counts(successes, trials)
}

fn run_walk_trials(
    params: &DbarwParams,
    window: &[i64],
    k: i64,
    l: i64,
    t: u32,
    trials: u64,
    seed: u64,
) -> (u64, u64) {
    let stream = derive_seed(seed, 2);
    let window: BTreeSet<i64> = window.iter().copied().collect();
    let mut odd = 0u64;
    let mut hit = 0u64;
    for trial in 0..trials {
        let noise = NoiseField::new(derive_seed(stream, trial));
        let mut state = ParticleState::new([k, l]);
        for s in 0..t as i64 {
            state = dbarw_step(&state, params, |cell| noise.at(s, cell));
            if state.is_empty() {
                break;
            }
        }
        let inside = state.occupied().filter(|c| window.contains(c)).count();
        if inside % 2 == 1 {
            odd += 1;
        }
        if inside > 0 {
            hit += 1;
        }
    }
    (odd, hit)
}

/// Frequency of an odd number of walk particles inside `window` at time `t`,
/// starting from particles at `k` and `l`.
pub fn dbarw_parity(
    params: &DbarwParams,
    window: &[i64],
    k: i64,
    l: i64,
    t: u32,
    trials: u64,
    seed: u64,
) -> Result<Estimate> {
    let (odd, _) = run_walk_trials(params, window, k, l, t, trials, seed);
    Estimate::from_counts(odd, trials)
}

/// Frequency of *any* walk particle inside `window` at time `t` — the upper
/// bound side of the two-point inequality.
pub fn dbarw_occupation(
    params: &DbarwParams,
    window: &[i64],
    k: i64,
    l: i64,
    t: u32,
    trials: u64,
    seed: u64,
) -> Result<Estimate> {
    let (_, hit) = run_walk_trials(params, window, k, l, t, trials, seed);
    Estimate::from_counts(hit, trials)
}

/// Both sides of the duality relation, estimated independently.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualityReport {
    pub finae: Estimate,
    pub dbarw: Estimate,
    /// The two 95% intervals overlap.
    pub passes: bool,
}

impl DualityReport {
    pub fn csv(&self) -> String {
        let mut out = String::from("side,successes,trials,estimate,ci_low,ci_high\n");
        for (name, e) in [("finae", &self.finae), ("dbarw", &self.dbarw)] {
            out.push_str(&format!(
                "{name},{},{},{:.8},{:.8},{:.8}\n",
                e.successes,
                e.trials,
                e.value(),
                e.interval.low,
                e.interval.high
            ));
        }
        out
    }
}

/// Estimate `ℙ(x_k^t ≠ x_l^t)` from `1_A` and `ℙ(odd occupancy of A)` from
/// `{k, l}` with `trials` runs each; the report passes when the two score
/// intervals overlap.
pub fn duality_check(
    params: &DbarwParams,
    window: &[i64],
    k: i64,
    l: i64,
    t: u32,
    trials: u64,
    seed: u64,
) -> Result<DualityReport> {
    let finae = finae_two_point(params, window, k, l, t, trials, seed)?;
    let dbarw = dbarw_parity(params, window, k, l, t, trials, seed)?;
    let passes = finae.interval.overlaps(&dbarw.interval);
    Ok(DualityReport { finae, dbarw, passes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::SplitMix64;

    fn params(alpha: f64) -> DbarwParams {
        DbarwParams::new(alpha).unwrap()
    }

    #[test]
    fn parameter_range() {
        assert!(DbarwParams::new(0.0).is_err());
        assert!(DbarwParams::new(0.67).is_err());
        assert!(DbarwParams::new(2.0 / 3.0).is_ok());
    }

    #[test]
    fn empty_state_stays_empty() {
        let next = dbarw_step(&ParticleState::empty(), &params(0.5), |_| 0.0);
        assert!(next.is_empty());
    }

    #[test]
    fn single_particle_moves() {
        let one = ParticleState::new([5]);
        let p = params(0.5);
        // Thresholds at alpha/2 = 0.25, alpha = 0.5, 1.5*alpha = 0.75.
        let left = dbarw_step(&one, &p, |_| 0.1);
        assert_eq!(left, ParticleState::new([4]));
        let right = dbarw_step(&one, &p, |_| 0.3);
        assert_eq!(right, ParticleState::new([6]));
        let branch = dbarw_step(&one, &p, |_| 0.6);
        assert_eq!(branch, ParticleState::new([4, 5, 6]));
        let stay = dbarw_step(&one, &p, |_| 0.9);
        assert_eq!(stay, ParticleState::new([5]));
    }

    #[test]
    fn collisions_annihilate() {
        let p = params(0.5);
        // 0 moves right, 2 moves left: both land on 1 and cancel.
        let state = ParticleState::new([0, 2]);
        let next = dbarw_step(&state, &p, |k| if k == 0 { 0.3 } else { 0.1 });
        assert!(next.is_empty());
        // 0 branches, 1 stays: site 1 receives two (cancel), 0 and -1 survive.
        let state = ParticleState::new([0, 1]);
        let next = dbarw_step(&state, &p, |k| if k == 0 { 0.6 } else { 0.9 });
        assert_eq!(next, ParticleState::new([-1, 0]));
    }

    /// Moves preserve the count, branching adds two, annihilation removes an
    /// even number: total parity is invariant.
    #[test]
    fn particle_count_parity_is_conserved() {
        let p = params(0.6);
        let mut rng = SplitMix64::new(0xabcdef);
        for run in 0..200 {
            let mut cells = BTreeSet::new();
            for _ in 0..(run % 7) + 1 {
                cells.insert((rng.next_u64() % 21) as i64 - 10);
            }
            let mut state = ParticleState::new(cells);
            let parity = state.len() % 2;
            for step in 0..50 {
                let base = rng.next_u64();
                let field = NoiseField::new(base);
                state = dbarw_step(&state, &p, |cell| field.at(step, cell));
                assert_eq!(state.len() % 2, parity, "run {run} step {step}");
            }
        }
    }

    #[test]
    fn two_point_at_time_zero_is_deterministic() {
        let p = params(0.5);
        let inside_outside = finae_two_point(&p, &[0], 0, 1, 0, 50, 7).unwrap();
        assert_eq!(inside_outside.value(), 1.0);
        let both_inside = finae_two_point(&p, &[0, 1], 0, 1, 0, 50, 7).unwrap();
        assert_eq!(both_inside.value(), 0.0);
        let parity_inside = dbarw_parity(&p, &[0], 0, 1, 0, 50, 7).unwrap();
        assert_eq!(parity_inside.value(), 1.0);
        let parity_disjoint = dbarw_parity(&p, &[5, 6], 0, 1, 0, 50, 7).unwrap();
        assert_eq!(parity_disjoint.value(), 0.0);
    }

    /// Exhaustive one-step enumeration for A = {0}, k = 0, l = 1: on the
    /// flip side, cell 0 reads (0,1,0) and keeps its letter with probability
    /// 1−α while cell 1 reads (1,0,0) and keeps its letter with probability
    /// 1−α, independently, so they differ with probability α² + (1−α)².
    /// On the walk side, the particle at 0 lands on site 0 with probability
    /// 1−α (stay or branch) and the particle at 1 lands there with
    /// probability α (left or branch), independently; odd occupancy of {0}
    /// is again α² + (1−α)².
    #[test]
    fn one_step_enumeration_oracle() {
        for alpha in [0.5, 0.6] {
            let p = params(alpha);
            let expected = alpha * alpha + (1.0 - alpha) * (1.0 - alpha);
            let trials = 40_000;
            let se = (expected * (1.0 - expected) / trials as f64).sqrt();
            let f = finae_two_point(&p, &[0], 0, 1, 1, trials, 99).unwrap();
            assert!(
                (f.value() - expected).abs() < 3.0 * se,
                "finae {} vs {expected}",
                f.value()
            );
            let d = dbarw_parity(&p, &[0], 0, 1, 1, trials, 99).unwrap();
            assert!(
                (d.value() - expected).abs() < 3.0 * se,
                "dbarw {} vs {expected}",
                d.value()
            );
        }
    }

    #[test]
    fn duality_holds_at_small_horizons() {
        let p = params(0.5);
        for t in [0, 1, 2] {
            let report = duality_check(&p, &[0], 0, 1, t, 20_000, 5).unwrap();
            assert!(report.passes, "t = {t}: {report:?}");
        }
        let csv = duality_check(&p, &[0], 0, 1, 1, 100, 5).unwrap().csv();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.lines().nth(1).unwrap().starts_with("finae,"));
    }

    /// Odd occupancy implies occupancy, so the parity estimate can never
    /// exceed the hit estimate on shared runs; across the duality, the
    /// two-point probability is bounded by the hit probability up to CI
    /// noise.
    #[test]
    fn parity_is_bounded_by_occupation() {
        let p = params(0.5);
        let window = [-1, 0, 1];
        let parity = dbarw_parity(&p, &window, 0, 1, 3, 10_000, 11).unwrap();
        let hit = dbarw_occupation(&p, &window, 0, 1, 3, 10_000, 11).unwrap();
        assert!(parity.successes <= hit.successes);
        let finae = finae_two_point(&p, &window, 0, 1, 3, 10_000, 11).unwrap();
        assert!(finae.interval.low <= hit.interval.high);
    }

    #[test]
    fn estimators_are_reproducible() {
        let p = params(0.5);
        let a = finae_two_point(&p, &[0, 2], 0, 1, 3, 500, 42).unwrap();
        let b = finae_two_point(&p, &[0, 2], 0, 1, 3, 500, 42).unwrap();
        assert_eq!(a, b);
        let c = dbarw_parity(&p, &[0, 2], 0, 1, 3, 500, 42).unwrap();
        let d = dbarw_parity(&p, &[0, 2], 0, 1, 3, 500, 42).unwrap();
        assert_eq!(c, d);
    }
}
