//! Synchronous forward simulation on a ring.

use crate::config::{Configuration, SpaceTimeDiagram};
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::noise::NoiseField;
use crate::rule::LocalRule;

/// One synchronous update of a ring configuration: cell `k` reads the word at
/// `k + V` (wrapping) and consumes `noise_row[k]`.
pub fn step(rule: &LocalRule, config: &Configuration, noise_row: &[f64]) -> Result<Configuration> {
    let n = match config.lattice() {
        Lattice::Ring(n) => n,
        Lattice::Line => return Err(Error::RingRequired),
    };
    assert_eq!(noise_row.len(), n, "noise row must carry one uniform per cell");
    let mut word = vec![0u8; rule.neighborhood().len()];
    let mut next = Vec::with_capacity(n);
    for k in 0..n {
        for (slot, v) in word.iter_mut().zip(rule.neighborhood().iter()) {
            *slot = config.get(k as i64 + v);
        }
        next.push(rule.update(&word, noise_row[k]));
    }
    Configuration::ring(next, rule.alphabet())
}

/// Run `steps` synchronous updates from `init`, drawing the row-`t` noise from
/// `uniform_at(seed, t, k)`. The returned diagram has `steps + 1` rows with
/// the initial configuration first.
pub fn simulate(rule: &LocalRule, init: &Configuration, steps: u32, seed: u64) -> Result<SpaceTimeDiagram> {
    let n = match init.lattice() {
        Lattice::Ring(n) => n,
        Lattice::Line => return Err(Error::RingRequired),
    };
    let noise = NoiseField::new(seed);
    let mut rows = Vec::with_capacity(steps as usize + 1);
    rows.push(init.clone());
    let mut current = init.clone();
    let mut row = vec![0.0f64; n];
    for t in 0..steps {
        for (k, slot) in row.iter_mut().enumerate() {
            *slot = noise.at(t as i64, k as i64);
        }
        current = step(rule, &current, &row)?;
        rows.push(current.clone());
    }
    SpaceTimeDiagram::new(rows)
}
