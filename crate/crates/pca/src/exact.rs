//! Brute-force oracle for finite rings: the explicit transition matrix of
//! the induced Markov chain, its stationary distribution(s), an ergodicity
//! verdict, and the even/odd majority-ring theorem and flip-conjugacy checks.
//!
//! States are base-`|A|` readings of the ring, cell 0 most significant, the
//! same encoding the samplers use. Everything here is dense and exhaustive;
//! the point is to be an independent referee for the samplers, not to scale.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::error::{Error, Result};
use crate::models;
use crate::rule::LocalRule;

/// Largest state space the dense matrix will materialise.
pub const EXACT_STATE_GUARD: u128 = 1 << 14;

/// Row sums of a product-form transition matrix must come out stochastic.
pub const MATRIX_ROW_TOLERANCE: f64 = 1e-12;

/// Stationary vectors are accepted when the residual is below this.
pub const STATIONARY_RESIDUAL: f64 = 1e-10;

/// Dense row-stochastic transition matrix of a PCA on a finite cell set.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    alphabet_size: u8,
    cells: usize,
    states: usize,
    entries: Vec<f64>,
}

impl TransitionMatrix {
    /// Matrix of `rule` on the ring of `n` cells: the entry at `(x, y)` is
    /// the product over cells of the probability that the word read around
    /// cell `k` in `x` outputs `y_k`.
    pub fn from_rule(rule: &LocalRule, n: usize) -> Result<Self> {
        let k = rule.alphabet().size();
        let reads: Vec<Vec<usize>> = (0..n)
            .map(|c| {
                rule.neighborhood()
                    .iter()
                    .map(|v| (c as i64 + v).rem_euclid(n as i64) as usize)
                    .collect()
            })
            .collect();
        let mut word = vec![0u8; rule.neighborhood().len()];
        Self::from_cell_laws(k, n, |letters, cell, out| {
            for (slot, &p) in word.iter_mut().zip(&reads[cell]) {
                *slot = letters[p];
            }
            out.copy_from_slice(rule.distribution(&word));
        })
    }

    /// Shared builder: `law(letters, cell, out)` writes the output
    /// distribution of `cell` given the full current state `letters`.
    pub(crate) fn from_cell_laws(
        alphabet_size: u8,
        cells: usize,
        mut law: impl FnMut(&[u8], usize, &mut [f64]),
    ) -> Result<Self> {
        if cells == 0 {
            return Err(Error::WindowTooSmall {
                detail: "transition matrix needs at least one cell".into(),
            });
        }
        let k = alphabet_size as usize;
        let states_wide = (k as u128).checked_pow(cells as u32).unwrap_or(u128::MAX);
        if states_wide > EXACT_STATE_GUARD {
            return Err(Error::StateSpaceGuard { states: states_wide, guard: EXACT_STATE_GUARD });
        }
        let states = states_wide as usize;
        let mut entries = vec![0.0f64; states * states];
        let mut letters = vec![0u8; cells];
        let mut dist = vec![0.0f64; k];
        let mut acc: Vec<f64> = Vec::with_capacity(states);
        let mut next: Vec<f64> = Vec::with_capacity(states);
        for x in 0..states {
            decode_state(x, k, &mut letters);
            acc.clear();
            acc.push(1.0);
            for cell in 0..cells {
                law(&letters, cell, &mut dist);
                next.clear();
                for &a in &acc {
                    for &p in &dist {
                        next.push(a * p);
                    }
                }
                std::mem::swap(&mut acc, &mut next);
            }
            let row = &mut entries[x * states..(x + 1) * states];
            row.copy_from_slice(&acc);
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > MATRIX_ROW_TOLERANCE {
                return Err(Error::RuleInvalid {
                    row: x,
                    defect: format!("transition row sums to {sum:.17}, expected 1"),
                });
            }
        }
        Ok(TransitionMatrix { alphabet_size, cells, states, entries })
    }

    pub fn alphabet_size(&self) -> u8 {
        self.alphabet_size
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn entry(&self, x: usize, y: usize) -> f64 {
        self.entries[x * self.states + y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.entries[x * self.states..(x + 1) * self.states]
    }

    pub fn encode(&self, letters: &[u8]) -> usize {
        assert_eq!(letters.len(), self.cells);
        letters
            .iter()
            .fold(0usize, |acc, &a| acc * self.alphabet_size as usize + a as usize)
    }

    pub fn decode(&self, state: usize) -> Vec<u8> {
        let mut letters = vec![0u8; self.cells];
        decode_state(state, self.alphabet_size as usize, &mut letters);
        letters
    }

    /// One step of the distribution dynamics: `pi ↦ pi · Q`.
    pub fn left_multiply(&self, pi: &[f64]) -> Vec<f64> {
        assert_eq!(pi.len(), self.states);
        let mut out = vec![0.0f64; self.states];
        for (x, &px) in pi.iter().enumerate() {
            if px == 0.0 {
                continue;
            }
            for (o, &q) in out.iter_mut().zip(self.row(x)) {
                *o += px * q;
            }
        }
        out
    }
}

fn decode_state(mut index: usize, k: usize, out: &mut [u8]) {
    for slot in out.iter_mut().rev() {
        *slot = (index % k) as u8;
        index /= k;
    }
}

/// Stationary analysis of a finite chain: terminal components of the support
/// graph, one stationary vector per terminal component, cycle periods, and
/// the resulting ergodicity verdict.
#[derive(Debug, Clone)]
pub struct StationaryReport {
    /// States of each terminal strongly-connected component, sorted.
    pub terminal_components: Vec<Vec<usize>>,
    /// One full-length probability vector per terminal component.
    pub stationary: Vec<Vec<f64>>,
    /// gcd of cycle lengths within each terminal component.
    pub periods: Vec<usize>,
    /// `‖πQ − π‖∞` actually achieved, per vector.
    pub residuals: Vec<f64>,
    /// Unique terminal component and aperiodic.
    pub ergodic: bool,
}

impl StationaryReport {
    /// The single stationary vector of an ergodic chain.
    pub fn unique_stationary(&self) -> Option<&[f64]> {
        if self.stationary.len() == 1 {
            Some(&self.stationary[0])
        } else {
            None
        }
    }

    /// CSV export: component, state index, probability.
    pub fn csv(&self) -> String {
        let mut out = String::from("component,state,probability\n");
        for (ci, pi) in self.stationary.iter().enumerate() {
            for (state, &p) in pi.iter().enumerate() {
                if p > 0.0 {
                    out.push_str(&format!("{ci},{state},{p:.17}\n"));
                }
            }
        }
        out
    }
}

/// Full stationary analysis of `matrix`: support-graph terminal components,
/// a linear solve of `πQ = π` per component, periods, and the verdict
/// `ergodic = unique terminal component ∧ aperiodic`.
pub fn stationary(matrix: &TransitionMatrix) -> StationaryReport {
    let states = matrix.states();
    let mut graph: DiGraph<(), (), u32> = DiGraph::with_capacity(states, 0);
    for _ in 0..states {
        graph.add_node(());
    }
    for x in 0..states {
        for (y, &q) in matrix.row(x).iter().enumerate() {
            if q > 0.0 {
                graph.add_edge(NodeIndex::new(x), NodeIndex::new(y), ());
            }
        }
    }
    let components = tarjan_scc(&graph);
    let mut comp_id = vec![usize::MAX; states];
    for (ci, comp) in components.iter().enumerate() {
        for node in comp {
            comp_id[node.index()] = ci;
        }
    }
    let mut terminal_components: Vec<Vec<usize>> = Vec::new();
    for (ci, comp) in components.iter().enumerate() {
        let leaves = comp.iter().any(|node| {
            matrix
                .row(node.index())
                .iter()
                .enumerate()
                .any(|(y, &q)| q > 0.0 && comp_id[y] != ci)
        });
        if !leaves {
            let mut states: Vec<usize> = comp.iter().map(|n| n.index()).collect();
            states.sort_unstable();
            terminal_components.push(states);
        }
    }
    terminal_components.sort();

    let mut stationary_vectors = Vec::new();
    let mut periods = Vec::new();
    let mut residuals = Vec::new();
    for comp in &terminal_components {
        stationary_vectors.push(solve_component(matrix, comp));
        periods.push(component_period(matrix, comp));
        let pi = stationary_vectors.last().expect("just pushed");
        let next = matrix.left_multiply(pi);
        let residual = pi
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        residuals.push(residual);
    }
    let ergodic = terminal_components.len() == 1 && periods.first() == Some(&1);
    StationaryReport {
        terminal_components,
        stationary: stationary_vectors,
        periods,
        residuals,
        ergodic,
    }
}

/// Solve `π Q_C = π`, `Σ π = 1` on one terminal component: LU on
/// `Q_Cᵀ − I` with the last row replaced by ones, then a couple of rounds of
/// iterative refinement to push the residual down.
fn solve_component(matrix: &TransitionMatrix, comp: &[usize]) -> Vec<f64> {
    let m = comp.len();
    let local: HashMap<usize, usize> = comp.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let mut a = DMatrix::<f64>::zeros(m, m);
    for (j, &x) in comp.iter().enumerate() {
        for (y, &q) in matrix.row(x).iter().enumerate() {
            if q > 0.0 {
                let i = local[&y];
                a[(i, j)] += q;
            }
        }
    }
    for d in 0..m {
        a[(d, d)] -= 1.0;
    }
    for j in 0..m {
        a[(m - 1, j)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(m);
    b[m - 1] = 1.0;
    let lu = a.clone().lu();
    let mut pi = lu.solve(&b).expect("terminal component system is nonsingular");
    for _ in 0..3 {
        let r = &b - &a * &pi;
        if r.amax() < 1e-15 {
            break;
        }
        let d = lu.solve(&r).expect("refinement reuses the same factorisation");
        pi += d;
    }
    let mut full = vec![0.0f64; matrix.states()];
    for (i, &s) in comp.iter().enumerate() {
        full[s] = pi[i].max(0.0);
    }
    let total: f64 = full.iter().sum();
    full.iter_mut().for_each(|p| *p /= total);
    full
}

/// Period of a strongly-connected component: gcd over its edges `u → v` of
/// `|level(u) + 1 − level(v)|` for breadth-first levels from any root.
fn component_period(matrix: &TransitionMatrix, comp: &[usize]) -> usize {
    let mut level: HashMap<usize, u64> = HashMap::new();
    level.insert(comp[0], 0);
    let mut queue = std::collections::VecDeque::from([comp[0]]);
    let member: std::collections::HashSet<usize> = comp.iter().copied().collect();
    while let Some(u) = queue.pop_front() {
        let du = level[&u];
        for (v, &q) in matrix.row(u).iter().enumerate() {
            if q > 0.0 && member.contains(&v) && !level.contains_key(&v) {
                level.insert(v, du + 1);
                queue.push_back(v);
            }
        }
    }
    let mut g: u64 = 0;
    for &u in comp {
        let du = level[&u];
        for (v, &q) in matrix.row(u).iter().enumerate() {
            if q > 0.0 && member.contains(&v) {
                g = gcd(g, (du + 1).abs_diff(level[&v]));
            }
        }
    }
    g.max(1) as usize
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// The even/odd dichotomy of the majority-flip ring: even `n` has the pair
/// of alternating states as its unique terminal class (each carrying mass
/// 1/2, period two, not ergodic); odd `n` is ergodic with full support.
pub fn verify_parity_theorem(alpha: f64, n: usize) -> Result<bool> {
    let rule = models::majority(alpha)?;
    let matrix = TransitionMatrix::from_rule(&rule, n)?;
    let report = stationary(&matrix);
    if n % 2 == 0 {
        let alternating = alternating_pair(&matrix);
        let two_point = report.terminal_components.len() == 1
            && report.terminal_components[0] == alternating
            && report.periods == [2]
            && !report.ergodic;
        if !two_point {
            return Ok(false);
        }
        let pi = &report.stationary[0];
        let half = |s: usize| (pi[s] - 0.5).abs() <= STATIONARY_RESIDUAL;
        Ok(half(alternating[0]) && half(alternating[1]))
    } else {
        let full_support = report
            .unique_stationary()
            .is_some_and(|pi| pi.iter().all(|&p| p > 0.0));
        Ok(report.ergodic
            && full_support
            && report.terminal_components[0].len() == matrix.states())
    }
}

fn alternating_pair(matrix: &TransitionMatrix) -> Vec<usize> {
    let n = matrix.cells();
    let a: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
    let b: Vec<u8> = (0..n).map(|i| ((i + 1) % 2) as u8).collect();
    let mut pair = vec![matrix.encode(&a), matrix.encode(&b)];
    pair.sort_unstable();
    pair
}

/// Entrywise check of `Q_Majority = Π_odd · Q_FINAE · Π_even` on the ring of
/// even size `n`, where the `Π`s permute states by flipping the letters at
/// odd (resp. even) cells.
pub fn verify_flip_conjugacy(alpha: f64, n: usize) -> Result<bool> {
    if n % 2 != 0 {
        return Err(Error::ParityError { n });
    }
    let majority = TransitionMatrix::from_rule(&models::majority(alpha)?, n)?;
    let finae = TransitionMatrix::from_rule(&models::finae(alpha)?, n)?;
    let states = majority.states();
    let mut odd_mask = 0usize;
    let mut even_mask = 0usize;
    for i in 0..n {
        let bit = 1usize << (n - 1 - i);
        if i % 2 == 1 {
            odd_mask |= bit;
        } else {
            even_mask |= bit;
        }
    }
    for x in 0..states {
        for y in 0..states {
            let lhs = majority.entry(x, y);
            let rhs = finae.entry(x ^ odd_mask, y ^ even_mask);
            if (lhs - rhs).abs() > 1e-12 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
