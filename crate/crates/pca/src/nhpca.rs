//! Non-homogeneous PCA: each cell carries its own neighborhood and
//! transition table. The main use is the boundary restriction of a
//! translation-invariant rule to a finite window: interior cells keep the
//! rule, the cells just outside get a constant law with empty neighborhood,
//! and the whole thing becomes a finite chain that can be both perfectly
//! sampled (envelope coupling, cellwise tables) and solved exactly.

use crate::cftp::{PerfectSample, SampleOutcome, SamplerBudget};
use crate::envelope::min_table_binary_with;
use crate::error::{Error, Result};
use crate::exact::TransitionMatrix;
use crate::noise::NoiseField;
use crate::rule::{LocalRule, ROW_SUM_TOLERANCE};

use crate::alphabet::Alphabet;
use std::time::Instant;

/// One cell of a non-homogeneous PCA: the absolute cells it reads and its
/// transition table (`|A|^{neighbors}` rows, first neighbor most
/// significant). An empty neighbor list means a constant law (one row).
#[derive(Debug, Clone, PartialEq)]
pub struct CellRule {
    neighbors: Vec<i64>,
    table: Vec<Vec<f64>>,
}

impl CellRule {
    pub fn new(neighbors: Vec<i64>, table: Vec<Vec<f64>>) -> Self {
        CellRule { neighbors, table }
    }

    pub fn constant(law: Vec<f64>) -> Self {
        CellRule { neighbors: Vec::new(), table: vec![law] }
    }

    pub fn neighbors(&self) -> &[i64] {
        &self.neighbors
    }

    pub fn table(&self) -> &[Vec<f64>] {
        &self.table
    }

    pub fn is_constant(&self) -> bool {
        self.neighbors.is_empty()
    }

    fn validate(&self, cell: i64, position: usize, alphabet: &Alphabet) -> Result<()> {
        let k = alphabet.size() as usize;
        let expected_rows = k
            .checked_pow(self.neighbors.len() as u32)
            .ok_or(Error::StateSpaceGuard { states: u128::MAX, guard: 0 })?;
        if self.table.len() != expected_rows {
            return Err(Error::RuleInvalid {
                row: position,
                defect: format!(
                    "cell {cell}: table has {} rows, expected {expected_rows}",
                    self.table.len()
                ),
            });
        }
        for (w, row) in self.table.iter().enumerate() {
            if row.len() != k {
                return Err(Error::RuleInvalid {
                    row: w,
                    defect: format!("cell {cell}: row width {}, expected {k}", row.len()),
                });
            }
            let mut sum = 0.0;
            for &p in row {
                if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                    return Err(Error::RuleInvalid {
                        row: w,
                        defect: format!("cell {cell}: entry {p} outside [0, 1]"),
                    });
                }
                sum += p;
            }
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::RuleInvalid {
                    row: w,
                    defect: format!("cell {cell}: row sums to {sum}, expected 1"),
                });
            }
        }
        Ok(())
    }
}

/// A finite PCA with per-cell neighborhoods and tables.
#[derive(Debug, Clone)]
pub struct NhPca {
    alphabet: Alphabet,
    cells: Vec<i64>,
    rules: Vec<CellRule>,
    /// For each cell, the positions of its neighbors inside `cells`.
    reads: Vec<Vec<usize>>,
}

impl NhPca {
    /// `cells` must be strictly increasing; `rules` is parallel to it, and
    /// every referenced neighbor must itself be a cell.
    pub fn new(alphabet: Alphabet, cells: Vec<i64>, rules: Vec<CellRule>) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::WindowTooSmall {
                detail: "non-homogeneous PCA needs at least one cell".into(),
            });
        }
        if cells.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::WindowTooSmall {
                detail: "cell list must be strictly increasing".into(),
            });
        }
        if rules.len() != cells.len() {
            return Err(Error::WindowTooSmall {
                detail: format!("{} cells but {} cell rules", cells.len(), rules.len()),
            });
        }
        let mut reads = Vec::with_capacity(cells.len());
        for (position, (&cell, rule)) in cells.iter().zip(&rules).enumerate() {
            rule.validate(cell, position, &alphabet)?;
            let mut positions = Vec::with_capacity(rule.neighbors.len());
            for &u in &rule.neighbors {
                match cells.binary_search(&u) {
                    Ok(p) => positions.push(p),
                    Err(_) => {
                        return Err(Error::RuleInvalid {
                            row: position,
                            defect: format!("cell {cell} reads {u}, which is not a cell"),
                        })
                    }
                }
            }
            reads.push(positions);
        }
        Ok(NhPca { alphabet, cells, rules, reads })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn cells(&self) -> &[i64] {
        &self.cells
    }

    pub fn rule_at(&self, cell: i64) -> Option<&CellRule> {
        self.cells.binary_search(&cell).ok().map(|p| &self.rules[p])
    }

    /// Dense transition matrix of the induced chain on `A^{cells}`.
    pub fn transition_matrix(&self) -> Result<TransitionMatrix> {
        let k = self.alphabet.size();
        TransitionMatrix::from_cell_laws(k, self.cells.len(), |letters, position, out| {
            let rule = &self.rules[position];
            let word = self.reads[position]
                .iter()
                .fold(0usize, |acc, &p| acc * k as usize + letters[p] as usize);
            out.copy_from_slice(&rule.table[word]);
        })
    }
}

/// The boundary restriction of a rule: the domain keeps the rule, the
/// boundary cells (reachable from the domain through the neighborhood but
/// outside it) are refreshed i.i.d. from `boundary_law` each step.
#[derive(Debug, Clone)]
pub struct Restriction {
    nh: NhPca,
    domain: Vec<i64>,
    boundary: Vec<i64>,
    boundary_law: Vec<f64>,
}

impl Restriction {
    pub fn nh(&self) -> &NhPca {
        &self.nh
    }

    pub fn into_nh(self) -> NhPca {
        self.nh
    }

    pub fn domain(&self) -> &[i64] {
        &self.domain
    }

    pub fn boundary(&self) -> &[i64] {
        &self.boundary
    }

    pub fn boundary_law(&self) -> &[f64] {
        &self.boundary_law
    }
}

/// Restrict `rule` to the finite domain `D`: the cell set becomes
/// `D ∪ (D + V)`, cells of `D` keep the rule with absolute neighbors, and
/// the remaining boundary cells get the constant law `nu`.
pub fn restrict(rule: &LocalRule, domain: &[i64], nu: &[f64]) -> Result<Restriction> {
    if domain.is_empty() {
        return Err(Error::WindowTooSmall {
            detail: "restriction domain must be nonempty".into(),
        });
    }
    let k = rule.alphabet().size() as usize;
    if nu.len() != k {
        return Err(Error::RuleInvalid {
            row: 0,
            defect: format!("boundary law has {} entries, expected {k}", nu.len()),
        });
    }
    let mut domain: Vec<i64> = domain.to_vec();
    domain.sort_unstable();
    domain.dedup();
    let mut cells: std::collections::BTreeSet<i64> = domain.iter().copied().collect();
    for &u in &domain {
        for v in rule.neighborhood().iter() {
            cells.insert(u + v);
        }
    }
    let cells: Vec<i64> = cells.into_iter().collect();
    let boundary: Vec<i64> = cells
        .iter()
        .copied()
        .filter(|c| domain.binary_search(c).is_err())
        .collect();
    let interior_table: Vec<Vec<f64>> =
        (0..rule.word_count()).map(|w| rule.row(w).to_vec()).collect();
    let rules: Vec<CellRule> = cells
        .iter()
        .map(|&c| {
            if domain.binary_search(&c).is_ok() {
                let neighbors = rule.neighborhood().iter().map(|v| c + v).collect();
                CellRule::new(neighbors, interior_table.clone())
            } else {
                CellRule::constant(nu.to_vec())
            }
        })
        .collect();
    let nh = NhPca::new(rule.alphabet().clone(), cells, rules)?;
    Ok(Restriction { nh, domain, boundary, boundary_law: nu.to_vec() })
}

/// Envelope coupling from the past for a binary non-homogeneous PCA: one
/// all-`?` trajectory per horizon, with a per-cell threshold table. Constant
/// cells are never `?`, so boundary randomness propagates inward.
pub fn sample_restriction(nh: &NhPca, seed: u64, budget: &SamplerBudget) -> Result<SampleOutcome> {
    if !nh.alphabet.is_binary() {
        return Err(Error::ParamRange {
            param: "alphabet",
            value: nh.alphabet.size() as f64,
            expected: "binary alphabet for the envelope sampler",
        });
    }
    let start = Instant::now();
    // Per cell: rows of (q0, q1) over base-3 words of its neighbors.
    let env_rows: Vec<Vec<[f64; 2]>> = nh
        .rules
        .iter()
        .map(|rule| {
            let len = rule.neighbors.len();
            let q0 = min_table_binary_with(len, |u| rule.table[u][0]);
            let q1 = min_table_binary_with(len, |u| rule.table[u][1]);
            q0.into_iter().zip(q1).map(|(a, b)| [a, b]).collect()
        })
        .collect();
    let noise = NoiseField::new(seed);
    let m = nh.cells.len();
    const UNKNOWN: u8 = 2;
    let mut current = vec![UNKNOWN; m];
    let mut next = vec![UNKNOWN; m];
    let mut restarts = 0u32;
    for horizon in budget.horizons() {
        restarts += 1;
        current.iter_mut().for_each(|c| *c = UNKNOWN);
        for j in -(horizon as i64)..0 {
            for (position, rows) in env_rows.iter().enumerate() {
                let idx = nh.reads[position]
                    .iter()
                    .fold(0usize, |acc, &p| acc * 3 + current[p] as usize);
                let [q0, q1] = rows[idx];
                let r = noise.at(j, nh.cells[position]);
                next[position] = if r < q0 {
                    0
                } else if r >= 1.0 - q1 {
                    1
                } else {
                    UNKNOWN
                };
            }
            std::mem::swap(&mut current, &mut next);
        }
        if current.iter().all(|&c| c != UNKNOWN) {
            return Ok(SampleOutcome::Sample(PerfectSample {
                cells: nh.cells.clone(),
                letters: current,
                depth: horizon,
                restarts,
                elapsed: start.elapsed(),
            }));
        }
    }
    Ok(SampleOutcome::Timeout { depth: budget.max_depth(), restarts })
}

/// Project a sample of the whole cell set down to a target window.
pub fn extend_measure_window(sample: &PerfectSample, target: &[i64]) -> Result<Vec<u8>> {
    let mut letters = Vec::with_capacity(target.len());
    let mut missing = Vec::new();
    for &cell in target {
        match sample.cells.binary_search(&cell) {
            Ok(p) => letters.push(sample.letters[p]),
            Err(_) => missing.push(cell),
        }
    }
    if missing.is_empty() {
        Ok(letters)
    } else {
        Err(Error::WindowOutOfDomain { window: missing })
    }
}
