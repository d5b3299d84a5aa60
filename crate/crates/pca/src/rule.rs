//! Local transition rules: a stochastic table indexed by neighborhood words.
//!
//! A rule assigns to every word `w` in `A^V` a probability distribution over
//! the alphabet. Words are encoded base-`|A|` with the *first* neighborhood
//! offset as the most significant digit; the same convention is reused for
//! ring states and envelope words everywhere in this crate.

use crate::alphabet::Alphabet;
use crate::error::{Error, Result};
use crate::lattice::Neighborhood;

/// Row sums may deviate from 1 by at most this much.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct LocalRule {
    alphabet: Alphabet,
    neighborhood: Neighborhood,
    /// `table[word_index][letter]`, one row per word in `A^V`.
    table: Vec<Vec<f64>>,
}

impl LocalRule {
    pub fn new(alphabet: Alphabet, neighborhood: Neighborhood, table: Vec<Vec<f64>>) -> Result<Self> {
        let rule = LocalRule { alphabet, neighborhood, table };
        rule.validate()?;
        Ok(rule)
    }

    /// Check table shape, entry ranges, and row sums.
    pub fn validate(&self) -> Result<()> {
        let k = self.alphabet.size() as usize;
        let expected_rows = self.word_count();
        if self.table.len() != expected_rows {
            return Err(Error::RuleInvalid {
                row: self.table.len(),
                defect: format!("table has {} rows, expected {expected_rows}", self.table.len()),
            });
        }
        for (row, dist) in self.table.iter().enumerate() {
            if dist.len() != k {
                return Err(Error::RuleInvalid {
                    row,
                    defect: format!("row has {} entries, expected {k}", dist.len()),
                });
            }
            for (letter, &p) in dist.iter().enumerate() {
                if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                    return Err(Error::RuleInvalid {
                        row,
                        defect: format!("entry {letter} is {p}, outside [0, 1]"),
                    });
                }
            }
            let sum: f64 = dist.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::RuleInvalid {
                    row,
                    defect: format!("row sums to {sum}, expected 1 within {ROW_SUM_TOLERANCE:e}"),
                });
            }
        }
        Ok(())
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn neighborhood(&self) -> &Neighborhood {
        &self.neighborhood
    }

    pub fn table(&self) -> &[Vec<f64>] {
        &self.table
    }

    /// Number of neighborhood words, `|A|^|V|`.
    pub fn word_count(&self) -> usize {
        (self.alphabet.size() as usize).pow(self.neighborhood.len() as u32)
    }

    /// Base-`|A|` index of a word, first offset most significant.
    pub fn word_index(&self, word: &[u8]) -> usize {
        debug_assert_eq!(word.len(), self.neighborhood.len());
        let k = self.alphabet.size() as usize;
        word.iter().fold(0usize, |acc, &a| {
            debug_assert!(self.alphabet.contains(a));
            acc * k + a as usize
        })
    }

    /// Inverse of [`word_index`](Self::word_index).
    pub fn decode_word(&self, mut index: usize) -> Vec<u8> {
        let k = self.alphabet.size() as usize;
        let len = self.neighborhood.len();
        let mut word = vec![0u8; len];
        for slot in word.iter_mut().rev() {
            *slot = (index % k) as u8;
            index /= k;
        }
        word
    }

    /// The distribution assigned to a word.
    pub fn distribution(&self, word: &[u8]) -> &[f64] {
        &self.table[self.word_index(word)]
    }

    pub fn row(&self, index: usize) -> &[f64] {
        &self.table[index]
    }

    /// The canonical update function: partition `[0, 1)` into consecutive
    /// half-open intervals of lengths `f(w)(0), f(w)(1), ..` in letter order
    /// and return the letter whose interval contains `r`.
    #[inline]
    pub fn update(&self, word: &[u8], r: f64) -> u8 {
        self.update_row(self.word_index(word), r)
    }

    /// [`update`](Self::update) addressed by row index (hot paths pre-encode words).
    #[inline]
    pub fn update_row(&self, row: usize, r: f64) -> u8 {
        let dist = &self.table[row];
        let mut acc = 0.0;
        for (letter, &p) in dist.iter().enumerate().take(dist.len() - 1) {
            acc += p;
            if r < acc {
                return letter as u8;
            }
        }
        (dist.len() - 1) as u8
    }

    /// True when every row is a point mass (a deterministic cellular automaton).
    pub fn is_deterministic(&self) -> bool {
        self.table.iter().all(|row| row.iter().any(|&p| p == 1.0))
    }
}
