//! Envelope rules: bounding chains over the power-set alphabet.
//!
//! An envelope letter is a nonempty subset of the base alphabet; a cell
//! holding `{0, 1}` means "could be either". The envelope rule drives one
//! trajectory of subset letters so that every base trajectory using the same
//! noise stays inside it, which is what turns coupling from the past into a
//! single-trajectory algorithm: once every cell is a singleton, *all* initial
//! conditions have coalesced.
//!
//! For the binary alphabet the envelope distribution for a word `y` is fully
//! described by the pair
//!
//! ```text
//! q0(y) = min { f(x)(0) : x in y },   q1(y) = min { f(x)(1) : x in y },
//! ```
//!
//! with the remaining mass `1 - q0 - q1` on `?`. The canonical coupling sends
//! a uniform `r` to `0` when `r < q0`, to `1` when `r >= 1 - q1`, and to `?`
//! in between, which nests with the base rule's interval coupling.
//!
//! For larger alphabets the envelope probabilities come from
//! inclusion-exclusion over the min-table `m_v(x) = min_{u in v} f(u)(x)`;
//! that signed sum can go negative, in which case the envelope does not exist
//! as a table ([`Error::EnvelopeNegative`]) and only the set-image coupling
//! ([`set_image_update`]) remains available.

use crate::error::{Error, Result};
use crate::lattice::Neighborhood;
use crate::rule::LocalRule;

/// Largest neighborhood for which the binary envelope table (3^|V| rows) is
/// precomputed eagerly.
pub const MAX_ENVELOPE_NEIGHBORHOOD: usize = 12;

/// Guard on the number of rows of a general envelope table.
pub const GENERAL_TABLE_GUARD: u128 = 1 << 20;

/// Published bounds on the critical probability of oriented site percolation
/// used by the ergodicity certificates: `1/|V| <= p_c <= 53/54`.
pub const PERCOLATION_UPPER_BOUND: f64 = 53.0 / 54.0;

/// A nonempty subset of the alphabet, packed as a bitmask.
///
/// Digit encoding (used for table indices and serialized envelopes):
/// `digit = mask - 1`, so for the binary alphabet `0 -> {0}`, `1 -> {1}`,
/// `2 -> {0,1} = ?` — subset words are base-3 strings over `{0, 1, ?}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EnvelopeLetter(u16);

impl EnvelopeLetter {
    /// The singleton `{a}`.
    pub fn letter(a: u8) -> Self {
        debug_assert!(a < 16);
        EnvelopeLetter(1 << a)
    }

    /// The full set over a `k`-letter alphabet (the `?` letter).
    pub fn unknown(k: u8) -> Self {
        debug_assert!(k >= 1 && k <= 16);
        EnvelopeLetter(((1u32 << k) - 1) as u16)
    }

    pub fn from_mask(mask: u16) -> Result<Self> {
        if mask == 0 {
            return Err(Error::ParamRange {
                param: "envelope letter mask",
                value: 0.0,
                expected: "a nonempty subset",
            });
        }
        Ok(EnvelopeLetter(mask))
    }

    pub fn from_digit(digit: usize) -> Self {
        EnvelopeLetter(digit as u16 + 1)
    }

    pub fn mask(&self) -> u16 {
        self.0
    }

    pub fn digit(&self) -> usize {
        self.0 as usize - 1
    }

    pub fn contains(&self, a: u8) -> bool {
        self.0 >> a & 1 == 1
    }

    pub fn is_singleton(&self) -> bool {
        self.0.is_power_of_two()
    }

    /// The letter if this is a singleton.
    pub fn as_letter(&self) -> Option<u8> {
        self.is_singleton().then(|| self.0.trailing_zeros() as u8)
    }

    pub fn len(&self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn subset_of(&self, other: EnvelopeLetter) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(&self, other: EnvelopeLetter) -> EnvelopeLetter {
        EnvelopeLetter(self.0 | other.0)
    }

    pub fn letters(&self) -> impl Iterator<Item = u8> + '_ {
        (0..16u8).filter(|&a| self.contains(a))
    }
}

impl std::fmt::Display for EnvelopeLetter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.0 {
            1 => write!(f, "0"),
            2 => write!(f, "1"),
            3 => write!(f, "?"),
            m => write!(f, "{{{}}}", (0..16).filter(|a| m >> a & 1 == 1).map(|a| a.to_string()).collect::<Vec<_>>().join("")),
        }
    }
}

enum EnvelopeTable {
    /// `rows[v] = [q0, q1]` indexed by base-3 subset words.
    Binary(Vec<[f64; 2]>),
    /// `rows[v][digit]` over all `2^k - 1` subset letters, indexed base-(2^k - 1).
    General(Vec<Vec<f64>>),
}

/// A base rule together with its precomputed envelope table.
pub struct EnvelopeRule {
    base: LocalRule,
    table: EnvelopeTable,
}

impl EnvelopeRule {
    /// Build the binary envelope table: `3^|V|` rows of `(q0, q1)`.
    pub fn binary(rule: &LocalRule) -> Result<Self> {
        if !rule.alphabet().is_binary() {
            return Err(Error::ParamRange {
                param: "alphabet size",
                value: rule.alphabet().size() as f64,
                expected: "the binary alphabet",
            });
        }
        let len = rule.neighborhood().len();
        if len > MAX_ENVELOPE_NEIGHBORHOOD {
            return Err(Error::StateSpaceGuard {
                states: 3u128.pow(len as u32),
                guard: 3u128.pow(MAX_ENVELOPE_NEIGHBORHOOD as u32),
            });
        }
        let q0 = min_table_binary(rule, 0);
        let q1 = min_table_binary(rule, 1);
        let rows = q0.into_iter().zip(q1).map(|(a, b)| [a, b]).collect();
        Ok(EnvelopeRule { base: rule.clone(), table: EnvelopeTable::Binary(rows) })
    }

    /// Build the general envelope table by inclusion-exclusion over the
    /// min-table. Fails with [`Error::EnvelopeNegative`] when the signed sum
    /// drops below `-1e-12` (values in `[-1e-12, 0)` are clamped to zero).
    pub fn general(rule: &LocalRule) -> Result<Self> {
        let k = rule.alphabet().size() as u32;
        let m = (1usize << k) - 1; // number of envelope letters
        let len = rule.neighborhood().len() as u32;
        let row_count = (m as u128).checked_pow(len).filter(|&c| c <= GENERAL_TABLE_GUARD);
        let row_count = match row_count {
            Some(c) => c as usize,
            None => {
                return Err(Error::StateSpaceGuard {
                    states: (m as u128).saturating_pow(len),
                    guard: GENERAL_TABLE_GUARD,
                })
            }
        };

        // mins[x - 1][v] = min over base words u in v of f(u)(x), for every
        // nonempty subset x of the alphabet.
        let mins: Vec<Vec<f64>> = (1..=m as u16).map(|x| min_table_general(rule, x)).collect();

        let mut rows = Vec::with_capacity(row_count);
        for v in 0..row_count {
            let mut row = vec![0.0f64; m];
            for y in 1..=m as u16 {
                let mut value = 0.0;
                let bits_y = y.count_ones();
                // Signed sum over nonempty submasks x of y.
                let mut x = y;
                loop {
                    let term = mins[x as usize - 1][v];
                    if (bits_y - x.count_ones()) % 2 == 0 {
                        value += term;
                    } else {
                        value -= term;
                    }
                    x = (x - 1) & y;
                    if x == 0 {
                        break;
                    }
                }
                if value < 0.0 {
                    if value < -1e-12 {
                        return Err(Error::EnvelopeNegative { word: v, subset: y, value });
                    }
                    value = 0.0;
                }
                row[y as usize - 1] = value;
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::RuleInvalid {
                    row: v,
                    defect: format!("envelope row sums to {sum}"),
                });
            }
            rows.push(row);
        }
        Ok(EnvelopeRule { base: rule.clone(), table: EnvelopeTable::General(rows) })
    }

    pub fn base(&self) -> &LocalRule {
        &self.base
    }

    pub fn neighborhood(&self) -> &Neighborhood {
        self.base.neighborhood()
    }

    /// Number of envelope letters, `2^|A| - 1`.
    pub fn letter_count(&self) -> usize {
        (1usize << self.base.alphabet().size()) - 1
    }

    pub fn is_binary_table(&self) -> bool {
        matches!(self.table, EnvelopeTable::Binary(_))
    }

    /// Base-`(2^k - 1)` index of a subset word, first offset most significant.
    pub fn word_index(&self, word: &[EnvelopeLetter]) -> usize {
        debug_assert_eq!(word.len(), self.neighborhood().len());
        let m = self.letter_count();
        word.iter().fold(0usize, |acc, l| acc * m + l.digit())
    }

    pub fn decode_word(&self, mut index: usize) -> Vec<EnvelopeLetter> {
        let m = self.letter_count();
        let mut word = vec![EnvelopeLetter::from_digit(0); self.neighborhood().len()];
        for slot in word.iter_mut().rev() {
            *slot = EnvelopeLetter::from_digit(index % m);
            index /= m;
        }
        word
    }

    pub fn row_count(&self) -> usize {
        match &self.table {
            EnvelopeTable::Binary(rows) => rows.len(),
            EnvelopeTable::General(rows) => rows.len(),
        }
    }

    /// `(q0, q1)` for a binary subset word, addressed by row index.
    ///
    /// Panics on general tables.
    #[inline]
    pub fn binary_row(&self, index: usize) -> (f64, f64) {
        match &self.table {
            EnvelopeTable::Binary(rows) => (rows[index][0], rows[index][1]),
            EnvelopeTable::General(_) => panic!("binary_row on a general envelope table"),
        }
    }

    /// The envelope distribution at a subset word, as probabilities over the
    /// `2^k - 1` subset letters in digit order. For binary tables this is
    /// `[q0, q1, 1 - q0 - q1]`.
    pub fn distribution(&self, word: &[EnvelopeLetter]) -> Vec<f64> {
        let v = self.word_index(word);
        match &self.table {
            EnvelopeTable::Binary(rows) => {
                let [q0, q1] = rows[v];
                vec![q0, q1, (1.0 - q0 - q1).max(0.0)]
            }
            EnvelopeTable::General(rows) => rows[v].clone(),
        }
    }

    /// The canonical envelope update for binary tables: thresholds on `r`.
    ///
    /// Panics on general tables; use [`set_image_update`] there.
    #[inline]
    pub fn update(&self, word: &[EnvelopeLetter], r: f64) -> EnvelopeLetter {
        let (q0, q1) = self.binary_row(self.word_index(word));
        if r < q0 {
            EnvelopeLetter::letter(0)
        } else if r >= 1.0 - q1 {
            EnvelopeLetter::letter(1)
        } else {
            EnvelopeLetter::unknown(2)
        }
    }

    /// Raw binary rows for sampler hot paths.
    pub(crate) fn binary_rows(&self) -> &[[f64; 2]] {
        match &self.table {
            EnvelopeTable::Binary(rows) => rows,
            EnvelopeTable::General(_) => panic!("binary_rows on a general envelope table"),
        }
    }
}

/// Min-table DP for the binary alphabet: for every base-3 subset word `v`,
/// the minimum of column `letter` over the base words inside `v`.
///
/// Splitting a `?` digit into `0` and `1` strictly decreases the base-3
/// index, so one ascending pass suffices.
fn min_table_binary(rule: &LocalRule, letter: usize) -> Vec<f64> {
    min_table_binary_with(rule.neighborhood().len(), |base_index| {
        rule.row(base_index)[letter]
    })
}

/// The same dynamic program over an arbitrary base-row accessor:
/// `base(u)` is the probability the word with binary encoding `u` gives the
/// letter of interest. Shared with the per-cell tables of non-homogeneous
/// rules, whose rows do not live in a `LocalRule`.
pub(crate) fn min_table_binary_with(len: usize, base: impl Fn(usize) -> f64) -> Vec<f64> {
    let rows = 3usize.pow(len as u32);
    let mut g = vec![0.0f64; rows];
    let mut digits = vec![0usize; len];
    for v in 0..rows {
        // Decode base-3 digits of v.
        let mut idx = v;
        for d in digits.iter_mut().rev() {
            *d = idx % 3;
            idx /= 3;
        }
        match digits.iter().position(|&d| d == 2) {
            None => {
                // A base word: digits are letters.
                let base_index = digits.iter().fold(0usize, |acc, &d| acc * 2 + d);
                g[v] = base(base_index);
            }
            Some(pos) => {
                let w = 3usize.pow((len - 1 - pos) as u32);
                g[v] = g[v - 2 * w].min(g[v - w]);
            }
        }
    }
    g
}

/// General-alphabet min-table DP over base-(2^k - 1) subset words for one
/// subset column `x`: `m_v(x) = min_{u in v} sum_{a in x} f(u)(a)`.
fn min_table_general(rule: &LocalRule, x: u16) -> Vec<f64> {
    let k = rule.alphabet().size() as usize;
    let m = (1usize << k) - 1;
    let len = rule.neighborhood().len();
    let rows = m.pow(len as u32);
    // Subset sums of each base row over x.
    let col: Vec<f64> = (0..rule.word_count())
        .map(|u| {
            rule.row(u)
                .iter()
                .enumerate()
                .filter(|(a, _)| x >> a & 1 == 1)
                .map(|(_, &p)| p)
                .sum()
        })
        .collect();
    let mut g = vec![0.0f64; rows];
    let mut digits = vec![0usize; len];
    for v in 0..rows {
        let mut idx = v;
        for d in digits.iter_mut().rev() {
            *d = idx % m;
            idx /= m;
        }
        match digits.iter().position(|&d| !(d + 1).is_power_of_two()) {
            None => {
                // Every digit is a singleton mask: a base word.
                let base_index = digits
                    .iter()
                    .fold(0usize, |acc, &d| acc * k + (d + 1).trailing_zeros() as usize);
                g[v] = col[base_index];
            }
            Some(pos) => {
                let mask = (digits[pos] + 1) as u16;
                let low = mask & mask.wrapping_neg();
                let rest = mask ^ low;
                let w = m.pow((len - 1 - pos) as u32);
                let d = digits[pos];
                let v_low = v - (d - (low as usize - 1)) * w;
                let v_rest = v - (d - (rest as usize - 1)) * w;
                g[v] = g[v_low].min(g[v_rest]);
            }
        }
    }
    g
}

/// The set-image coupling: push every base word inside the subset word
/// through the canonical update at the same `r` and collect the outputs.
/// Sound for any alphabet; for binary rules it coincides with
/// [`EnvelopeRule::update`].
pub fn set_image_update(rule: &LocalRule, word: &[EnvelopeLetter], r: f64) -> EnvelopeLetter {
    let mut out = 0u16;
    let mut base = vec![0u8; word.len()];
    let mut choice = vec![0u8; word.len()]; // index into each letter's members
    let members: Vec<Vec<u8>> = word.iter().map(|l| l.letters().collect()).collect();
    loop {
        for (slot, (m, &c)) in base.iter_mut().zip(members.iter().zip(&choice)) {
            *slot = m[c as usize];
        }
        out |= 1 << rule.update(&base, r);
        // Odometer over the product of the subset letters.
        let mut pos = word.len();
        loop {
            if pos == 0 {
                return EnvelopeLetter::from_mask(out).expect("nonempty image");
            }
            pos -= 1;
            choice[pos] += 1;
            if (choice[pos] as usize) < members[pos].len() {
                break;
            }
            choice[pos] = 0;
        }
    }
}

/// Finite-cells ergodicity criterion for binary rules: the envelope chain on
/// any finite cell set determines every cell eventually (and the sampler
/// halts almost surely) iff `min_x f(x)(0) + min_x f(x)(1) > 0`.
pub fn epca_ergodic_finite(rule: &LocalRule) -> Result<bool> {
    let (q0, q1) = full_word_mins(rule)?;
    Ok(q0 + q1 > 0.0)
}

/// How the infinite-lattice certificate was decided.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ErgodicityVerdict {
    /// `q?(?^V)` is below the percolation lower bound `1/|V|`: the `?`
    /// process dies out, the PCA is ergodic, and the envelope sampler halts
    /// almost surely on any finite window.
    ErgodicCertified { q_unknown: f64, bound: f64 },
    /// The envelope chain provably never determines a cell.
    NonErgodicCertified(NonErgodicCertificate),
    /// Neither bound fires; the envelope criterion is one-sided.
    Unknown { q_unknown: f64, lower_bound: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NonErgodicCertificate {
    /// The all-`?` word maps to `?` with probability one, so the all-`?`
    /// configuration is absorbing for the envelope.
    UnknownAbsorbing,
    /// Every subset word that is not a base word keeps `?` with probability
    /// above the percolation upper bound `53/54`, so `?` survives forever.
    AboveUpperBound { min_q_unknown: f64, bound: f64 },
}

impl std::fmt::Display for ErgodicityVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ErgodicityVerdict::ErgodicCertified { q_unknown, bound } => write!(
                f,
                "ErgodicCertified: q?(all-?) = {q_unknown:.6} < {bound:.6} = 1/|V|"
            ),
            ErgodicityVerdict::NonErgodicCertified(NonErgodicCertificate::UnknownAbsorbing) => {
                write!(f, "NonErgodicCertified: the all-? word is absorbing for the envelope")
            }
            ErgodicityVerdict::NonErgodicCertified(NonErgodicCertificate::AboveUpperBound {
                min_q_unknown,
                bound,
            }) => write!(
                f,
                "NonErgodicCertified: every proper subset word keeps ? with probability >= {min_q_unknown:.6} > {bound:.6} = 53/54"
            ),
            ErgodicityVerdict::Unknown { q_unknown, lower_bound } => write!(
                f,
                "Unknown: q?(all-?) = {q_unknown:.6} lies in [{lower_bound:.6}, {:.6}]",
                PERCOLATION_UPPER_BOUND
            ),
        }
    }
}

fn full_word_mins(rule: &LocalRule) -> Result<(f64, f64)> {
    if !rule.alphabet().is_binary() {
        return Err(Error::ParamRange {
            param: "alphabet size",
            value: rule.alphabet().size() as f64,
            expected: "the binary alphabet",
        });
    }
    let mut min0 = f64::INFINITY;
    let mut min1 = f64::INFINITY;
    for u in 0..rule.word_count() {
        let row = rule.row(u);
        min0 = min0.min(row[0]);
        min1 = min1.min(row[1]);
    }
    Ok((min0, min1))
}

/// One-sided ergodicity certificates for binary rules on the infinite line,
/// obtained by comparing the envelope's `?` marginal with oriented site
/// percolation.
pub fn epca_ergodicity_bounds(rule: &LocalRule) -> Result<ErgodicityVerdict> {
    let (min0, min1) = full_word_mins(rule)?;
    let q_unknown = 1.0 - min0 - min1;
    if q_unknown >= 1.0 - 1e-12 {
        return Ok(ErgodicityVerdict::NonErgodicCertified(
            NonErgodicCertificate::UnknownAbsorbing,
        ));
    }
    let lower_bound = 1.0 / rule.neighborhood().len() as f64;
    if q_unknown < lower_bound {
        return Ok(ErgodicityVerdict::ErgodicCertified { q_unknown, bound: lower_bound });
    }
    // Upper-bound route: the smallest chance of keeping ? over all subset
    // words that contain at least one ? digit.
    let env = EnvelopeRule::binary(rule)?;
    let len = rule.neighborhood().len();
    let mut min_q = f64::INFINITY;
    for v in 0..env.row_count() {
        let mut idx = v;
        let mut has_unknown = false;
        for _ in 0..len {
            if idx % 3 == 2 {
                has_unknown = true;
                break;
            }
            idx /= 3;
        }
        if !has_unknown {
            continue;
        }
        let (q0, q1) = env.binary_row(v);
        min_q = min_q.min(1.0 - q0 - q1);
    }
    if min_q > PERCOLATION_UPPER_BOUND {
        return Ok(ErgodicityVerdict::NonErgodicCertified(
            NonErgodicCertificate::AboveUpperBound { min_q_unknown: min_q, bound: PERCOLATION_UPPER_BOUND },
        ));
    }
    Ok(ErgodicityVerdict::Unknown { q_unknown, lower_bound })
}
