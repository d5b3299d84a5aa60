//! The model zoo: the binary rules exercised by the experiment suites.
//!
//! All constructors return fully validated [`LocalRule`] tables. Word order
//! follows the crate-wide convention (first neighborhood offset = most
//! significant digit).

use crate::alphabet::Alphabet;
use crate::error::{Error, Result};
use crate::lattice::Neighborhood;
use crate::rule::LocalRule;

/// Majority is known to lose uniqueness of its invariant measure on the line
/// once the reliability parameter reaches this value.
pub const MAJORITY_NONUNIQUE_ALPHA: f64 = 0.996;

fn check_range(param: &'static str, value: f64, lo: f64, hi: f64, open: bool) -> Result<()> {
    let ok = if open { value > lo && value < hi } else { (lo..=hi).contains(&value) };
    if !ok || !value.is_finite() {
        return Err(Error::ParamRange {
            param,
            value,
            expected: if open { "the open interval (0, 1)" } else { "[0, 1]" },
        });
    }
    Ok(())
}

/// Noisy XOR: cell `k` becomes `x_k xor x_{k+1}`, flipped with probability
/// `epsilon`.
pub fn noisy_xor(epsilon: f64) -> Result<LocalRule> {
    check_range("epsilon", epsilon, 0.0, 1.0, false)?;
    let v = Neighborhood::new(vec![0, 1])?;
    let mut table = Vec::with_capacity(4);
    for w in 0..4u8 {
        let (x, y) = (w >> 1, w & 1);
        let xor = x ^ y;
        let mut row = vec![0.0, 0.0];
        row[xor as usize] = 1.0 - epsilon;
        row[1 - xor as usize] = epsilon;
        table.push(row);
    }
    LocalRule::new(Alphabet::binary(), v, table)
}

/// Percolation PCA on an arbitrary neighborhood: with probability `alpha`
/// take the maximum of the word, otherwise output 0.
pub fn percolation(offsets: &[i64], alpha: f64) -> Result<LocalRule> {
    check_range("alpha", alpha, 0.0, 1.0, false)?;
    let v = Neighborhood::new(offsets.to_vec())?;
    let words = 1usize << v.len();
    let mut table = Vec::with_capacity(words);
    for w in 0..words {
        let max = if w == 0 { 0 } else { 1 };
        let mut row = vec![0.0, 0.0];
        row[0] += 1.0 - alpha;
        row[max] += alpha;
        table.push(row);
    }
    LocalRule::new(Alphabet::binary(), v, table)
}

/// Stavskaya's PCA: [`percolation`] with neighborhood `{0, 1}`.
pub fn stavskaya(alpha: f64) -> Result<LocalRule> {
    percolation(&[0, 1], alpha)
}

fn majority_of(x: u8, y: u8, z: u8) -> u8 {
    if x as u32 + y as u32 + z as u32 >= 2 {
        1
    } else {
        0
    }
}

/// Noisy majority: with probability `alpha` the majority of the three
/// neighbors, otherwise the flip of the centre cell. Equivalently: alternating
/// words flip deterministically, all other words keep their centre with
/// probability `alpha`.
pub fn majority(alpha: f64) -> Result<LocalRule> {
    check_range("alpha", alpha, 0.0, 1.0, true)?;
    let v = Neighborhood::new(vec![-1, 0, 1])?;
    let mut table = Vec::with_capacity(8);
    for w in 0..8u8 {
        let (x, y, z) = (w >> 2 & 1, w >> 1 & 1, w & 1);
        let mut row = vec![0.0, 0.0];
        row[majority_of(x, y, z) as usize] += alpha;
        row[1 - y as usize] += 1.0 - alpha;
        table.push(row);
    }
    LocalRule::new(Alphabet::binary(), v, table)
}

/// Noisy minority: [`majority`] read through letter-flipped inputs.
pub fn minority(alpha: f64) -> Result<LocalRule> {
    let maj = majority(alpha)?;
    let table = (0..8usize)
        .map(|w| maj.row(w ^ 0b111).to_vec())
        .collect();
    LocalRule::new(
        Alphabet::binary(),
        Neighborhood::new(vec![-1, 0, 1])?,
        table,
    )
}

/// Flip-if-not-all-equal: with probability `alpha` apply the elementary rule
/// that flips the centre unless all three neighbors agree, otherwise keep the
/// centre.
pub fn finae(alpha: f64) -> Result<LocalRule> {
    check_range("alpha", alpha, 0.0, 1.0, true)?;
    let v = Neighborhood::new(vec![-1, 0, 1])?;
    let mut table = Vec::with_capacity(8);
    for w in 0..8u8 {
        let (x, y, z) = (w >> 2 & 1, w >> 1 & 1, w & 1);
        let flipped = if x == y && y == z { y } else { 1 - y };
        let mut row = vec![0.0, 0.0];
        row[flipped as usize] += alpha;
        row[y as usize] += 1.0 - alpha;
        table.push(row);
    }
    LocalRule::new(Alphabet::binary(), v, table)
}

/// A two-neighbor PCA with a unique invariant measure that is *not*
/// attractive: perfect-sampling runs on it are expected to time out, which
/// makes it the suite's negative control.
pub fn chma10() -> LocalRule {
    let v = Neighborhood::new(vec![0, 1]).expect("static neighborhood");
    let table = vec![
        vec![0.5, 0.5], // word 00
        vec![1.0, 0.0], // word 01
        vec![0.0, 1.0], // word 10
        vec![0.5, 0.5], // word 11
    ];
    LocalRule::new(Alphabet::binary(), v, table).expect("static table")
}

/// Which parameter a zoo entry takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelParam {
    /// `alpha` in the open interval (0, 1).
    AlphaOpen,
    /// `alpha` in the closed interval [0, 1].
    AlphaClosed,
    /// `epsilon` in the closed interval [0, 1].
    Epsilon,
    /// No parameter.
    None,
}

/// A zoo entry: the name accepted by the CLI plus its parameter shape.
#[derive(Debug, Clone, Copy)]
pub struct ModelSpec {
    pub name: &'static str,
    pub param: ModelParam,
    pub summary: &'static str,
}

/// Every named model this crate ships.
pub fn zoo() -> &'static [ModelSpec] {
    &[
        ModelSpec {
            name: "noisy-xor",
            param: ModelParam::Epsilon,
            summary: "xor of the right pair, flipped with probability epsilon",
        },
        ModelSpec {
            name: "stavskaya",
            param: ModelParam::AlphaClosed,
            summary: "max of the right pair with probability alpha, else 0",
        },
        ModelSpec {
            name: "percolation",
            param: ModelParam::AlphaClosed,
            summary: "max over the neighborhood with probability alpha, else 0",
        },
        ModelSpec {
            name: "majority",
            param: ModelParam::AlphaOpen,
            summary: "three-cell majority with probability alpha, else flip the centre",
        },
        ModelSpec {
            name: "minority",
            param: ModelParam::AlphaOpen,
            summary: "majority read through flipped inputs",
        },
        ModelSpec {
            name: "finae",
            param: ModelParam::AlphaOpen,
            summary: "flip-if-not-all-equal with probability alpha, else keep the centre",
        },
        ModelSpec {
            name: "chma10",
            param: ModelParam::None,
            summary: "two-neighbor rule whose unique invariant measure is not attractive",
        },
    ]
}

/// Build a zoo model by name. `param` feeds `alpha`/`epsilon` where the model
/// takes one; `offsets` only applies to `percolation` (default `{0, 1}`).
pub fn build(name: &str, param: Option<f64>, offsets: Option<&[i64]>) -> Result<LocalRule> {
    let need = |param: Option<f64>, what: &'static str| {
        param.ok_or(Error::ParamRange {
            param: what,
            value: f64::NAN,
            expected: "a value (the model takes a parameter)",
        })
    };
    match name {
        "noisy-xor" => noisy_xor(need(param, "epsilon")?),
        "stavskaya" => stavskaya(need(param, "alpha")?),
        "percolation" => percolation(offsets.unwrap_or(&[0, 1]), need(param, "alpha")?),
        "majority" => majority(need(param, "alpha")?),
        "minority" => minority(need(param, "alpha")?),
        "finae" => finae(need(param, "alpha")?),
        "chma10" => Ok(chma10()),
        _ => Err(Error::ModelFormat(format!("unknown model '{name}'"))),
    }
}
