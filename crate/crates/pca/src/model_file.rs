//! JSON interchange for rules: `{ "alphabet": k, "neighborhood": [offsets],
//! "table": [[p, ...], ...] }` with rows indexed base-`|A|`, first offset
//! most significant. Non-homogeneous rules add a per-cell section, and
//! envelope tables export with the base-3 row convention (`?` is digit 2).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::alphabet::Alphabet;
use crate::envelope::EnvelopeRule;
use crate::error::{Error, Result};
use crate::lattice::Neighborhood;
use crate::nhpca::{CellRule, NhPca};
use crate::rule::LocalRule;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    alphabet: u8,
    neighborhood: Vec<i64>,
    table: Vec<Vec<f64>>,
}

fn format_error(err: serde_json::Error) -> Error {
    Error::ModelFormat(format!(
        "model file line {}, column {}: {err}",
        err.line(),
        err.column()
    ))
}

pub fn rule_to_json(rule: &LocalRule) -> String {
    let file = ModelFile {
        alphabet: rule.alphabet().size(),
        neighborhood: rule.neighborhood().offsets().to_vec(),
        table: (0..rule.word_count()).map(|w| rule.row(w).to_vec()).collect(),
    };
    serde_json::to_string_pretty(&file).expect("plain data serializes")
}

pub fn rule_from_json(text: &str) -> Result<LocalRule> {
    let file: ModelFile = serde_json::from_str(text).map_err(format_error)?;
    let alphabet = Alphabet::new(file.alphabet)?;
    let neighborhood = Neighborhood::new(file.neighborhood)?;
    LocalRule::new(alphabet, neighborhood, file.table)
}

pub fn save_rule(path: impl AsRef<Path>, rule: &LocalRule) -> Result<()> {
    std::fs::write(path, rule_to_json(rule))?;
    Ok(())
}

pub fn load_rule(path: impl AsRef<Path>) -> Result<LocalRule> {
    rule_from_json(&std::fs::read_to_string(path)?)
}

#[derive(Serialize, Deserialize)]
struct NhCellSection {
    cell: i64,
    neighbors: Vec<i64>,
    table: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct NhModelFile {
    alphabet: u8,
    cells: Vec<NhCellSection>,
}

pub fn nhpca_to_json(nh: &NhPca) -> String {
    let file = NhModelFile {
        alphabet: nh.alphabet().size(),
        cells: nh
            .cells()
            .iter()
            .map(|&cell| {
                let rule = nh.rule_at(cell).expect("cell exists");
                NhCellSection {
                    cell,
                    neighbors: rule.neighbors().to_vec(),
                    table: rule.table().to_vec(),
                }
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("plain data serializes")
}

pub fn nhpca_from_json(text: &str) -> Result<NhPca> {
    let file: NhModelFile = serde_json::from_str(text).map_err(format_error)?;
    let alphabet = Alphabet::new(file.alphabet)?;
    let mut sections = file.cells;
    sections.sort_by_key(|s| s.cell);
    let cells: Vec<i64> = sections.iter().map(|s| s.cell).collect();
    let rules: Vec<CellRule> = sections
        .into_iter()
        .map(|s| CellRule::new(s.neighbors, s.table))
        .collect();
    NhPca::new(alphabet, cells, rules)
}

#[derive(Serialize)]
struct EnvelopeFile {
    alphabet: u8,
    neighborhood: Vec<i64>,
    letters: Vec<String>,
    table: Vec<Vec<f64>>,
}

/// Export the envelope table for inspection: one row per envelope word
/// (base-3 over `0`, `1`, `?` for binary alphabets), one column per envelope
/// letter.
pub fn envelope_to_json(env: &EnvelopeRule) -> String {
    let letters: Vec<String> = (0..env.letter_count())
        .map(|d| crate::envelope::EnvelopeLetter::from_digit(d).to_string())
        .collect();
    let table: Vec<Vec<f64>> = (0..env.row_count())
        .map(|w| env.distribution(&env.decode_word(w)))
        .collect();
    let file = EnvelopeFile {
        alphabet: env.base().alphabet().size(),
        neighborhood: env.neighborhood().offsets().to_vec(),
        letters,
        table,
    };
    serde_json::to_string_pretty(&file).expect("plain data serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;
    use crate::nhpca;

    #[test]
    fn rule_round_trip() {
        for rule in [
            models::noisy_xor(0.25).unwrap(),
            models::majority(0.4).unwrap(),
            models::chma10(),
        ] {
            let json = rule_to_json(&rule);
            let back = rule_from_json(&json).unwrap();
            assert_eq!(back.alphabet().size(), rule.alphabet().size());
            assert_eq!(back.neighborhood().offsets(), rule.neighborhood().offsets());
            for w in 0..rule.word_count() {
                assert_eq!(back.row(w), rule.row(w));
            }
        }
    }

    #[test]
    fn malformed_json_reports_position() {
        let err = rule_from_json("{ \"alphabet\": 2, \"neighborhood\": [0,\n 1], ").unwrap_err();
        match err {
            Error::ModelFormat(msg) => assert!(msg.starts_with("model file line "), "{msg}"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn semantic_errors_name_the_row() {
        let text = r#"{
            "alphabet": 2,
            "neighborhood": [0],
            "table": [[0.5, 0.5], [0.9, 0.2]]
        }"#;
        let err = rule_from_json(text).unwrap_err();
        match err {
            Error::RuleInvalid { row, .. } => assert_eq!(row, 1),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn file_round_trip() {
        let dir = std::env::temp_dir().join("pca-model-file-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("stavskaya.json");
        let rule = models::stavskaya(0.7).unwrap();
        save_rule(&path, &rule).unwrap();
        let back = load_rule(&path).unwrap();
        assert_eq!(back.row(3), rule.row(3));
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn nhpca_round_trip() {
        let maj = models::majority(0.3).unwrap();
        let r = nhpca::restrict(&maj, &[-1, 0, 1], &[0.5, 0.5]).unwrap();
        let json = nhpca_to_json(r.nh());
        let back = nhpca_from_json(&json).unwrap();
        assert_eq!(back.cells(), r.nh().cells());
        for &cell in back.cells() {
            assert_eq!(back.rule_at(cell).unwrap(), r.nh().rule_at(cell).unwrap());
        }
    }

    #[test]
    fn envelope_export_shape() {
        let env = EnvelopeRule::binary(&models::majority(0.4).unwrap()).unwrap();
        let json = envelope_to_json(&env);
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(value["letters"], serde_json::json!(["0", "1", "?"]));
        assert_eq!(value["table"].as_array().unwrap().len(), 27);
        let row = value["table"][0].as_array().unwrap();
        let total: f64 = row.iter().map(|p| p.as_f64().unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }
}
