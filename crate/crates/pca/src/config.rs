use crate::alphabet::Alphabet;
use crate::error::{Error, Result};
use crate::lattice::Lattice;

/// A finite assignment of letters to cells: the whole ring, or a window
/// `[start, start + len)` of the line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    lattice: Lattice,
    start: i64,
    letters: Vec<u8>,
}

impl Configuration {
    /// A full ring configuration; `letters.len()` fixes the ring size.
    pub fn ring(letters: Vec<u8>, alphabet: &Alphabet) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::WindowTooSmall {
                detail: "ring configuration needs at least one cell".into(),
            });
        }
        Self::check_letters(&letters, alphabet)?;
        Ok(Configuration {
            lattice: Lattice::Ring(letters.len()),
            start: 0,
            letters,
        })
    }

    /// A window of the line starting at `start`.
    pub fn line(start: i64, letters: Vec<u8>, alphabet: &Alphabet) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::WindowTooSmall {
                detail: "line window needs at least one cell".into(),
            });
        }
        Self::check_letters(&letters, alphabet)?;
        Ok(Configuration { lattice: Lattice::Line, start, letters })
    }

    fn check_letters(letters: &[u8], alphabet: &Alphabet) -> Result<()> {
        for &a in letters {
            if !alphabet.contains(a) {
                return Err(Error::ParamRange {
                    param: "configuration letter",
                    value: a as f64,
                    expected: "a letter of the alphabet",
                });
            }
        }
        Ok(())
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[u8] {
        &self.letters
    }

    /// First cell of the window (always 0 on a ring).
    pub fn start(&self) -> i64 {
        self.start
    }

    /// Letter at an absolute cell index; ring indices wrap.
    pub fn get(&self, cell: i64) -> u8 {
        match self.lattice {
            Lattice::Ring(n) => self.letters[cell.rem_euclid(n as i64) as usize],
            Lattice::Line => self.letters[(cell - self.start) as usize],
        }
    }
}

/// A stack of configurations over one shared window: rows are times `0..T`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpaceTimeDiagram {
    rows: Vec<Configuration>,
}

impl SpaceTimeDiagram {
    pub fn new(rows: Vec<Configuration>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::WindowTooSmall {
                detail: "diagram needs at least one row".into(),
            });
        }
        let first = &rows[0];
        for row in &rows[1..] {
            if row.lattice() != first.lattice() || row.start() != first.start() || row.len() != first.len() {
                return Err(Error::WindowTooSmall {
                    detail: "diagram rows must share one window".into(),
                });
            }
        }
        Ok(SpaceTimeDiagram { rows })
    }

    /// Cells per row.
    pub fn width(&self) -> usize {
        self.rows[0].len()
    }

    /// Number of rows (initial configuration included).
    pub fn height(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Configuration] {
        &self.rows
    }

    pub fn row(&self, t: usize) -> &Configuration {
        &self.rows[t]
    }
}
