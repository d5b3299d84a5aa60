use crate::error::{Error, Result};

/// Maximum alphabet size. Envelope letters are nonempty subsets of the
/// alphabet packed into a `u16` bitmask, which caps the size at 16.
pub const MAX_ALPHABET: u8 = 16;

/// A finite alphabet `{0, 1, .., k-1}` with optional display names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    size: u8,
    names: Option<Vec<String>>,
}

impl Alphabet {
    pub fn new(size: u8) -> Result<Self> {
        if size == 0 || size > MAX_ALPHABET {
            return Err(Error::ParamRange {
                param: "alphabet size",
                value: size as f64,
                expected: "1..=16",
            });
        }
        Ok(Alphabet { size, names: None })
    }

    /// The binary alphabet `{0, 1}`.
    pub fn binary() -> Self {
        Alphabet { size: 2, names: None }
    }

    pub fn with_names(size: u8, names: Vec<String>) -> Result<Self> {
        let mut a = Alphabet::new(size)?;
        if names.len() != size as usize {
            return Err(Error::ParamRange {
                param: "alphabet names",
                value: names.len() as f64,
                expected: "one name per letter",
            });
        }
        a.names = Some(names);
        Ok(a)
    }

    pub fn size(&self) -> u8 {
        self.size
    }

    pub fn is_binary(&self) -> bool {
        self.size == 2
    }

    pub fn contains(&self, letter: u8) -> bool {
        letter < self.size
    }

    pub fn letters(&self) -> impl Iterator<Item = u8> {
        0..self.size
    }

    /// Display name of a letter: the supplied name, or its index in decimal.
    pub fn name(&self, letter: u8) -> String {
        match &self.names {
            Some(names) => names[letter as usize].clone(),
            None => letter.to_string(),
        }
    }
}
