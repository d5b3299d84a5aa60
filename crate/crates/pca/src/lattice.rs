use crate::error::{Error, Result};

/// The one-dimensional cell space: a finite ring `Z/nZ` or the full line `Z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lattice {
    Ring(usize),
    Line,
}

impl Lattice {
    pub fn ring(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::ParamRange {
                param: "ring size",
                value: 0.0,
                expected: "n >= 1",
            });
        }
        Ok(Lattice::Ring(n))
    }

    pub fn is_ring(&self) -> bool {
        matches!(self, Lattice::Ring(_))
    }

    /// Canonical representative of a cell: wrapped into `0..n` on a ring,
    /// unchanged on the line.
    pub fn canonical(&self, cell: i64) -> i64 {
        match self {
            Lattice::Ring(n) => cell.rem_euclid(*n as i64),
            Lattice::Line => cell,
        }
    }
}

/// An ordered list of distinct relative offsets: the cells a local rule reads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Neighborhood {
    offsets: Vec<i64>,
}

impl Neighborhood {
    pub fn new(offsets: Vec<i64>) -> Result<Self> {
        if offsets.is_empty() {
            return Err(Error::ParamRange {
                param: "neighborhood size",
                value: 0.0,
                expected: "at least one offset",
            });
        }
        let mut sorted = offsets.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != offsets.len() {
            return Err(Error::ParamRange {
                param: "neighborhood offsets",
                value: offsets.len() as f64,
                expected: "distinct offsets",
            });
        }
        Ok(Neighborhood { offsets })
    }

    pub fn offsets(&self) -> &[i64] {
        &self.offsets
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> + '_ {
        self.offsets.iter().copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_wraps() {
        let r = Lattice::ring(4).unwrap();
        assert_eq!(r.canonical(-1), 3);
        assert_eq!(r.canonical(4), 0);
        assert_eq!(Lattice::Line.canonical(-1), -1);
        assert!(Lattice::ring(0).is_err());
    }

    #[test]
    fn neighborhood_rejects_duplicates() {
        assert!(Neighborhood::new(vec![0, 1, 0]).is_err());
        assert!(Neighborhood::new(vec![]).is_err());
        let v = Neighborhood::new(vec![-1, 0, 1]).unwrap();
        assert_eq!(v.len(), 3);
        assert_eq!(v.offsets(), &[-1, 0, 1]);
    }
}
