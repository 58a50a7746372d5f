use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Flow dimensions: `m` expanding directions, `n` contracting directions,
/// acting on lattices in dimension `d = m + n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dims {
    m: u32,
    n: u32,
}

impl Dims {
    pub fn new(m: u32, n: u32) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::Domain(format!(
                "dims require m >= 1 and n >= 1, got m={m}, n={n}"
            )));
        }
        Ok(Dims { m, n })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Ambient dimension `d = m + n`.
    pub fn d(&self) -> u32 {
        self.m + self.n
    }

    pub fn d_usize(&self) -> usize {
        self.d() as usize
    }
}

impl std::fmt::Display for Dims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.m, self.n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_zero() {
        assert!(Dims::new(0, 1).is_err());
        assert!(Dims::new(1, 0).is_err());
        assert_eq!(Dims::new(2, 1).unwrap().d(), 3);
    }
}
