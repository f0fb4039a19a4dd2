use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::LrError;

/// A weakly decreasing list of non-negative parts living in `GL_m` for an ambient length `m`.
///
/// Stored parts never exceed the ambient length; missing trailing parts are zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Partition {
    parts: Vec<u64>,
    ambient: usize,
}

impl Partition {
    /// Builds a partition, trimming trailing zeros from the stored parts.
    pub fn new(parts: Vec<u64>, ambient: usize) -> Result<Self, LrError> {
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(LrError::NotDecreasing(parts));
        }
        let mut parts = parts;
        while parts.last() == Some(&0) {
            parts.pop();
        }
        if parts.len() > ambient {
            return Err(LrError::TooLong { length: parts.len(), ambient });
        }
        Ok(Partition { parts, ambient })
    }

    /// Partition with the smallest ambient length that holds it.
    pub fn from_parts(parts: Vec<u64>) -> Result<Self, LrError> {
        let len = parts.iter().filter(|&&x| x > 0).count();
        Self::new(parts, len)
    }

    pub fn empty(ambient: usize) -> Self {
        Partition { parts: Vec::new(), ambient }
    }

    /// Nonzero parts, largest first.
    pub fn parts(&self) -> &[u64] {
        &self.parts
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    /// The `i`-th part (0-based), zero beyond the stored length.
    pub fn part(&self, i: usize) -> u64 {
        self.parts.get(i).copied().unwrap_or(0)
    }

    /// Number of nonzero parts.
    pub fn length(&self) -> usize {
        self.parts.len()
    }

    pub fn size(&self) -> u64 {
        self.parts.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Parts padded with zeros to the ambient length.
    pub fn padded(&self) -> Vec<u64> {
        (0..self.ambient).map(|i| self.part(i)).collect()
    }

    /// `h(i) = part(0) + ... + part(i-1)` for `i = 0..=len`.
    pub fn partial_sums(&self, len: usize) -> Vec<u64> {
        let mut out = Vec::with_capacity(len + 1);
        let mut acc = 0;
        out.push(0);
        for i in 0..len {
            acc += self.part(i);
            out.push(acc);
        }
        out
    }

    /// Same parts, different ambient length.
    pub fn with_ambient(&self, ambient: usize) -> Result<Self, LrError> {
        Self::new(self.parts.clone(), ambient)
    }

    pub fn scaled(&self, t: u64) -> Self {
        Partition {
            parts: if t == 0 { Vec::new() } else { self.parts.iter().map(|x| x * t).collect() },
            ambient: self.ambient,
        }
    }

    /// The conjugate partition, whose ambient length is the largest part.
    pub fn conjugate(&self) -> Self {
        let width = self.part(0) as usize;
        let parts = (0..width).map(|c| self.parts.iter().filter(|&&x| x as usize > c).count() as u64).collect();
        Partition { parts, ambient: width }
    }

    /// Complement inside the `ambient x width` box, read upside down.
    pub fn complement(&self, width: u64) -> Option<Self> {
        if self.part(0) > width {
            return None;
        }
        let parts = (0..self.ambient).rev().map(|i| width - self.part(i)).collect();
        Partition::new(parts, self.ambient).ok()
    }

    /// Removes `amount` full columns, i.e. divides by `det^amount` in `GL_ambient`.
    pub fn remove_columns(&self, amount: u64) -> Option<Self> {
        let parts: Option<Vec<u64>> = self.padded().iter().map(|x| x.checked_sub(amount)).collect();
        Partition::new(parts?, self.ambient).ok()
    }

    pub fn contains(&self, other: &Partition) -> bool {
        (0..other.length()).all(|i| self.part(i) >= other.part(i))
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text: Vec<String> = self.parts.iter().map(u64::to_string).collect();
        write!(f, "{}", text.join(","))
    }
}

impl FromStr for Partition {
    type Err = LrError;

    /// Parses comma-separated parts; the ambient length is the number of listed parts.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let trimmed = s.trim();
        if trimmed.is_empty() {
            return Ok(Partition::empty(0));
        }
        let parts = trimmed
            .split(',')
            .map(|t| t.trim().parse::<u64>().map_err(|_| LrError::Parse(s.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        let ambient = parts.len();
        Partition::new(parts, ambient)
    }
}

/// The rectangle with `height` rows of length `width`, padded to `ambient`.
pub fn rectangle(height: usize, width: u64, ambient: usize) -> Result<Partition, LrError> {
    let h = if width == 0 { 0 } else { height };
    Partition::new(vec![width; h], ambient)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rectangles() {
        assert_eq!(rectangle(2, 3, 4).unwrap().padded(), vec![3, 3, 0, 0]);
        assert_eq!(rectangle(0, 5, 3).unwrap().padded(), vec![0, 0, 0]);
        assert_eq!(rectangle(3, 0, 3).unwrap().padded(), vec![0, 0, 0]);
        assert!(rectangle(5, 1, 3).is_err());
    }

    #[test]
    fn rejects_increasing_parts() {
        assert!(Partition::new(vec![1, 2], 2).is_err());
    }

    #[test]
    fn conjugate_and_complement() {
        let p = Partition::new(vec![3, 1], 3).unwrap();
        assert_eq!(p.conjugate().parts(), &[2, 1, 1]);
        assert_eq!(p.conjugate().conjugate().parts(), p.parts());
        assert_eq!(p.complement(3).unwrap().parts(), &[3, 2]);
        assert!(p.complement(2).is_none());
    }

    #[test]
    fn parse_round_trip() {
        let p: Partition = "3,2,2,0".parse().unwrap();
        assert_eq!(p.ambient(), 4);
        assert_eq!(p.to_string(), "3,2,2");
        assert!("2,3".parse::<Partition>().is_err());
        assert!("a".parse::<Partition>().is_err());
    }
}
