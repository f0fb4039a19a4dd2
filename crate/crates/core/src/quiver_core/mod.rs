//! Star quivers with one central sink and `k` source legs.
//!
//! Integer vectors on the quiver's vertices are stored center first, so a
//! dimension vector `(p; q_1, ..., q_k)` becomes `[p, q_1, ..., q_k]`.

pub(crate) mod linalg;
mod reduction;
mod representation;

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use reduction::{
    fundamental_chamber_test, gamma, reduce_equal_legs, reflect_sink_dim, reflect_sources_dim, CastlingMove,
    ChamberPosition, EqualLegsReduction,
};
pub use representation::{
    opposite_rep, random_representation, reflect_sink_rep, reflect_sources_rep, ExactRepresentation,
    FloatRepresentation, Orientation, Representation,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuiverError {
    #[error("center dimension must be positive")]
    ZeroCenter,
    #[error("leg {0} has dimension zero")]
    ZeroLeg(usize),
    #[error("a star quiver needs at least one leg")]
    NoLegs,
    #[error("vectors of lengths {left} and {right} live on different quivers")]
    ShapeMismatch { left: usize, right: usize },
    #[error("integer vector must have at least two entries, got {0}")]
    TooShort(usize),
    #[error("sink reflection needs p < n (p = {center}, n = {legs})")]
    CenterNotBelowLegs { center: u64, legs: u64 },
    #[error("source reflection needs every leg below the center, leg {leg} is {value} with p = {center}")]
    LegNotBelowCenter { leg: usize, value: u64, center: u64 },
    #[error("block {index} has shape {rows}x{cols}, expected {expected_rows}x{expected_cols}")]
    BlockShape { index: usize, rows: usize, cols: usize, expected_rows: usize, expected_cols: usize },
    #[error("reflection at the center is defined for inward-pointing legs only")]
    WrongOrientation,
    #[error("entry bound must be at least 1")]
    EntryBound,
    #[error("cannot parse dimension vector {0:?}")]
    Parse(String),
}

/// Dimensions `(p; q_1, ..., q_k)` of a star-quiver representation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DimensionVector {
    center: u64,
    legs: Vec<u64>,
}

impl DimensionVector {
    pub fn new(center: u64, legs: Vec<u64>) -> Result<Self, QuiverError> {
        if center == 0 {
            return Err(QuiverError::ZeroCenter);
        }
        if legs.is_empty() {
            return Err(QuiverError::NoLegs);
        }
        if let Some(i) = legs.iter().position(|&q| q == 0) {
            return Err(QuiverError::ZeroLeg(i));
        }
        Ok(DimensionVector { center, legs })
    }

    /// `(p; q, ..., q)` with `k` equal legs.
    pub fn equal_legs(center: u64, leg: u64, k: usize) -> Result<Self, QuiverError> {
        Self::new(center, vec![leg; k])
    }

    /// Reads a center-first integer vector, rejecting non-positive entries.
    pub fn from_vector(v: &[i64]) -> Result<Self, QuiverError> {
        if v.len() < 2 {
            return Err(QuiverError::TooShort(v.len()));
        }
        if v[0] <= 0 {
            return Err(QuiverError::ZeroCenter);
        }
        let legs = v[1..]
            .iter()
            .enumerate()
            .map(|(i, &q)| u64::try_from(q).ok().filter(|&q| q > 0).ok_or(QuiverError::ZeroLeg(i)))
            .collect::<Result<_, _>>()?;
        Self::new(v[0] as u64, legs)
    }

    pub fn center(&self) -> u64 {
        self.center
    }

    pub fn legs(&self) -> &[u64] {
        &self.legs
    }

    pub fn leg_count(&self) -> usize {
        self.legs.len()
    }

    /// `n`, the sum of the leg dimensions.
    pub fn leg_sum(&self) -> u64 {
        self.legs.iter().sum()
    }

    pub fn to_vector(&self) -> Vec<i64> {
        std::iter::once(self.center as i64).chain(self.legs.iter().map(|&q| q as i64)).collect()
    }

    /// Greatest common divisor of all entries.
    pub fn content(&self) -> u64 {
        self.legs.iter().fold(self.center, |g, &q| g.gcd(&q))
    }

    /// The vector divided by its content.
    pub fn primitive(&self) -> DimensionVector {
        let g = self.content();
        DimensionVector { center: self.center / g, legs: self.legs.iter().map(|q| q / g).collect() }
    }

    pub fn scaled(&self, factor: u64) -> DimensionVector {
        DimensionVector { center: self.center * factor, legs: self.legs.iter().map(|q| q * factor).collect() }
    }

    /// Same vector with the legs sorted in decreasing order.
    pub fn sorted_legs(&self) -> DimensionVector {
        let mut legs = self.legs.clone();
        legs.sort_unstable_by(|a, b| b.cmp(a));
        DimensionVector { center: self.center, legs }
    }

    /// True when all legs have the same dimension.
    pub fn has_equal_legs(&self) -> bool {
        self.legs.windows(2).all(|w| w[0] == w[1])
    }
}

impl fmt::Display for DimensionVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({};", self.center)?;
        for (i, q) in self.legs.iter().enumerate() {
            let sep = if i == 0 { " " } else { ", " };
            write!(f, "{sep}{q}")?;
        }
        write!(f, ")")
    }
}

/// Parses whitespace- or comma-separated entries, center first.
impl FromStr for DimensionVector {
    type Err = QuiverError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let cleaned = s.trim().trim_start_matches('(').trim_end_matches(')').replace(';', ",");
        let entries = cleaned
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<i64>().map_err(|_| QuiverError::Parse(s.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_vector(&entries).map_err(|_| QuiverError::Parse(s.to_string()))
    }
}

/// Integer weight `(sigma_x; sigma_{y_1}, ..., sigma_{y_k})`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Weight {
    center: i64,
    legs: Vec<i64>,
}

impl Weight {
    pub fn new(center: i64, legs: Vec<i64>) -> Self {
        Weight { center, legs }
    }

    pub fn center(&self) -> i64 {
        self.center
    }

    pub fn legs(&self) -> &[i64] {
        &self.legs
    }

    pub fn leg_count(&self) -> usize {
        self.legs.len()
    }

    pub fn to_vector(&self) -> Vec<i64> {
        std::iter::once(self.center).chain(self.legs.iter().copied()).collect()
    }

    /// The weight divided by the gcd of its entries (unchanged when all are zero).
    pub fn primitive(&self) -> Weight {
        let g = self.legs.iter().fold(self.center.unsigned_abs(), |g, &s| g.gcd(&s.unsigned_abs()));
        if g <= 1 {
            return self.clone();
        }
        let g = g as i64;
        Weight { center: self.center / g, legs: self.legs.iter().map(|s| s / g).collect() }
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({};", self.center)?;
        for (i, s) in self.legs.iter().enumerate() {
            let sep = if i == 0 { " " } else { ", " };
            write!(f, "{sep}{s}")?;
        }
        write!(f, ")")
    }
}

fn check_shapes(a: &[i64], b: &[i64]) -> Result<(), QuiverError> {
    if a.len() != b.len() {
        return Err(QuiverError::ShapeMismatch { left: a.len(), right: b.len() });
    }
    if a.len() < 2 {
        return Err(QuiverError::TooShort(a.len()));
    }
    Ok(())
}

/// The Euler form `<a, b> = a_x b_x + sum a_y b_y - sum a_y b_x` of the star quiver.
pub fn euler_form(a: &[i64], b: &[i64]) -> Result<i64, QuiverError> {
    check_shapes(a, b)?;
    let vertices: i64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let arrows: i64 = a[1..].iter().map(|&ay| ay * b[0]).sum();
    Ok(vertices - arrows)
}

/// The symmetrized form `(a, b) = <a, b> + <b, a>`.
pub fn cartan_form(a: &[i64], b: &[i64]) -> Result<i64, QuiverError> {
    Ok(euler_form(a, b)? + euler_form(b, a)?)
}

/// `(-n; p, ..., p)`, the weight `beta -> <alpha, beta> - <beta, alpha>`.
pub fn schofield_weight(alpha: &DimensionVector) -> Weight {
    let p = alpha.center() as i64;
    Weight::new(-(alpha.leg_sum() as i64), vec![p; alpha.leg_count()])
}

/// `sigma(beta) = sum_v sigma(v) beta(v)`.
pub fn pairing(sigma: &Weight, beta: &[i64]) -> Result<i64, QuiverError> {
    let s = sigma.to_vector();
    check_shapes(&s, beta)?;
    Ok(s.iter().zip(beta).map(|(x, y)| x * y).sum())
}

/// Unit vector at the center (`vertex = 0`) or at leg `vertex - 1`.
pub fn unit_vector(k: usize, vertex: usize) -> Vec<i64> {
    let mut v = vec![0; k + 1];
    v[vertex] = 1;
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euler_form_by_hand() {
        assert_eq!(euler_form(&[1, 0, 0], &[1, 0, 0]), Ok(1));
        assert_eq!(euler_form(&[2, 1, 1], &[2, 1, 1]), Ok(2));
        assert_eq!(euler_form(&[0, 1, 0], &[1, 0, 0]), Ok(-1));
        assert!(euler_form(&[1, 1], &[1, 1, 1]).is_err());
    }

    #[test]
    fn cartan_form_single_leg() {
        assert_eq!(cartan_form(&[1, 1], &[1, 1]), Ok(2));
    }

    #[test]
    fn schofield_weight_examples() {
        let a: DimensionVector = "2 1 1 1 1".parse().unwrap();
        assert_eq!(schofield_weight(&a), Weight::new(-4, vec![2, 2, 2, 2]));
        let b = DimensionVector::new(3, vec![2, 1]).unwrap();
        assert_eq!(schofield_weight(&b), Weight::new(-3, vec![3, 3]));
        assert_eq!(pairing(&schofield_weight(&a), &a.to_vector()), Ok(0));
    }

    #[test]
    fn pairing_examples() {
        let s = Weight::new(-2, vec![2, 2]);
        assert_eq!(pairing(&s, &[1, 1, 0]), Ok(0));
        assert_eq!(pairing(&s, &[0, 1, 1]), Ok(4));
    }

    #[test]
    fn parsing_and_display_round_trip() {
        let a: DimensionVector = "(5; 2, 2, 3)".parse().unwrap();
        assert_eq!(a.to_vector(), vec![5, 2, 2, 3]);
        assert_eq!(a.to_string().parse::<DimensionVector>().unwrap(), a);
        assert!("0 1".parse::<DimensionVector>().is_err());
        assert!("3".parse::<DimensionVector>().is_err());
    }

    #[test]
    fn primitive_and_content() {
        let a = DimensionVector::new(4, vec![2, 2, 2, 2]).unwrap();
        assert_eq!(a.content(), 2);
        assert_eq!(a.primitive().to_vector(), vec![2, 1, 1, 1, 1]);
    }
}
