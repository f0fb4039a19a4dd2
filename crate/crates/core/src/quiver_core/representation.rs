//! Concrete representations and the reflection functors acting on them.

use nalgebra::{DMatrix, Scalar};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::linalg::{cokernel_rows, kernel_basis};
use super::{DimensionVector, QuiverError};

/// Direction of the arrows between the center and the legs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    /// Legs map into the center; block `i` is `center x q_i`.
    Inward,
    /// The center maps onto the legs; block `i` is `q_i x center`.
    Outward,
}

impl Orientation {
    pub fn flipped(self) -> Self {
        match self {
            Orientation::Inward => Orientation::Outward,
            Orientation::Outward => Orientation::Inward,
        }
    }
}

/// One matrix per arrow of a star quiver.
#[derive(Clone, Debug, PartialEq)]
pub struct Representation<S: Scalar> {
    orientation: Orientation,
    center: usize,
    blocks: Vec<DMatrix<S>>,
}

pub type ExactRepresentation = Representation<BigRational>;
pub type FloatRepresentation = Representation<f64>;

impl<S: Scalar> Representation<S> {
    /// Checks that every block connects a space of dimension `center` to its leg.
    pub fn new(orientation: Orientation, center: usize, blocks: Vec<DMatrix<S>>) -> Result<Self, QuiverError> {
        if blocks.is_empty() {
            return Err(QuiverError::NoLegs);
        }
        for (index, b) in blocks.iter().enumerate() {
            let center_side = match orientation {
                Orientation::Inward => b.nrows(),
                Orientation::Outward => b.ncols(),
            };
            if center_side != center {
                let (rows, cols) = b.shape();
                let leg = match orientation {
                    Orientation::Inward => cols,
                    Orientation::Outward => rows,
                };
                let (expected_rows, expected_cols) = match orientation {
                    Orientation::Inward => (center, leg),
                    Orientation::Outward => (leg, center),
                };
                return Err(QuiverError::BlockShape { index, rows, cols, expected_rows, expected_cols });
            }
        }
        Ok(Representation { orientation, center, blocks })
    }

    /// Inward representation of the star quiver `(p; q_1, ..., q_k)`.
    pub fn inward(blocks: Vec<DMatrix<S>>) -> Result<Self, QuiverError> {
        let center = blocks.first().map_or(0, |b| b.nrows());
        Self::new(Orientation::Inward, center, blocks)
    }

    /// Checks the block shapes against `alpha` for an inward representation.
    pub fn matches(&self, alpha: &DimensionVector) -> bool {
        self.orientation == Orientation::Inward
            && self.center as u64 == alpha.center()
            && self.leg_dims().iter().map(|&q| q as u64).eq(alpha.legs().iter().copied())
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn center(&self) -> usize {
        self.center
    }

    pub fn blocks(&self) -> &[DMatrix<S>] {
        &self.blocks
    }

    pub fn leg_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn leg_dims(&self) -> Vec<usize> {
        self.blocks
            .iter()
            .map(|b| match self.orientation {
                Orientation::Inward => b.ncols(),
                Orientation::Outward => b.nrows(),
            })
            .collect()
    }

    /// Center-first dimensions of the spaces at the vertices.
    pub fn dimensions(&self) -> Vec<usize> {
        std::iter::once(self.center).chain(self.leg_dims()).collect()
    }
}

impl ExactRepresentation {
    /// Converts to floating point for the likelihood solver.
    pub fn to_float(&self) -> FloatRepresentation {
        use num_traits::ToPrimitive;
        Representation {
            orientation: self.orientation,
            center: self.center,
            blocks: self.blocks.iter().map(|b| b.map(|v| v.to_f64().unwrap_or(f64::NAN))).collect(),
        }
    }
}

/// Transposes every block, reversing all arrows.
pub fn opposite_rep<S: Scalar>(rep: &Representation<S>) -> Representation<S> {
    Representation {
        orientation: rep.orientation.flipped(),
        center: rep.center,
        blocks: rep.blocks.iter().map(|b| b.transpose()).collect(),
    }
}

/// Replaces the center by the kernel of the stacked map from all legs into it.
///
/// The result points outward: block `i` sends a kernel vector to its leg-`i` coordinates.
pub fn reflect_sink_rep(rep: &ExactRepresentation) -> Result<ExactRepresentation, QuiverError> {
    if rep.orientation != Orientation::Inward {
        return Err(QuiverError::WrongOrientation);
    }
    let legs = rep.leg_dims();
    let total: usize = legs.iter().sum();
    let mut stacked = DMatrix::from_element(rep.center, total, BigRational::from_integer(BigInt::from(0)));
    let mut offset = 0;
    for b in &rep.blocks {
        stacked.view_mut((0, offset), b.shape()).copy_from(b);
        offset += b.ncols();
    }
    let kernel = kernel_basis(&stacked);
    let dim = kernel.ncols();
    let mut blocks = Vec::with_capacity(legs.len());
    let mut offset = 0;
    for &q in &legs {
        blocks.push(kernel.rows(offset, q).into_owned());
        offset += q;
    }
    Representation::new(Orientation::Outward, dim, blocks)
}

/// Replaces every leg by the cokernel of its map into the center.
///
/// The result points outward: block `i` is the quotient map from the center onto `coker B_i`.
pub fn reflect_sources_rep(rep: &ExactRepresentation) -> Result<ExactRepresentation, QuiverError> {
    if rep.orientation != Orientation::Inward {
        return Err(QuiverError::WrongOrientation);
    }
    let blocks = rep.blocks.iter().map(cokernel_rows).collect();
    Representation::new(Orientation::Outward, rep.center, blocks)
}

/// Integer entries drawn uniformly from `[-bound, bound]`, reproducible from `seed`.
pub fn random_representation(
    alpha: &DimensionVector,
    bound: i64,
    seed: u64,
) -> Result<ExactRepresentation, QuiverError> {
    if bound < 1 {
        return Err(QuiverError::EntryBound);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = alpha.center() as usize;
    let blocks = alpha
        .legs()
        .iter()
        .map(|&q| {
            DMatrix::from_fn(p, q as usize, |_, _| {
                BigRational::from_integer(BigInt::from(rng.gen_range(-bound..=bound)))
            })
        })
        .collect();
    Representation::new(Orientation::Inward, p, blocks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: i64) -> BigRational {
        BigRational::from_integer(v.into())
    }

    #[test]
    fn sink_reflection_of_two_ones() {
        let rep = Representation::inward(vec![DMatrix::from_element(1, 1, q(1)); 2]).unwrap();
        let w = reflect_sink_rep(&rep).unwrap();
        assert_eq!(w.dimensions(), vec![1, 1, 1]);
        assert_eq!(w.blocks()[0][(0, 0)], -w.blocks()[1][(0, 0)].clone());
    }

    #[test]
    fn sink_reflection_of_zero_keeps_everything() {
        let rep = Representation::inward(vec![DMatrix::from_element(2, 1, q(0)); 2]).unwrap();
        assert_eq!(reflect_sink_rep(&rep).unwrap().center(), 2);
    }

    #[test]
    fn source_reflection_of_column() {
        let rep = Representation::inward(vec![DMatrix::from_row_slice(2, 1, &[q(1), q(0)])]).unwrap();
        let w = reflect_sources_rep(&rep).unwrap();
        assert_eq!(w.dimensions(), vec![2, 1]);
        assert_eq!(w.blocks()[0], DMatrix::from_row_slice(1, 2, &[q(0), q(1)]));
    }

    #[test]
    fn opposite_transposes() {
        let b = DMatrix::from_row_slice(2, 2, &[q(1), q(2), q(3), q(4)]);
        let rep = Representation::inward(vec![b]).unwrap();
        let op = opposite_rep(&rep);
        assert_eq!(op.blocks()[0], DMatrix::from_row_slice(2, 2, &[q(1), q(3), q(2), q(4)]));
        assert_eq!(opposite_rep(&op), rep);
    }

    #[test]
    fn random_is_reproducible_and_bounded() {
        let alpha: DimensionVector = "3 2 1".parse().unwrap();
        let a = random_representation(&alpha, 5, 9).unwrap();
        assert_eq!(a, random_representation(&alpha, 5, 9).unwrap());
        assert!(a.matches(&alpha));
        assert!(a.blocks().iter().flat_map(|b| b.iter()).all(|v| v.numer().magnitude() <= &5u32.into()));
        assert!(random_representation(&alpha, 0, 9).is_err());
    }

    #[test]
    fn mismatched_blocks_are_rejected() {
        let blocks = vec![DMatrix::from_element(2, 1, q(1)), DMatrix::from_element(3, 1, q(1))];
        assert!(Representation::inward(blocks).is_err());
    }
}
