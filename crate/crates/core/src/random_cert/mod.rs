//! Randomized stability certificate from the endomorphism space of a sample.
//!
//! A representation with integer entries is drawn for the dimension vector and
//! the kernel of the infinitesimal base-change action at that point is
//! computed exactly. For a semistable dimension vector, a one-dimensional
//! kernel (only the scalars) shows the generic representation is a Schur
//! representation, hence stable.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::quiver_core::linalg::{
    bareiss_rank, cokernel_rows, kernel_dim_multimodular, rank_mod_prime, to_residue, MODULUS,
};
use crate::quiver_core::{
    opposite_rep, random_representation, DimensionVector, ExactRepresentation, Orientation, QuiverError,
};
use crate::stability_engine::is_schofield_semistable;

pub const DEFAULT_TRIALS: usize = 5;
pub const DEFAULT_ENTRY_BOUND: i64 = 1_000_000;

/// The matrix of `(H_0, ..., H_k) -> (H_0 B_i - B_i H_i)_i` in row-major coordinates.
///
/// Columns are `vec(H_0)` followed by each `vec(H_i)`; rows run over the
/// entries of each `p x q_i` output block in turn.
#[derive(Clone, Debug, PartialEq)]
pub struct LieActionMatrix {
    matrix: DMatrix<BigRational>,
}

impl LieActionMatrix {
    pub fn matrix(&self) -> &DMatrix<BigRational> {
        &self.matrix
    }

    pub fn shape(&self) -> (usize, usize) {
        self.matrix.shape()
    }

    /// Exact dimension of the kernel. The scalars always lie in it.
    pub fn kernel_dim(&self) -> usize {
        let rows = integer_rows(&self.matrix);
        kernel_dim_multimodular(&rows, self.matrix.ncols(), 1)
    }
}

fn integer_rows(m: &DMatrix<BigRational>) -> Vec<Vec<BigInt>> {
    (0..m.nrows())
        .map(|i| {
            let lcm = (0..m.ncols()).fold(BigInt::one(), |acc, j| acc.lcm(m[(i, j)].denom()));
            (0..m.ncols()).map(|j| m[(i, j)].numer() * (&lcm / m[(i, j)].denom())).collect()
        })
        .collect()
}

fn inward(rep: &ExactRepresentation) -> ExactRepresentation {
    match rep.orientation() {
        Orientation::Inward => rep.clone(),
        Orientation::Outward => opposite_rep(rep),
    }
}

/// Builds the action matrix; outward representations are first transposed.
pub fn lie_action_matrix(rep: &ExactRepresentation) -> LieActionMatrix {
    let rep = inward(rep);
    let p = rep.center();
    let legs = rep.leg_dims();
    let rows: usize = legs.iter().map(|q| p * q).sum();
    let cols = p * p + legs.iter().map(|q| q * q).sum::<usize>();
    let mut matrix = DMatrix::from_element(rows, cols, BigRational::zero());
    let (mut row_offset, mut col_offset) = (0, p * p);
    for (b, &q) in rep.blocks().iter().zip(&legs) {
        for r in 0..p {
            for c in 0..q {
                let row = row_offset + r * q + c;
                for j in 0..p {
                    matrix[(row, r * p + j)] += &b[(j, c)];
                }
                for a in 0..q {
                    matrix[(row, col_offset + a * q + c)] -= &b[(r, a)];
                }
            }
        }
        row_offset += p * q;
        col_offset += q * q;
    }
    LieActionMatrix { matrix }
}

/// Integer copy of each block, scaled by the lcm of its denominators.
fn integer_blocks(rep: &ExactRepresentation) -> Vec<Vec<Vec<BigInt>>> {
    rep.blocks()
        .iter()
        .map(|b| {
            let lcm = b.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
            (0..b.nrows())
                .map(|i| (0..b.ncols()).map(|j| b[(i, j)].numer() * (&lcm / b[(i, j)].denom())).collect())
                .collect()
        })
        .collect()
}

/// Equations on `H_0` alone, valid when every block is injective:
/// `C_i H_0 B_i = 0` for `C_i` spanning the left kernel of `B_i`.
fn reduced_rows<T: Clone>(
    p: usize,
    blocks: &[Vec<Vec<T>>],
    cokernels: &[Vec<Vec<T>>],
    mul: impl Fn(&T, &T) -> T,
) -> Vec<Vec<T>>
where
    T: Default,
{
    let mut out = Vec::new();
    for (b, coker) in blocks.iter().zip(cokernels) {
        let q = b.first().map_or(0, Vec::len);
        for crow in coker {
            for c in 0..q {
                let mut row = vec![T::default(); p * p];
                for a in 0..p {
                    for bb in 0..p {
                        row[a * p + bb] = mul(&crow[a], &b[bb][c]);
                    }
                }
                out.push(row);
            }
        }
    }
    out
}

/// `dim End(B)`, the kernel dimension of the action matrix.
///
/// When every block is injective the kernel is identified with the `H_0` that
/// preserve each image, which is a much smaller system. The kernel dimension
/// is computed modulo several primes and certified by lifting the modular
/// kernel to exact integer solutions.
pub fn stabilizer_kernel_dim(rep: &ExactRepresentation) -> usize {
    let rep = inward(rep);
    let p = rep.center();
    let blocks = integer_blocks(&rep);

    let injective = blocks.iter().all(|b| {
        let q = b.first().map_or(0, Vec::len);
        let residues: Vec<Vec<u64>> =
            b.iter().map(|row| row.iter().map(|v| to_residue(v, MODULUS)).collect()).collect();
        rank_mod_prime(residues, q, MODULUS) == q || bareiss_rank(b.clone(), q) == q
    });
    if injective {
        let cokernels: Vec<Vec<Vec<BigInt>>> = rep
            .blocks()
            .iter()
            .map(|b| {
                let c = cokernel_rows(b);
                (0..c.nrows()).map(|i| (0..c.ncols()).map(|j| c[(i, j)].numer().clone()).collect()).collect()
            })
            .collect();
        let rows = reduced_rows(p, &blocks, &cokernels, |a, b| a * b);
        return kernel_dim_multimodular(&rows, p * p, 1);
    }
    lie_action_matrix(&rep).kernel_dim()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Answer {
    Yes,
    No,
}

/// What one sampled representation showed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub seed: u64,
    pub semistable: bool,
    /// Absent when the semistability step already answered.
    pub kernel_dim: Option<usize>,
    pub answer: Answer,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Algorithm1Report {
    pub answer: Answer,
    pub trials: Vec<TrialRecord>,
    /// False when the trials did not all give the same answer.
    pub unanimous: bool,
}

/// Majority vote over `trials` samples with entries in `[-bound, bound]`.
///
/// Trial `t` uses the seed `seed + t`.
pub fn algorithm1(
    alpha: &DimensionVector,
    trials: usize,
    bound: i64,
    seed: u64,
) -> Result<Algorithm1Report, QuiverError> {
    if bound < 1 {
        return Err(QuiverError::EntryBound);
    }
    let trials = trials.max(1);
    let semistable = is_schofield_semistable(alpha).semistable;
    let mut records = Vec::with_capacity(trials);
    for t in 0..trials {
        let trial_seed = seed.wrapping_add(t as u64);
        let record = if semistable {
            let rep = random_representation(alpha, bound, trial_seed)?;
            let dim = stabilizer_kernel_dim(&rep);
            TrialRecord {
                seed: trial_seed,
                semistable,
                kernel_dim: Some(dim),
                answer: if dim <= 1 { Answer::Yes } else { Answer::No },
            }
        } else {
            TrialRecord { seed: trial_seed, semistable, kernel_dim: None, answer: Answer::No }
        };
        records.push(record);
    }
    let yes = records.iter().filter(|r| r.answer == Answer::Yes).count();
    let answer = if 2 * yes > trials { Answer::Yes } else { Answer::No };
    let unanimous = yes == 0 || yes == trials;
    Ok(Algorithm1Report { answer, trials: records, unanimous })
}
