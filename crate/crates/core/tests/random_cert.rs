//! Kernel dimensions of the base-change action and the randomized stability test.

use ipca_core::quiver_core::{
    opposite_rep, random_representation, DimensionVector, ExactRepresentation, Representation,
};
use ipca_core::random_cert::{algorithm1, lie_action_matrix, stabilizer_kernel_dim, Answer};
use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dv(s: &str) -> DimensionVector {
    s.parse().unwrap()
}

fn to_f64(m: &DMatrix<BigRational>) -> DMatrix<f64> {
    m.map(|x| x.to_f64().unwrap())
}

/// Nullity of `(H_0, H_i) -> (H_0 B_i - B_i H_i)` from a floating-point SVD.
fn numeric_nullity(blocks: &[DMatrix<f64>]) -> usize {
    let p = blocks[0].nrows();
    let legs: Vec<usize> = blocks.iter().map(|b| b.ncols()).collect();
    let ncols = p * p + legs.iter().map(|q| q * q).sum::<usize>();
    let nrows: usize = legs.iter().map(|q| p * q).sum();
    let mut m = DMatrix::<f64>::zeros(nrows, ncols);
    let mut row = 0;
    let mut leg_offset = p * p;
    for (b, &q) in blocks.iter().zip(&legs) {
        for r in 0..p {
            for c in 0..q {
                // (H_0 B)[r, c] = sum_s H_0[r, s] B[s, c]
                for s in 0..p {
                    m[(row, r * p + s)] += b[(s, c)];
                }
                // (B H)[r, c] = sum_s B[r, s] H[s, c]
                for s in 0..q {
                    m[(row, leg_offset + s * q + c)] -= b[(r, s)];
                }
                row += 1;
            }
        }
        leg_offset += q * q;
    }
    let sv = m.svd(false, false).singular_values;
    let largest = sv.max().max(1.0);
    let rank = sv.iter().filter(|&&s| s > 1e-9 * largest).count();
    ncols - rank
}

fn rational(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Unit upper-triangular integer matrix, invertible over the integers.
fn unimodular(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<BigRational> {
    DMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Equal => rational(1),
        std::cmp::Ordering::Less => rational(rng.gen_range(-3..=3)),
        std::cmp::Ordering::Greater => rational(0),
    })
}

fn base_change(rep: &ExactRepresentation, seed: u64) -> ExactRepresentation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = unimodular(rep.center(), &mut rng).transpose();
    let blocks = rep.blocks().iter().map(|b| &g * b * unimodular(b.ncols(), &mut rng)).collect();
    Representation::inward(blocks).unwrap()
}

const SHAPES: [&str; 8] =
    ["2 1 1 1 1", "4 2 2 2 2", "3 1 2 2", "3 2 2", "2 1 1", "4 1 2 3 2", "3 1 1 1 1", "5 2 3 3 2"];

#[test]
fn kernel_matches_floating_point_nullity() {
    for (i, shape) in SHAPES.iter().enumerate() {
        for seed in 0..4 {
            let rep = random_representation(&dv(shape), 5, 10 * i as u64 + seed).unwrap();
            let blocks: Vec<DMatrix<f64>> = rep.blocks().iter().map(to_f64).collect();
            let expected = numeric_nullity(&blocks);
            assert_eq!(stabilizer_kernel_dim(&rep), expected, "{shape} seed {seed}");
            assert_eq!(lie_action_matrix(&rep).kernel_dim(), expected, "{shape} seed {seed}");
        }
    }
}

#[test]
fn kernel_is_invariant_under_base_change() {
    for (i, shape) in SHAPES.iter().enumerate() {
        let rep = random_representation(&dv(shape), 7, i as u64).unwrap();
        let expected = stabilizer_kernel_dim(&rep);
        for seed in 0..3 {
            assert_eq!(stabilizer_kernel_dim(&base_change(&rep, seed)), expected, "{shape}");
        }
    }
}

#[test]
fn kernel_is_invariant_under_opposite() {
    for (i, shape) in SHAPES.iter().enumerate() {
        let rep = random_representation(&dv(shape), 7, 100 + i as u64).unwrap();
        assert_eq!(stabilizer_kernel_dim(&opposite_rep(&rep)), stabilizer_kernel_dim(&rep), "{shape}");
    }
}

#[test]
fn action_matrix_shape() {
    let rep = random_representation(&dv("3 1 2"), 4, 0).unwrap();
    assert_eq!(lie_action_matrix(&rep).shape(), (3 + 6, 9 + 1 + 4));
}

#[test]
fn decomposable_representation_has_larger_kernel() {
    let z = rational(0);
    let one = rational(1);
    let b1 = DMatrix::from_row_slice(2, 1, &[one.clone(), z.clone()]);
    let b2 = DMatrix::from_row_slice(2, 1, &[z.clone(), one.clone()]);
    let rep = Representation::inward(vec![b1, b2]).unwrap();
    assert_eq!(stabilizer_kernel_dim(&rep), 2);
}

#[test]
fn algorithm1_answers() {
    let yes = algorithm1(&dv("2 1 1 1 1"), 3, 1000, 7).unwrap();
    assert_eq!(yes.answer, Answer::Yes);
    assert!(yes.unanimous);
    assert_eq!(yes.trials.iter().map(|t| t.seed).collect::<Vec<_>>(), vec![7, 8, 9]);
    assert!(yes.trials.iter().all(|t| t.kernel_dim == Some(1)));

    let no = algorithm1(&dv("4 2 2 2 2"), 3, 1000, 0).unwrap();
    assert_eq!(no.answer, Answer::No);
    assert!(no.trials.iter().all(|t| t.kernel_dim == Some(2)));

    let unstable = algorithm1(&dv("3 2 2"), 2, 1000, 0).unwrap();
    assert_eq!(unstable.answer, Answer::No);
    assert!(unstable.trials.iter().all(|t| !t.semistable && t.kernel_dim.is_none()));

    assert!(algorithm1(&dv("2 1 1"), 1, 0, 0).is_err());
    assert_eq!(algorithm1(&dv("2 1 1 1"), 4, 50, 3).unwrap(), algorithm1(&dv("2 1 1 1"), 4, 50, 3).unwrap());
}
