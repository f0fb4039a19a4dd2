//! Exact elimination over the integers and over a prime field.
//!
//! Rational matrices are scaled row by row to integer matrices and reduced
//! with Bareiss' fraction-free scheme. Pivots are taken in column order and,
//! within a column, from the first eligible row, so results are reproducible.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// The Mersenne prime `2^31 - 1`, the largest modulus used.
///
/// Residues stay below `2^31`, so products fit in a `u64`.
pub(crate) const MODULUS: u64 = (1 << 31) - 1;

/// Primes tried by [`kernel_dim_multimodular`] before it falls back to elimination over the integers.
const MAX_PRIMES: usize = 512;

fn integer_rows(m: &DMatrix<BigRational>) -> Vec<Vec<BigInt>> {
    (0..m.nrows())
        .map(|i| {
            let lcm = (0..m.ncols()).fold(BigInt::one(), |acc, j| acc.lcm(m[(i, j)].denom()));
            (0..m.ncols())
                .map(|j| {
                    let v = &m[(i, j)];
                    v.numer() * (&lcm / v.denom())
                })
                .collect()
        })
        .collect()
}

/// Fraction-free row echelon form in place; returns the pivot columns.
fn bareiss_echelon(a: &mut [Vec<BigInt>], ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..ncols {
        if r == a.len() {
            break;
        }
        let Some(found) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, found);
        let (top, rest) = a.split_at_mut(r + 1);
        let pivot_row = &top[r];
        for row in rest.iter_mut() {
            if row[c].is_zero() {
                for v in row.iter_mut().skip(c + 1) {
                    if !v.is_zero() {
                        *v = &*v * &pivot_row[c] / &prev;
                    }
                }
                continue;
            }
            for j in c + 1..ncols {
                let v = &pivot_row[c] * &row[j] - &row[c] * &pivot_row[j];
                row[j] = v / &prev;
            }
            row[c] = BigInt::zero();
        }
        prev = a[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Exact rank of an integer matrix given by rows.
pub(crate) fn bareiss_rank(mut rows: Vec<Vec<BigInt>>, ncols: usize) -> usize {
    bareiss_echelon(&mut rows, ncols).len()
}

/// Basis of the right kernel as the columns of an `ncols x d` matrix.
///
/// Each basis vector is a primitive integer vector with a positive entry at its free column.
pub(crate) fn kernel_basis(m: &DMatrix<BigRational>) -> DMatrix<BigRational> {
    let ncols = m.ncols();
    let mut rows = integer_rows(m);
    let pivots = bareiss_echelon(&mut rows, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    let mut basis = DMatrix::from_element(ncols, free.len(), BigRational::zero());
    for (col, &f) in free.iter().enumerate() {
        let mut x = vec![BigRational::zero(); ncols];
        x[f] = BigRational::one();
        for (t, &c) in pivots.iter().enumerate().rev() {
            let row = &rows[t];
            let mut acc = BigRational::zero();
            for j in c + 1..ncols {
                if !row[j].is_zero() && !x[j].is_zero() {
                    acc += &x[j] * BigRational::from_integer(row[j].clone());
                }
            }
            x[c] = -acc / BigRational::from_integer(row[c].clone());
        }
        let lcm = x.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
        let ints: Vec<BigInt> = x.iter().map(|v| v.numer() * (&lcm / v.denom())).collect();
        let g = ints.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
        for (i, v) in ints.into_iter().enumerate() {
            basis[(i, col)] = BigRational::from_integer(if g.is_zero() { v } else { v / &g });
        }
    }
    basis
}

/// Rows spanning the left kernel, so `cokernel_rows(m) * m = 0`.
pub(crate) fn cokernel_rows(m: &DMatrix<BigRational>) -> DMatrix<BigRational> {
    kernel_basis(&m.transpose()).transpose()
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    a * b % m
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin; the bases 2, 7 and 61 suffice below `4.7 * 10^9`.
fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for small in [2, 3, 5, 7, 61] {
        if n % small == 0 {
            return n == small;
        }
    }
    let (mut d, mut s) = (n - 1, 0);
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'bases: for a in [2, 7, 61] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

/// Primes from [`MODULUS`] downwards.
pub(crate) fn primes() -> impl Iterator<Item = u64> {
    (2..=MODULUS).rev().filter(|&n| is_prime(n))
}

/// Reduces an integer into `[0, m)`; `m` must stay below `2^32`.
pub(crate) fn to_residue(v: &BigInt, m: u64) -> u64 {
    let magnitude = v.iter_u32_digits().rev().fold(0u64, |acc, d| ((acc << 32) | d as u64) % m);
    if v.is_negative() && magnitude != 0 {
        m - magnitude
    } else {
        magnitude
    }
}

fn subtract_multiple(row: &mut [u64], pivot_row: &[u64], factor: u64, from: usize, m: u64) {
    for j in from..row.len() {
        if pivot_row[j] != 0 {
            let sub = mul_mod(factor, pivot_row[j], m);
            row[j] = if row[j] >= sub { row[j] - sub } else { row[j] + m - sub };
        }
    }
}

/// Rank modulo the prime `m`. Never exceeds the rank over the rationals.
pub(crate) fn rank_mod_prime(mut rows: Vec<Vec<u64>>, ncols: usize, m: u64) -> usize {
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(found) = (r..rows.len()).find(|&i| rows[i][c] != 0) else { continue };
        rows.swap(r, found);
        let inv = pow_mod(rows[r][c], m - 2, m);
        let (top, rest) = rows.split_at_mut(r + 1);
        let pivot_row = &top[r];
        for row in rest.iter_mut() {
            if row[c] != 0 {
                let factor = mul_mod(row[c], inv, m);
                subtract_multiple(row, pivot_row, factor, c, m);
            }
        }
        r += 1;
    }
    r
}

/// Pivot columns and the kernel basis read off the reduced row echelon form modulo `m`.
///
/// Basis vector `j` has a one at the `j`-th free column and zeros at the other free columns.
pub(crate) fn kernel_mod_prime(mut rows: Vec<Vec<u64>>, ncols: usize, m: u64) -> (Vec<usize>, Vec<Vec<u64>>) {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(found) = (r..rows.len()).find(|&i| rows[i][c] != 0) else { continue };
        rows.swap(r, found);
        let inv = pow_mod(rows[r][c], m - 2, m);
        for v in rows[r].iter_mut() {
            *v = mul_mod(*v, inv, m);
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && row[c] != 0 {
                let factor = row[c];
                subtract_multiple(row, &pivot_row, factor, c, m);
            }
        }
        pivots.push(c);
        r += 1;
    }
    let basis = (0..ncols)
        .filter(|c| !pivots.contains(c))
        .map(|f| {
            let mut x = vec![0; ncols];
            x[f] = 1;
            for (t, &c) in pivots.iter().enumerate() {
                let v = rows[t][f];
                x[c] = if v == 0 { 0 } else { m - v };
            }
            x
        })
        .collect();
    (pivots, basis)
}

/// The fraction `n / d` with `n = d a (mod m)` and `|n|, d <= sqrt(m / 2)`, if one exists.
fn rational_reconstruction(a: &BigInt, m: &BigInt) -> Option<(BigInt, BigInt)> {
    let bound = (m / 2u32).sqrt();
    let (mut r0, mut r1) = (m.clone(), a.mod_floor(m));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let t2 = &t0 - &q * &t1;
        (r0, r1, t0, t1) = (r1, r2, t1, t2);
    }
    if t1.is_zero() || t1.abs() > bound || !r1.gcd(&t1).is_one() {
        return None;
    }
    if t1.is_negative() {
        Some((-r1, -t1))
    } else {
        Some((r1, t1))
    }
}

/// Integer vectors proportional to the reconstructions of `images`, if every entry reconstructs.
fn reconstruct(images: &[Vec<BigInt>], modulus: &BigInt) -> Option<Vec<Vec<BigInt>>> {
    images
        .iter()
        .map(|v| {
            let fractions = v.iter().map(|a| rational_reconstruction(a, modulus)).collect::<Option<Vec<_>>>()?;
            let lcm = fractions.iter().fold(BigInt::one(), |acc, (_, d)| acc.lcm(d));
            Some(fractions.into_iter().map(|(n, d)| n * (&lcm / d)).collect())
        })
        .collect()
}

fn annihilates(rows: &[Vec<BigInt>], v: &[BigInt]) -> bool {
    rows.iter().all(|row| {
        row.iter().zip(v).filter(|(a, b)| !a.is_zero() && !b.is_zero()).map(|(a, b)| a * b).sum::<BigInt>().is_zero()
    })
}

/// Upper bounds on `log2` of the row norms, largest first.
fn row_norm_bits(rows: &[Vec<BigInt>]) -> Vec<f64> {
    let mut bits: Vec<f64> =
        rows.iter().map(|row| row.iter().map(|v| v * v).sum::<BigInt>().bits() as f64 / 2.0).collect();
    bits.sort_unstable_by(|a, b| b.total_cmp(a));
    bits
}

/// Exact dimension of the right kernel of an integer matrix, given a known lower bound.
///
/// Ranks modulo primes never exceed the rank over the rationals. Two
/// certificates settle the exact value:
///
/// * enough primes agree on the largest rank `r` seen that their product
///   exceeds the Hadamard bound for `(r + 1)`-minors, so those minors vanish;
/// * the modular kernel bases, combined by the Chinese remainder theorem,
///   lift to rational vectors that satisfy every row exactly. Lifting is
///   only attempted when the Hadamard bound is out of reach.
///
/// A modular kernel dimension equal to `lower_bound` is accepted at once.
pub(crate) fn kernel_dim_multimodular(rows: &[Vec<BigInt>], ncols: usize, lower_bound: usize) -> usize {
    kernel_dim_with_primes(rows, ncols, lower_bound, MAX_PRIMES)
}

fn kernel_dim_with_primes(rows: &[Vec<BigInt>], ncols: usize, lower_bound: usize, max_primes: usize) -> usize {
    let primitive: Vec<Vec<BigInt>> = rows
        .iter()
        .filter(|row| row.iter().any(|v| !v.is_zero()))
        .map(|row| {
            let content = row.iter().fold(BigInt::zero(), |g, v| g.gcd(v));
            row.iter().map(|v| v / &content).collect()
        })
        .collect();
    let rows = primitive.as_slice();
    let norm_bits = row_norm_bits(rows);
    let full_rank = ncols.min(rows.len());
    let reachable_bits = max_primes as f64 * 30.0;
    let try_lifting = 1.0 + norm_bits.iter().take(full_rank).sum::<f64>() > reachable_bits;
    let mut max_rank = 0;
    let mut agreeing_bits = 0.0;
    let mut best_pivots: Option<Vec<usize>> = None;
    let mut images: Vec<Vec<BigInt>> = Vec::new();
    let mut modulus = BigInt::one();
    let mut used = 0;
    let mut next_check = 1;
    for prime in primes().take(max_primes) {
        let residues: Vec<Vec<u64>> = rows.iter().map(|r| r.iter().map(|v| to_residue(v, prime)).collect()).collect();
        let (pivots, basis) = kernel_mod_prime(residues, ncols, prime);
        if basis.len() <= lower_bound {
            return basis.len().max(lower_bound.min(ncols));
        }
        let rank = pivots.len();
        if rank > max_rank {
            max_rank = rank;
            agreeing_bits = 0.0;
        }
        if rank == max_rank {
            agreeing_bits += (prime as f64).log2();
        }
        let hadamard_bits: f64 = 1.0 + norm_bits.iter().take(max_rank + 1).sum::<f64>();
        if max_rank == full_rank || agreeing_bits > hadamard_bits {
            return ncols - max_rank;
        }
        if !try_lifting {
            continue;
        }
        match &best_pivots {
            Some(best) if rank < best.len() || (rank == best.len() && &pivots != best) => continue,
            Some(best) if rank == best.len() => {
                let p_big = BigInt::from(prime);
                let inverse = BigInt::from(pow_mod(to_residue(&modulus, prime), prime - 2, prime));
                for (image, residue) in images.iter_mut().zip(&basis) {
                    for (a, &b) in image.iter_mut().zip(residue) {
                        let delta = (BigInt::from(b) - &*a).mod_floor(&p_big) * &inverse % &p_big;
                        *a += &modulus * delta;
                    }
                }
                modulus *= prime;
                used += 1;
            }
            _ => {
                best_pivots = Some(pivots);
                images = basis.iter().map(|v| v.iter().map(|&x| BigInt::from(x)).collect()).collect();
                modulus = BigInt::from(prime);
                used = 1;
                next_check = 1;
            }
        }
        if used >= next_check {
            next_check *= 2;
            if let Some(lifted) = reconstruct(&images, &modulus) {
                if lifted.iter().all(|v| annihilates(rows, v)) {
                    return lifted.len();
                }
            }
        }
    }
    ncols - bareiss_rank(rows.to_vec(), ncols)
}

/// Sign-normalized copy used by tests to compare bases.
#[cfg(test)]
pub(crate) fn abs_entries(m: &DMatrix<BigRational>) -> DMatrix<BigRational> {
    m.map(|v| v.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: i64) -> BigRational {
        BigRational::from_integer(v.into())
    }

    fn mat(rows: usize, cols: usize, v: &[i64]) -> DMatrix<BigRational> {
        DMatrix::from_row_iterator(rows, cols, v.iter().map(|&x| q(x)))
    }

    #[test]
    fn kernel_of_row_of_ones() {
        let k = kernel_basis(&mat(1, 2, &[1, 1]));
        assert_eq!(k, mat(2, 1, &[-1, 1]));
    }

    #[test]
    fn kernel_annihilates() {
        let m = mat(2, 4, &[1, 2, 3, 4, 2, 4, 7, 1]);
        let k = kernel_basis(&m);
        assert_eq!(k.ncols(), 2);
        assert!((&m * &k).iter().all(Zero::is_zero));
    }

    #[test]
    fn cokernel_of_column() {
        let c = cokernel_rows(&mat(2, 1, &[1, 0]));
        assert_eq!(c, mat(1, 2, &[0, 1]));
        assert_eq!(abs_entries(&c), c);
    }

    #[test]
    fn ranks_agree() {
        let rows = [vec![2, 4, 6], vec![1, 2, 3], vec![0, 1, 5]];
        let big: Vec<Vec<BigInt>> = rows.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect();
        let small: Vec<Vec<u64>> = rows.iter().map(|r| r.iter().map(|&v| v as u64).collect()).collect();
        assert_eq!(bareiss_rank(big, 3), 2);
        assert_eq!(rank_mod_prime(small, 3, MODULUS), 2);
    }

    #[test]
    fn modular_kernel_annihilates() {
        let rows = vec![vec![1, 2, 3, 4], vec![2, 4, 7, 1]];
        let (pivots, basis) = kernel_mod_prime(rows.clone(), 4, MODULUS);
        assert_eq!(pivots, vec![0, 2]);
        assert_eq!(basis.len(), 2);
        for x in &basis {
            for row in &rows {
                let s = row.iter().zip(x).fold(0, |acc, (&a, &b)| (acc + mul_mod(a, b, MODULUS)) % MODULUS);
                assert_eq!(s, 0);
            }
        }
    }

    #[test]
    fn residues_of_negatives() {
        assert_eq!(to_residue(&BigInt::from(-1), MODULUS), MODULUS - 1);
        assert_eq!(mul_mod(MODULUS - 1, MODULUS - 1, MODULUS), 1);
    }

    #[test]
    fn prime_sieve_agrees_with_trial_division() {
        let naive = |n: u64| n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0);
        for n in 0..2000 {
            assert_eq!(is_prime(n), naive(n), "{n}");
        }
        let first: Vec<u64> = primes().take(3).collect();
        assert_eq!(first[0], MODULUS);
        assert!(first.iter().all(|&p| naive(p)));
    }

    #[test]
    fn reconstructs_fractions() {
        let m = BigInt::from(MODULUS);
        let three_inv = BigInt::from(pow_mod(3, MODULUS - 2, MODULUS));
        let (n, d) = rational_reconstruction(&(-BigInt::from(2) * three_inv), &m).unwrap();
        assert_eq!((n, d), (BigInt::from(-2), BigInt::from(3)));
    }

    #[test]
    fn multimodular_matches_bareiss_on_large_entries() {
        let big = |v: i64| BigInt::from(v).pow(5);
        let first = vec![big(1001), big(1001) * 2, big(17), BigInt::zero()];
        let second = vec![big(3), big(3) * 2, big(5), big(999)];
        let third = first.iter().zip(&second).map(|(a, b)| a * 7 - b * 3).collect();
        let rows = vec![first, second, third];
        let exact = 4 - bareiss_rank(rows.clone(), 4);
        assert_eq!(exact, 2);
        assert_eq!(kernel_dim_multimodular(&rows, 4, 0), exact);
        let wide: Vec<Vec<BigInt>> = rows.iter().map(|r| r.iter().chain(r.iter()).cloned().collect()).collect();
        assert_eq!(kernel_dim_multimodular(&wide, 8, 0), 8 - bareiss_rank(wide.clone(), 8));
    }

    #[test]
    fn lifting_certifies_small_kernels_of_large_rows() {
        // Three primes cannot reach the Hadamard bound, but the kernel vectors have tiny entries.
        let rows: Vec<Vec<BigInt>> = [(3, 7), (11, 2), (5, 13)]
            .iter()
            .map(|&(a, b)| {
                let (a, b) = (BigInt::from(a).pow(40), BigInt::from(b).pow(40) + BigInt::one());
                vec![a.clone(), a, b.clone(), b]
            })
            .collect();
        assert_eq!(kernel_dim_with_primes(&rows, 4, 0, 3), 2);
    }

    #[test]
    fn hadamard_certificate_on_rank_deficient_square() {
        let n = 12;
        let base: Vec<Vec<BigInt>> = (0..n)
            .map(|i| (0..n).map(|j| BigInt::from(((i * 7 + j * j * 3) % 11) as i64 - 5).pow(9)).collect())
            .collect();
        let mut rows = base.clone();
        rows[n - 1] = base[0].iter().zip(&base[1]).map(|(a, b)| a * 3 - b * 5).collect();
        assert_eq!(kernel_dim_multimodular(&rows, n, 0), n - bareiss_rank(rows.clone(), n));
    }
}
