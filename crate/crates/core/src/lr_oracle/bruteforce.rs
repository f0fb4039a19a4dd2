//! Littlewood–Richardson coefficients by explicit enumeration of LR tableaux.
//!
//! Multiplying `s_alpha` by `s_mu` adds `mu_1` ones, then `mu_2` twos, and so
//! on, each letter forming a horizontal strip. A filling counts when its
//! reverse reading word (rows top to bottom, each read right to left) is a
//! lattice word.

use std::collections::BTreeMap;

use super::partition::Partition;
use super::LrError;

/// Default cap on `|nu|` for the enumeration oracle.
pub const DEFAULT_BRUTEFORCE_CAP: u64 = 14;

type Shape = Vec<u64>;

/// `c^nu_{lambda_1, ..., lambda_k}` by iterated tableau enumeration, with the default size cap.
pub fn lr_count_bruteforce(lambdas: &[Partition], nu: &Partition) -> Result<u64, LrError> {
    lr_count_bruteforce_capped(lambdas, nu, DEFAULT_BRUTEFORCE_CAP)
}

pub fn lr_count_bruteforce_capped(lambdas: &[Partition], nu: &Partition, cap: u64) -> Result<u64, LrError> {
    if nu.size() > cap {
        return Err(LrError::CapExceeded { size: nu.size(), cap });
    }
    if lambdas.iter().map(Partition::size).sum::<u64>() != nu.size() {
        return Ok(0);
    }
    let target: Shape = nu.parts().to_vec();
    let mut current: BTreeMap<Shape, u64> = BTreeMap::new();
    current.insert(Vec::new(), 1);
    for lambda in lambdas {
        let mut next: BTreeMap<Shape, u64> = BTreeMap::new();
        for (shape, count) in &current {
            for (product, mult) in multiply(shape, lambda.parts()) {
                // Shapes that leave nu can never come back inside it.
                if contained(&product, &target) {
                    *next.entry(product).or_insert(0) += count * mult;
                }
            }
        }
        current = next;
    }
    Ok(current.get(&target).copied().unwrap_or(0))
}

/// Every outcome of multiplying `s_shape` by `s_mu` with its multiplicity.
pub fn product_expansion(shape: &Partition, mu: &Partition) -> Vec<(Partition, u64)> {
    multiply(shape.parts(), mu.parts())
        .into_iter()
        .map(|(s, c)| (Partition::from_parts(s).expect("products are partitions"), c))
        .collect()
}

fn contained(inner: &[u64], outer: &[u64]) -> bool {
    inner.len() <= outer.len() && inner.iter().zip(outer).all(|(a, b)| a <= b)
}

fn multiply(shape: &[u64], mu: &[u64]) -> BTreeMap<Shape, u64> {
    let mut out = BTreeMap::new();
    // counts[r][l] = number of letter l placed in row r.
    let rows = shape.len() + mu.len();
    let mut base = shape.to_vec();
    base.resize(rows, 0);
    let mut counts = vec![vec![0u64; mu.len()]; rows];
    place_letter(&base, mu, 0, &mut counts, &mut out);
    out
}

fn place_letter(shape: &[u64], mu: &[u64], letter: usize, counts: &mut Vec<Vec<u64>>, out: &mut BTreeMap<Shape, u64>) {
    if letter == mu.len() {
        let mut s = shape.to_vec();
        while s.last() == Some(&0) {
            s.pop();
        }
        *out.entry(s).or_insert(0) += 1;
        return;
    }
    let mut grown = shape.to_vec();
    strip(shape, mu, letter, 0, mu[letter], &mut grown, counts, out);
}

/// Chooses how many boxes of `letter` go into `row` and below, as a horizontal strip.
#[allow(clippy::too_many_arguments)]
fn strip(
    shape: &[u64],
    mu: &[u64],
    letter: usize,
    row: usize,
    remaining: u64,
    grown: &mut Vec<u64>,
    counts: &mut Vec<Vec<u64>>,
    out: &mut BTreeMap<Shape, u64>,
) {
    if remaining == 0 {
        place_letter(&grown.clone(), mu, letter + 1, counts, out);
        return;
    }
    if row == shape.len() {
        return;
    }
    // Horizontal strip: row r may grow up to the old length of row r-1.
    let room = if row == 0 { remaining } else { shape[row - 1] - shape[row] };
    let max_here = room.min(remaining);
    for add in 0..=max_here {
        if add > 0 && !lattice_ok(counts, letter, row, add) {
            break;
        }
        counts[row][letter] = add;
        grown[row] = shape[row] + add;
        strip(shape, mu, letter, row + 1, remaining - add, grown, counts, out);
        counts[row][letter] = 0;
        grown[row] = shape[row];
    }
}

/// Lattice condition at the moment the letters `letter` of `row` have been read.
fn lattice_ok(counts: &[Vec<u64>], letter: usize, row: usize, add: u64) -> bool {
    if letter == 0 {
        return true;
    }
    let above_prev: u64 = counts[..row].iter().map(|c| c[letter - 1]).sum();
    let through_here: u64 = counts[..row].iter().map(|c| c[letter]).sum::<u64>() + add;
    above_prev >= through_here
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(parts: &[u64]) -> Partition {
        Partition::from_parts(parts.to_vec()).unwrap()
    }

    #[test]
    fn small_products() {
        assert_eq!(lr_count_bruteforce(&[p(&[1]), p(&[1])], &p(&[1, 1])).unwrap(), 1);
        assert_eq!(lr_count_bruteforce(&[p(&[2]), p(&[1, 1])], &p(&[2, 2])).unwrap(), 0);
        assert_eq!(lr_count_bruteforce(&[p(&[2, 1]), p(&[2, 1])], &p(&[3, 2, 1])).unwrap(), 2);
        assert_eq!(lr_count_bruteforce(&[p(&[1, 1]), p(&[1, 1])], &p(&[2, 1, 1])).unwrap(), 1);
    }

    #[test]
    fn cap_is_enforced() {
        let big = p(&[15]);
        assert!(lr_count_bruteforce(std::slice::from_ref(&big), &big).is_err());
    }
}
