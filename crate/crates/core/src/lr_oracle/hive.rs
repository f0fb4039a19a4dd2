//! Hive polytopes as exact linear programs.
//!
//! A hive of size `m` is a triangular array `h(i, j)` with `0 <= j <= i <= m`.
//! The left edge `h(i, 0)` carries partial sums of the first factor, the bottom
//! edge `h(m, j)` carries `|lambda|` plus partial sums of the second factor, and
//! the right edge `h(i, i)` carries partial sums of the product shape. Every unit
//! rhombus must have its obtuse-corner labels sum to at least its acute-corner labels.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::partition::Partition;
use super::simplex::{self, Outcome, System, SystemRow};
use super::LrError;

/// One inequality `sum coef * x <= rhs` with unit coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    terms: Vec<(usize, i8)>,
    rhs: BigRational,
}

impl Constraint {
    pub fn terms(&self) -> &[(usize, i8)] {
        &self.terms
    }

    pub fn rhs(&self) -> &BigRational {
        &self.rhs
    }
}

/// A system of `<=` rows over free rational variables whose coefficients lie in `{-1, 0, 1}`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinearProgram {
    num_vars: usize,
    rows: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram { num_vars, rows: Vec::new() }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn rows(&self) -> &[Constraint] {
        &self.rows
    }

    pub fn add_var(&mut self) -> usize {
        self.num_vars += 1;
        self.num_vars - 1
    }

    /// Adds `sum coef * x <= rhs`, merging repeated variables.
    ///
    /// Rows with no variables left are dropped when they hold and kept (as an
    /// unsatisfiable `0 <= rhs`) when they do not.
    pub fn push_le(&mut self, terms: &[(usize, i64)], rhs: BigRational) -> Result<(), LrError> {
        let mut merged: Vec<(usize, i64)> = Vec::with_capacity(terms.len());
        for &(var, coef) in terms {
            if var >= self.num_vars {
                return Err(LrError::UnknownVariable(var));
            }
            match merged.iter_mut().find(|(v, _)| *v == var) {
                Some(entry) => entry.1 += coef,
                None => merged.push((var, coef)),
            }
        }
        merged.retain(|&(_, c)| c != 0);
        merged.sort_unstable();
        let mut unit = Vec::with_capacity(merged.len());
        for (var, coef) in merged {
            if !(-1..=1).contains(&coef) {
                return Err(LrError::NonUnitCoefficient(coef));
            }
            unit.push((var, coef as i8));
        }
        if unit.is_empty() && rhs >= BigRational::from_integer(0.into()) {
            return Ok(());
        }
        self.rows.push(Constraint { terms: unit, rhs });
        Ok(())
    }

    pub fn push_eq(&mut self, terms: &[(usize, i64)], rhs: BigRational) -> Result<(), LrError> {
        let negated: Vec<(usize, i64)> = terms.iter().map(|&(v, c)| (v, -c)).collect();
        self.push_le(terms, rhs.clone())?;
        self.push_le(&negated, -rhs)
    }

    pub(crate) fn to_system(&self) -> System {
        System {
            num_vars: self.num_vars,
            rows: self
                .rows
                .iter()
                .map(|r| SystemRow { terms: r.terms.iter().map(|&(v, c)| (v, c as i64)).collect(), rhs: r.rhs.clone() })
                .collect(),
        }
    }
}

/// Outcome of an exact feasibility solve with its pivot bookkeeping.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LpReport {
    pub feasible: bool,
    pub pivots: usize,
    pub pivot_digest: u64,
    pub big_rational_fallback: bool,
    /// The certificate came from the floating-point search and was verified exactly.
    pub certified_from_float: bool,
}

/// Exact feasibility of `lp` over the rationals.
pub fn lp_feasible(lp: &LinearProgram) -> bool {
    lp_feasibility_report(lp).feasible
}

pub fn lp_feasibility_report(lp: &LinearProgram) -> LpReport {
    let (outcome, stats) = simplex::solve(&lp.to_system(), false);
    LpReport {
        feasible: matches!(outcome, Outcome::Feasible(_)),
        pivots: stats.pivots,
        pivot_digest: stats.pivot_digest,
        big_rational_fallback: stats.used_big_rationals,
        certified_from_float: stats.certified_from_float,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Label {
    Const(i64),
    Var(usize),
}

fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Appends the rhombus rows of one hive. Edge slices have length `size + 1`.
pub(crate) fn push_hive(
    lp: &mut LinearProgram,
    left: &[Label],
    bottom: &[Label],
    right: &[Label],
) -> Result<(), LrError> {
    let size = left.len() - 1;
    debug_assert_eq!(bottom.len(), size + 1);
    debug_assert_eq!(right.len(), size + 1);
    let mut grid: Vec<Vec<Label>> = Vec::with_capacity(size + 1);
    for i in 0..=size {
        let mut row = Vec::with_capacity(i + 1);
        for j in 0..=i {
            let label = if i == size {
                bottom[j]
            } else if j == 0 {
                left[i]
            } else if j == i {
                right[i]
            } else {
                Label::Var(lp.add_var())
            };
            row.push(label);
        }
        grid.push(row);
    }
    let mut rhombus = |acute: [(usize, usize); 2], obtuse: [(usize, usize); 2]| {
        let mut terms = Vec::with_capacity(4);
        let mut constant = 0i64;
        for (pos, sign) in [(acute[0], 1), (acute[1], 1), (obtuse[0], -1), (obtuse[1], -1)] {
            match grid[pos.0][pos.1] {
                Label::Const(c) => constant += sign * c,
                Label::Var(v) => terms.push((v, sign)),
            }
        }
        lp.push_le(&terms, int(-constant))
    };
    for i in 1..size {
        for j in 0..i {
            rhombus([(i - 1, j), (i + 1, j + 1)], [(i, j), (i, j + 1)])?;
        }
        for j in 1..=i {
            rhombus([(i, j - 1), (i + 1, j + 1)], [(i, j), (i + 1, j)])?;
        }
    }
    for i in 1..size {
        for j in 0..i {
            rhombus([(i + 1, j), (i, j + 1)], [(i, j), (i + 1, j + 1)])?;
        }
    }
    Ok(())
}

fn fixed_edge(partition: &Partition, offset: u64, size: usize) -> Vec<Label> {
    partition.partial_sums(size).into_iter().map(|s| Label::Const((s + offset) as i64)).collect()
}

/// The hive LP for `c^nu_{lambda, mu}` in `GL_m`: feasible iff the coefficient is positive.
pub fn build_hive(lambda: &Partition, mu: &Partition, nu: &Partition, m: usize) -> Result<LinearProgram, LrError> {
    for p in [lambda, mu, nu] {
        if p.length() > m {
            return Err(LrError::TooLong { length: p.length(), ambient: m });
        }
    }
    if lambda.size() + mu.size() != nu.size() {
        return Err(LrError::DegreeMismatch);
    }
    let mut lp = LinearProgram::new(0);
    push_hive(&mut lp, &fixed_edge(lambda, 0, m), &fixed_edge(mu, lambda.size(), m), &fixed_edge(nu, 0, m))?;
    Ok(lp)
}

/// Intermediate partition of a chain, held as LP variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntermediateBlock {
    /// Number of rows the intermediate partition may occupy.
    pub rows: usize,
    pub size: u64,
    /// Variable ids of the parts.
    pub parts: Vec<usize>,
    /// Variable ids of the partial sums `h(1), ..., h(rows - 1)`.
    pub partial_sums: Vec<usize>,
}

/// The joined LP deciding positivity of `c^nu_{lambda_1, ..., lambda_r}`.
///
/// Hive `j` multiplies the running product by factor `j + 1`; consecutive
/// hives share the edge of the intermediate partition between them.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainedHiveSystem {
    pub lp: LinearProgram,
    pub hive_sizes: Vec<usize>,
    pub intermediates: Vec<IntermediateBlock>,
}

enum Edge<'a> {
    Fixed(&'a Partition),
    Block(&'a IntermediateBlock),
}

impl Edge<'_> {
    fn size(&self) -> u64 {
        match self {
            Edge::Fixed(p) => p.size(),
            Edge::Block(b) => b.size,
        }
    }

    fn labels(&self, hive: usize) -> Vec<Label> {
        match self {
            Edge::Fixed(p) => fixed_edge(p, 0, hive),
            Edge::Block(b) => (0..=hive)
                .map(|i| {
                    if i == 0 {
                        Label::Const(0)
                    } else if i < b.rows {
                        Label::Var(b.partial_sums[i - 1])
                    } else {
                        Label::Const(b.size as i64)
                    }
                })
                .collect(),
        }
    }
}

impl ChainedHiveSystem {
    /// Builds the chain for `factors` (at least two) and target `nu` inside `GL_m`.
    pub fn build(factors: &[Partition], nu: &Partition, m: usize) -> Result<Self, LrError> {
        if factors.len() < 2 {
            return Err(LrError::TooFewFactors);
        }
        if factors.iter().map(Partition::size).sum::<u64>() != nu.size() {
            return Err(LrError::DegreeMismatch);
        }
        for p in factors.iter().chain(std::iter::once(nu)) {
            if p.length() > m {
                return Err(LrError::TooLong { length: p.length(), ambient: m });
            }
        }
        let mut lp = LinearProgram::new(0);
        let mut hive_sizes = Vec::new();
        let mut intermediates: Vec<IntermediateBlock> = Vec::new();
        let mut rows_so_far = factors[0].length();
        let mut size_so_far = factors[0].size();
        let last = factors.len() - 1;
        for (j, factor) in factors.iter().enumerate().skip(1) {
            rows_so_far = (rows_so_far + factor.length()).min(m);
            size_so_far += factor.size();
            let hive = if j == last { m } else { rows_so_far.max(1) };
            if j < last {
                let block = new_block(&mut lp, rows_so_far, size_so_far)?;
                intermediates.push(block);
            }
            let left = if j == 1 { Edge::Fixed(&factors[0]) } else { Edge::Block(&intermediates[j - 2]) };
            let right = if j == last { Edge::Fixed(nu) } else { Edge::Block(&intermediates[j - 1]) };
            let left_labels = left.labels(hive);
            let offset = left.size();
            let bottom = fixed_edge(factor, offset, hive);
            let right_labels = right.labels(hive);
            push_hive(&mut lp, &left_labels, &bottom, &right_labels)?;
            hive_sizes.push(hive);
        }
        Ok(ChainedHiveSystem { lp, hive_sizes, intermediates })
    }
}

fn new_block(lp: &mut LinearProgram, rows: usize, size: u64) -> Result<IntermediateBlock, LrError> {
    let parts: Vec<usize> = (0..rows).map(|_| lp.add_var()).collect();
    let partial_sums: Vec<usize> = (1..rows).map(|_| lp.add_var()).collect();
    let zero = int(0);
    // h(i) - h(i-1) = part(i-1), with h(0) = 0 and h(rows) = size.
    for i in 1..=rows {
        let mut terms = vec![(parts[i - 1], -1)];
        if i < rows {
            terms.push((partial_sums[i - 1], 1));
        }
        if i > 1 {
            terms.push((partial_sums[i - 2], -1));
        }
        let rhs = if i == rows { -(size as i64) } else { 0 };
        lp.push_eq(&terms, int(rhs))?;
    }
    for i in 0..rows {
        if i + 1 < rows {
            lp.push_le(&[(parts[i + 1], 1), (parts[i], -1)], zero.clone())?;
        }
        lp.push_le(&[(parts[i], -1)], zero.clone())?;
    }
    Ok(IntermediateBlock { rows, size, parts, partial_sums })
}
