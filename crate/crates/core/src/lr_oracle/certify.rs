//! Exact certificates assembled from floating-point LP solutions.
//!
//! A sparse floating-point simplex proposes either a feasible point or, for
//! the dual system, a Farkas multiplier vector. The proposal is only used to
//! choose which equations should hold with equality; the certificate itself is
//! the exact solution of those equations, checked against every row.

use std::collections::BTreeSet;

use microlp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::field::{ExactField, SmallRational};
use super::simplex::System;

/// Slack below which a row counts as tight at a floating-point solution.
const TIGHT: f64 = 1e-6;
/// Multipliers below this are treated as absent from a Farkas combination.
const SUPPORT: f64 = 1e-9;

/// Row of a sparse linear equation system with integer coefficients.
pub(crate) struct Equation {
    pub terms: Vec<(usize, i64)>,
    pub rhs: BigRational,
}

/// Exact certificate found from a floating-point search.
pub(crate) enum Certificate {
    Point(Vec<BigRational>),
    Infeasible,
}

pub(crate) fn certify(system: &System) -> Option<Certificate> {
    match float_point(system)? {
        Some(x) => point_certificate(system, &x).map(Certificate::Point),
        None => farkas_certificate(system).then_some(Certificate::Infeasible),
    }
}

/// `Some(Some(x))` for a feasible point, `Some(None)` when reported infeasible.
fn float_point(system: &System) -> Option<Option<Vec<f64>>> {
    let mut prob = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = (0..system.num_vars).map(|_| prob.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY))).collect();
    for row in &system.rows {
        let mut expr = LinearExpr::empty();
        for &(j, c) in &row.terms {
            expr.add(vars[j], c as f64);
        }
        prob.add_constraint(expr, ComparisonOp::Le, row.rhs.to_f64()?);
    }
    match prob.solve() {
        Ok(outcome) => {
            let solution = outcome.solution()?;
            Some(Some(vars.iter().map(|&v| solution.var_value(v)).collect()))
        }
        Err(microlp::Error::Infeasible) => Some(None),
        Err(_) => None,
    }
}

fn point_certificate(system: &System, x: &[f64]) -> Option<Vec<BigRational>> {
    let mut equations = Vec::new();
    for row in &system.rows {
        let lhs: f64 = row.terms.iter().map(|&(j, c)| c as f64 * x[j]).sum();
        let rhs = row.rhs.to_f64()?;
        if rhs - lhs <= TIGHT * rhs.abs().max(1.0) {
            equations.push(Equation { terms: row.terms.clone(), rhs: row.rhs.clone() });
        }
    }
    let point = solve_equations(&equations, system.num_vars, x)?;
    let holds = system.rows.iter().all(|row| {
        let lhs: BigRational =
            row.terms.iter().map(|&(j, c)| &point[j] * BigRational::from_integer(BigInt::from(c))).sum();
        lhs <= row.rhs
    });
    holds.then_some(point)
}

/// Searches `y >= 0` with `y A = 0` and `y b = -1`, then confirms it exactly.
fn farkas_certificate(system: &System) -> bool {
    let m = system.rows.len();
    let mut prob = Problem::new(OptimizationDirection::Minimize);
    let ys: Vec<_> = (0..m).map(|_| prob.add_var(1.0, (0.0, f64::INFINITY))).collect();
    let mut columns: Vec<LinearExpr> = (0..system.num_vars).map(|_| LinearExpr::empty()).collect();
    let mut bound = LinearExpr::empty();
    for (i, row) in system.rows.iter().enumerate() {
        for &(j, c) in &row.terms {
            columns[j].add(ys[i], c as f64);
        }
        match row.rhs.to_f64() {
            Some(b) if b != 0.0 => bound.add(ys[i], b),
            Some(_) => {}
            None => return false,
        }
    }
    for col in columns {
        prob.add_constraint(col, ComparisonOp::Eq, 0.0);
    }
    prob.add_constraint(bound, ComparisonOp::Eq, -1.0);
    let Ok(outcome) = prob.solve() else { return false };
    let Some(solution) = outcome.solution() else { return false };
    let y: Vec<f64> = ys.iter().map(|&v| solution.var_value(v)).collect();
    let support: Vec<usize> = (0..m).filter(|&i| y[i] > SUPPORT).collect();

    // Unknowns are the multipliers on the support; one equation per LP variable plus the bound.
    let mut per_var: Vec<Vec<(usize, i64)>> = vec![Vec::new(); system.num_vars];
    for (u, &i) in support.iter().enumerate() {
        for &(j, c) in &system.rows[i].terms {
            per_var[j].push((u, c));
        }
    }
    let mut equations: Vec<Equation> = per_var
        .into_iter()
        .filter(|t| !t.is_empty())
        .map(|terms| Equation { terms, rhs: <BigRational as Zero>::zero() })
        .collect();
    let scale = support.iter().fold(BigInt::one(), |acc, &i| acc.lcm(system.rows[i].rhs.denom()));
    let mut bound_terms = Vec::with_capacity(support.len());
    for (u, &i) in support.iter().enumerate() {
        let scaled = &system.rows[i].rhs * BigRational::from_integer(scale.clone());
        let Some(c) = scaled.to_integer().to_i64() else { return false };
        if c != 0 {
            bound_terms.push((u, c));
        }
    }
    equations.push(Equation { terms: bound_terms, rhs: -BigRational::from_integer(scale) });
    let guess: Vec<f64> = support.iter().map(|&i| y[i]).collect();
    let Some(values) = solve_equations(&equations, support.len(), &guess) else { return false };
    if values.iter().any(Signed::is_negative) {
        return false;
    }
    let mut combo = vec![<BigRational as Zero>::zero(); system.num_vars];
    let mut total = <BigRational as Zero>::zero();
    for (u, &i) in support.iter().enumerate() {
        for &(j, c) in &system.rows[i].terms {
            combo[j] += &values[u] * BigRational::from_integer(BigInt::from(c));
        }
        total += &values[u] * &system.rows[i].rhs;
    }
    total.is_negative() && combo.iter().all(Zero::is_zero)
}

/// Exact solution of a consistent sparse system; unknowns left free by the
/// equations take the value of `guess` rounded to the nearest integer.
pub(crate) fn solve_equations(equations: &[Equation], num_vars: usize, guess: &[f64]) -> Option<Vec<BigRational>> {
    eliminate::<SmallRational>(equations, num_vars, guess)
        .or_else(|| eliminate::<BigRational>(equations, num_vars, guess))
}

struct SparseRow<T> {
    /// Sorted by column.
    entries: Vec<(usize, T)>,
    rhs: T,
}

fn eliminate<T: ExactField>(equations: &[Equation], num_vars: usize, guess: &[f64]) -> Option<Vec<BigRational>> {
    let mut rows: Vec<SparseRow<T>> = Vec::with_capacity(equations.len());
    let mut col_rows: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); num_vars];
    for (i, eq) in equations.iter().enumerate() {
        let mut entries: Vec<(usize, T)> =
            eq.terms.iter().filter(|&&(_, c)| c != 0).map(|&(j, c)| (j, T::from_i64(c))).collect();
        entries.sort_by_key(|e| e.0);
        for &(j, _) in &entries {
            col_rows[j].insert(i);
        }
        rows.push(SparseRow { entries, rhs: T::from_big(&eq.rhs)? });
    }
    let mut active: BTreeSet<usize> = (0..rows.len()).collect();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut pivot_col = vec![false; num_vars];

    while !active.is_empty() {
        let r = *active.iter().min_by_key(|&&i| (rows[i].entries.len(), i))?;
        active.remove(&r);
        if rows[r].entries.is_empty() {
            if rows[r].rhs.is_zero() {
                continue;
            }
            return None;
        }
        let c = rows[r].entries.iter().map(|e| e.0).min_by_key(|&j| (col_rows[j].len(), j))?;
        let pivot_value = rows[r].entries.iter().find(|e| e.0 == c)?.1.clone();
        let targets: Vec<usize> = col_rows[c].iter().copied().filter(|i| active.contains(i)).collect();
        for i in targets {
            let factor = rows[i].entries.iter().find(|e| e.0 == c)?.1.div(&pivot_value)?;
            let (merged, rhs) = {
                let a = &rows[i];
                let b = &rows[r];
                let mut merged = Vec::with_capacity(a.entries.len() + b.entries.len());
                let (mut p, mut q) = (0, 0);
                while p < a.entries.len() || q < b.entries.len() {
                    let take_a = q == b.entries.len() || (p < a.entries.len() && a.entries[p].0 < b.entries[q].0);
                    let take_b = p == a.entries.len() || (q < b.entries.len() && b.entries[q].0 < a.entries[p].0);
                    if take_a {
                        merged.push(a.entries[p].clone());
                        p += 1;
                    } else if take_b {
                        let mut v = T::zero();
                        v.sub_mul(&factor, &b.entries[q].1)?;
                        merged.push((b.entries[q].0, v));
                        q += 1;
                    } else {
                        let mut v = a.entries[p].1.clone();
                        v.sub_mul(&factor, &b.entries[q].1)?;
                        merged.push((a.entries[p].0, v));
                        p += 1;
                        q += 1;
                    }
                }
                let mut rhs = a.rhs.clone();
                rhs.sub_mul(&factor, &b.rhs)?;
                (merged, rhs)
            };
            for (j, v) in &merged {
                if v.is_zero() {
                    col_rows[*j].remove(&i);
                } else {
                    col_rows[*j].insert(i);
                }
            }
            rows[i].entries = merged.into_iter().filter(|(_, v)| !v.is_zero()).collect();
            rows[i].rhs = rhs;
        }
        for &(j, _) in &rows[r].entries {
            col_rows[j].remove(&r);
        }
        pivot_col[c] = true;
        pivots.push((r, c));
    }

    let mut values: Vec<T> = (0..num_vars)
        .map(|j| {
            if pivot_col[j] {
                Some(T::zero())
            } else {
                let g = guess.get(j).copied().unwrap_or(0.0).round();
                if g.is_finite() && g.abs() < 1e15 {
                    Some(T::from_i64(g as i64))
                } else {
                    None
                }
            }
        })
        .collect::<Option<_>>()?;
    for &(r, c) in pivots.iter().rev() {
        let row = &rows[r];
        let mut acc = row.rhs.clone();
        let mut pivot_value = None;
        for (j, v) in &row.entries {
            if *j == c {
                pivot_value = Some(v.clone());
            } else {
                acc.sub_mul(v, &values[*j])?;
            }
        }
        values[c] = acc.div(&pivot_value?)?;
    }
    Some(values.iter().map(ExactField::to_big).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn solves_square_system() {
        // x + y = 3, x - y = 1/2
        let eqs = vec![
            Equation { terms: vec![(0, 1), (1, 1)], rhs: q(3, 1) },
            Equation { terms: vec![(0, 1), (1, -1)], rhs: q(1, 2) },
        ];
        let x = solve_equations(&eqs, 2, &[0.0, 0.0]).unwrap();
        assert_eq!(x, vec![q(7, 4), q(5, 4)]);
    }

    #[test]
    fn detects_inconsistency() {
        let eqs = vec![Equation { terms: vec![(0, 1)], rhs: q(1, 1) }, Equation { terms: vec![(0, 2)], rhs: q(3, 1) }];
        assert!(solve_equations(&eqs, 1, &[0.0]).is_none());
    }

    #[test]
    fn free_unknowns_follow_the_guess() {
        let eqs = vec![Equation { terms: vec![(0, 1), (1, 1)], rhs: q(4, 1) }];
        let x = solve_equations(&eqs, 2, &[0.0, 3.2]).unwrap();
        assert_eq!(x[0].clone() + x[1].clone(), q(4, 1));
    }
}
