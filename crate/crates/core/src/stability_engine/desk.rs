//! Stability from the extremal rays of the cone of semistable dimension vectors.
//!
//! The rays are searched in a box `[0, bound]^{k+1}`; a vector outside the
//! cone they span makes the search inconclusive rather than wrong.

use std::collections::{HashMap, HashSet};
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::lr_oracle::simplex::{solve, solve_exact, Outcome, System, SystemRow};
use crate::lr_oracle::{lr_positive, rectangle};
use crate::quiver_core::{euler_form, pairing, DimensionVector, Weight};

/// Default cap on [`query_cost`] summed over the box before the search gives up.
pub const DEFAULT_DW_BUDGET: u64 = 100_000_000;

/// `max(2 * largest entry, 12)`.
pub fn default_dw_bound(alpha: &DimensionVector) -> u64 {
    let largest = alpha.legs().iter().copied().fold(alpha.center(), u64::max);
    (2 * largest).max(12)
}

type MemoKey = (Vec<i64>, Vec<i64>);

fn memo() -> &'static Mutex<HashMap<MemoKey, bool>> {
    static MEMO: OnceLock<Mutex<HashMap<MemoKey, bool>>> = OnceLock::new();
    MEMO.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Whether a generic representation of dimension `beta` is `sigma`-semistable.
///
/// Legs with weight of the wrong sign, or a center with positive weight,
/// give a destabilizing subrepresentation directly; otherwise the question is
/// a rectangular Littlewood–Richardson positivity query.
pub fn is_sigma_semistable(sigma: &Weight, beta: &[i64]) -> bool {
    if pairing(sigma, beta) != Ok(0) || beta.iter().any(|&b| b < 0) {
        return false;
    }
    let sigma = sigma.primitive();
    let mut legs: Vec<(i64, i64)> =
        sigma.legs().iter().zip(&beta[1..]).filter(|(_, &b)| b > 0).map(|(&s, &b)| (s, b)).collect();
    legs.sort_unstable();
    let key = (
        std::iter::once(sigma.center()).chain(legs.iter().map(|l| l.0)).collect(),
        std::iter::once(beta[0]).chain(legs.iter().map(|l| l.1)).collect(),
    );
    if let Some(&known) = memo().lock().expect("memo lock").get(&key) {
        return known;
    }
    let answer = semistable_uncached(sigma.center(), beta[0], &legs);
    memo().lock().expect("memo lock").insert(key, answer);
    answer
}

fn semistable_uncached(sigma_center: i64, center: i64, legs: &[(i64, i64)]) -> bool {
    if legs.iter().any(|&(s, _)| s < 0) || (center > 0 && sigma_center > 0) {
        return false;
    }
    if legs.iter().any(|&(s, b)| s > 0 && b > center) {
        return false;
    }
    if center == 0 {
        return legs.is_empty();
    }
    let m = center as usize;
    let Ok(nu) = rectangle(m, (-sigma_center) as u64, m) else { return false };
    let lambdas: Vec<_> =
        legs.iter().filter(|&&(s, _)| s > 0).filter_map(|&(s, b)| rectangle(b as usize, s as u64, m).ok()).collect();
    lr_positive(&lambdas, &nu, m).unwrap_or(false)
}

fn vector_gcd(v: &[i64]) -> i64 {
    v.iter().fold(0i64, |g, &x| g.gcd(&x))
}

/// Integer row `sum coef * x <= rhs`.
fn row(terms: Vec<(usize, i64)>, rhs: i64) -> SystemRow {
    SystemRow { terms, rhs: BigRational::from_integer(BigInt::from(rhs)) }
}

/// `{c >= 0 : sum_j c_j gens_j = target}` as a system of inequalities.
fn cone_system(gens: &[&Vec<i64>], target: &[i64]) -> System {
    let mut rows = Vec::new();
    for (i, &t) in target.iter().enumerate() {
        let terms: Vec<(usize, i64)> =
            gens.iter().enumerate().filter(|(_, g)| g[i] != 0).map(|(j, g)| (j, g[i])).collect();
        let negated = terms.iter().map(|&(j, c)| (j, -c)).collect();
        rows.push(row(terms, t));
        rows.push(row(negated, -t));
    }
    for j in 0..gens.len() {
        rows.push(row(vec![(j, -1)], 0));
    }
    System { num_vars: gens.len(), rows }
}

/// Indivisible `sigma`-semistable vectors in the box that span extremal rays of their cone.
pub fn dw_extremal_rays_desk(sigma: &Weight, k: usize, bound: u64) -> Vec<Vec<i64>> {
    dw_extremal_rays_within(sigma, k, bound, None).unwrap_or_default()
}

/// Like [`dw_extremal_rays_desk`], but gives up with `None` when the
/// semistability queries of the box would cost more than `budget`.
pub fn dw_extremal_rays_within(sigma: &Weight, k: usize, bound: u64, budget: Option<u64>) -> Option<Vec<Vec<i64>>> {
    if sigma.leg_count() != k {
        return Some(Vec::new());
    }
    let candidates = box_candidates(&sigma.primitive(), bound.max(1) as i64, budget.unwrap_or(u64::MAX))?;
    let semistable: HashSet<Vec<i64>> =
        candidates.into_iter().filter(|beta| is_sigma_semistable(sigma, beta)).collect();
    Some(extremal_subset(split_free(&semistable)))
}

/// Rough cost of one semistability query for a primitive `sigma`.
///
/// The rectangles in the query have side `min(center, -sigma_center)` after
/// transposition, and elimination on the resulting hives grows about
/// cubically in it, once per leg that enters.
pub fn query_cost(sigma: &Weight, beta: &[i64]) -> u64 {
    let side = beta[0].min(-sigma.center()).max(0) as u64;
    let legs = beta[1..].iter().filter(|&&b| b > 0).count() as u64;
    legs * side.pow(3)
}

/// Nonzero box vectors on the hyperplane `sigma = 0` that survive the sign checks.
fn box_candidates(sigma: &Weight, bound: i64, budget: u64) -> Option<Vec<Vec<i64>>> {
    let k = sigma.leg_count();
    let sc = sigma.center();
    let mut out = Vec::new();
    let mut spent = 0u64;
    let mut legs = vec![0i64; k];
    loop {
        let leg_weight: i64 = sigma.legs().iter().zip(&legs).map(|(s, b)| s * b).sum();
        let centers: Vec<i64> = if sc == 0 {
            if leg_weight == 0 {
                (0..=bound).collect()
            } else {
                Vec::new()
            }
        } else if leg_weight % sc == 0 && (-leg_weight / sc) >= 0 && (-leg_weight / sc) <= bound {
            vec![-leg_weight / sc]
        } else {
            Vec::new()
        };
        for c in centers {
            let sign_ok = sigma.legs().iter().zip(&legs).all(|(&s, &b)| b == 0 || (s >= 0 && (s == 0 || b <= c)));
            if sign_ok && (c > 0 || legs.iter().any(|&b| b != 0)) {
                let beta: Vec<i64> = std::iter::once(c).chain(legs.iter().copied()).collect();
                spent = spent.saturating_add(query_cost(sigma, &beta));
                if spent > budget {
                    return None;
                }
                out.push(beta);
            }
        }
        let mut i = 0;
        while i < k && legs[i] == bound {
            legs[i] = 0;
            i += 1;
        }
        if i == k {
            return Some(out);
        }
        legs[i] += 1;
    }
}

/// Indivisible members that are not a sum of two members off their own ray.
fn split_free(semistable: &HashSet<Vec<i64>>) -> Vec<Vec<i64>> {
    let mut sorted: Vec<&Vec<i64>> = semistable.iter().collect();
    sorted.sort();
    let mut out = Vec::new();
    for v in sorted.iter().copied().filter(|v| vector_gcd(v) == 1) {
        let splits = sorted.iter().any(|u| {
            if u.iter().zip(v.iter()).any(|(a, b)| a > b) || !not_parallel(u, v) {
                return false;
            }
            let rest: Vec<i64> = v.iter().zip(u.iter()).map(|(a, b)| a - b).collect();
            semistable.contains(&rest)
        });
        if !splits {
            out.push(v.clone());
        }
    }
    out
}

fn not_parallel(u: &[i64], v: &[i64]) -> bool {
    (0..u.len()).any(|i| (i + 1..u.len()).any(|j| u[i] * v[j] != u[j] * v[i]))
}

/// Keeps the vectors that are not non-negative combinations of the others.
fn extremal_subset(candidates: Vec<Vec<i64>>) -> Vec<Vec<i64>> {
    let mut keep = vec![true; candidates.len()];
    for i in 0..candidates.len() {
        let others: Vec<&Vec<i64>> =
            candidates.iter().enumerate().filter(|&(j, _)| j != i && keep[j]).map(|(_, v)| v).collect();
        if others.is_empty() {
            continue;
        }
        let (outcome, _) = solve(&cone_system(&others, &candidates[i]), false);
        if matches!(outcome, Outcome::Feasible(_)) {
            keep[i] = false;
        }
    }
    candidates.into_iter().zip(keep).filter(|(_, k)| *k).map(|(v, _)| v).collect()
}

/// Which condition of the extremal-ray criterion applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DwCase {
    /// `alpha` is itself a generator and a real root.
    RealGenerator,
    /// Sign, connectivity and indivisibility conditions all hold.
    Connected,
    /// At least one condition fails.
    Fails,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DWWitness {
    pub generators: Vec<Vec<i64>>,
    /// `alpha = sum coefficients[i] * generators[i]`, each coefficient positive.
    pub coefficients: Vec<BigRational>,
    /// Pairs `(i, j)` with `<generators[i], generators[j]> < 0`.
    pub adjacency: Vec<(usize, usize)>,
    pub case: DwCase,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DwOutcome {
    Stable(DWWitness),
    NotStable(DWWitness),
    Inconclusive,
}

fn connected(t: usize, adjacency: &[(usize, usize)]) -> bool {
    if t == 0 {
        return false;
    }
    let mut seen = vec![false; t];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for &(a, b) in adjacency {
            for (x, y) in [(a, b), (b, a)] {
                if x == u && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Stability of a `sigma`-semistable `alpha` from a vertex decomposition into extremal rays.
///
/// `budget` limits the ray search as in [`dw_extremal_rays_within`]; running
/// out of it is inconclusive.
pub fn dw_stable_desk(alpha: &DimensionVector, sigma: &Weight, bound: u64, budget: Option<u64>) -> DwOutcome {
    let target = alpha.to_vector();
    let Some(rays) = dw_extremal_rays_within(sigma, alpha.leg_count(), bound, budget) else {
        return DwOutcome::Inconclusive;
    };
    if rays.is_empty() {
        return DwOutcome::Inconclusive;
    }
    let refs: Vec<&Vec<i64>> = rays.iter().collect();
    let (Outcome::Feasible(Some(point)), _) = solve_exact(&cone_system(&refs, &target), true) else {
        return DwOutcome::Inconclusive;
    };
    let support: Vec<usize> = (0..rays.len()).filter(|&j| point[j].is_positive()).collect();
    let generators: Vec<Vec<i64>> = support.iter().map(|&j| rays[j].clone()).collect();
    let coefficients: Vec<BigRational> = support.iter().map(|&j| point[j].clone()).collect();
    let t = generators.len();
    let mut adjacency = Vec::new();
    for i in 0..t {
        for j in 0..t {
            if i != j && euler_form(&generators[i], &generators[j]).expect("same quiver") < 0 {
                adjacency.push((i, j));
            }
        }
    }
    let self_pairing = euler_form(&target, &target).expect("same quiver");
    let real_generator = t == 1 && generators[0] == target && self_pairing == 1;
    let signs = generators.iter().all(|d| {
        euler_form(d, &target).expect("same quiver") <= 0 && euler_form(&target, d).expect("same quiver") <= 0
    });
    let indivisible = self_pairing != 0 || alpha.content() == 1;
    let case = if real_generator {
        DwCase::RealGenerator
    } else if signs && connected(t, &adjacency) && indivisible {
        DwCase::Connected
    } else {
        DwCase::Fails
    };
    let witness = DWWitness { generators, coefficients, adjacency, case };
    if case == DwCase::Fails {
        DwOutcome::NotStable(witness)
    } else {
        DwOutcome::Stable(witness)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dv(s: &str) -> DimensionVector {
        s.parse().unwrap()
    }

    #[test]
    fn rays_for_two_legs() {
        let sigma = Weight::new(-2, vec![2, 2]);
        let rays = dw_extremal_rays_desk(&sigma, 2, 2);
        assert!(rays.contains(&vec![1, 1, 0]));
        assert!(rays.contains(&vec![1, 0, 1]));
        for r in &rays {
            assert_eq!(pairing(&sigma, r), Ok(0));
        }
    }

    #[test]
    fn no_rays_without_positive_legs() {
        assert!(dw_extremal_rays_desk(&Weight::new(-1, vec![0, 0]), 2, 4).is_empty());
    }

    #[test]
    fn desk_examples() {
        let a = dv("2 1 1 1 1");
        let sigma = Weight::new(-4, vec![2, 2, 2, 2]);
        assert!(matches!(dw_stable_desk(&a, &sigma, 4, None), DwOutcome::Stable(_)));
        let b = dv("4 2 2 2 2");
        assert!(matches!(dw_stable_desk(&b, &sigma, 4, None), DwOutcome::NotStable(_)));
        let c = dv("1 1");
        let out = dw_stable_desk(&c, &Weight::new(-1, vec![1]), 2, None);
        let DwOutcome::Stable(w) = out else { panic!("expected stable") };
        assert_eq!(w.case, DwCase::RealGenerator);
    }
}
