//! Deciding whether a star-quiver dimension vector is Schofield semistable,
//! polystable or stable.
//!
//! Semistability is exact: a Littlewood–Richardson positivity query on
//! rectangles. Stability of a semistable vector is read off the fundamental
//! chamber after reflections, otherwise from a bounded search over the
//! extremal rays of the semistable cone, and only as a last resort from the
//! randomized endomorphism test.

mod desk;

use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::lr_oracle::{lr_decide, rectangle, LrDecision};
use crate::quiver_core::{
    fundamental_chamber_test, pairing, reduce_equal_legs, reflect_sink_dim, reflect_sources_dim, schofield_weight,
    CastlingMove, ChamberPosition, DimensionVector, Weight,
};
use crate::random_cert::{algorithm1, Algorithm1Report, Answer, DEFAULT_ENTRY_BOUND, DEFAULT_TRIALS};

pub use desk::{
    default_dw_bound, dw_extremal_rays_desk, dw_extremal_rays_within, dw_stable_desk, is_sigma_semistable, query_cost,
    DWWitness, DwCase, DwOutcome, DEFAULT_DW_BUDGET,
};

/// The three possible stability types of a generic representation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Verdict {
    NotSemistable,
    PolystableNotStable,
    Stable,
}

impl Verdict {
    /// What the verdict means for the maximum-likelihood problem.
    pub fn interpretation(self) -> &'static str {
        match self {
            Verdict::Stable => "iPCA generically exists uniquely",
            Verdict::PolystableNotStable => "iPCA generically exists (not unique)",
            Verdict::NotSemistable => "likelihood generically unbounded (iPCA does not exist)",
        }
    }

    pub fn is_semistable(self) -> bool {
        self != Verdict::NotSemistable
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Verdict::NotSemistable => "NotSemistable",
            Verdict::PolystableNotStable => "PolystableNotStable",
            Verdict::Stable => "Stable",
        };
        f.write_str(name)
    }
}

/// The part of the pipeline that settled a query.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    /// A leg larger than the center, or a center larger than all legs together.
    KingGate,
    EqualLegs,
    /// The Littlewood–Richardson query for semistability came out zero.
    LittlewoodRichardson,
    FundamentalChamber,
    ExtremalRays,
    Randomized,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Branch::KingGate => "king-gate",
            Branch::EqualLegs => "equal-legs",
            Branch::LittlewoodRichardson => "lr-semistability",
            Branch::FundamentalChamber => "fundamental-chamber",
            Branch::ExtremalRays => "extremal-rays",
            Branch::Randomized => "randomized",
        };
        f.write_str(name)
    }
}

/// Reflection applied to a dimension vector during reduction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Reflection {
    Sink,
    Sources,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionStep {
    pub reflection: Reflection,
    pub result: DimensionVector,
}

/// Which part of the castling case analysis a minimal pair falls into.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CastlingCase {
    /// `q <= p/2` and `p <= kq/2`.
    Interior,
    /// `q > p` or `p > kq`.
    Unbalanced,
    /// `q = p` or `p = kq`.
    Boundary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Certificate {
    /// A subrepresentation dimension `beta` with `sigma(beta) = value > 0`.
    KingWitness {
        beta: Vec<i64>,
        value: i64,
    },
    Castling {
        trace: Vec<CastlingMove>,
        minimal: (u64, u64),
        case: CastlingCase,
    },
    Semistability(LrDecision),
    Chamber {
        reductions: Vec<ReductionStep>,
        position: ChamberPosition,
    },
    ExtremalRays {
        reductions: Vec<ReductionStep>,
        witness: DWWitness,
    },
    Randomized {
        reductions: Vec<ReductionStep>,
        report: Algorithm1Report,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub verdict: Verdict,
    pub branch: Branch,
    pub certificate: Certificate,
    /// The answer came from random samples rather than an exact computation.
    pub randomized: bool,
}

impl StabilityVerdict {
    fn exact(verdict: Verdict, branch: Branch, certificate: Certificate) -> Self {
        StabilityVerdict { verdict, branch, certificate, randomized: false }
    }
}

/// Outcome of the semistability test with its evidence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemistabilityReport {
    pub semistable: bool,
    /// Subrepresentation dimension with positive weight, when one is known.
    pub witness: Option<Vec<i64>>,
    pub lr: Option<LrDecision>,
}

/// King witness for the two cheap obstructions, if either applies.
fn king_gate(alpha: &DimensionVector) -> Option<Vec<i64>> {
    let p = alpha.center();
    let n = alpha.leg_sum();
    let k = alpha.leg_count();
    if let Some(i) = alpha.legs().iter().position(|&q| q > p) {
        let mut beta = vec![0; k + 1];
        beta[i + 1] = 1;
        return Some(beta);
    }
    if p > n {
        let mut beta = alpha.to_vector();
        beta[0] = n as i64;
        return Some(beta);
    }
    None
}

/// Semistability for the Schofield weight, decided by rectangular LR positivity.
pub fn is_schofield_semistable(alpha: &DimensionVector) -> SemistabilityReport {
    if let Some(beta) = king_gate(alpha) {
        return SemistabilityReport { semistable: false, witness: Some(beta), lr: None };
    }
    let p = alpha.center();
    let n = alpha.leg_sum();
    let g = n.gcd(&p);
    let (width_nu, width_leg) = (n / g, p / g);
    let m = p as usize;
    let nu = rectangle(m, width_nu, m).expect("height equals ambient");
    let lambdas: Vec<_> =
        alpha.legs().iter().map(|&q| rectangle(q as usize, width_leg, m).expect("legs fit after the gate")).collect();
    let decision = lr_decide(&lambdas, &nu, m).expect("shapes fit in GL_p");
    SemistabilityReport { semistable: decision.positive, witness: None, lr: Some(decision) }
}

/// Classification of `(p; q, ..., q)` with `k` legs by castling to a minimal pair.
pub fn decide_equal_legs(p: u64, q: u64, k: u64) -> StabilityVerdict {
    let reduction = reduce_equal_legs(p, q, k);
    let (r, s) = (reduction.center, reduction.leg);
    let (case, verdict) = if s > r || r > k * s {
        (CastlingCase::Unbalanced, Verdict::NotSemistable)
    } else if s == r || r == k * s {
        let v = if (r, s) == (1, 1) { Verdict::Stable } else { Verdict::PolystableNotStable };
        (CastlingCase::Boundary, v)
    } else {
        debug_assert!(2 * s <= r && 2 * r <= k * s);
        let v = if k == 4 && r == 2 * s && s > 1 { Verdict::PolystableNotStable } else { Verdict::Stable };
        (CastlingCase::Interior, v)
    };
    StabilityVerdict::exact(
        verdict,
        Branch::EqualLegs,
        Certificate::Castling { trace: reduction.trace, minimal: (r, s), case },
    )
}

/// Tunable parts of [`decide_with`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecideOptions {
    /// Box size for the extremal-ray search; `None` picks [`default_dw_bound`].
    pub dw_bound: Option<u64>,
    /// Work cap for the extremal-ray search; `None` removes it.
    pub dw_budget: Option<u64>,
    pub trials: usize,
    pub entry_bound: i64,
    pub seed: u64,
}

impl Default for DecideOptions {
    fn default() -> Self {
        DecideOptions {
            dw_bound: None,
            dw_budget: Some(DEFAULT_DW_BUDGET),
            trials: DEFAULT_TRIALS,
            entry_bound: DEFAULT_ENTRY_BOUND,
            seed: 0,
        }
    }
}

/// Full pipeline with default options.
pub fn decide(alpha: &DimensionVector) -> StabilityVerdict {
    decide_with(alpha, &DecideOptions::default())
}

/// Reflects while `p + n` strictly decreases, stopping early inside the fundamental chamber.
fn reduce_to_chamber(alpha: &DimensionVector) -> (DimensionVector, Vec<ReductionStep>, ChamberPosition) {
    let mut current = alpha.clone();
    let mut steps = Vec::new();
    loop {
        let position = fundamental_chamber_test(&current);
        if position != ChamberPosition::Outside {
            return (current, steps, position);
        }
        let size = |a: &DimensionVector| a.center() + a.leg_sum();
        let candidates = [
            (Reflection::Sink, reflect_sink_dim(&current).ok()),
            (Reflection::Sources, reflect_sources_dim(&current).ok()),
        ];
        let best = candidates
            .into_iter()
            .filter_map(|(r, a)| a.map(|a| (r, a)))
            .filter(|(_, a)| size(a) < size(&current))
            .min_by_key(|(_, a)| size(a));
        match best {
            Some((reflection, next)) => {
                steps.push(ReductionStep { reflection, result: next.clone() });
                current = next;
            }
            None => return (current, steps, position),
        }
    }
}

pub fn decide_with(alpha: &DimensionVector, options: &DecideOptions) -> StabilityVerdict {
    if let Some(beta) = king_gate(alpha) {
        let value = pairing(&schofield_weight(alpha), &beta).expect("same quiver");
        return StabilityVerdict::exact(
            Verdict::NotSemistable,
            Branch::KingGate,
            Certificate::KingWitness { beta, value },
        );
    }
    if alpha.has_equal_legs() {
        return decide_equal_legs(alpha.center(), alpha.legs()[0], alpha.leg_count() as u64);
    }
    let report = is_schofield_semistable(alpha);
    if !report.semistable {
        let lr = report.lr.expect("gates already passed");
        return StabilityVerdict::exact(
            Verdict::NotSemistable,
            Branch::LittlewoodRichardson,
            Certificate::Semistability(lr),
        );
    }

    let (reduced, reductions, position) = reduce_to_chamber(alpha);
    match position {
        ChamberPosition::StrictChamber | ChamberPosition::BoundaryChamber { multiplicity: 1, .. } => {
            return StabilityVerdict::exact(
                Verdict::Stable,
                Branch::FundamentalChamber,
                Certificate::Chamber { reductions, position },
            );
        }
        ChamberPosition::BoundaryChamber { .. } => {
            return StabilityVerdict::exact(
                Verdict::PolystableNotStable,
                Branch::FundamentalChamber,
                Certificate::Chamber { reductions, position },
            );
        }
        ChamberPosition::Outside => {}
    }

    let sigma = schofield_weight(&reduced);
    let bound = options.dw_bound.unwrap_or_else(|| default_dw_bound(&reduced));
    match dw_stable_desk(&reduced, &sigma, bound, options.dw_budget) {
        DwOutcome::Stable(witness) => StabilityVerdict::exact(
            Verdict::Stable,
            Branch::ExtremalRays,
            Certificate::ExtremalRays { reductions, witness },
        ),
        DwOutcome::NotStable(witness) => StabilityVerdict::exact(
            Verdict::PolystableNotStable,
            Branch::ExtremalRays,
            Certificate::ExtremalRays { reductions, witness },
        ),
        DwOutcome::Inconclusive => {
            let report = algorithm1(&reduced, options.trials, options.entry_bound, options.seed)
                .expect("entry bound validated by the options");
            let verdict = match report.answer {
                Answer::Yes => Verdict::Stable,
                Answer::No => Verdict::PolystableNotStable,
            };
            StabilityVerdict {
                verdict,
                branch: Branch::Randomized,
                certificate: Certificate::Randomized { reductions, report },
                randomized: true,
            }
        }
    }
}

/// The Schofield weight divided by the gcd of its entries.
pub fn reduced_schofield_weight(alpha: &DimensionVector) -> Weight {
    schofield_weight(alpha).primitive()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dv(s: &str) -> DimensionVector {
        s.parse().unwrap()
    }

    #[test]
    fn semistability_examples() {
        assert!(is_schofield_semistable(&dv("2 1 1")).semistable);
        let r = is_schofield_semistable(&dv("1 2"));
        assert!(!r.semistable);
        assert_eq!(r.witness, Some(vec![0, 1]));
        let r = is_schofield_semistable(&dv("3 1 1"));
        assert_eq!(r.witness, Some(vec![2, 1, 1]));
        assert!(!is_schofield_semistable(&dv("3 2 2")).semistable);
    }

    #[test]
    fn equal_legs_examples() {
        assert_eq!(decide_equal_legs(2, 1, 4).verdict, Verdict::Stable);
        assert_eq!(decide_equal_legs(4, 2, 4).verdict, Verdict::PolystableNotStable);
        assert_eq!(decide_equal_legs(5, 2, 3).verdict, Verdict::NotSemistable);
        assert_eq!(decide_equal_legs(3, 3, 2).verdict, Verdict::PolystableNotStable);
        assert_eq!(decide_equal_legs(2, 1, 2).verdict, Verdict::PolystableNotStable);
        assert_eq!(decide_equal_legs(1, 1, 1).verdict, Verdict::Stable);
    }

    #[test]
    fn pipeline_examples() {
        assert_eq!(decide(&dv("7 3 3 3 3 3")).verdict, Verdict::Stable);
        assert_eq!(decide(&dv("4 2 2 2 2")).verdict, Verdict::PolystableNotStable);
        let v = decide(&dv("3 2 2"));
        assert_eq!(v.verdict, Verdict::NotSemistable);
        assert_eq!(decide(&dv("5 3 2 2")).verdict, Verdict::NotSemistable);
    }

    #[test]
    fn interpretation_texts() {
        assert_eq!(Verdict::Stable.interpretation(), "iPCA generically exists uniquely");
        assert_eq!(Verdict::PolystableNotStable.interpretation(), "iPCA generically exists (not unique)");
    }
}
