//! Nonvanishing of generalized Littlewood–Richardson coefficients.
//!
//! Positivity is decided exactly by feasibility of a chain of hive polytopes.
//! Before building the LP the query is shrunk by identities that hold in
//! `GL_m`: full columns shared with the target are removed, a rectangular
//! target absorbs one factor by complementation, and the whole query may be
//! transposed when that gives smaller hives.

mod bruteforce;
mod certify;
mod field;
mod hive;
mod partition;
pub(crate) mod simplex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bruteforce::{lr_count_bruteforce, lr_count_bruteforce_capped, product_expansion, DEFAULT_BRUTEFORCE_CAP};
pub use hive::{
    build_hive, lp_feasibility_report, lp_feasible, ChainedHiveSystem, Constraint, IntermediateBlock, LinearProgram,
    LpReport,
};
pub use partition::{rectangle, Partition};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LrError {
    #[error("parts {0:?} are not weakly decreasing")]
    NotDecreasing(Vec<u64>),
    #[error("partition of length {length} does not fit in ambient length {ambient}")]
    TooLong { length: usize, ambient: usize },
    #[error("sizes do not add up")]
    DegreeMismatch,
    #[error("a chain needs at least two factors")]
    TooFewFactors,
    #[error("coefficient {0} is outside {{-1, 0, 1}}")]
    NonUnitCoefficient(i64),
    #[error("variable {0} was never allocated")]
    UnknownVariable(usize),
    #[error("|nu| = {size} exceeds the enumeration cap {cap}")]
    CapExceeded { size: u64, cap: u64 },
    #[error("cannot parse partition {0:?}")]
    Parse(String),
}

/// How a positivity query was settled.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LrCertificate {
    /// The factor sizes do not sum to the target size.
    DegreeMismatch,
    /// Some factor is not contained in the target, or the target is too long.
    NotContained,
    /// After reduction a single factor remained and was compared with the target.
    Direct { equal: bool },
    /// Decided by the chained hive LP.
    Hive { transposed: bool, hive_sizes: Vec<usize>, variables: usize, rows: usize, lp: LpReport },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LrDecision {
    pub positive: bool,
    pub certificate: LrCertificate,
}

/// True iff `c^nu_{lambdas}` is strictly positive.
pub fn lr_positive(lambdas: &[Partition], nu: &Partition, m: usize) -> Result<bool, LrError> {
    lr_decide(lambdas, nu, m).map(|d| d.positive)
}

/// Like [`lr_positive`], returning how the answer was reached.
pub fn lr_decide(lambdas: &[Partition], nu: &Partition, m: usize) -> Result<LrDecision, LrError> {
    for p in lambdas.iter().chain(std::iter::once(nu)) {
        if p.length() > m {
            return Err(LrError::TooLong { length: p.length(), ambient: m });
        }
    }
    let negative = |certificate| Ok(LrDecision { positive: false, certificate });
    if lambdas.iter().map(Partition::size).sum::<u64>() != nu.size() {
        return negative(LrCertificate::DegreeMismatch);
    }
    let direct = reduce(lambdas.to_vec(), nu.clone());
    let transposed = reduce(lambdas.iter().map(Partition::conjugate).collect(), nu.conjugate());
    let (query, is_transposed) = match (direct, transposed) {
        (Reduced::Decided(c), _) | (_, Reduced::Decided(c)) => {
            let positive = matches!(c, LrCertificate::Direct { equal: true });
            return Ok(LrDecision { positive, certificate: c });
        }
        (Reduced::Chain(a), Reduced::Chain(b)) => {
            if b.cost() < a.cost() {
                (b, true)
            } else {
                (a, false)
            }
        }
    };
    let system = ChainedHiveSystem::build(&query.factors, &query.nu, query.ambient)?;
    let report = lp_feasibility_report(&system.lp);
    Ok(LrDecision {
        positive: report.feasible,
        certificate: LrCertificate::Hive {
            transposed: is_transposed,
            hive_sizes: system.hive_sizes.clone(),
            variables: system.lp.num_vars(),
            rows: system.lp.rows().len(),
            lp: report,
        },
    })
}

struct ChainQuery {
    factors: Vec<Partition>,
    nu: Partition,
    ambient: usize,
}

impl ChainQuery {
    fn cost(&self) -> usize {
        let mut rows = self.factors[0].length();
        let last = self.factors.len() - 1;
        let mut total = 0;
        for (j, f) in self.factors.iter().enumerate().skip(1) {
            rows = (rows + f.length()).min(self.ambient);
            let hive = if j == last { self.ambient } else { rows };
            total += hive * hive;
        }
        total
    }
}

enum Reduced {
    Decided(LrCertificate),
    Chain(ChainQuery),
}

/// Shrinks the query using exact identities valid in `GL_{length(nu)}`.
fn reduce(mut factors: Vec<Partition>, mut nu: Partition) -> Reduced {
    loop {
        let ambient = nu.length();
        factors.retain(|f| !f.is_empty());
        if factors.iter().any(|f| f.length() > ambient || f.part(0) > nu.part(0)) {
            return Reduced::Decided(LrCertificate::NotContained);
        }
        if ambient > 0 && factors.iter().map(Partition::length).sum::<usize>() < ambient {
            return Reduced::Decided(LrCertificate::NotContained);
        }
        // A factor of full length carries a power of the determinant.
        let mut changed = false;
        for f in factors.iter_mut() {
            let shift = if f.length() == ambient { f.part(ambient - 1) } else { 0 };
            if shift > 0 {
                let (Some(g), Some(n)) = (
                    f.with_ambient(ambient).ok().and_then(|x| x.remove_columns(shift)),
                    nu.with_ambient(ambient).ok().and_then(|x| x.remove_columns(shift)),
                ) else {
                    return Reduced::Decided(LrCertificate::NotContained);
                };
                *f = g;
                nu = n;
                changed = true;
            }
        }
        if changed {
            continue;
        }
        match factors.len() {
            0 => return Reduced::Decided(LrCertificate::Direct { equal: nu.is_empty() }),
            1 => return Reduced::Decided(LrCertificate::Direct { equal: factors[0].parts() == nu.parts() }),
            _ => {}
        }
        let rectangular = nu.parts().iter().all(|&x| x == nu.part(0));
        if rectangular && ambient > 0 {
            // det^a in a tensor product: move the longest factor across as its complement.
            let (idx, _) = factors
                .iter()
                .enumerate()
                .max_by_key(|(i, f)| (f.length(), std::cmp::Reverse(*i)))
                .expect("at least two factors");
            let removed = factors.remove(idx);
            let Some(comp) = removed.with_ambient(ambient).ok().and_then(|r| r.complement(nu.part(0))) else {
                return Reduced::Decided(LrCertificate::NotContained);
            };
            nu = comp;
            continue;
        }
        let mut factors = factors;
        factors.sort_by(|a, b| a.length().cmp(&b.length()).then_with(|| b.parts().cmp(a.parts())));
        let factors = factors.into_iter().map(|f| f.with_ambient(ambient).expect("checked above")).collect();
        return Reduced::Chain(ChainQuery { factors, nu: nu.with_ambient(ambient).expect("own length"), ambient });
    }
}
