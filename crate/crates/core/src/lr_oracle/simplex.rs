//! Exact phase-one simplex for systems `A x <= b` with free variables.
//!
//! Free variables are pivoted into the basis first and their rows set aside,
//! which leaves a dictionary over non-negative slacks only. Feasibility of that
//! dictionary is settled with a single artificial variable. Pivoting uses the
//! largest-coefficient rule and falls back to Bland's rule during long
//! degenerate stretches, so the method always terminates.

use num_rational::BigRational;

use super::certify::{certify, Certificate};
use super::field::{common_denominator, ExactField, SmallRational};

/// One row `sum coef * x <= rhs` of a [`System`].
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct SystemRow {
    pub terms: Vec<(usize, i64)>,
    pub rhs: BigRational,
}

/// General inequality system over free rational variables.
#[derive(Clone, Debug, Default, PartialEq)]
pub(crate) struct System {
    pub num_vars: usize,
    pub rows: Vec<SystemRow>,
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Outcome {
    Feasible(Option<Vec<BigRational>>),
    Infeasible,
}

/// Bookkeeping of a finished solve.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub(crate) struct SolveStats {
    pub pivots: usize,
    pub used_big_rationals: bool,
    /// The answer was certified from a floating-point run.
    pub certified_from_float: bool,
    /// FNV-1a digest of the entering/leaving variable sequence.
    pub pivot_digest: u64,
}

const DEGENERATE_STREAK_LIMIT: usize = 50;

struct SavedRow<T> {
    var: usize,
    rhs: T,
    terms: Vec<(usize, T)>,
}

struct Tableau<T> {
    rows: Vec<Vec<T>>,
    rhs: Vec<T>,
    row_var: Vec<usize>,
    col_var: Vec<usize>,
    /// Columns whose nonbasic variable is free and absent from every remaining row.
    dead_col: Vec<bool>,
    /// Nonzero count of each row, excluding the right-hand side.
    nnz: Vec<usize>,
    stats: SolveStats,
}

fn digest(stats: &mut SolveStats, entering: usize, leaving: usize) {
    const PRIME: u64 = 0x100000001b3;
    let mut h = if stats.pivots == 0 { 0xcbf29ce484222325 } else { stats.pivot_digest };
    for v in [entering as u64, leaving as u64] {
        for byte in v.to_le_bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(PRIME);
        }
    }
    stats.pivot_digest = h;
    stats.pivots += 1;
}

impl<T: ExactField> Tableau<T> {
    fn pivot(&mut self, r: usize, s: usize) -> Option<()> {
        let mut pivot_row = std::mem::take(&mut self.rows[r]);
        let inv = pivot_row[s].recip()?;
        let mut nz = Vec::new();
        for (j, v) in pivot_row.iter_mut().enumerate() {
            if j == s {
                *v = inv.clone();
            } else if !v.is_zero() {
                *v = v.mul(&inv)?;
                nz.push(j);
            }
        }
        let pivot_rhs = self.rhs[r].mul(&inv)?;
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][s].is_zero() {
                continue;
            }
            let f = self.rows[i][s].clone();
            let row = &mut self.rows[i];
            let mut count = self.nnz[i];
            for &j in &nz {
                let was_zero = row[j].is_zero();
                row[j].sub_mul(&f, &pivot_row[j])?;
                match (was_zero, row[j].is_zero()) {
                    (true, false) => count += 1,
                    (false, true) => count -= 1,
                    _ => {}
                }
            }
            self.nnz[i] = count;
            row[s] = f.mul(&inv)?.neg()?;
            self.rhs[i].sub_mul(&f, &pivot_rhs)?;
        }
        self.rows[r] = pivot_row;
        self.rhs[r] = pivot_rhs;
        digest(&mut self.stats, self.col_var[s], self.row_var[r]);
        std::mem::swap(&mut self.row_var[r], &mut self.col_var[s]);
        Some(())
    }

    fn remove_row(&mut self, r: usize) -> SavedRow<T> {
        let row = self.rows.remove(r);
        let rhs = self.rhs.remove(r);
        let var = self.row_var.remove(r);
        self.nnz.remove(r);
        let terms =
            row.into_iter().enumerate().filter(|(_, v)| !v.is_zero()).map(|(j, v)| (self.col_var[j], v)).collect();
        SavedRow { var, rhs, terms }
    }
}

struct RunResult<T> {
    feasible: bool,
    point: Option<Vec<T>>,
    stats: SolveStats,
}

fn run<T: ExactField>(system: &System, want_point: bool) -> Option<RunResult<T>> {
    let n = system.num_vars;
    let m = system.rows.len();
    let artificial = n + m;

    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for row in &system.rows {
        let scale = common_denominator(std::slice::from_ref(&row.rhs));
        let scale_i = num_traits::ToPrimitive::to_i64(&scale)?;
        let mut dense = vec![T::zero(); n];
        for &(j, c) in &row.terms {
            let add = T::from_i64(c.checked_mul(scale_i)?);
            let mut cur = dense[j].clone();
            cur.sub_mul(&add, &T::from_i64(-1))?;
            dense[j] = cur;
        }
        rows.push(dense);
        rhs.push(T::from_big(&(row.rhs.clone() * BigRational::from_integer(scale)))?);
    }
    let mut t = Tableau {
        rows,
        rhs,
        row_var: (n..n + m).collect(),
        col_var: (0..n).collect(),
        dead_col: vec![false; n],
        nnz: Vec::new(),
        stats: SolveStats::default(),
    };
    t.nnz = t.rows.iter().map(|r| r.iter().filter(|v| !v.is_zero()).count()).collect();

    // Pivot every free variable into the basis through its sparsest row, then set that row aside.
    let mut saved: Vec<SavedRow<T>> = Vec::new();
    for s in 0..n {
        let mut best: Option<(usize, usize)> = None;
        for (i, row) in t.rows.iter().enumerate() {
            if row[s].is_zero() {
                continue;
            }
            let count = t.nnz[i];
            if best.is_none_or(|(_, c)| count < c) {
                best = Some((i, count));
            }
        }
        match best {
            Some((r, _)) => {
                t.pivot(r, s)?;
                let row = t.remove_row(r);
                if want_point {
                    saved.push(row);
                }
            }
            None => t.dead_col[s] = true,
        }
    }

    let feasible = phase_one(&mut t, artificial)?;
    let stats = t.stats.clone();
    if !feasible {
        return Some(RunResult { feasible: false, point: None, stats });
    }
    if !want_point {
        return Some(RunResult { feasible: true, point: None, stats });
    }

    let mut values: Vec<T> = vec![T::zero(); n + m + 1];
    for (i, &var) in t.row_var.iter().enumerate() {
        values[var] = t.rhs[i].clone();
    }
    values[artificial] = T::zero();
    for row in saved.iter().rev() {
        let mut v = row.rhs.clone();
        for (var, coef) in &row.terms {
            v.sub_mul(coef, &values[*var])?;
        }
        values[row.var] = v;
    }
    values.truncate(n);
    Some(RunResult { feasible: true, point: Some(values), stats })
}

/// Returns `Some(true)` when the dictionary (all nonbasic variables non-negative) is feasible.
fn phase_one<T: ExactField>(t: &mut Tableau<T>, artificial: usize) -> Option<bool> {
    let Some(r0) = (0..t.rows.len())
        .filter(|&i| t.rhs[i].signum() < 0)
        .min_by(|&a, &b| t.rhs[a].cmp_value(&t.rhs[b]).then(a.cmp(&b)))
    else {
        return Some(true);
    };

    // Artificial column: every basic variable gains `+ x0`, i.e. coefficient -1.
    let minus_one = T::from_i64(-1);
    for (row, count) in t.rows.iter_mut().zip(t.nnz.iter_mut()) {
        row.push(minus_one.clone());
        *count += 1;
    }
    t.col_var.push(artificial);
    t.dead_col.push(false);
    let art_col = t.col_var.len() - 1;
    t.pivot(r0, art_col)?;

    let mut degenerate_streak = 0usize;
    loop {
        let obj = r0;
        if t.row_var[obj] != artificial {
            return Some(true);
        }
        if t.rhs[obj].is_zero() {
            return Some(true);
        }
        let bland = degenerate_streak >= DEGENERATE_STREAK_LIMIT;
        let mut entering: Option<usize> = None;
        for (j, v) in t.rows[obj].iter().enumerate() {
            if t.dead_col[j] || v.signum() <= 0 {
                continue;
            }
            entering = match entering {
                None => Some(j),
                Some(e) => {
                    let better = if bland {
                        t.col_var[j] < t.col_var[e]
                    } else {
                        match v.cmp_value(&t.rows[obj][e]) {
                            std::cmp::Ordering::Greater => true,
                            std::cmp::Ordering::Equal => t.col_var[j] < t.col_var[e],
                            std::cmp::Ordering::Less => false,
                        }
                    };
                    if better {
                        Some(j)
                    } else {
                        Some(e)
                    }
                }
            };
        }
        let Some(s) = entering else {
            return Some(false);
        };

        let mut leaving: Option<(usize, T)> = None;
        for i in 0..t.rows.len() {
            let a = &t.rows[i][s];
            if a.signum() <= 0 {
                continue;
            }
            let ratio = t.rhs[i].div(a)?;
            leaving = match leaving {
                None => Some((i, ratio)),
                Some((l, best)) => match ratio.cmp_value(&best) {
                    std::cmp::Ordering::Less => Some((i, ratio)),
                    std::cmp::Ordering::Equal => {
                        let prefer_i = i == obj || (l != obj && t.row_var[i] < t.row_var[l]);
                        if prefer_i {
                            Some((i, ratio))
                        } else {
                            Some((l, best))
                        }
                    }
                    std::cmp::Ordering::Greater => Some((l, best)),
                },
            };
        }
        let (r, ratio) = leaving.expect("the objective row always bounds the step");
        if ratio.is_zero() {
            degenerate_streak += 1;
        } else {
            degenerate_streak = 0;
        }
        t.pivot(r, s)?;
    }
}

/// Systems at most this large (rows times variables) go straight to the exact tableau.
const EXACT_ONLY_SIZE: usize = 40_000;

/// Decides feasibility. Large systems are first handed to a sparse
/// floating-point solver whose answer is turned into an exact certificate;
/// the exact tableau runs when that fails or the system is small.
pub(crate) fn solve(system: &System, want_point: bool) -> (Outcome, SolveStats) {
    if system.rows.len() * system.num_vars.max(1) > EXACT_ONLY_SIZE {
        if let Some(cert) = certify(system) {
            let stats = SolveStats { certified_from_float: true, ..SolveStats::default() };
            let outcome = match cert {
                Certificate::Point(p) => Outcome::Feasible(want_point.then_some(p)),
                Certificate::Infeasible => Outcome::Infeasible,
            };
            return (outcome, stats);
        }
    }
    solve_exact(system, want_point)
}

/// Exact tableau only. The returned point, if requested, is a vertex.
pub(crate) fn solve_exact(system: &System, want_point: bool) -> (Outcome, SolveStats) {
    let (result, big) = match run::<SmallRational>(system, want_point) {
        Some(r) => (convert(r), false),
        None => (convert(run::<BigRational>(system, want_point).expect("unbounded rationals cannot overflow")), true),
    };
    let (outcome, mut stats) = result;
    stats.used_big_rationals = big;
    (outcome, stats)
}

fn convert<T: ExactField>(r: RunResult<T>) -> (Outcome, SolveStats) {
    let outcome = if r.feasible {
        Outcome::Feasible(r.point.map(|p| p.iter().map(ExactField::to_big).collect()))
    } else {
        Outcome::Infeasible
    };
    (outcome, r.stats)
}
