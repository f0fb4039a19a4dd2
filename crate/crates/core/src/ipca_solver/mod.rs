//! Maximum-likelihood precision matrices for the iPCA model by flip-flop ascent.
//!
//! The data is one inward representation: block `i` is a `p x q_i` matrix.
//! The objective is
//!
//! ```text
//! f(T, T_1, ..., T_k) = n log det T + p sum_i log det T_i - sum_i tr(T B_i T_i B_i^T)
//! ```
//!
//! with `n = q_1 + ... + q_k`. It is unchanged by `(T, T_i) -> (c T, T_i / c)`,
//! and estimates are reported with `prod_i det T_i = 1`.

mod csv_io;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quiver_core::{FloatRepresentation, Orientation, QuiverError};

pub use csv_io::{read_csv, shape_header, write_csv};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 10_000;
pub const DEFAULT_CONDITION_CEILING: f64 = 1e12;

/// Multiple of the first-sweep gain that the log-likelihood may climb per sweep
/// before the run is declared divergent.
const ENVELOPE_SLOPE: f64 = 4.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("matrix {which} is not symmetric positive definite")]
    NotPositiveDefinite { which: String },
    #[error("estimate has {got} leg blocks, data has {expected}")]
    BlockCount { expected: usize, got: usize },
    #[error("block {index} is {rows}x{cols}, expected {expected_rows}x{expected_cols}")]
    BlockShape { index: usize, rows: usize, cols: usize, expected_rows: usize, expected_cols: usize },
    #[error("data must map the legs into the center")]
    Orientation,
    #[error("data contains a non-finite entry")]
    NonFinite,
    #[error("tolerance must be positive, got {0}")]
    Tolerance(f64),
    #[error("update for {which} is singular (condition number {condition:e})")]
    SingularUpdate { which: String, condition: f64 },
    #[error("malformed data file: {0}")]
    Format(String),
    #[error(transparent)]
    Quiver(#[from] QuiverError),
}

/// Normalization used to pick one point on each scaling orbit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gauge {
    /// `prod_i det T_i = 1`.
    UnitLegDeterminant,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrecisionEstimate {
    pub theta: DMatrix<f64>,
    pub thetas: Vec<DMatrix<f64>>,
    pub gauge: Gauge,
}

impl PrecisionEstimate {
    pub fn identity(center: usize, legs: &[usize]) -> Self {
        PrecisionEstimate {
            theta: DMatrix::identity(center, center),
            thetas: legs.iter().map(|&q| DMatrix::identity(q, q)).collect(),
            gauge: Gauge::UnitLegDeterminant,
        }
    }

    /// Rescales by the scaling orbit so that `prod_i det T_i = 1`.
    pub fn regauged(mut self) -> Result<Self, SolverError> {
        let n: usize = self.thetas.iter().map(|t| t.nrows()).sum();
        if n == 0 {
            return Ok(self);
        }
        let mut log_det_sum = 0.0;
        for (i, t) in self.thetas.iter().enumerate() {
            log_det_sum += log_det(t, &format!("Theta_{}", i + 1))?;
        }
        let c = (log_det_sum / n as f64).exp();
        self.theta *= c;
        for t in &mut self.thetas {
            *t /= c;
        }
        Ok(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FitStatus {
    Converged,
    Diverged,
    BudgetExhausted,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlipFlopReport {
    pub iterations: usize,
    pub log_likelihood: f64,
    /// Log-likelihood after each sweep, starting with the initial value.
    pub likelihood_trace: Vec<f64>,
    pub residual: f64,
    pub status: FitStatus,
    /// Condition number of the estimate after each sweep; kept when `status` is `Diverged`.
    pub condition_trace: Option<Vec<f64>>,
    /// Reason for a divergence verdict.
    pub divergence: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MleOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub condition_ceiling: f64,
}

impl Default for MleOptions {
    fn default() -> Self {
        MleOptions { tol: DEFAULT_TOL, max_iter: DEFAULT_MAX_ITER, condition_ceiling: DEFAULT_CONDITION_CEILING }
    }
}

fn cholesky(m: &DMatrix<f64>, which: &str) -> Result<nalgebra::Cholesky<f64, nalgebra::Dyn>, SolverError> {
    let not_pd = || SolverError::NotPositiveDefinite { which: which.to_string() };
    if m.iter().any(|v| !v.is_finite()) {
        return Err(not_pd());
    }
    let scale = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(f64::MIN_POSITIVE);
    if (m - m.transpose()).iter().any(|v| v.abs() > 1e-10 * scale) {
        return Err(not_pd());
    }
    m.clone().cholesky().ok_or_else(not_pd)
}

fn log_det(m: &DMatrix<f64>, which: &str) -> Result<f64, SolverError> {
    let chol = cholesky(m, which)?;
    Ok(2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>())
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// Ratio of the extreme eigenvalues of a symmetric matrix, infinite when not definite.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    let eig = SymmetricEigen::new(m.clone()).eigenvalues;
    let max = eig.max();
    let min = eig.min();
    if !(min > 0.0) || !max.is_finite() {
        f64::INFINITY
    } else {
        max / min
    }
}

fn check_data(rep: &FloatRepresentation) -> Result<(), SolverError> {
    if rep.orientation() != Orientation::Inward {
        return Err(SolverError::Orientation);
    }
    if rep.blocks().iter().any(|b| b.iter().any(|v| !v.is_finite())) {
        return Err(SolverError::NonFinite);
    }
    Ok(())
}

fn check_shapes(est: &PrecisionEstimate, rep: &FloatRepresentation) -> Result<(), SolverError> {
    check_data(rep)?;
    if est.thetas.len() != rep.leg_count() {
        return Err(SolverError::BlockCount { expected: rep.leg_count(), got: est.thetas.len() });
    }
    let p = rep.center();
    if est.theta.shape() != (p, p) {
        let (rows, cols) = est.theta.shape();
        return Err(SolverError::BlockShape { index: 0, rows, cols, expected_rows: p, expected_cols: p });
    }
    for (i, (t, q)) in est.thetas.iter().zip(rep.leg_dims()).enumerate() {
        if t.shape() != (q, q) {
            let (rows, cols) = t.shape();
            return Err(SolverError::BlockShape { index: i + 1, rows, cols, expected_rows: q, expected_cols: q });
        }
    }
    Ok(())
}

/// The iPCA log-likelihood of `est` for the data `rep`.
pub fn log_likelihood(est: &PrecisionEstimate, rep: &FloatRepresentation) -> Result<f64, SolverError> {
    check_shapes(est, rep)?;
    let p = rep.center() as f64;
    let n: usize = rep.leg_dims().iter().sum();
    let mut value = n as f64 * log_det(&est.theta, "Theta")?;
    for (i, (t, b)) in est.thetas.iter().zip(rep.blocks()).enumerate() {
        value += p * log_det(t, &format!("Theta_{}", i + 1))?;
        value -= (&est.theta * b * t * b.transpose()).trace();
    }
    Ok(value)
}

/// Inverse of a symmetric positive-definite matrix scaled by `factor`, or a singularity report.
fn scaled_inverse(m: DMatrix<f64>, factor: f64, which: &str, ceiling: f64) -> Result<DMatrix<f64>, SolverError> {
    let m = symmetrize(m);
    let condition = condition_number(&m);
    if !(condition < ceiling) {
        return Err(SolverError::SingularUpdate { which: which.to_string(), condition });
    }
    let chol = m.cholesky().ok_or_else(|| SolverError::SingularUpdate { which: which.to_string(), condition })?;
    Ok(symmetrize(chol.inverse() * factor))
}

fn step_with_ceiling(
    est: &PrecisionEstimate,
    rep: &FloatRepresentation,
    ceiling: f64,
) -> Result<PrecisionEstimate, SolverError> {
    check_shapes(est, rep)?;
    let p = rep.center();
    let n: usize = rep.leg_dims().iter().sum();
    let mut scatter = DMatrix::zeros(p, p);
    for (t, b) in est.thetas.iter().zip(rep.blocks()) {
        scatter += b * t * b.transpose();
    }
    let theta = scaled_inverse(scatter, n as f64, "Theta", ceiling)?;
    let mut thetas = Vec::with_capacity(est.thetas.len());
    for (i, b) in rep.blocks().iter().enumerate() {
        let gram = b.transpose() * &theta * b;
        thetas.push(scaled_inverse(gram, p as f64, &format!("Theta_{}", i + 1), ceiling)?);
    }
    PrecisionEstimate { theta, thetas, gauge: Gauge::UnitLegDeterminant }.regauged()
}

/// One sweep: the center update, then every leg update, then the gauge.
pub fn flipflop_step(est: &PrecisionEstimate, rep: &FloatRepresentation) -> Result<PrecisionEstimate, SolverError> {
    step_with_ceiling(est, rep, f64::INFINITY)
}

/// Largest deviation from stationarity over the blocks.
///
/// For the center this is `|| L^T S L / n - I ||_F` with `T = L L^T` and
/// `S = sum_i B_i T_i B_i^T`; the legs are treated alike.
pub fn balance_residual(est: &PrecisionEstimate, rep: &FloatRepresentation) -> Result<f64, SolverError> {
    check_shapes(est, rep)?;
    let p = rep.center();
    let n: usize = rep.leg_dims().iter().sum();
    let deviation = |precision: &DMatrix<f64>, moment: DMatrix<f64>, count: usize, which: &str| {
        let l = cholesky(precision, which)?.l();
        let d = precision.nrows();
        let m = l.transpose() * moment * &l / count as f64 - DMatrix::identity(d, d);
        Ok::<f64, SolverError>(m.norm())
    };
    let mut scatter = DMatrix::zeros(p, p);
    for (t, b) in est.thetas.iter().zip(rep.blocks()) {
        scatter += b * t * b.transpose();
    }
    let mut worst = deviation(&est.theta, scatter, n, "Theta")?;
    for (i, (t, b)) in est.thetas.iter().zip(rep.blocks()).enumerate() {
        let gram = b.transpose() * &est.theta * b;
        worst = worst.max(deviation(t, gram, p, &format!("Theta_{}", i + 1))?);
    }
    Ok(worst)
}

fn estimate_condition(est: &PrecisionEstimate) -> f64 {
    est.thetas.iter().map(condition_number).fold(condition_number(&est.theta), f64::max)
}

/// Runs flip-flop sweeps from the identity until the balance residual drops below `tol`.
pub fn solve_mle(
    rep: &FloatRepresentation,
    options: &MleOptions,
) -> Result<(PrecisionEstimate, FlipFlopReport), SolverError> {
    if !(options.tol > 0.0) {
        return Err(SolverError::Tolerance(options.tol));
    }
    check_data(rep)?;
    let mut est = PrecisionEstimate::identity(rep.center(), &rep.leg_dims());
    let mut likelihood_trace = vec![log_likelihood(&est, rep)?];
    let mut conditions = vec![1.0];
    let mut first_gain = None;
    let diverged = |est: PrecisionEstimate, iterations, trace: Vec<f64>, conditions, residual, reason: String| {
        let report = FlipFlopReport {
            iterations,
            log_likelihood: *trace.last().expect("initial value"),
            likelihood_trace: trace,
            residual,
            status: FitStatus::Diverged,
            condition_trace: Some(conditions),
            divergence: Some(reason),
        };
        Ok((est, report))
    };
    for iteration in 1..=options.max_iter {
        let next = match step_with_ceiling(&est, rep, options.condition_ceiling) {
            Ok(next) => next,
            Err(SolverError::SingularUpdate { which, condition }) => {
                conditions.push(condition);
                let reason = format!("singular update for {which}");
                return diverged(est, iteration, likelihood_trace, conditions, f64::INFINITY, reason);
            }
            Err(e) => return Err(e),
        };
        est = next;
        let value = log_likelihood(&est, rep)?;
        let condition = estimate_condition(&est);
        conditions.push(condition);
        likelihood_trace.push(value);
        let residual = balance_residual(&est, rep)?;
        if !(condition < options.condition_ceiling) {
            let reason = format!("condition number {condition:e} above ceiling");
            return diverged(est, iteration, likelihood_trace, conditions, residual, reason);
        }
        let gain = *first_gain.get_or_insert((value - likelihood_trace[0]).abs().max(1.0));
        if value - likelihood_trace[1] > ENVELOPE_SLOPE * gain * iteration as f64 {
            let reason = "log-likelihood outgrew its linear envelope".to_string();
            return diverged(est, iteration, likelihood_trace, conditions, residual, reason);
        }
        if residual < options.tol {
            let report = FlipFlopReport {
                iterations: iteration,
                log_likelihood: value,
                likelihood_trace,
                residual,
                status: FitStatus::Converged,
                condition_trace: None,
                divergence: None,
            };
            return Ok((est, report));
        }
    }
    let residual = balance_residual(&est, rep)?;
    let report = FlipFlopReport {
        iterations: options.max_iter,
        log_likelihood: *likelihood_trace.last().expect("initial value"),
        likelihood_trace,
        residual,
        status: FitStatus::BudgetExhausted,
        condition_trace: None,
        divergence: None,
    };
    Ok((est, report))
}

/// Eigenvectors of the center precision in increasing order of eigenvalue.
///
/// Eigenvalues within `1e-9` relative of each other form one cluster; its
/// basis is Gram-Schmidt applied to the projections of the standard basis
/// vectors, in order. Each vector has its first nonzero coordinate positive.
pub fn ipc_scores(est: &PrecisionEstimate) -> Vec<DVector<f64>> {
    let p = est.theta.nrows();
    if p == 0 {
        return Vec::new();
    }
    let eig = SymmetricEigen::new(symmetrize(est.theta.clone()));
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let scale = eig.eigenvalues.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(f64::MIN_POSITIVE);
    let mut scores = Vec::with_capacity(p);
    let mut start = 0;
    while start < p {
        let mut end = start + 1;
        while end < p && eig.eigenvalues[order[end]] - eig.eigenvalues[order[start]] <= 1e-9 * scale {
            end += 1;
        }
        let cluster: Vec<DVector<f64>> =
            order[start..end].iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();
        let mut basis: Vec<DVector<f64>> = Vec::new();
        for j in 0..p {
            if basis.len() == cluster.len() {
                break;
            }
            let mut v = DVector::zeros(p);
            for u in &cluster {
                v += u * u[j];
            }
            for b in &basis {
                let overlap = b.dot(&v);
                v -= b * overlap;
            }
            let norm = v.norm();
            if norm > 1e-6 {
                basis.push(v / norm);
            }
        }
        scores.extend(basis.into_iter().map(sign_normalized));
        start = end;
    }
    scores
}

fn sign_normalized(v: DVector<f64>) -> DVector<f64> {
    match v.iter().find(|x| x.abs() > 1e-12) {
        Some(&x) if x < 0.0 => -v,
        _ => v,
    }
}

fn inverse_sqrt(m: &DMatrix<f64>, which: &str) -> Result<DMatrix<f64>, SolverError> {
    cholesky(m, which)?;
    let eig = SymmetricEigen::new(m.clone());
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|v| 1.0 / v.sqrt()));
    Ok(&eig.eigenvectors * d * eig.eigenvectors.transpose())
}

/// Draws `B_i = T^{-1/2} Y_i T_i^{-1/2}` with standard normal `Y_i`.
///
/// Entries of each `Y_i` are drawn in row-major order, block after block.
pub fn sample_model(
    theta: &DMatrix<f64>,
    thetas: &[DMatrix<f64>],
    seed: u64,
) -> Result<FloatRepresentation, SolverError> {
    let center = inverse_sqrt(theta, "Theta")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = theta.nrows();
    let mut blocks = Vec::with_capacity(thetas.len());
    for (i, t) in thetas.iter().enumerate() {
        let leg = inverse_sqrt(t, &format!("Theta_{}", i + 1))?;
        let q = t.nrows();
        let y = DMatrix::from_row_iterator(p, q, (0..p * q).map(|_| StandardNormal.sample(&mut rng)));
        blocks.push(&center * y * leg);
    }
    Ok(FloatRepresentation::new(Orientation::Inward, p, blocks)?)
}

/// Sample from the model with identity precisions.
pub fn sample_identity_model(center: usize, legs: &[usize], seed: u64) -> Result<FloatRepresentation, SolverError> {
    let est = PrecisionEstimate::identity(center, legs);
    sample_model(&est.theta, &est.thetas, seed)
}
