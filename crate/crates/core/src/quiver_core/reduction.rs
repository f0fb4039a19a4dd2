//! Moves on dimension vectors that preserve the stability type.

use serde::{Deserialize, Serialize};

use super::{DimensionVector, QuiverError};

/// Reflection at the central sink: `(p; q) -> (n - p; q)`.
pub fn reflect_sink_dim(alpha: &DimensionVector) -> Result<DimensionVector, QuiverError> {
    let (p, n) = (alpha.center(), alpha.leg_sum());
    if p >= n {
        return Err(QuiverError::CenterNotBelowLegs { center: p, legs: n });
    }
    DimensionVector::new(n - p, alpha.legs().to_vec())
}

/// Reflection at every source: `(p; q_i) -> (p; p - q_i)`.
pub fn reflect_sources_dim(alpha: &DimensionVector) -> Result<DimensionVector, QuiverError> {
    let p = alpha.center();
    if let Some((leg, &value)) = alpha.legs().iter().enumerate().find(|(_, &q)| q >= p) {
        return Err(QuiverError::LegNotBelowCenter { leg, value, center: p });
    }
    DimensionVector::new(p, alpha.legs().iter().map(|q| p - q).collect())
}

/// One castling step on an equal-legs pair `(p, q)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CastlingMove {
    /// `(p, q) -> (kq - p, q)`.
    Center { from: (u64, u64), to: (u64, u64) },
    /// `(p, q) -> (p, p - q)`.
    Legs { from: (u64, u64), to: (u64, u64) },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EqualLegsReduction {
    pub center: u64,
    pub leg: u64,
    pub trace: Vec<CastlingMove>,
}

/// Castles `(p, q)` with `k` legs down to a pair where `kpq` cannot decrease further.
///
/// When both moves are available, as for `(3, 2)` with two legs, the center move is taken.
pub fn reduce_equal_legs(p: u64, q: u64, k: u64) -> EqualLegsReduction {
    let (mut p, mut q) = (p, q);
    let mut trace = Vec::new();
    loop {
        let center_move = 2 * p > k * q && p < k * q;
        let legs_move = 2 * q > p && q < p;
        if center_move {
            let to = (k * q - p, q);
            trace.push(CastlingMove::Center { from: (p, q), to });
            (p, q) = to;
        } else if legs_move {
            let to = (p, p - q);
            trace.push(CastlingMove::Legs { from: (p, q), to });
            (p, q) = to;
        } else {
            return EqualLegsReduction { center: p, leg: q, trace };
        }
    }
}

/// Position of a dimension vector relative to the fundamental chamber.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChamberPosition {
    /// Every `(alpha, e_v) <= 0` and at least one is strict.
    StrictChamber,
    /// Every `(alpha, e_v) = 0`; `alpha = multiplicity * root` with `root` indivisible.
    BoundaryChamber { multiplicity: u64, root: DimensionVector },
    /// Some `(alpha, e_v) > 0`.
    Outside,
}

pub fn fundamental_chamber_test(alpha: &DimensionVector) -> ChamberPosition {
    let p = alpha.center() as i64;
    let n = alpha.leg_sum() as i64;
    let pairings: Vec<i64> = std::iter::once(2 * p - n).chain(alpha.legs().iter().map(|&q| 2 * q as i64 - p)).collect();
    if pairings.iter().any(|&v| v > 0) {
        ChamberPosition::Outside
    } else if pairings.iter().any(|&v| v < 0) {
        ChamberPosition::StrictChamber
    } else {
        ChamberPosition::BoundaryChamber { multiplicity: alpha.content(), root: alpha.primitive() }
    }
}

/// `k q^2 + p^2 - k p q`, preserved by castling.
pub fn gamma(p: u64, q: u64, k: u64) -> i64 {
    let (p, q, k) = (p as i64, q as i64, k as i64);
    k * q * q + p * p - k * p * q
}
