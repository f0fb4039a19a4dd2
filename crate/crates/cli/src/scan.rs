//! Classification of rays on a random three-dimensional slice of the positive orthant.

use std::collections::HashMap;
use std::fmt::Write as _;

use ipca_core::quiver_core::DimensionVector;
use ipca_core::stability_engine::{decide_with, Branch, DecideOptions, Verdict};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::CliError;

/// Frames are redrawn until this share of the grid lies in the open positive
/// orthant with the first coordinate between the largest and the sum of the others.
const MIN_ADMISSIBLE_SHARE: f64 = 0.01;
const MAX_FRAME_DRAWS: usize = 10_000;

#[derive(Clone, Debug, PartialEq)]
pub struct ScanConfig {
    pub k: usize,
    pub seed: u64,
    /// Grid points per axis.
    pub resolution: usize,
    /// The grid covers `[-extent, extent]^3` in slice coordinates.
    pub extent: f64,
    /// Rays are rounded to integer vectors whose largest entry is this cap.
    pub denominator_cap: u64,
    pub decide: DecideOptions,
}

impl ScanConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        ScanConfig { k, seed, resolution: 15, extent: 1.0, denominator_cap: 8, decide: DecideOptions::default() }
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.k == 0 {
            return Err(CliError::Usage("k must be at least 1".into()));
        }
        if self.resolution < 2 {
            return Err(CliError::Usage("resolution must be at least 2".into()));
        }
        if self.denominator_cap < 1 {
            return Err(CliError::Usage("denominator cap must be at least 1".into()));
        }
        if !(self.extent > 0.0) || !self.extent.is_finite() {
            return Err(CliError::Usage("extent must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanRow {
    pub index: [usize; 3],
    pub coords: [f64; 3],
    pub ambient: Vec<f64>,
    /// `None` when rounding produced a zero entry; such rays count as outside.
    pub primitive: Option<DimensionVector>,
    pub verdict: Option<(Verdict, Branch)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanResult {
    pub config: ScanConfig,
    /// Orthonormal basis of the slice in ambient coordinates.
    pub frame: [Vec<f64>; 3],
    pub frames_drawn: usize,
    /// Points with every ambient coordinate positive, ordered by grid index.
    pub rows: Vec<ScanRow>,
}

/// Rounds the direction of `x` to integers with largest entry `cap`, then makes it primitive.
pub fn rationalize_ray(x: &[f64], cap: u64) -> Option<DimensionVector> {
    let largest = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(largest > 0.0) || x.len() < 2 {
        return None;
    }
    let entries: Vec<i64> = x.iter().map(|&v| (v / largest * cap as f64).round() as i64).collect();
    if entries.iter().any(|&e| e <= 0) {
        return None;
    }
    DimensionVector::from_vector(&entries).ok().map(|a| a.primitive())
}

fn orthonormal_frame(rng: &mut ChaCha8Rng, dim: usize) -> Option<[Vec<f64>; 3]> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(3);
    for _ in 0..3 {
        let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        for b in &basis {
            let overlap: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= overlap * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-9 {
            return None;
        }
        basis.push(v.into_iter().map(|x| x / norm).collect());
    }
    let mut it = basis.into_iter();
    Some([it.next()?, it.next()?, it.next()?])
}

fn grid_value(config: &ScanConfig, i: usize) -> f64 {
    -config.extent + 2.0 * config.extent * i as f64 / (config.resolution - 1) as f64
}

fn positive_points(config: &ScanConfig, frame: &[Vec<f64>; 3]) -> Vec<([usize; 3], [f64; 3], Vec<f64>)> {
    let r = config.resolution;
    let mut points = Vec::new();
    for i in 0..r {
        for j in 0..r {
            for l in 0..r {
                let coords = [grid_value(config, i), grid_value(config, j), grid_value(config, l)];
                let ambient: Vec<f64> = (0..=config.k)
                    .map(|c| coords[0] * frame[0][c] + coords[1] * frame[1][c] + coords[2] * frame[2][c])
                    .collect();
                if ambient.iter().all(|&x| x > 0.0) {
                    points.push(([i, j, l], coords, ambient));
                }
            }
        }
    }
    points
}

fn king_admissible(x: &[f64]) -> bool {
    let legs = &x[1..];
    legs.iter().all(|&q| q <= x[0]) && x[0] <= legs.iter().sum()
}

/// Classifies every grid point of the slice that lies in the open positive orthant.
pub fn scan_cone(config: &ScanConfig) -> Result<ScanResult, CliError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut draws = 0;
    let (frame, points) = loop {
        draws += 1;
        if draws > MAX_FRAME_DRAWS {
            return Err(CliError::Usage(format!("no slice met the admissible region in {MAX_FRAME_DRAWS} draws")));
        }
        let Some(frame) = orthonormal_frame(&mut rng, config.k + 1) else { continue };
        let points = positive_points(config, &frame);
        let admissible = points.iter().filter(|(_, _, x)| king_admissible(x)).count();
        if admissible > 0 && admissible as f64 >= MIN_ADMISSIBLE_SHARE * config.resolution.pow(3) as f64 {
            break (frame, points);
        }
    };
    let mut cache: HashMap<DimensionVector, (Verdict, Branch)> = HashMap::new();
    let rows = points
        .into_iter()
        .map(|(index, coords, ambient)| {
            let primitive = rationalize_ray(&ambient, config.denominator_cap);
            let verdict = primitive.as_ref().map(|a| {
                *cache.entry(a.clone()).or_insert_with(|| {
                    let v = decide_with(a, &config.decide);
                    (v.verdict, v.branch)
                })
            });
            ScanRow { index, coords, ambient, primitive, verdict }
        })
        .collect();
    Ok(ScanResult { config: config.clone(), frame, frames_drawn: draws, rows })
}

pub fn verdict_label(verdict: Option<(Verdict, Branch)>) -> String {
    match verdict {
        Some((v, _)) => v.to_string(),
        None => "outside".to_string(),
    }
}

/// One row per grid point; see `--help` of `scan-cone` for the columns.
pub fn to_csv(result: &ScanResult) -> String {
    let dim = result.config.k + 1;
    let mut out = String::from("i,j,l,u,v,w");
    for c in 0..dim {
        let _ = write!(out, ",x{c}");
    }
    for c in 0..dim {
        let _ = write!(out, ",a{c}");
    }
    out.push_str(",verdict,branch\n");
    for row in &result.rows {
        let _ = write!(out, "{},{},{}", row.index[0], row.index[1], row.index[2]);
        for c in row.coords {
            let _ = write!(out, ",{c:.6}");
        }
        for x in &row.ambient {
            let _ = write!(out, ",{x:.6}");
        }
        match &row.primitive {
            Some(a) => a.to_vector().iter().for_each(|e| {
                let _ = write!(out, ",{e}");
            }),
            None => (0..dim).for_each(|_| out.push(',')),
        }
        let branch = row.verdict.map_or(String::new(), |(_, b)| b.to_string());
        let _ = writeln!(out, ",{},{branch}", verdict_label(row.verdict));
    }
    out
}

/// Two stable rays whose primitive sum is not stable.
#[derive(Clone, Debug, PartialEq)]
pub struct NonConvexityWitness {
    pub first: DimensionVector,
    pub second: DimensionVector,
    pub midpoint: DimensionVector,
    pub midpoint_verdict: Verdict,
}

/// Searches pairs of distinct stable rays of the scan in grid order.
pub fn non_convexity_witness(result: &ScanResult) -> Option<NonConvexityWitness> {
    let mut stable: Vec<&DimensionVector> = Vec::new();
    for row in &result.rows {
        if let (Some(a), Some((Verdict::Stable, _))) = (&row.primitive, row.verdict) {
            if !stable.contains(&a) {
                stable.push(a);
            }
        }
    }
    let mut cache: HashMap<DimensionVector, Verdict> = HashMap::new();
    for (x, first) in stable.iter().enumerate() {
        for second in &stable[x + 1..] {
            let sum: Vec<i64> = first.to_vector().iter().zip(second.to_vector()).map(|(a, b)| a + b).collect();
            let midpoint = DimensionVector::from_vector(&sum).expect("positive entries").primitive();
            let verdict =
                *cache.entry(midpoint.clone()).or_insert_with(|| decide_with(&midpoint, &result.config.decide).verdict);
            if verdict != Verdict::Stable {
                return Some(NonConvexityWitness {
                    first: (*first).clone(),
                    second: (*second).clone(),
                    midpoint,
                    midpoint_verdict: verdict,
                });
            }
        }
    }
    None
}

fn colour(verdict: Option<(Verdict, Branch)>) -> &'static str {
    match verdict.map(|v| v.0) {
        Some(Verdict::Stable) => "#1b7837",
        Some(Verdict::PolystableNotStable) => "#e08214",
        Some(Verdict::NotSemistable) => "#b2182b",
        None => "#999999",
    }
}

/// Scatter plot of the grid layer through the middle of the third slice axis.
pub fn render_svg(result: &ScanResult) -> String {
    let r = result.config.resolution;
    let layer = r / 2;
    let cell = 16.0;
    let margin = 24.0;
    let size = margin * 2.0 + cell * (r - 1) as f64;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{}" viewBox="0 0 {size} {}">"#,
        size + 20.0,
        size + 20.0
    );
    let _ = writeln!(svg, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    let _ = writeln!(
        svg,
        r#"<text x="{margin}" y="16" font-family="sans-serif" font-size="11">k={} seed={} layer l={layer}</text>"#,
        result.config.k, result.config.seed
    );
    for row in result.rows.iter().filter(|row| row.index[2] == layer) {
        let cx = margin + cell * row.index[0] as f64;
        let cy = 20.0 + margin + cell * (r - 1 - row.index[1]) as f64;
        let _ = writeln!(
            svg,
            r#"<circle cx="{cx}" cy="{cy}" r="5" fill="{}"><title>{}</title></circle>"#,
            colour(row.verdict),
            verdict_label(row.verdict)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_to_rays() {
        let a = rationalize_ray(&[2.0, 1.0, 1.0], 4).unwrap();
        assert_eq!(a.to_vector(), vec![2, 1, 1]);
        assert!(rationalize_ray(&[1.0, 0.01], 8).is_none());
        assert!(rationalize_ray(&[-1.0, -1.0], 8).is_none());
    }

    #[test]
    fn frame_is_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let frame = orthonormal_frame(&mut rng, 6).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let dot: f64 = frame[a].iter().zip(&frame[b]).map(|(x, y)| x * y).sum();
                assert!((dot - if a == b { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
    }
}
