use std::f64::consts::PI;

use rayon::prelude::*;

use super::pipeline::{evans_of, solve_jost_set, verify_identity, PipelineOptions};
use crate::error::{Error, Result};
use crate::fredholm::Det2Report;
use crate::jost::JostContext;
use crate::numerics::C64;
use crate::system::Factorization;

/// A spectral-parameter family: the problem and factorization at `z`.
pub type ProblemFamily<'a> = dyn Fn(C64) -> Result<(JostContext, Factorization)> + Sync + 'a;

/// Per-point pipeline results of a scan.
#[derive(Clone, Debug)]
pub struct ScanResult {
    pub points: Vec<C64>,
    pub values: Vec<Result<Det2Report>>,
    /// Whether the points trace a closed contour (last point joins the first).
    pub closed: bool,
}

impl ScanResult {
    /// Evans determinants, failing on the first failed point.
    pub fn evans_values(&self) -> Result<Vec<C64>> {
        self.values.iter().map(|v| v.as_ref().map(|r| r.evans_det).map_err(Clone::clone)).collect()
    }
}

/// Runs the full pipeline at every point independently. Failures are
/// recorded per point.
pub fn evans_scan(family: &ProblemFamily<'_>, points: &[C64], opts: &PipelineOptions, closed: bool) -> ScanResult {
    let values = points
        .par_iter()
        .map(|&z| {
            let (ctx, fac) = family(z)?;
            verify_identity(&ctx, &fac, opts)
        })
        .collect();
    ScanResult { points: points.to_vec(), values, closed }
}

/// Evans determinant alone at `z`.
pub fn evans_at(family: &ProblemFamily<'_>, z: C64, opts: &PipelineOptions) -> Result<C64> {
    let (ctx, _) = family(z)?;
    let set = solve_jost_set(&ctx, opts.route)?;
    Ok(evans_of(&ctx, &set)?.1)
}

/// Smallest modulus accepted on a contour.
pub const CONTOUR_FLOOR: f64 = 1e-10;

fn phase_steps(points: &[C64], values: &[C64]) -> Result<Vec<f64>> {
    for (z, v) in points.iter().zip(values) {
        if !(v.norm() >= CONTOUR_FLOOR) {
            return Err(Error::NearZeroContour { modulus: v.norm(), z: format!("{z}") });
        }
    }
    let n = values.len();
    Ok((0..n).map(|i| (values[(i + 1) % n] / values[i]).arg()).collect())
}

/// Winding number of the values around 0 along a closed contour. Each step
/// must change the phase by less than `pi / 2`.
pub fn winding_number(points: &[C64], values: &[C64]) -> Result<i64> {
    if values.len() < 3 {
        return Err(Error::InvalidInput("a closed contour needs at least three points".into()));
    }
    let steps = phase_steps(points, values)?;
    if let Some(&jump) = steps.iter().find(|s| s.abs() >= PI / 2.0) {
        return Err(Error::Undersampled { jump: jump.abs(), points: values.len() });
    }
    let total: f64 = steps.iter().sum();
    let turns = total / (2.0 * PI);
    let w = turns.round();
    if (total - 2.0 * PI * w).abs() > 0.1 {
        return Err(Error::Undersampled { jump: (total - 2.0 * PI * w).abs(), points: values.len() });
    }
    Ok(w as i64)
}

/// Winding number of `D` for a closed scan.
pub fn winding_count(scan: &ScanResult) -> Result<i64> {
    if !scan.closed {
        return Err(Error::InvalidInput("winding count needs a closed contour".into()));
    }
    winding_number(&scan.points, &scan.evans_values()?)
}

/// `n` points on the circle `|z - center| = radius`, counterclockwise.
pub fn circle_points(center: C64, radius: f64, n: usize) -> Vec<C64> {
    (0..n).map(|i| center + C64::from_polar(radius, 2.0 * PI * i as f64 / n as f64)).collect()
}

/// Winding number of `D` on a circle together with the samples used.
#[derive(Clone, Debug, PartialEq)]
pub struct ContourCount {
    pub winding: i64,
    pub points: Vec<C64>,
    pub values: Vec<C64>,
}

/// Number of zeros of `D` inside a circle, by the argument principle.
/// Starts with `points` samples and doubles them while a phase step exceeds
/// `pi / 2`, up to `max_points`.
pub fn count_zeros(
    family: &ProblemFamily<'_>,
    center: C64,
    radius: f64,
    points: usize,
    max_points: usize,
    opts: &PipelineOptions,
) -> Result<ContourCount> {
    let mut n = points.max(3);
    let mut zs = circle_points(center, radius, n);
    let mut values: Vec<C64> = zs.par_iter().map(|&z| evans_at(family, z, opts)).collect::<Result<_>>()?;
    loop {
        match winding_number(&zs, &values) {
            Err(Error::Undersampled { .. }) if 2 * n <= max_points => {
                let mids: Vec<C64> =
                    (0..n).map(|i| center + C64::from_polar(radius, 2.0 * PI * (i as f64 + 0.5) / n as f64)).collect();
                let mid_vals: Vec<C64> = mids.par_iter().map(|&z| evans_at(family, z, opts)).collect::<Result<_>>()?;
                let mut nz = Vec::with_capacity(2 * n);
                let mut nv = Vec::with_capacity(2 * n);
                for i in 0..n {
                    nz.extend([zs[i], mids[i]]);
                    nv.extend([values[i], mid_vals[i]]);
                }
                zs = nz;
                values = nv;
                n *= 2;
            }
            Ok(winding) => return Ok(ContourCount { winding, points: zs, values }),
            Err(e) => return Err(e),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn winding_of_polynomial() {
        let pts = circle_points(C64::new(0.0, 0.0), 1.0, 32);
        let vals: Vec<C64> = pts.iter().map(|z| (z - 0.2) * (z + C64::new(0.0, 0.3))).collect();
        assert_eq!(winding_number(&pts, &vals).unwrap(), 2);
        let vals: Vec<C64> = pts.iter().map(|z| z - 3.0).collect();
        assert_eq!(winding_number(&pts, &vals).unwrap(), 0);
    }

    #[test]
    fn coarse_and_degenerate_contours() {
        let pts = circle_points(C64::new(0.0, 0.0), 1.0, 4);
        let vals: Vec<C64> = pts.iter().map(|z| z.powi(3)).collect();
        assert!(matches!(winding_number(&pts, &vals), Err(Error::Undersampled { .. })));
        let pts = circle_points(C64::new(0.0, 0.0), 1.0, 8);
        let vals: Vec<C64> = pts.iter().map(|z| z - 1.0).collect();
        assert!(matches!(winding_number(&pts, &vals), Err(Error::NearZeroContour { .. })));
    }
}
