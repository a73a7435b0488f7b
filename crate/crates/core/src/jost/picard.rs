//! Picard iteration for linear Volterra/Fredholm systems with separable
//! kernels,
//!
//! `Y(x) = Y0(x) + sum_t sign_t left_t(x) int_{D_t(x)} right_t(x') Y(x') dx'`,
//!
//! where `D_t(x)` is `[x, b]` (upward) or `[a, x]` (downward).
//!
//! Values live on the evaluation points of a [`QuadratureGrid`]: every panel
//! edge and every node, ordered `e_0, nodes of panel 0, e_1, ..., e_P`.

use crate::error::{Error, Result};
use crate::numerics::{ComplexMatrix, DenseSolution, QuadratureGrid, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// `int_x^b`
    Upward,
    /// `int_a^x`
    Downward,
}

/// One separable term; `left` is tabulated on evaluation points, `right`
/// (already multiplied by the perturbation) on quadrature nodes.
#[derive(Clone, Debug)]
pub struct Term {
    pub left: Vec<ComplexMatrix>,
    pub right: Vec<ComplexMatrix>,
    pub dir: Direction,
    pub sign: f64,
}

/// Evaluation points of a grid in storage order.
pub fn evaluation_points(grid: &QuadratureGrid) -> Vec<f64> {
    let ppp = grid.points_per_panel();
    let mut pts = Vec::with_capacity(grid.panels().len() * (ppp + 1) + 1);
    for p in grid.panels() {
        pts.push(p.a);
        pts.extend_from_slice(&grid.nodes()[p.start..p.start + ppp]);
    }
    pts.push(grid.b());
    pts
}

/// Storage index of the `i`-th node of panel `p`.
pub fn node_point(ppp: usize, p: usize, i: usize) -> usize {
    p * (ppp + 1) + 1 + i
}

#[derive(Clone, Debug)]
pub struct PicardOutcome {
    pub values: Vec<ComplexMatrix>,
    pub iterations: usize,
    /// Last observed ratio of successive update sizes.
    pub ratio: f64,
}

/// Cumulative integrals `int_{D(x)} g` at every evaluation point, for `g`
/// given at the nodes.
pub fn cumulative(grid: &QuadratureGrid, g: &[ComplexMatrix], dir: Direction) -> Vec<ComplexMatrix> {
    let ppp = grid.points_per_panel();
    let panels = grid.panels();
    let np = panels.len();
    let (r, c) = g[0].shape();
    let zero = ComplexMatrix::zeros(r, c);
    let full: Vec<ComplexMatrix> = panels
        .iter()
        .map(|p| {
            let mut acc = zero.clone();
            for i in 0..ppp {
                acc.add_scaled(C64::new(grid.weights()[p.start + i], 0.0), &g[p.start + i]);
            }
            acc
        })
        .collect();
    let mut edge = vec![zero.clone(); np + 1];
    match dir {
        Direction::Upward => {
            for k in (0..np).rev() {
                edge[k] = &edge[k + 1] + &full[k];
            }
        }
        Direction::Downward => {
            for k in 0..np {
                edge[k + 1] = &edge[k] + &full[k];
            }
        }
    }
    let mut out = Vec::with_capacity(np * (ppp + 1) + 1);
    for (pi, p) in panels.iter().enumerate() {
        out.push(edge[pi].clone());
        for i in 0..ppp {
            let mut acc = match dir {
                Direction::Upward => edge[pi + 1].clone(),
                Direction::Downward => edge[pi].clone(),
            };
            let ws: Vec<f64> = match dir {
                Direction::Upward => grid.upper_partial_weights(pi, i).collect(),
                Direction::Downward => grid.lower_partial_weights(pi, i).collect(),
            };
            for (j, w) in ws.into_iter().enumerate() {
                acc.add_scaled(C64::new(w, 0.0), &g[p.start + j]);
            }
            out.push(acc);
        }
    }
    out.push(edge[np].clone());
    out
}

fn weighted_max(values: &[ComplexMatrix], weight: &[f64]) -> f64 {
    values
        .iter()
        .zip(weight)
        .map(|(v, &w)| {
            let m = v.max_abs();
            if m == 0.0 {
                0.0
            } else {
                m / w.max(f64::MIN_POSITIVE)
            }
        })
        .fold(0.0, f64::max)
}

/// Applies the integral operator once: `sum_t sign_t left_t int right_t y`.
pub fn apply_terms(grid: &QuadratureGrid, terms: &[Term], y: &[ComplexMatrix]) -> Vec<ComplexMatrix> {
    let ppp = grid.points_per_panel();
    let (rows, cols) = y[0].shape();
    let mut out = vec![ComplexMatrix::zeros(rows, cols); y.len()];
    for t in terms {
        if t.right.is_empty() || t.right[0].rows() == 0 {
            continue;
        }
        let g: Vec<ComplexMatrix> = grid
            .panels()
            .iter()
            .enumerate()
            .flat_map(|(pi, p)| (0..ppp).map(move |i| (pi, p.start + i, i)))
            .map(|(pi, n, i)| t.right[n].matmul(&y[node_point(ppp, pi, i)]))
            .collect();
        let integrals = cumulative(grid, &g, t.dir);
        for ((o, l), iv) in out.iter_mut().zip(&t.left).zip(&integrals) {
            o.add_scaled(C64::new(t.sign, 0.0), &l.matmul(iv));
        }
    }
    out
}

/// Iterates to a fixed point; convergence when the weighted sup norm of the
/// update is below `tol (1 + |Y|_w)`.
pub fn solve(
    grid: &QuadratureGrid,
    y0: &[ComplexMatrix],
    terms: &[Term],
    weight: &[f64],
    tol: f64,
    max_iterations: usize,
) -> Result<PicardOutcome> {
    let mut y = y0.to_vec();
    let mut prev = f64::INFINITY;
    let mut ratio = 0.0;
    for it in 1..=max_iterations {
        let update = apply_terms(grid, terms, &y);
        let next: Vec<ComplexMatrix> = y0.iter().zip(&update).map(|(a, b)| a + b).collect();
        let delta: Vec<ComplexMatrix> = next.iter().zip(&y).map(|(a, b)| a - b).collect();
        let diff = weighted_max(&delta, weight);
        let norm = weighted_max(&next, weight);
        if !diff.is_finite() || !norm.is_finite() {
            return Err(Error::NonConvergence { iterations: it, ratio: f64::INFINITY });
        }
        if prev.is_finite() && prev > 0.0 {
            ratio = diff / prev;
        }
        prev = diff;
        y = next;
        if diff <= tol * (1.0 + norm) {
            return Ok(PicardOutcome { values: y, iterations: it, ratio });
        }
    }
    Err(Error::NonConvergence { iterations: max_iterations, ratio })
}

/// Packs evaluation-point values into a dense interpolant, one piece per
/// panel with the two edges as extra nodes.
pub fn to_dense(grid: &QuadratureGrid, values: &[ComplexMatrix]) -> Result<DenseSolution> {
    let pts = evaluation_points(grid);
    let ppp = grid.points_per_panel();
    let pieces = (0..grid.panels().len())
        .map(|p| {
            let lo = p * (ppp + 1);
            let hi = lo + ppp + 2;
            (pts[lo..hi].to_vec(), values[lo..hi].to_vec())
        })
        .collect();
    DenseSolution::from_pieces(pieces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::quadrature_grid;

    fn scalar(v: f64) -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[v]])
    }

    #[test]
    fn cumulative_integrals_are_exact_for_polynomials() {
        let grid = quadrature_grid(0.0, 2.0, 3, 5).unwrap();
        let g: Vec<ComplexMatrix> = grid.nodes().iter().map(|&x| scalar(x * x)).collect();
        let up = cumulative(&grid, &g, Direction::Upward);
        let down = cumulative(&grid, &g, Direction::Downward);
        for (x, (u, d)) in evaluation_points(&grid).into_iter().zip(up.iter().zip(&down)) {
            assert!((u[(0, 0)].re - (8.0 - x * x * x) / 3.0).abs() < 1e-13);
            assert!((d[(0, 0)].re - x * x * x / 3.0).abs() < 1e-13);
        }
    }

    #[test]
    fn volterra_exponential() {
        // y(x) = 1 + int_0^x y  =>  y = e^x
        let grid = quadrature_grid(0.0, 1.0, 4, 8).unwrap();
        let pts = evaluation_points(&grid);
        let y0 = vec![scalar(1.0); pts.len()];
        let term = Term {
            left: vec![scalar(1.0); pts.len()],
            right: vec![scalar(1.0); grid.len()],
            dir: Direction::Downward,
            sign: 1.0,
        };
        let out = solve(&grid, &y0, &[term], &vec![1.0; pts.len()], 1e-14, 100).unwrap();
        for (x, v) in pts.iter().zip(&out.values) {
            assert!((v[(0, 0)].re - x.exp()).abs() < 1e-13, "x = {x}");
        }
        let dense = to_dense(&grid, &out.values).unwrap();
        assert!((dense.evaluate(0.37).unwrap()[(0, 0)].re - 0.37f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn fredholm_contraction() {
        // y(x) = 1 + 0.5 int_0^1 y  =>  y = 2
        let grid = quadrature_grid(0.0, 1.0, 2, 4).unwrap();
        let pts = evaluation_points(&grid);
        let n = pts.len();
        let up = Term { left: vec![scalar(0.5); n], right: vec![scalar(1.0); grid.len()], dir: Direction::Upward, sign: 1.0 };
        let down = Term { left: vec![scalar(0.5); n], right: vec![scalar(1.0); grid.len()], dir: Direction::Downward, sign: 1.0 };
        let out = solve(&grid, &vec![scalar(1.0); n], &[up, down], &vec![1.0; n], 1e-13, 200).unwrap();
        assert!(out.values.iter().all(|v| (v[(0, 0)].re - 2.0).abs() < 1e-12));
        assert!((out.ratio - 0.5).abs() < 1e-3, "{}", out.ratio);
    }

    #[test]
    fn divergence_reported() {
        let grid = quadrature_grid(0.0, 1.0, 2, 4).unwrap();
        let n = evaluation_points(&grid).len();
        let up = Term { left: vec![scalar(3.0); n], right: vec![scalar(1.0); grid.len()], dir: Direction::Upward, sign: 1.0 };
        let down = Term { left: vec![scalar(3.0); n], right: vec![scalar(1.0); grid.len()], dir: Direction::Downward, sign: 1.0 };
        assert!(matches!(
            solve(&grid, &vec![scalar(1.0); n], &[up, down], &vec![1.0; n], 1e-13, 50),
            Err(Error::NonConvergence { .. })
        ));
    }
}
