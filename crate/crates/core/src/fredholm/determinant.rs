use super::kernel::SemiSeparableKernel;
use crate::error::{Error, Result};
use crate::jost::picard::{self, Direction, Term};
use crate::numerics::{lu_det, ComplexMatrix, DenseSolution, C64};

/// `B = [[g1 f1, g1 f2], [-g2 f1, -g2 f2]]` at `x`.
pub fn b_matrix(kernel: &SemiSeparableKernel, x: f64) -> Result<ComplexMatrix> {
    let (f1, f2, g1, g2) = kernel.factors(x)?;
    let mut b = ComplexMatrix::zeros(kernel.d, kernel.d);
    let d1 = kernel.d1;
    b.set_block(0, 0, &g1.matmul(&f1));
    b.set_block(0, d1, &g1.matmul(&f2));
    b.set_block(d1, 0, &g2.matmul(&f1).scale_real(-1.0));
    b.set_block(d1, d1, &g2.matmul(&f2).scale_real(-1.0));
    Ok(b)
}

/// Solutions of the two hat equations and the matrix `U` built from them.
#[derive(Clone, Debug)]
pub struct HatSolution {
    /// `U(x)` on the kernel grid.
    pub u: DenseSolution,
    /// Picard iterations for `f1^` and `f2^`.
    pub iterations: (usize, usize),
    /// `int_{-X}^x tr(f2 g2)` and `int_x^X tr(f1 g1)` on the kernel grid.
    lower_trace: DenseSolution,
    upper_trace: DenseSolution,
}

fn scalar(v: C64) -> ComplexMatrix {
    ComplexMatrix::from_vec(1, 1, vec![v])
}

/// Solves `f1^ = f1 - int_x^X H f1^` and `f2^ = f2 + int_{-X}^x H f2^` by
/// Picard iteration and assembles
///
/// `U = [[I - int_x^X g1 f1^, int_{-X}^x g1 f2^], [int_x^X g2 f1^, I - int_{-X}^x g2 f2^]]`.
pub fn hat_solution(kernel: &SemiSeparableKernel, tol: f64, max_iterations: usize) -> Result<HatSolution> {
    let grid = kernel.grid();
    let (f1, f2, g1, g2) = kernel.tables();
    let d = kernel.d;
    let d1 = kernel.d1;
    let n_pts = kernel.points().len();
    let ppp = grid.points_per_panel();
    let node_index: Vec<usize> =
        (0..grid.panels().len()).flat_map(|p| (0..ppp).map(move |i| picard::node_point(ppp, p, i))).collect();

    let left: Vec<ComplexMatrix> = f1.iter().zip(f2).map(|(a, b)| ComplexMatrix::hstack(&[a, b])).collect();
    let right: Vec<ComplexMatrix> =
        node_index.iter().map(|&k| ComplexMatrix::vstack(&[&g1[k], &g2[k].scale_real(-1.0)])).collect();
    let weight: Vec<f64> = left.iter().map(|l| l.max_abs()).collect();
    let up = Term { left: left.clone(), right: right.clone(), dir: Direction::Upward, sign: -1.0 };
    let down = Term { left, right, dir: Direction::Downward, sign: 1.0 };

    let solve = |y0: &[ComplexMatrix], term: Term| -> Result<(Vec<ComplexMatrix>, usize)> {
        if y0[0].cols() == 0 || y0.iter().all(|y| y.is_zero()) {
            return Ok((y0.to_vec(), 0));
        }
        let out = picard::solve(grid, y0, &[term], &weight, tol, max_iterations)?;
        Ok((out.values, out.iterations))
    };
    let (hat1, it1) = solve(f1, up)?;
    let (hat2, it2) = solve(f2, down)?;

    let at_nodes = |g: &[ComplexMatrix], h: &[ComplexMatrix]| -> Vec<ComplexMatrix> {
        node_index.iter().map(|&k| g[k].matmul(&h[k])).collect()
    };
    let cum_or_zero = |vals: Vec<ComplexMatrix>, dir: Direction, rows: usize, cols: usize| -> Vec<ComplexMatrix> {
        if rows == 0 || cols == 0 {
            vec![ComplexMatrix::zeros(rows, cols); n_pts]
        } else {
            picard::cumulative(grid, &vals, dir)
        }
    };
    let d2 = kernel.d2;
    let u11 = cum_or_zero(at_nodes(g1, &hat1), Direction::Upward, d1, d1);
    let u12 = cum_or_zero(at_nodes(g1, &hat2), Direction::Downward, d1, d2);
    let u21 = cum_or_zero(at_nodes(g2, &hat1), Direction::Upward, d2, d1);
    let u22 = cum_or_zero(at_nodes(g2, &hat2), Direction::Downward, d2, d2);
    let u: Vec<ComplexMatrix> = (0..n_pts)
        .map(|i| {
            let mut m = ComplexMatrix::identity(d);
            m.set_block(0, 0, &(&ComplexMatrix::identity(d1) - &u11[i]));
            m.set_block(0, d1, &u12[i]);
            m.set_block(d1, 0, &u21[i]);
            m.set_block(d1, d1, &(&ComplexMatrix::identity(d2) - &u22[i]));
            m
        })
        .collect();

    let tr2: Vec<ComplexMatrix> = node_index.iter().map(|&k| scalar(f2[k].matmul(&g2[k]).trace())).collect();
    let tr1: Vec<ComplexMatrix> = node_index.iter().map(|&k| scalar(f1[k].matmul(&g1[k]).trace())).collect();
    let lower_trace = picard::to_dense(grid, &picard::cumulative(grid, &tr2, Direction::Downward))?;
    let upper_trace = picard::to_dense(grid, &picard::cumulative(grid, &tr1, Direction::Upward))?;
    Ok(HatSolution { u: picard::to_dense(grid, &u)?, iterations: (it1, it2), lower_trace, upper_trace })
}

impl HatSolution {
    /// `det U(x0) exp(int_{-X}^{x0} tr(f2 g2) + int_{x0}^X tr(f1 g1))`.
    pub fn det2(&self, x0: f64) -> Result<C64> {
        let u = self.u.evaluate(x0)?;
        let lower = self.lower_trace.evaluate(x0)?[(0, 0)];
        let upper = self.upper_trace.evaluate(x0)?[(0, 0)];
        let value = lu_det(&u) * (lower + upper).exp();
        if !value.is_finite() {
            return Err(Error::Overflow { norm: u.max_abs(), cap: f64::MAX });
        }
        Ok(value)
    }
}

/// `U(x0)` from the hat equations with the default tolerance ladder.
pub fn u_matrix(kernel: &SemiSeparableKernel, x0: f64) -> Result<ComplexMatrix> {
    let s = &kernel.context().settings;
    hat_solution(kernel, s.picard_tol, s.max_iterations)?.u.evaluate(x0)
}

/// `det2(I + K)` through the semi-separable reduction at the split point `x0`.
pub fn det2_semiseparable(kernel: &SemiSeparableKernel, x0: f64) -> Result<C64> {
    let s = &kernel.context().settings;
    hat_solution(kernel, s.picard_tol, s.max_iterations)?.det2(x0)
}
