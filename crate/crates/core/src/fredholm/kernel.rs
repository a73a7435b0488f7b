use crate::error::{Error, Result};
use crate::jost::picard::evaluation_points;
use crate::jost::JostContext;
use crate::numerics::{ComplexMatrix, QuadratureGrid, C64};
use crate::system::Factorization;

/// Semi-separable kernel of the Birman-Schwinger-type operator,
///
/// `K(x, x') = -f1(x) g1(x')` for `x >= x'` and `-f2(x) g2(x')` for `x < x'`,
///
/// with `f1 = Rr Phi Q`, `f2 = Rr Phi (I - Q)`, `g1 = Q Phi^{-1} Rl` and
/// `g2 = -(I - Q) Phi^{-1} Rl`, restricted to `ran Q` and `ker Q`.
#[derive(Clone, Debug)]
pub struct SemiSeparableKernel {
    pub d: usize,
    pub d1: usize,
    pub d2: usize,
    grid: QuadratureGrid,
    points: Vec<f64>,
    f1: Vec<ComplexMatrix>,
    f2: Vec<ComplexMatrix>,
    g1: Vec<ComplexMatrix>,
    g2: Vec<ComplexMatrix>,
    ctx: JostContext,
    factorization: Factorization,
}

/// The four factors at one point: `(f1, f2, g1, g2)`.
pub type Factors = (ComplexMatrix, ComplexMatrix, ComplexMatrix, ComplexMatrix);

fn hstack_or_empty(rows: usize, blocks: &[ComplexMatrix]) -> ComplexMatrix {
    if blocks.is_empty() {
        return ComplexMatrix::zeros(rows, 0);
    }
    ComplexMatrix::hstack(&blocks.iter().collect::<Vec<_>>())
}

fn vstack_or_empty(cols: usize, blocks: &[ComplexMatrix]) -> ComplexMatrix {
    if blocks.is_empty() {
        return ComplexMatrix::zeros(0, cols);
    }
    ComplexMatrix::vstack(&blocks.iter().collect::<Vec<_>>())
}

fn factors_at(ctx: &JostContext, fac: &Factorization, x: f64) -> Result<Factors> {
    let d = ctx.problem.dimension;
    let k0 = ctx.splitting.k0();
    let rr = fac.right(x);
    let rl = fac.left(x);
    let mut l1 = Vec::new();
    let mut l2 = Vec::new();
    let mut r1 = Vec::new();
    let mut r2 = Vec::new();
    for g in 1..=ctx.splitting.len() {
        let m = ctx.mode(g);
        if m.rank() == 0 {
            continue;
        }
        let (l, r) = (m.left(x)?, m.right(x)?);
        if g <= k0 {
            l1.push(l);
            r1.push(r);
        } else {
            l2.push(l);
            r2.push(r);
        }
    }
    let f1 = rr.matmul(&hstack_or_empty(d, &l1));
    let f2 = rr.matmul(&hstack_or_empty(d, &l2));
    let g1 = vstack_or_empty(d, &r1).matmul(&rl);
    let g2 = vstack_or_empty(d, &r2).matmul(&rl).scale_real(-1.0);
    Ok((f1, f2, g1, g2))
}

/// Tabulates the kernel factors on the evaluation points of `grid`, which
/// must lie inside the propagator interval.
pub fn build_semiseparable(
    ctx: &JostContext,
    factorization: &Factorization,
    grid: &QuadratureGrid,
) -> Result<SemiSeparableKernel> {
    let (lo, hi) = ctx.propagator.interval();
    let slack = 1e-12 * (1.0 + hi.abs());
    if grid.a() < lo - slack || grid.b() > hi + slack {
        return Err(Error::OutOfInterval { x: if grid.a() < lo { grid.a() } else { grid.b() }, a: lo, b: hi });
    }
    let points = evaluation_points(grid);
    let n = points.len();
    let (mut f1, mut f2, mut g1, mut g2) =
        (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for &x in &points {
        let (a, b, c, e) = factors_at(ctx, factorization, x)?;
        f1.push(a);
        f2.push(b);
        g1.push(c);
        g2.push(e);
    }
    let d = ctx.problem.dimension;
    let d1 = f1[0].cols();
    Ok(SemiSeparableKernel {
        d,
        d1,
        d2: d - d1,
        grid: grid.clone(),
        points,
        f1,
        f2,
        g1,
        g2,
        ctx: ctx.clone(),
        factorization: factorization.clone(),
    })
}

impl SemiSeparableKernel {
    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    pub fn context(&self) -> &JostContext {
        &self.ctx
    }

    pub(crate) fn points(&self) -> &[f64] {
        &self.points
    }

    pub(crate) fn tables(&self) -> (&[ComplexMatrix], &[ComplexMatrix], &[ComplexMatrix], &[ComplexMatrix]) {
        (&self.f1, &self.f2, &self.g1, &self.g2)
    }

    /// Factors at `x`, from the table when `x` is a tabulated point.
    pub fn factors(&self, x: f64) -> Result<Factors> {
        match self.points.binary_search_by(|p| p.total_cmp(&x)) {
            Ok(i) => Ok((self.f1[i].clone(), self.f2[i].clone(), self.g1[i].clone(), self.g2[i].clone())),
            Err(_) => factors_at(&self.ctx, &self.factorization, x),
        }
    }

    fn with_index<T>(&self, x: f64, f: impl FnOnce(usize) -> T) -> Option<T> {
        self.points.binary_search_by(|p| p.total_cmp(&x)).ok().map(f)
    }

    /// `K(x, x')`, using the `x >= x'` branch on the diagonal.
    pub fn evaluate(&self, x: f64, xp: f64) -> Result<ComplexMatrix> {
        let pair = self.with_index(x, |i| i).zip(self.with_index(xp, |j| j));
        if let Some((i, j)) = pair {
            let k = if x >= xp { self.f1[i].matmul(&self.g1[j]) } else { self.f2[i].matmul(&self.g2[j]) };
            return Ok(k.scale_real(-1.0));
        }
        let (f1, f2, _, _) = self.factors(x)?;
        let (_, _, g1, g2) = self.factors(xp)?;
        let k = if x >= xp { f1.matmul(&g1) } else { f2.matmul(&g2) };
        Ok(k.scale_real(-1.0))
    }

    /// `H(x, x') = f1(x) g1(x') - f2(x) g2(x') = Rr(x) Phi(x) Phi(x')^{-1} Rl(x')`.
    pub fn h(&self, x: f64, xp: f64) -> Result<ComplexMatrix> {
        let (f1, f2, _, _) = self.factors(x)?;
        let (_, _, g1, g2) = self.factors(xp)?;
        Ok(&f1.matmul(&g1) - &f2.matmul(&g2))
    }
}

/// `Theta = int_0^X tr(Phi Q Phi^{-1} R) - int_{-X}^0 tr(Phi (I - Q) Phi^{-1} R)`
/// for the dichotomy projection of `ctx`, on separate grids for the two
/// half-lines.
pub fn compute_theta(ctx: &JostContext) -> Result<C64> {
    if ctx.problem.perturbation_vanishes() {
        return Ok(C64::new(0.0, 0.0));
    }
    let x_max = ctx.x_max();
    let k0 = ctx.splitting.k0();
    let half = |a: f64, b: f64, groups: Vec<usize>| -> Result<C64> {
        let grid = ctx.grid(a, b)?;
        let mut acc = C64::new(0.0, 0.0);
        for (&x, &w) in grid.nodes().iter().zip(grid.weights()) {
            let r = ctx.problem.r(x);
            if r.is_zero() {
                continue;
            }
            for &g in &groups {
                let m = ctx.mode(g);
                if m.rank() == 0 {
                    continue;
                }
                acc += m.right(x)?.matmul(&r).matmul(&m.left(x)?).trace() * w;
            }
        }
        Ok(acc)
    };
    let plus = half(0.0, x_max, (1..=k0).collect())?;
    let minus = half(-x_max, 0.0, (k0 + 1..=ctx.splitting.len()).collect())?;
    Ok(plus - minus)
}
