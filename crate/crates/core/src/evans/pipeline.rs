use super::determinant::evans_matrix;
use crate::error::{Result, StageExt};
use crate::fredholm::{build_semiseparable, compute_theta, det2_nystrom_kernel, hat_solution, Det2Report, NystromRule};
use crate::jost::{
    check_volterra_hypothesis, solve_jost_mixed, solve_jost_volterra, solve_jost_weighted, JostContext, JostSolution, Route, Side,
};
use crate::numerics::{ComplexMatrix, LuDecomposition, QuadratureGrid, C64};
use crate::system::Factorization;

/// Choices for the full determinant pipeline.
#[derive(Clone, Debug, PartialEq)]
pub struct PipelineOptions {
    /// Jost route; `None` picks the plain Volterra equation when its decay
    /// condition holds on both half-lines and the mixed equations otherwise.
    pub route: Option<Route>,
    /// Approximate number of Nyström nodes; `None` skips that path.
    pub nystrom_nodes: Option<usize>,
    pub nystrom_rule: NystromRule,
    /// Split point of the semi-separable formula.
    pub x0: f64,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self { route: None, nystrom_nodes: Some(800), nystrom_rule: NystromRule::default(), x0: 0.0 }
    }
}

/// Jost solutions covering every projection of the splitting.
#[derive(Clone, Debug)]
pub struct JostSet {
    pub route: Route,
    pub plus: Vec<JostSolution>,
    pub minus: Vec<JostSolution>,
}

impl JostSet {
    pub fn all(&self) -> impl Iterator<Item = &JostSolution> {
        self.plus.iter().chain(&self.minus)
    }
}

/// Route used when none is requested.
pub fn default_route(ctx: &JostContext) -> Route {
    let k0 = ctx.splitting.k0();
    let lower: Vec<usize> = (1..=k0).collect();
    let upper: Vec<usize> = (k0 + 1..=ctx.splitting.len()).collect();
    if check_volterra_hypothesis(ctx, &lower, Side::Plus).is_ok() && check_volterra_hypothesis(ctx, &upper, Side::Minus).is_ok() {
        Route::Volterra
    } else {
        Route::Mixed
    }
}

/// Weight exponent used for the weighted equation: the largest upper
/// exponent of `Q` on the plus side, the smallest lower exponent of `I - Q`
/// on the minus side.
pub fn weighted_exponent(ctx: &JostContext, side: Side) -> f64 {
    let s = &ctx.splitting;
    let k0 = s.k0();
    let k = match side {
        Side::Plus => (1..=k0).map(|j| s.kappa(j)).fold(f64::NEG_INFINITY, f64::max),
        Side::Minus => (k0 + 1..=s.len()).map(|j| s.kappa_lower(j)).fold(f64::INFINITY, f64::min),
    };
    if k.is_finite() {
        k
    } else {
        0.0
    }
}

/// Solves for all Jost solutions along `route` (or the default route).
pub fn solve_jost_set(ctx: &JostContext, route: Option<Route>) -> Result<JostSet> {
    let route = route.unwrap_or_else(|| default_route(ctx));
    let q = ctx.dichotomy();
    let s = &ctx.splitting;
    let k0 = s.k0();
    let (plus, minus) = match route {
        Route::Volterra => (vec![solve_jost_volterra(ctx, &q, Side::Plus)?], vec![solve_jost_volterra(ctx, &q, Side::Minus)?]),
        Route::Weighted => (
            vec![solve_jost_weighted(ctx, &q, &|_| 1.0, weighted_exponent(ctx, Side::Plus), Side::Plus)?],
            vec![solve_jost_weighted(ctx, &q, &|_| 1.0, weighted_exponent(ctx, Side::Minus), Side::Minus)?],
        ),
        Route::Mixed => (
            (1..=k0).map(|j| solve_jost_mixed(ctx, j, Side::Plus)).collect::<Result<_>>()?,
            (k0 + 1..=s.len()).map(|j| solve_jost_mixed(ctx, j, Side::Minus)).collect::<Result<_>>()?,
        ),
    };
    Ok(JostSet { route, plus, minus })
}

/// `Y+(0) + Y-(0)` and its determinant for a solution set.
pub fn evans_of(ctx: &JostContext, set: &JostSet) -> Result<(ComplexMatrix, C64)> {
    let m = evans_matrix(&ctx.splitting, &set.plus, &set.minus)?;
    let det = LuDecomposition::new(&m).det();
    Ok((m, det))
}

/// Grid of roughly `nodes` Gauss nodes on `[-X, X]`, honouring breakpoints.
pub fn nystrom_grid(ctx: &JostContext, nodes: usize) -> Result<QuadratureGrid> {
    let x = ctx.x_max();
    let ppp = ctx.settings.points_per_panel;
    let panels = nodes.div_ceil(ppp).max(2);
    let mut cuts = ctx.problem.breakpoints().to_vec();
    cuts.push(0.0);
    QuadratureGrid::with_breakpoints(-x, x, &cuts, 2.0 * x / panels as f64, ppp)
}

/// Computes `Theta`, `D` and `det2(I + K)` along both paths and the
/// identity residual.
pub fn verify_identity(ctx: &JostContext, factorization: &Factorization, opts: &PipelineOptions) -> Result<Det2Report> {
    let set = solve_jost_set(ctx, opts.route).stage("Jost solutions")?;
    let (m, d) = evans_of(ctx, &set).stage("Evans determinant")?;
    let theta = compute_theta(ctx).stage("theta")?;
    let x = ctx.x_max();
    let semi = (|| {
        let kernel = build_semiseparable(ctx, factorization, &ctx.grid(-x, x)?)?;
        let hats = hat_solution(&kernel, ctx.settings.picard_tol, ctx.settings.max_iterations)?;
        Ok((hats.det2(opts.x0)?, hats.iterations))
    })()
    .stage("semi-separable det2")?;
    let nystrom = match opts.nystrom_nodes {
        Some(n) => Some(
            nystrom_grid(ctx, n)
                .and_then(|g| build_semiseparable(ctx, factorization, &g))
                .and_then(|k| det2_nystrom_kernel(&k, opts.nystrom_rule))
                .stage("Nyström det2")?,
        ),
        None => None,
    };
    let mut report = Det2Report::new(theta, d, semi.0, nystrom.map(|n| n.value));
    report.hat_iterations = semi.1;
    report.nystrom_size = nystrom.map_or((0, 0), |n| (n.size, n.reduced_size));
    report.evans_pivot_ratio = LuDecomposition::new(&m).pivot_ratio();
    report.jost_defects = set.all().map(|s| s.defect_decay_ratio()).collect();
    report.jost_iterations = set.all().map(|s| s.iterations).collect();
    Ok(report)
}
