use super::picard::{self, evaluation_points, Direction, Term};
use super::settings::{Route, Side, SolverSettings};
use crate::error::{Error, Result};
use crate::numerics::{integrate_linear_ode_with, ComplexMatrix, DenseSolution, OdeOptions, QuadratureGrid, C64};
use crate::system::{spectral_splitting, ModeFactor, ProblemDefinition, Propagator, SpectralSplitting, SupportDescriptor};

/// Everything the Jost solvers share for one problem: the splitting, the
/// propagator on `[-X, X]` and the per-projection mode factors.
#[derive(Clone, Debug)]
pub struct JostContext {
    pub problem: ProblemDefinition,
    pub splitting: SpectralSplitting,
    pub propagator: Propagator,
    pub settings: SolverSettings,
    modes: Vec<ModeFactor>,
}

impl JostContext {
    pub fn new(problem: ProblemDefinition, splitting: SpectralSplitting, settings: SolverSettings) -> Result<Self> {
        settings.validate()?;
        if splitting.dimension() != problem.dimension {
            return Err(Error::InvalidInput("splitting and problem dimensions differ".into()));
        }
        let propagator = Propagator::finalized(&problem, settings.x_max, settings.ode_tol)?;
        let modes = splitting.projections().iter().map(|q| propagator.mode_factor(q)).collect::<Result<Vec<_>>>()?;
        Ok(Self { problem, splitting, propagator, settings, modes })
    }

    /// Context for an autonomous problem, splitting its coefficient by real
    /// parts of the eigenvalues.
    pub fn autonomous(problem: ProblemDefinition, settings: SolverSettings) -> Result<Self> {
        let a = problem
            .autonomous_matrix()
            .ok_or_else(|| Error::InvalidInput("problem is not autonomous; supply a splitting".into()))?
            .clone();
        let splitting = spectral_splitting(&a, settings.grouping_tol)?;
        Self::new(problem, splitting, settings)
    }

    pub fn x_max(&self) -> f64 {
        self.settings.x_max
    }

    /// Mode factor of `Q_j`, 1-based.
    pub fn mode(&self, j: usize) -> &ModeFactor {
        &self.modes[j - 1]
    }

    /// The dichotomy projection `Q = sum_{j <= k0} Q_j`.
    pub fn dichotomy(&self) -> ComplexMatrix {
        self.splitting.sum(1..=self.splitting.k0())
    }

    /// Same problem, splitting and settings with another perturbation.
    pub fn with_problem(&self, problem: ProblemDefinition) -> Result<Self> {
        if problem.dimension != self.problem.dimension {
            return Err(Error::InvalidInput("replacement problem has a different dimension".into()));
        }
        Ok(Self { problem, ..self.clone() })
    }

    pub fn with_settings(&self, settings: SolverSettings) -> Result<Self> {
        if settings.x_max != self.settings.x_max || settings.ode_tol != self.settings.ode_tol {
            return Self::new(self.problem.clone(), self.splitting.clone(), settings);
        }
        settings.validate()?;
        Ok(Self { settings, ..self.clone() })
    }

    fn epsilon(&self, j: usize) -> f64 {
        self.settings
            .mu_offsets
            .get(j - 1)
            .copied()
            .or(self.settings.epsilon)
            .unwrap_or_else(|| 0.01 * self.splitting.minimal_gap())
    }

    /// Quadrature grid on `[a, b]` honouring perturbation breakpoints.
    pub fn grid(&self, a: f64, b: f64) -> Result<QuadratureGrid> {
        let mut cuts = self.problem.breakpoints().to_vec();
        cuts.push(0.0);
        QuadratureGrid::with_breakpoints(a, b, &cuts, self.settings.panel_width, self.settings.points_per_panel)
    }
}

/// Defect size treated as rounding noise.
pub const DEFECT_FLOOR: f64 = 1e-10;

/// A matrix-valued Jost solution on a half-line.
#[derive(Clone, Debug)]
pub struct JostSolution {
    pub side: Side,
    pub route: Route,
    /// Projection index for mixed solutions (1-based).
    pub index: Option<usize>,
    /// The projection `P` with `Y(x) ~ Phi(x) P`.
    pub projection: ComplexMatrix,
    /// Splitting indices making up `projection`.
    pub groups: Vec<usize>,
    pub values: DenseSolution,
    pub initial: ComplexMatrix,
    /// `(x, defect)` samples ordered by distance from 0.
    pub defect: Vec<(f64, f64)>,
    pub iterations: usize,
    pub converged: bool,
    pub tau: f64,
    pub contraction_ratio: f64,
    /// Estimated norm of the mixed operator at the final `tau`.
    pub operator_bound: Option<f64>,
    /// `|Y(0) P - Y(0)|` before any projection is applied.
    pub projection_defect: f64,
}

impl JostSolution {
    pub fn evaluate(&self, x: f64) -> Result<ComplexMatrix> {
        self.values.evaluate(x)
    }

    /// Largest defect over the last tenth of the samples divided by the
    /// largest over the first tenth. Defects below [`DEFECT_FLOOR`] count as
    /// zero, so a solution that is exact up to rounding reports 0.
    pub fn defect_decay_ratio(&self) -> f64 {
        let n = self.defect.len();
        if n == 0 {
            return 0.0;
        }
        let tenth = (n / 10).max(1);
        let head = self.defect[..tenth].iter().map(|d| d.1).fold(0.0, f64::max);
        let tail = self.defect[n - tenth..].iter().map(|d| d.1).fold(0.0, f64::max);
        if tail <= DEFECT_FLOOR {
            0.0
        } else {
            tail / head.max(DEFECT_FLOOR)
        }
    }

    /// Largest `|Y' - (A + R) Y| / |Y|` over panel midpoints away from the
    /// perturbation's breakpoints.
    pub fn ode_residual(&self, problem: &ProblemDefinition) -> Result<f64> {
        let bps = self.values.breakpoints();
        let mut worst: f64 = 0.0;
        for w in bps.windows(2) {
            let x = 0.5 * (w[0] + w[1]);
            if problem.breakpoints().iter().any(|b| (b - x).abs() < 1e-9) {
                continue;
            }
            let y = self.values.evaluate(x)?;
            let norm = y.max_abs();
            if norm == 0.0 {
                continue;
            }
            let dy = self.values.derivative(x)?;
            let rhs = (&problem.a(x) + &problem.r(x)).matmul(&y);
            worst = worst.max((&dy - &rhs).max_abs() / norm);
        }
        Ok(worst)
    }
}

/// Exponent of `|Y(b)| / |Y(a)|` over the window, a Lyapunov-type estimate
/// for the solutions spanned by `Y`.
pub fn solution_exponent(sol: &JostSolution, a: f64, b: f64) -> Result<f64> {
    let ya = sol.evaluate(a)?.spectral_norm();
    let yb = sol.evaluate(b)?.spectral_norm();
    Ok((yb / ya).ln() / (b - a))
}

fn decay_rate(support: SupportDescriptor) -> Option<f64> {
    match support {
        SupportDescriptor::Compact { .. } => None,
        SupportDescriptor::Exponential { beta } => Some(beta),
        SupportDescriptor::Polynomial { .. } => Some(0.0),
    }
}

fn describe_rate(support: SupportDescriptor) -> String {
    match support {
        SupportDescriptor::Exponential { beta } => format!("decay rate β={beta}"),
        SupportDescriptor::Polynomial { degree } => format!("polynomial decay of degree {degree} (exponential rate 0)"),
        SupportDescriptor::Compact { halfwidth } => format!("compact support [-{halfwidth}, {halfwidth}]"),
    }
}

/// Exponents relevant on the chosen half-line, mirrored for the minus side
/// so that the plus-side conditions apply verbatim: `(lower, upper)`.
fn mirrored_exponents(splitting: &SpectralSplitting, groups: &[usize], side: Side) -> (f64, f64) {
    let (lo, hi) = splitting.exponents_of(groups);
    match side {
        Side::Plus => (lo, hi),
        Side::Minus => (-hi, -lo),
    }
}

/// Checks the decay condition of the plain Volterra equation for the
/// projection made of `groups`.
pub fn check_volterra_hypothesis(ctx: &JostContext, groups: &[usize], side: Side) -> Result<()> {
    let support = ctx.problem.support();
    let Some(beta) = decay_rate(support) else { return Ok(()) };
    let (lower, upper) = mirrored_exponents(&ctx.splitting, groups, side);
    let width = upper - lower;
    let threshold = width.min(-lower);
    if beta > threshold {
        Ok(())
    } else {
        let (w_name, l_name) = match side {
            Side::Plus => ("λ₊(Q) − κ′₊(Q)", "−λ′₊(Q)"),
            Side::Minus => ("κ₋(I−Q) − λ′₋(I−Q)", "λ₋(I−Q)"),
        };
        Err(Error::HypothesisViolated {
            condition: format!(
                "Volterra decay condition: {} must exceed min{{{w_name}, {l_name}}} = min{{{width}, {}}} = {threshold}",
                describe_rate(support),
                -lower
            ),
        })
    }
}

/// Checks the exponential gap condition of the weighted equation.
pub fn check_weighted_hypothesis(ctx: &JostContext, groups: &[usize], side: Side) -> Result<()> {
    let support = ctx.problem.support();
    let Some(beta) = decay_rate(support) else { return Ok(()) };
    let (lower, upper) = mirrored_exponents(&ctx.splitting, groups, side);
    let width = upper - lower;
    if groups.len() == 1 && width == 0.0 || beta > width {
        return Ok(());
    }
    let name = match side {
        Side::Plus => "λ₊(Q) − κ′₊(Q)",
        Side::Minus => "κ₋(I−Q) − λ′₋(I−Q)",
    };
    Err(Error::HypothesisViolated {
        condition: format!("exponential gap condition: {} must exceed {name} = {width}", describe_rate(support)),
    })
}

/// Checks the decay condition of the mixed equations.
pub fn check_mixed_hypothesis(ctx: &JostContext) -> Result<()> {
    let support = ctx.problem.support();
    if ctx.problem.is_autonomous() {
        let m = ctx.splitting.max_jordan_degree();
        return match support {
            SupportDescriptor::Polynomial { degree } if degree < 2.0 * m as f64 => Err(Error::HypothesisViolated {
                condition: format!("Jordan-block decay condition: polynomial degree {degree} must be at least 2m = {}", 2 * m),
            }),
            _ => Ok(()),
        };
    }
    let Some(beta) = decay_rate(support) else { return Ok(()) };
    let widest = ctx.splitting.segments().iter().map(|s| s.1 - s.0).fold(0.0, f64::max);
    if beta > widest {
        Ok(())
    } else {
        Err(Error::HypothesisViolated {
            condition: format!("segment-width condition: {} must exceed max_j (κ_j − κ′_j) = {widest}", describe_rate(support)),
        })
    }
}

/// Tabulated pieces of one solve on a grid.
struct Tables {
    grid: QuadratureGrid,
    points: Vec<f64>,
    lefts: Vec<Vec<ComplexMatrix>>,
    rights: Vec<Vec<ComplexMatrix>>,
}

fn tabulate(ctx: &JostContext, a: f64, b: f64) -> Result<Tables> {
    let grid = ctx.grid(a, b)?;
    let points = evaluation_points(&grid);
    let r_nodes: Vec<ComplexMatrix> = grid.nodes().iter().map(|&x| ctx.problem.r(x)).collect();
    let mut lefts = Vec::with_capacity(ctx.splitting.len());
    let mut rights = Vec::with_capacity(ctx.splitting.len());
    for j in 1..=ctx.splitting.len() {
        let m = ctx.mode(j);
        lefts.push(points.iter().map(|&x| m.left(x)).collect::<Result<Vec<_>>>()?);
        rights.push(grid.nodes().iter().zip(&r_nodes).map(|(&x, r)| Ok(m.right(x)?.matmul(r))).collect::<Result<Vec<_>>>()?);
    }
    Ok(Tables { grid, points, lefts, rights })
}

fn initial_values(ctx: &JostContext, tables: &Tables, groups: &[usize]) -> Result<Vec<ComplexMatrix>> {
    let d = ctx.problem.dimension;
    let at_zero: Vec<ComplexMatrix> = groups.iter().map(|&g| ctx.mode(g).right(0.0)).collect::<Result<_>>()?;
    Ok((0..tables.points.len())
        .map(|i| {
            let mut acc = ComplexMatrix::zeros(d, d);
            for (&g, r0) in groups.iter().zip(&at_zero) {
                acc = &acc + &tables.lefts[g - 1][i].matmul(r0);
            }
            acc
        })
        .collect())
}

fn term(tables: &Tables, g: usize, dir: Direction, sign: f64) -> Term {
    Term { left: tables.lefts[g - 1].clone(), right: tables.rights[g - 1].clone(), dir, sign }
}

/// Sup over `x` of `sum_t |left_t(x)| / w(x) int |right_t| w`.
fn operator_bound(tables: &Tables, terms: &[(usize, Direction)], weight: &dyn Fn(f64) -> f64) -> f64 {
    let w_pts: Vec<f64> = tables.points.iter().map(|&x| weight(x)).collect();
    let mut total = vec![0.0; tables.points.len()];
    for &(g, dir) in terms {
        let g_nodes: Vec<ComplexMatrix> = tables.rights[g - 1]
            .iter()
            .zip(tables.grid.nodes())
            .map(|(r, &x)| ComplexMatrix::from_real_rows(&[&[r.frobenius_norm() * weight(x)]]))
            .collect();
        let cum = picard::cumulative(&tables.grid, &g_nodes, dir);
        for (i, c) in cum.iter().enumerate() {
            total[i] += tables.lefts[g - 1][i].frobenius_norm() / w_pts[i] * c[(0, 0)].re;
        }
    }
    total.into_iter().fold(0.0, f64::max)
}

fn defect_samples(
    ctx: &JostContext,
    values: &DenseSolution,
    groups: &[usize],
    exponent: f64,
    side: Side,
) -> Result<Vec<(f64, f64)>> {
    let x_max = ctx.x_max();
    let n = 100;
    // Phi(x) Q_g through the mode factors, which avoids the cancellation in
    // the full propagator
    let right: Vec<ComplexMatrix> = groups.iter().map(|&g| ctx.mode(g).right(0.0)).collect::<Result<_>>()?;
    (0..=n)
        .map(|i| {
            let s = x_max * i as f64 / n as f64;
            let x = if side == Side::Plus { s } else { -s };
            let y = values.evaluate(x)?;
            let mut free = ComplexMatrix::zeros(ctx.splitting.dimension(), ctx.splitting.dimension());
            for (&g, r) in groups.iter().zip(&right) {
                free.add_scaled(C64::new(1.0, 0.0), &ctx.mode(g).left(x)?.matmul(r));
            }
            Ok((x, (-exponent * x).exp() * (&y - &free).spectral_norm()))
        })
        .collect()
}

fn half_line(ctx: &JostContext, side: Side, start: f64) -> (f64, f64) {
    match side {
        Side::Plus => (start, ctx.x_max()),
        Side::Minus => (-ctx.x_max(), -start),
    }
}

/// Groups making up the projection tracked on `side` when `q` is the
/// dichotomy-type projection: `Q` itself on the plus side and `I - Q` on the
/// minus side.
fn tracked_groups(ctx: &JostContext, q: &ComplexMatrix, side: Side) -> Result<(Vec<usize>, ComplexMatrix)> {
    let used = ctx.splitting.decompose(q)?;
    let groups: Vec<usize> = match side {
        Side::Plus => used,
        Side::Minus => (1..=ctx.splitting.len()).filter(|j| !used.contains(j)).collect(),
    };
    let proj = ctx.splitting.sum(groups.iter().copied());
    Ok((groups, proj))
}

struct VolterraOutcome {
    values: DenseSolution,
    iterations: usize,
    ratio: f64,
}

fn run_volterra(
    ctx: &JostContext,
    groups: &[usize],
    side: Side,
    weight: &dyn Fn(f64, &ComplexMatrix) -> f64,
) -> Result<VolterraOutcome> {
    let (a, b) = half_line(ctx, side, 0.0);
    let tables = tabulate(ctx, a, b)?;
    let y0 = initial_values(ctx, &tables, groups)?;
    if ctx.problem.perturbation_vanishes() {
        return Ok(VolterraOutcome { values: picard::to_dense(&tables.grid, &y0)?, iterations: 1, ratio: 0.0 });
    }
    let (dir, sign) = match side {
        Side::Plus => (Direction::Upward, -1.0),
        Side::Minus => (Direction::Downward, 1.0),
    };
    let terms: Vec<Term> = (1..=ctx.splitting.len()).map(|g| term(&tables, g, dir, sign)).collect();
    let w: Vec<f64> = tables.points.iter().zip(&y0).map(|(&x, y)| weight(x, y)).collect();
    let out = picard::solve(&tables.grid, &y0, &terms, &w, ctx.settings.picard_tol, ctx.settings.max_iterations)?;
    Ok(VolterraOutcome { values: picard::to_dense(&tables.grid, &out.values)?, iterations: out.iterations, ratio: out.ratio })
}

#[allow(clippy::too_many_arguments)]
fn finish(
    ctx: &JostContext,
    side: Side,
    route: Route,
    index: Option<usize>,
    groups: Vec<usize>,
    projection: ComplexMatrix,
    values: DenseSolution,
    iterations: usize,
    ratio: f64,
    tau: f64,
    operator_bound: Option<f64>,
) -> Result<JostSolution> {
    // with R = 0 the solution is Phi Q and Phi(0) = I
    let initial = if ctx.problem.perturbation_vanishes() { projection.clone() } else { values.evaluate(0.0)? };
    let projection_defect = (&initial.matmul(&projection) - &initial).max_abs();
    let (lo, hi) = ctx.splitting.exponents_of(&groups);
    let exponent = match side {
        Side::Plus if lo.is_finite() => lo,
        Side::Minus if hi.is_finite() => hi,
        _ => 0.0,
    };
    let defect = defect_samples(ctx, &values, &groups, exponent, side)?;
    Ok(JostSolution {
        side,
        route,
        index,
        projection,
        groups,
        values,
        initial,
        defect,
        iterations,
        converged: true,
        tau,
        contraction_ratio: ratio,
        operator_bound,
        projection_defect,
    })
}

/// Jost solution from the plain Volterra equation
/// `Y = Phi Q - int_x^X Phi Phi'^{-1} R Y` (plus side) or
/// `Y = Phi (I - Q) + int_{-X}^x Phi Phi'^{-1} R Y` (minus side).
///
/// `q` is the dichotomy-type projection in both cases.
pub fn solve_jost_volterra(ctx: &JostContext, q: &ComplexMatrix, side: Side) -> Result<JostSolution> {
    let (groups, projection) = tracked_groups(ctx, q, side)?;
    if !ctx.problem.perturbation_vanishes() {
        check_volterra_hypothesis(ctx, &groups, side)?;
        ctx.problem.validate_decay(ctx.x_max())?;
    }
    let out = run_volterra(ctx, &groups, side, &|_, y0| y0.max_abs())?;
    finish(ctx, side, Route::Volterra, None, groups, projection, out.values, out.iterations, out.ratio, 0.0, None)
}

/// Jost solution from the weighted form of the Volterra equation: the
/// unknown is `Z = Y / (e^{kappa x} f(|x|))`, and convergence is measured in
/// the sup norm of `Z`.
pub fn solve_jost_weighted(
    ctx: &JostContext,
    q: &ComplexMatrix,
    f: &dyn Fn(f64) -> f64,
    kappa: f64,
    side: Side,
) -> Result<JostSolution> {
    let (groups, projection) = tracked_groups(ctx, q, side)?;
    let f0 = f(0.0);
    if !(f0 >= 1.0) {
        return Err(Error::HypothesisViolated { condition: format!("weight must satisfy f(0) ≥ 1, got f(0) = {f0}") });
    }
    let n = 400;
    let mut prev = f0;
    for i in 1..=n {
        let s = ctx.x_max() * i as f64 / n as f64;
        let v = f(s);
        if !(v.is_finite() && v >= prev * (1.0 - 1e-12)) {
            return Err(Error::HypothesisViolated { condition: format!("weight f must be nondecreasing, fails near {s}") });
        }
        prev = v;
    }
    if !ctx.problem.perturbation_vanishes() {
        check_weighted_hypothesis(ctx, &groups, side)?;
        ctx.problem.validate_decay(ctx.x_max())?;
    }
    let out = run_volterra(ctx, &groups, side, &|x, _| (kappa * x).exp() * f(x.abs()))?;
    finish(ctx, side, Route::Weighted, None, groups, projection, out.values, out.iterations, out.ratio, 0.0, None)
}

/// Generalized Jost solution for the single projection `Q_j` (1-based) from
/// the mixed Volterra-Fredholm equations. The plus side needs `j <= k0`, the
/// minus side `j > k0`.
pub fn solve_jost_mixed(ctx: &JostContext, j: usize, side: Side) -> Result<JostSolution> {
    let s = &ctx.splitting;
    let k0 = s.k0();
    if j == 0 || j > s.len() {
        return Err(Error::InvalidInput(format!("projection index {j} outside 1..={}", s.len())));
    }
    match side {
        Side::Plus if j > k0 => return Err(Error::InvalidInput(format!("plus-side index {j} must be at most k0 = {k0}"))),
        Side::Minus if j <= k0 => return Err(Error::InvalidInput(format!("minus-side index {j} must exceed k0 = {k0}"))),
        _ => {}
    }
    let vanishes = ctx.problem.perturbation_vanishes();
    if !vanishes {
        check_mixed_hypothesis(ctx)?;
        ctx.problem.validate_decay(ctx.x_max())?;
    }
    let kappa = s.kappa(j);
    let m = s.jordan_degrees()[j - 1] as i32;
    let autonomous = ctx.problem.is_autonomous();
    let mu = match side {
        Side::Plus => s.kappa(j) + ctx.epsilon(j),
        Side::Minus => s.kappa_lower(j) - ctx.epsilon(j),
    };
    let weight = move |x: f64| if autonomous { (kappa * x).exp() * (1.0 + x.abs()).powi(m) } else { (mu * x).exp() };

    // (group, direction, sign): Volterra part toward the far end, Fredholm part toward tau
    let plan: Vec<(usize, Direction, f64)> = (1..=s.len())
        .map(|k| match side {
            Side::Plus if k >= j => (k, Direction::Upward, -1.0),
            Side::Plus => (k, Direction::Downward, 1.0),
            Side::Minus if k <= j => (k, Direction::Downward, 1.0),
            Side::Minus => (k, Direction::Upward, -1.0),
        })
        .collect();
    let has_fredholm = match side {
        Side::Plus => j > 1,
        Side::Minus => j < s.len(),
    };

    let mut tau = ctx.settings.tau;
    let (tables, bound) = loop {
        let (a, b) = half_line(ctx, side, tau);
        let tables = tabulate(ctx, a, b)?;
        if vanishes || !has_fredholm {
            break (tables, None);
        }
        let dirs: Vec<(usize, Direction)> = plan.iter().map(|&(k, d, _)| (k, d)).collect();
        let bound = operator_bound(&tables, &dirs, &weight);
        if bound < 0.9 {
            break (tables, Some(bound));
        }
        let next = if tau == 0.0 { 1.0 } else { 2.0 * tau };
        if next >= ctx.x_max() {
            return Err(Error::ContractionUnachievable { tau, norm: bound });
        }
        tau = next;
    };

    let y0 = initial_values(ctx, &tables, &[j])?;
    let (values, iterations, ratio) = if vanishes {
        (y0, 1, 0.0)
    } else {
        let terms: Vec<Term> = plan.iter().map(|&(k, d, sg)| term(&tables, k, d, sg)).collect();
        let w: Vec<f64> = tables.points.iter().map(|&x| weight(x)).collect();
        let out = picard::solve(&tables.grid, &y0, &terms, &w, ctx.settings.picard_tol, ctx.settings.max_iterations)?;
        (out.values, out.iterations, out.ratio)
    };
    let mut dense = picard::to_dense(&tables.grid, &values)?;
    if tau > 0.0 {
        let start = if side == Side::Plus { tau } else { -tau };
        let y_start = dense.evaluate(start)?;
        let problem = ctx.problem.clone();
        let coeff = move |x: f64| &problem.a(x) + &problem.r(x);
        let mut opts = OdeOptions::new(ctx.settings.ode_tol * 1e-2);
        opts.stops = ctx.problem.breakpoints().to_vec();
        let back = integrate_linear_ode_with(&coeff, start, 0.0, &y_start, &opts)?;
        dense = back.concat(dense)?;
    }
    let projection = s.projection(j).clone();
    finish(ctx, side, Route::Mixed, Some(j), vec![j], projection, dense, iterations, ratio, tau, bound)
}
