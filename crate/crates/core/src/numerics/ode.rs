use super::matrix::{ComplexMatrix, C64};
use super::quadrature::barycentric_weights;
use crate::error::{Error, Result};

/// Piecewise polynomial interpolant of a matrix-valued function.
#[derive(Clone, Debug)]
pub struct DenseSolution {
    pieces: Vec<Piece>,
    rows: usize,
    cols: usize,
}

#[derive(Clone, Debug)]
struct Piece {
    nodes: Vec<f64>,
    bary: Vec<f64>,
    values: Vec<ComplexMatrix>,
}

impl Piece {
    fn new(nodes: Vec<f64>, values: Vec<ComplexMatrix>) -> Self {
        let bary = barycentric_weights(&nodes);
        Self { nodes, bary, values }
    }

    fn a(&self) -> f64 {
        self.nodes[0]
    }

    fn b(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    fn eval(&self, x: f64) -> ComplexMatrix {
        if let Some(i) = self.nodes.iter().position(|&t| t == x) {
            return self.values[i].clone();
        }
        let terms: Vec<f64> = self.nodes.iter().zip(&self.bary).map(|(&t, &w)| w / (x - t)).collect();
        let denom: f64 = terms.iter().sum();
        let mut out = ComplexMatrix::zeros(self.values[0].rows(), self.values[0].cols());
        for (v, &c) in self.values.iter().zip(&terms) {
            out.add_scaled(C64::new(c / denom, 0.0), v);
        }
        out
    }

    fn derivative_piece(&self) -> Piece {
        let n = self.nodes.len();
        let mut dvals = Vec::with_capacity(n);
        for i in 0..n {
            let mut acc = ComplexMatrix::zeros(self.values[0].rows(), self.values[0].cols());
            let mut diag = 0.0;
            for j in 0..n {
                if j == i {
                    continue;
                }
                let dij = (self.bary[j] / self.bary[i]) / (self.nodes[i] - self.nodes[j]);
                diag -= dij;
                acc.add_scaled(C64::new(dij, 0.0), &self.values[j]);
            }
            acc.add_scaled(C64::new(diag, 0.0), &self.values[i]);
            dvals.push(acc);
        }
        Piece { nodes: self.nodes.clone(), bary: self.bary.clone(), values: dvals }
    }
}

impl DenseSolution {
    /// Builds an interpolant from pieces given as (ascending nodes, values).
    /// Consecutive pieces must share their boundary abscissa.
    pub fn from_pieces(pieces: Vec<(Vec<f64>, Vec<ComplexMatrix>)>) -> Result<Self> {
        let first = pieces.first().ok_or_else(|| Error::InvalidInput("dense solution needs at least one piece".into()))?;
        let (rows, cols) = first.1.first().map(|m| m.shape()).unwrap_or((0, 0));
        let mut out = Vec::with_capacity(pieces.len());
        for (nodes, values) in pieces {
            if nodes.is_empty() || nodes.len() != values.len() || nodes.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::InvalidInput("malformed dense-solution piece".into()));
            }
            if values.iter().any(|v| v.shape() != (rows, cols)) {
                return Err(Error::InvalidInput("dense-solution values have inconsistent shapes".into()));
            }
            out.push(Piece::new(nodes, values));
        }
        for w in out.windows(2) {
            let gap = (w[1].a() - w[0].b()).abs();
            if gap > 1e-12 * (1.0 + w[0].b().abs()) {
                return Err(Error::InvalidInput("dense-solution pieces are not contiguous".into()));
            }
        }
        Ok(Self { pieces: out, rows, cols })
    }

    /// Joins two solutions whose domains touch.
    pub fn concat(mut self, other: DenseSolution) -> Result<Self> {
        let (mut lo, hi) = if self.a() <= other.a() { (self, other) } else { (other, self.take()) };
        if (hi.a() - lo.b()).abs() > 1e-12 * (1.0 + lo.b().abs()) || lo.shape() != hi.shape() {
            return Err(Error::InvalidInput("cannot join dense solutions with disjoint domains".into()));
        }
        lo.pieces.extend(hi.pieces);
        Ok(lo)
    }

    fn take(&mut self) -> Self {
        Self { pieces: std::mem::take(&mut self.pieces), rows: self.rows, cols: self.cols }
    }

    pub fn a(&self) -> f64 {
        self.pieces[0].a()
    }

    pub fn b(&self) -> f64 {
        self.pieces.last().unwrap().b()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Interpolation degree of the widest piece.
    pub fn order(&self) -> usize {
        self.pieces.iter().map(|p| p.nodes.len() - 1).max().unwrap_or(0)
    }

    /// Piece boundaries, ascending.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.pieces.iter().map(Piece::a).collect();
        v.push(self.b());
        v
    }

    /// Every interpolation node with its stored value, ascending. Shared
    /// piece boundaries appear once.
    pub fn samples(&self) -> Vec<(f64, &ComplexMatrix)> {
        let mut out: Vec<(f64, &ComplexMatrix)> = Vec::new();
        for p in &self.pieces {
            for (&x, v) in p.nodes.iter().zip(&p.values) {
                if out.last().is_some_and(|&(last, _)| last >= x) {
                    continue;
                }
                out.push((x, v));
            }
        }
        out
    }

    fn locate(&self, x: f64) -> Result<&Piece> {
        let (a, b) = (self.a(), self.b());
        let slack = 1e-12 * (1.0 + a.abs().max(b.abs()));
        if !(x >= a - slack && x <= b + slack) {
            return Err(Error::OutOfInterval { x, a, b });
        }
        let idx = self.pieces.partition_point(|p| p.b() < x);
        Ok(&self.pieces[idx.min(self.pieces.len() - 1)])
    }

    pub fn evaluate(&self, x: f64) -> Result<ComplexMatrix> {
        Ok(self.locate(x)?.eval(x))
    }

    /// Derivative of the interpolant.
    pub fn derivative(&self, x: f64) -> Result<ComplexMatrix> {
        Ok(self.locate(x)?.derivative_piece().eval(x))
    }
}

/// Options for [`integrate_linear_ode_with`].
#[derive(Clone, Debug)]
pub struct OdeOptions {
    pub tol: f64,
    /// Abscissae the stepper must land on exactly, e.g. coefficient jumps.
    pub stops: Vec<f64>,
    pub max_steps: usize,
}

impl OdeOptions {
    pub fn new(tol: f64) -> Self {
        Self { tol, stops: Vec::new(), max_steps: 2_000_000 }
    }
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self::new(1e-10)
    }
}

/// Solves `Y' = coeff(x) Y`, `Y(x0) = y0` from `x0` to `x1` (either direction).
pub fn integrate_linear_ode(
    coeff: &dyn Fn(f64) -> ComplexMatrix,
    x0: f64,
    x1: f64,
    y0: &ComplexMatrix,
    tol: f64,
) -> Result<DenseSolution> {
    integrate_linear_ode_with(coeff, x0, x1, y0, &OdeOptions::new(tol))
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// Adaptive Dormand-Prince 5(4) integration with dense output.
pub fn integrate_linear_ode_with(
    coeff: &dyn Fn(f64) -> ComplexMatrix,
    x0: f64,
    x1: f64,
    y0: &ComplexMatrix,
    opts: &OdeOptions,
) -> Result<DenseSolution> {
    if !(opts.tol > 0.0) || !x0.is_finite() || !x1.is_finite() || !y0.is_finite() {
        return Err(Error::InvalidInput("integrate_linear_ode needs finite endpoints and tol > 0".into()));
    }
    if x0 == x1 {
        return DenseSolution::from_pieces(vec![(vec![x0], vec![y0.clone()])]);
    }
    let dir = if x1 > x0 { 1.0 } else { -1.0 };
    let mut stops: Vec<f64> = opts.stops.iter().copied().filter(|&s| (s - x0) * dir > 0.0 && (x1 - s) * dir > 0.0).collect();
    stops.sort_by(|p, q| (p * dir).total_cmp(&(q * dir)));
    stops.push(x1);
    let mut next_stop = 0;

    let rhs = |x: f64, y: &ComplexMatrix| coeff(x).matmul(y);
    let mut x = x0;
    let mut y = y0.clone();
    let mut f = rhs(x, &y);
    let span = (x1 - x0).abs();
    let mut h = initial_step(&f, &y, opts.tol, span);
    let mut pieces: Vec<(Vec<f64>, Vec<ComplexMatrix>)> = Vec::new();
    let mut steps = 0usize;

    while (x1 - x) * dir > 0.0 {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::StepBudget { x, max_steps: opts.max_steps });
        }
        let target = stops[next_stop];
        let mut land = false;
        if h * 1.01 >= (target - x).abs() {
            h = (target - x).abs();
            land = true;
        }
        if !land && h < 1e-12 * x.abs().max(1.0) {
            return Err(Error::StepUnderflow { x });
        }
        let hs = h * dir;
        let mut k: Vec<ComplexMatrix> = Vec::with_capacity(7);
        k.push(f.clone());
        let mut y_new = y.clone();
        for s in 1..7 {
            let mut ys = y.clone();
            for (j, kj) in k.iter().enumerate() {
                let a = A[s][j];
                if a != 0.0 {
                    ys.add_scaled(C64::new(hs * a, 0.0), kj);
                }
            }
            // stops may carry coefficient jumps, so the step sees the one-sided limit
            let xs = if C[s] == 1.0 && land { target - dir * 4.0 * f64::EPSILON * target.abs().max(1.0) } else { x + C[s] * hs };
            k.push(rhs(xs, &ys));
            if s == 6 {
                y_new = ys;
            }
        }
        let f_new = k[6].clone();

        let mut err = ComplexMatrix::zeros(y.rows(), y.cols());
        for (kj, &e) in k.iter().zip(E.iter()) {
            if e != 0.0 {
                err.add_scaled(C64::new(hs * e, 0.0), kj);
            }
        }
        let mut enorm: f64 = 0.0;
        for ((ev, yv), ynv) in err.as_slice().iter().zip(y.as_slice()).zip(y_new.as_slice()) {
            let scale = opts.tol * (1.0 + yv.norm().max(ynv.norm()));
            enorm = enorm.max(ev.norm() / scale);
        }
        enorm /= h;
        if !enorm.is_finite() || !y_new.is_finite() {
            h *= 0.2;
            continue;
        }
        if enorm <= 1.0 {
            let x_new = if land { target } else { x + hs };
            pieces.push(dense_piece(x, x_new, hs, &y, &y_new, &k));
            x = x_new;
            y = y_new;
            f = if land { rhs(x, &y) } else { f_new };
            if land {
                next_stop += 1;
            }
            let fac = if enorm == 0.0 { 5.0 } else { (0.9 * enorm.powf(-0.25)).clamp(0.2, 5.0) };
            h *= fac;
        } else {
            h *= (0.9 * enorm.powf(-0.25)).clamp(0.2, 0.9);
        }
    }
    if dir < 0.0 {
        pieces.reverse();
    }
    DenseSolution::from_pieces(pieces)
}

fn initial_step(f: &ComplexMatrix, y: &ComplexMatrix, tol: f64, span: f64) -> f64 {
    let fy = f.max_abs() / (1.0 + y.max_abs());
    let h = if fy > 0.0 { 0.1 * tol.powf(0.2) / fy } else { span };
    h.min(span).max(1e-6 * span)
}

fn dense_piece(
    x: f64,
    x_new: f64,
    hs: f64,
    y: &ComplexMatrix,
    y_new: &ComplexMatrix,
    k: &[ComplexMatrix],
) -> (Vec<f64>, Vec<ComplexMatrix>) {
    let ydiff = y_new - y;
    let bspl = &k[0].scale_real(hs) - &ydiff;
    let r4 = &(&ydiff - &k[6].scale_real(hs)) - &bspl;
    let mut r5 = ComplexMatrix::zeros(y.rows(), y.cols());
    for (kj, &d) in k.iter().zip(D.iter()) {
        if d != 0.0 {
            r5.add_scaled(C64::new(hs * d, 0.0), kj);
        }
    }
    let at = |theta: f64| {
        let t1 = 1.0 - theta;
        let mut inner = r4.clone();
        inner.add_scaled(C64::new(t1, 0.0), &r5);
        let mut m = bspl.clone();
        m.add_scaled(C64::new(theta, 0.0), &inner);
        let mut m2 = ydiff.clone();
        m2.add_scaled(C64::new(t1, 0.0), &m);
        let mut out = y.clone();
        out.add_scaled(C64::new(theta, 0.0), &m2);
        out
    };
    let thetas = [0.0, 0.25, 0.5, 0.75, 1.0];
    let mut pts: Vec<(f64, ComplexMatrix)> = thetas
        .iter()
        .map(|&t| {
            let xt = if t == 1.0 {
                x_new
            } else if t == 0.0 {
                x
            } else {
                x + t * hs
            };
            let v = if t == 0.0 {
                y.clone()
            } else if t == 1.0 {
                y_new.clone()
            } else {
                at(t)
            };
            (xt, v)
        })
        .collect();
    if hs < 0.0 {
        pts.reverse();
    }
    pts.into_iter().unzip()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::expm::matrix_exp;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_coefficient_is_constant() {
        let y0 = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let zero = ComplexMatrix::zeros(2, 2);
        let sol = integrate_linear_ode(&|_| zero.clone(), -1.0, 2.0, &y0, 1e-10).unwrap();
        for &x in &[-1.0, 0.0, 0.3, 2.0] {
            assert!(sol.evaluate(x).unwrap().approx_eq(&y0, 1e-14, 0.0));
        }
    }

    #[test]
    fn constant_coefficient_matches_exponential() {
        let a = ComplexMatrix::from_rows(&[
            vec![C64::new(-1.0, 0.5), C64::new(2.0, 0.0)],
            vec![C64::new(0.3, -0.2), C64::new(0.4, 0.0)],
        ]);
        let tol = 1e-10;
        let sol = integrate_linear_ode(&|_| a.clone(), 0.0, 3.0, &ComplexMatrix::identity(2), tol).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let x: f64 = rng.gen_range(0.0..3.0);
            let exact = matrix_exp(&a, x).unwrap();
            let got = sol.evaluate(x).unwrap();
            let rel = (&got - &exact).max_abs() / exact.max_abs();
            assert!(rel < 10.0 * tol * 10.0, "x = {x}, rel = {rel}");
        }
    }

    #[test]
    fn backward_integration() {
        let a = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[4.0, 0.0]]);
        let sol = integrate_linear_ode(&|_| a.clone(), 0.0, -2.0, &ComplexMatrix::identity(2), 1e-10).unwrap();
        assert_eq!(sol.a(), -2.0);
        assert_eq!(sol.b(), 0.0);
        let exact = matrix_exp(&a, -1.3).unwrap();
        assert!((&sol.evaluate(-1.3).unwrap() - &exact).max_abs() < 1e-8 * exact.max_abs());
    }

    #[test]
    fn scalar_linear_coefficient() {
        let tol = 1e-10;
        let x0 = -0.5;
        let sol =
            integrate_linear_ode(&|x| ComplexMatrix::from_real_rows(&[&[x]]), x0, 2.5, &ComplexMatrix::identity(1), tol).unwrap();
        for i in 0..=30 {
            let x = x0 + 3.0 * i as f64 / 30.0;
            let exact = ((x * x - x0 * x0) / 2.0).exp();
            let got = sol.evaluate(x).unwrap()[(0, 0)];
            assert!((got.re - exact).abs() < 10.0 * tol * exact.max(1.0), "x = {x}");
        }
    }

    #[test]
    fn breakpoints_agree_and_derivative_matches() {
        let a = ComplexMatrix::from_real_rows(&[&[-0.5, 1.0], &[0.0, 0.2]]);
        let sol = integrate_linear_ode(&|_| a.clone(), 0.0, 4.0, &ComplexMatrix::identity(2), 1e-10).unwrap();
        assert!(sol.order() == 4);
        for x in sol.breakpoints() {
            let v = sol.evaluate(x).unwrap();
            let d = sol.derivative(x).unwrap();
            assert!((&d - &a.matmul(&v)).max_abs() < 1e-6, "x = {x}");
        }
        assert!(matches!(sol.evaluate(4.5), Err(Error::OutOfInterval { .. })));
    }

    #[test]
    fn stops_are_hit_exactly() {
        let mut opts = OdeOptions::new(1e-9);
        opts.stops = vec![1.0, 2.5];
        let sol = integrate_linear_ode_with(
            &|x| ComplexMatrix::from_real_rows(&[&[if x < 1.0 { -1.0 } else { 0.5 }]]),
            0.0,
            3.0,
            &ComplexMatrix::identity(1),
            &opts,
        )
        .unwrap();
        let bp = sol.breakpoints();
        assert!(bp.contains(&1.0) && bp.contains(&2.5));
        let exact = (-1.0f64).exp() * (0.5f64 * 2.0).exp();
        assert!((sol.evaluate(3.0).unwrap()[(0, 0)].re - exact).abs() < 1e-8);
    }
}
