use crate::error::{Error, Result};

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Barycentric weights for Lagrange interpolation through `nodes`.
pub fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    (0..nodes.len())
        .map(|j| {
            let prod: f64 = (0..nodes.len()).filter(|&k| k != j).map(|k| nodes[j] - nodes[k]).product();
            1.0 / prod
        })
        .collect()
}

/// Values of the Lagrange basis polynomials through `nodes` at `t`.
pub fn lagrange_basis(nodes: &[f64], bary: &[f64], t: f64) -> Vec<f64> {
    if let Some(hit) = nodes.iter().position(|&x| x == t) {
        let mut out = vec![0.0; nodes.len()];
        out[hit] = 1.0;
        return out;
    }
    let terms: Vec<f64> = nodes.iter().zip(bary).map(|(&x, &w)| w / (t - x)).collect();
    let denom: f64 = terms.iter().sum();
    terms.into_iter().map(|v| v / denom).collect()
}

/// One panel of a composite rule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Panel {
    pub a: f64,
    pub b: f64,
    /// Index of the first node of this panel in the grid node list.
    pub start: usize,
}

impl Panel {
    pub fn width(&self) -> f64 {
        self.b - self.a
    }
}

/// Composite Gauss-Legendre grid with per-panel partial-integration weights.
#[derive(Clone, Debug)]
pub struct QuadratureGrid {
    a: f64,
    b: f64,
    ppp: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    panels: Vec<Panel>,
    ref_nodes: Vec<f64>,
    ref_bary: Vec<f64>,
    // partial_lower[i][j] = int_{-1}^{t_i} l_j, partial_upper[i][j] = int_{t_i}^{1} l_j
    partial_lower: Vec<Vec<f64>>,
    partial_upper: Vec<Vec<f64>>,
}

/// Uniform composite Gauss-Legendre grid on `[a, b]`.
pub fn quadrature_grid(a: f64, b: f64, panels: usize, points_per_panel: usize) -> Result<QuadratureGrid> {
    if !(a < b) || panels == 0 {
        return Err(Error::InvalidInput(format!("bad grid request [{a}, {b}] with {panels} panels")));
    }
    let edges: Vec<f64> = (0..=panels).map(|k| if k == panels { b } else { a + (b - a) * k as f64 / panels as f64 }).collect();
    QuadratureGrid::from_edges(&edges, points_per_panel)
}

impl QuadratureGrid {
    /// Grid whose panel edges include every breakpoint strictly inside
    /// `(a, b)`; panels are no wider than `max_width`.
    pub fn with_breakpoints(a: f64, b: f64, breakpoints: &[f64], max_width: f64, points_per_panel: usize) -> Result<Self> {
        if !(a < b) || !(max_width > 0.0) {
            return Err(Error::InvalidInput(format!("bad grid request [{a}, {b}], width {max_width}")));
        }
        let mut cuts: Vec<f64> = breakpoints.iter().copied().filter(|&x| x > a && x < b).collect();
        cuts.push(a);
        cuts.push(b);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * (1.0 + y.abs()));
        let mut edges = vec![a];
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let count = ((hi - lo) / max_width).ceil().max(1.0) as usize;
            for k in 1..=count {
                edges.push(if k == count { hi } else { lo + (hi - lo) * k as f64 / count as f64 });
            }
        }
        Self::from_edges(&edges, points_per_panel)
    }

    pub fn from_edges(edges: &[f64], points_per_panel: usize) -> Result<Self> {
        if !(1..=32).contains(&points_per_panel) {
            return Err(Error::InvalidInput(format!("points per panel {points_per_panel} outside 1..=32")));
        }
        if edges.len() < 2 || edges.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidInput("panel edges must be strictly increasing".into()));
        }
        let (ref_nodes, ref_weights) = gauss_legendre(points_per_panel);
        let ref_bary = barycentric_weights(&ref_nodes);
        let (sub_nodes, sub_weights) = gauss_legendre(points_per_panel.max(1));
        let partial = |lo: f64, hi: f64| -> Vec<f64> {
            let mut acc = vec![0.0; points_per_panel];
            let half = 0.5 * (hi - lo);
            for (&s, &w) in sub_nodes.iter().zip(&sub_weights) {
                let t = lo + half * (s + 1.0);
                for (j, l) in lagrange_basis(&ref_nodes, &ref_bary, t).into_iter().enumerate() {
                    acc[j] += half * w * l;
                }
            }
            acc
        };
        let partial_lower: Vec<Vec<f64>> = ref_nodes.iter().map(|&t| partial(-1.0, t)).collect();
        let partial_upper: Vec<Vec<f64>> = ref_nodes.iter().map(|&t| partial(t, 1.0)).collect();

        let mut nodes = Vec::with_capacity((edges.len() - 1) * points_per_panel);
        let mut weights = Vec::with_capacity(nodes.capacity());
        let mut panels = Vec::with_capacity(edges.len() - 1);
        for w in edges.windows(2) {
            let (pa, pb) = (w[0], w[1]);
            let half = 0.5 * (pb - pa);
            let mid = 0.5 * (pa + pb);
            panels.push(Panel { a: pa, b: pb, start: nodes.len() });
            for (&t, &wt) in ref_nodes.iter().zip(&ref_weights) {
                nodes.push(mid + half * t);
                weights.push(half * wt);
            }
        }
        Ok(Self {
            a: edges[0],
            b: *edges.last().unwrap(),
            ppp: points_per_panel,
            nodes,
            weights,
            panels,
            ref_nodes,
            ref_bary,
            partial_lower,
            partial_upper,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn panels(&self) -> &[Panel] {
        &self.panels
    }

    pub fn points_per_panel(&self) -> usize {
        self.ppp
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Panel edges, ascending, including both endpoints.
    pub fn edges(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self.panels.iter().map(|p| p.a).collect();
        e.push(self.b);
        e
    }

    /// Reference nodes on `[-1, 1]` and their barycentric weights.
    pub fn reference_rule(&self) -> (&[f64], &[f64]) {
        (&self.ref_nodes, &self.ref_bary)
    }

    /// Weights `w_j` with `int_{panel.a}^{x_i} f = sum_j w_j f(x_j)` for the
    /// `i`-th node of a panel, exact for polynomials of degree `ppp - 1`.
    pub fn lower_partial_weights(&self, panel: usize, i: usize) -> impl Iterator<Item = f64> + '_ {
        let half = 0.5 * self.panels[panel].width();
        self.partial_lower[i].iter().map(move |&w| w * half)
    }

    /// Weights for `int_{x_i}^{panel.b}`, counterpart of
    /// [`lower_partial_weights`](Self::lower_partial_weights).
    pub fn upper_partial_weights(&self, panel: usize, i: usize) -> impl Iterator<Item = f64> + '_ {
        let half = 0.5 * self.panels[panel].width();
        self.partial_upper[i].iter().map(move |&w| w * half)
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    pub fn integrate_values(&self, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.nodes.len());
        values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }

    /// Index of the panel containing `x` (left-closed; the last panel is
    /// closed on both ends).
    pub fn panel_of(&self, x: f64) -> Option<usize> {
        if x < self.a || x > self.b {
            return None;
        }
        let idx = self.panels.partition_point(|p| p.b <= x);
        Some(idx.min(self.panels.len() - 1))
    }
}
