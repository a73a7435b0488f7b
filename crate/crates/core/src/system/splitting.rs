use crate::error::{Error, Result};
use crate::numerics::{eigenvalues, matrix_sign, projection_rank, ComplexMatrix, C64};

/// Default tolerance for grouping eigenvalues by real part.
pub const DEFAULT_GROUPING_TOL: f64 = 1e-8;

/// A family of disjoint projections `Q_1..Q_d'` summing to the identity,
/// ordered by their exponent segments.
///
/// Indices `j` in the public API are 1-based, `1..=len()`.
#[derive(Clone, Debug)]
pub struct SpectralSplitting {
    projections: Vec<ComplexMatrix>,
    segments: Vec<(f64, f64)>,
    jordan_degrees: Vec<usize>,
    ranks: Vec<usize>,
    k0: usize,
}

impl SpectralSplitting {
    /// Assembles a splitting from its parts, checking the projection algebra,
    /// the segment ordering and the existence of a dichotomy index.
    ///
    /// `segments[j]` is `(lower, upper)` for the `j`-th projection.
    pub fn from_parts(projections: Vec<ComplexMatrix>, segments: Vec<(f64, f64)>, jordan_degrees: Vec<usize>) -> Result<Self> {
        let n = projections.len();
        if n == 0 || segments.len() != n || jordan_degrees.len() != n {
            return Err(Error::InvalidInput("splitting needs matching, non-empty projection and segment lists".into()));
        }
        let d = projections[0].rows();
        if projections.iter().any(|q| q.shape() != (d, d) || !q.is_finite()) {
            return Err(Error::InvalidInput("projections must be finite square matrices of one size".into()));
        }
        let tol = |m: &ComplexMatrix| 1e-9 * (1.0 + m.max_abs());
        let mut sum = ComplexMatrix::zeros(d, d);
        for (i, q) in projections.iter().enumerate() {
            let q2 = q.matmul(q);
            if (&q2 - q).max_abs() > tol(q) * (1.0 + q.max_abs()) {
                return Err(Error::InvalidInput(format!("Q_{} is not idempotent", i + 1)));
            }
            for (k, p) in projections.iter().enumerate() {
                if k != i && q.matmul(p).max_abs() > tol(q) * (1.0 + p.max_abs()) {
                    return Err(Error::InvalidInput(format!("Q_{} Q_{} is not zero", i + 1, k + 1)));
                }
            }
            sum = &sum + q;
        }
        if (&sum - &ComplexMatrix::identity(d)).max_abs() > 1e-9 {
            return Err(Error::InvalidInput("projections do not sum to the identity".into()));
        }
        for (i, &(lo, hi)) in segments.iter().enumerate() {
            if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidInput(format!("segment {} is not an interval", i + 1)));
            }
            if lo <= 0.0 && 0.0 <= hi {
                return Err(Error::NoDichotomy { eigenvalue: format!("segment [{lo}, {hi}] contains 0"), tol: 0.0 });
            }
        }
        if segments.windows(2).any(|w| !(w[0].1 < w[1].0)) {
            return Err(Error::InvalidInput("exponent segments must be disjoint and ascending".into()));
        }
        let ranks: Vec<usize> = projections.iter().map(projection_rank).collect();
        if ranks.iter().sum::<usize>() != d || ranks.contains(&0) {
            return Err(Error::InvalidInput(format!("projection ranks {ranks:?} do not partition dimension {d}")));
        }
        let k0 = segments.iter().filter(|s| s.1 < 0.0).count();
        Ok(Self { projections, segments, jordan_degrees, ranks, k0 })
    }

    pub fn dimension(&self) -> usize {
        self.projections[0].rows()
    }

    /// Number of projections `d'`.
    pub fn len(&self) -> usize {
        self.projections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projections.is_empty()
    }

    pub fn projections(&self) -> &[ComplexMatrix] {
        &self.projections
    }

    /// `Q_j`, 1-based.
    pub fn projection(&self, j: usize) -> &ComplexMatrix {
        &self.projections[j - 1]
    }

    /// `(lower, upper)` exponents of every projection.
    pub fn segments(&self) -> &[(f64, f64)] {
        &self.segments
    }

    /// Upper exponent `kappa_j`, 1-based.
    pub fn kappa(&self, j: usize) -> f64 {
        self.segments[j - 1].1
    }

    /// Lower exponent `kappa'_j`, 1-based.
    pub fn kappa_lower(&self, j: usize) -> f64 {
        self.segments[j - 1].0
    }

    pub fn jordan_degrees(&self) -> &[usize] {
        &self.jordan_degrees
    }

    /// Largest Jordan degree `m`.
    pub fn max_jordan_degree(&self) -> usize {
        self.jordan_degrees.iter().copied().max().unwrap_or(0)
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    /// Dichotomy index: the number of projections with negative exponents.
    pub fn k0(&self) -> usize {
        self.k0
    }

    /// Smallest distance between consecutive segments, or the distance of
    /// the only segment to zero when there is one projection.
    pub fn minimal_gap(&self) -> f64 {
        let mut gap = f64::INFINITY;
        for w in self.segments.windows(2) {
            gap = gap.min(w[1].0 - w[0].1);
        }
        for &(lo, hi) in &self.segments {
            gap = gap.min(if hi < 0.0 { -hi } else { lo });
        }
        gap
    }

    /// Sum of `Q_j` over the 1-based indices in `range`.
    pub fn sum(&self, range: impl IntoIterator<Item = usize>) -> ComplexMatrix {
        let d = self.dimension();
        range.into_iter().fold(ComplexMatrix::zeros(d, d), |acc, j| &acc + self.projection(j))
    }

    /// Writes `q` as a sum of splitting projections and returns the 1-based
    /// indices used.
    pub fn decompose(&self, q: &ComplexMatrix) -> Result<Vec<usize>> {
        let mut used = Vec::new();
        for j in 1..=self.len() {
            let qj = self.projection(j);
            let prod = q.matmul(qj);
            let scale = 1e-8 * (1.0 + q.max_abs()) * (1.0 + qj.max_abs());
            if (&prod - qj).max_abs() <= scale {
                used.push(j);
            } else if prod.max_abs() > scale {
                return Err(Error::InvalidInput(format!("projection is not a sum of splitting projections (mixes Q_{j})")));
            }
        }
        let rebuilt = self.sum(used.iter().copied());
        if (&rebuilt - q).max_abs() > 1e-8 * (1.0 + q.max_abs()) {
            return Err(Error::InvalidInput("projection is not a sum of splitting projections".into()));
        }
        Ok(used)
    }

    /// `(lower, upper)` exponents of `sum_{j in indices} Q_j`.
    pub fn exponents_of(&self, indices: &[usize]) -> (f64, f64) {
        let lo = indices.iter().map(|&j| self.kappa_lower(j)).fold(f64::INFINITY, f64::min);
        let hi = indices.iter().map(|&j| self.kappa(j)).fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }
}

/// Splits the spectrum of `A` by real part into Riesz projections.
pub fn spectral_splitting(a: &ComplexMatrix, grouping_tol: f64) -> Result<SpectralSplitting> {
    if !(grouping_tol > 0.0) || !a.is_square() || a.rows() == 0 || !a.is_finite() {
        return Err(Error::InvalidInput("spectral_splitting needs a finite square matrix and grouping_tol > 0".into()));
    }
    let d = a.rows();
    let mut eig = eigenvalues(a)?;
    if let Some(z) = eig.iter().find(|z| z.re.abs() < grouping_tol) {
        return Err(Error::NoDichotomy { eigenvalue: format!("{z}"), tol: grouping_tol });
    }
    // clusters from a defective eigenvalue spread by about eps^(1/m)
    let norm = a.max_abs() * d as f64;
    let eff_tol = grouping_tol.max(1e-5 * (1.0 + norm));
    eig.sort_by(|p, q| p.re.total_cmp(&q.re));
    let mut groups: Vec<Vec<C64>> = vec![vec![eig[0]]];
    for &z in &eig[1..] {
        let last = *groups.last().unwrap().last().unwrap();
        if z.re - last.re <= eff_tol {
            groups.last_mut().unwrap().push(z);
        } else {
            groups.push(vec![z]);
        }
    }
    if groups.iter().any(|g| g.iter().any(|z| z.re < 0.0) && g.iter().any(|z| z.re > 0.0)) {
        return Err(Error::NoDichotomy { eigenvalue: "group straddling the imaginary axis".into(), tol: eff_tol });
    }

    let id = ComplexMatrix::identity(d);
    // P_c projects onto the spectral subspace with Re < c
    let below = |c: f64| -> Result<ComplexMatrix> {
        let shifted = a - &id.scale_real(c);
        let s = matrix_sign(&shifted)?;
        Ok((&id - &s).scale_real(0.5))
    };
    let mut cuts = Vec::with_capacity(groups.len() - 1);
    for w in groups.windows(2) {
        let hi = w[0].iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        let lo = w[1].iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        cuts.push(below(0.5 * (hi + lo))?);
    }
    let mut projections = Vec::with_capacity(groups.len());
    let mut prev = ComplexMatrix::zeros(d, d);
    for cut in cuts.iter().chain(std::iter::once(&id)) {
        projections.push(cut - &prev);
        prev = cut.clone();
    }

    let mut segments = Vec::with_capacity(groups.len());
    let mut degrees = Vec::with_capacity(groups.len());
    for (q, g) in projections.iter().zip(&groups) {
        let kappa = (a.matmul(q).trace() / q.trace()).re;
        segments.push((kappa, kappa));
        degrees.push(jordan_degree(a, q, g, eff_tol)?);
    }
    SpectralSplitting::from_parts(projections, segments, degrees)
}

/// Largest nilpotency index minus one over the eigenvalue clusters inside a
/// real-part group.
fn jordan_degree(a: &ComplexMatrix, q: &ComplexMatrix, group: &[C64], eff_tol: f64) -> Result<usize> {
    let d = a.rows();
    let id = ComplexMatrix::identity(d);
    let mut ims: Vec<f64> = group.iter().map(|z| z.im).collect();
    ims.sort_by(f64::total_cmp);
    let mut clusters: Vec<(f64, f64)> = vec![(ims[0], ims[0])];
    for &v in &ims[1..] {
        let last = clusters.last_mut().unwrap();
        if v - last.1 <= eff_tol {
            last.1 = v;
        } else {
            clusters.push((v, v));
        }
    }
    // P^im_c projects onto Im < c
    let below_im = |c: f64| -> Result<ComplexMatrix> {
        let shifted = (a - &id.scale(C64::new(0.0, c))).scale(C64::new(0.0, -1.0));
        let s = matrix_sign(&shifted)?;
        Ok((&id - &s).scale_real(0.5))
    };
    let mut cluster_projections = Vec::with_capacity(clusters.len());
    let mut prev = ComplexMatrix::zeros(d, d);
    for i in 0..clusters.len() {
        let cut = if i + 1 < clusters.len() { below_im(0.5 * (clusters[i].1 + clusters[i + 1].0))? } else { id.clone() };
        cluster_projections.push(q.matmul(&(&cut - &prev)));
        prev = cut;
    }
    let scale = a.max_abs().max(1.0);
    let mut degree = 0;
    for p in &cluster_projections {
        let rank = projection_rank(p);
        if rank == 0 {
            continue;
        }
        let nu = a.matmul(p).trace() / p.trace();
        let n = (a - &id.scale(nu)).matmul(p);
        let mut power = n.clone();
        let mut k = 1;
        while k <= rank && power.max_abs() > 1e-7 * scale.powi(k as i32) * p.max_abs().max(1.0) {
            power = power.matmul(&n);
            k += 1;
        }
        degree = degree.max(k - 1);
    }
    Ok(degree)
}

/// The dichotomy projection `Q = sum_{j <= k0} Q_j`.
#[derive(Clone, Debug)]
pub struct DichotomyProjection {
    pub q: ComplexMatrix,
    /// Set when the stable or the unstable part is empty.
    pub degenerate: bool,
}

pub fn dichotomy_projection(splitting: &SpectralSplitting) -> DichotomyProjection {
    let k0 = splitting.k0();
    DichotomyProjection { q: splitting.sum(1..=k0), degenerate: k0 == 0 || k0 == splitting.len() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_example() {
        let s = spectral_splitting(&ComplexMatrix::diag_real(&[-2.0, -1.0, 1.0]), DEFAULT_GROUPING_TOL).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.k0(), 2);
        for (j, expect) in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]].iter().enumerate() {
            assert!(s.projection(j + 1).approx_eq(&ComplexMatrix::diag_real(expect), 1e-12, 0.0));
        }
        assert_eq!(s.segments().iter().map(|s| s.1).collect::<Vec<_>>(), vec![-2.0, -1.0, 1.0]);
        assert_eq!(s.jordan_degrees(), &[0, 0, 0]);
        let dq = dichotomy_projection(&s);
        assert!(dq.q.approx_eq(&ComplexMatrix::diag_real(&[1.0, 1.0, 0.0]), 1e-12, 0.0));
        assert!(!dq.degenerate);
    }

    #[test]
    fn schrodinger_generator() {
        let k = C64::new(0.0, 2.0);
        let a = ComplexMatrix::from_rows(&[vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)], vec![-k * k, C64::new(0.0, 0.0)]]);
        let s = spectral_splitting(&a, DEFAULT_GROUPING_TOL).unwrap();
        assert_eq!(s.k0(), 1);
        assert!((s.kappa(1) + 2.0).abs() < 1e-12 && (s.kappa(2) - 2.0).abs() < 1e-12);
        let expect = ComplexMatrix::from_real_rows(&[&[0.5, -0.25], &[-1.0, 0.5]]);
        assert!(s.projection(1).approx_eq(&expect, 1e-12, 0.0));
    }

    #[test]
    fn jordan_block() {
        let a = ComplexMatrix::from_real_rows(&[&[-1.0, 1.0], &[0.0, -1.0]]);
        let s = spectral_splitting(&a, DEFAULT_GROUPING_TOL).unwrap();
        assert_eq!(s.len(), 1);
        assert!(s.projection(1).approx_eq(&ComplexMatrix::identity(2), 1e-12, 0.0));
        assert!((s.kappa(1) + 1.0).abs() < 1e-12);
        assert_eq!(s.jordan_degrees(), &[1]);
        assert!(dichotomy_projection(&s).degenerate);
    }

    #[test]
    fn jordan_block_next_to_simple_eigenvalue() {
        let a = ComplexMatrix::from_real_rows(&[
            &[-1.0, 1.0, 0.0, 0.0],
            &[0.0, -1.0, 1.0, 0.0],
            &[0.0, 0.0, -1.0, 0.0],
            &[0.0, 0.0, 0.0, 2.0],
        ]);
        let s = spectral_splitting(&a, DEFAULT_GROUPING_TOL).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.jordan_degrees(), &[2, 0]);
        assert_eq!(s.ranks(), &[3, 1]);
    }

    #[test]
    fn complex_pair_in_one_group() {
        let a = ComplexMatrix::from_real_rows(&[&[-1.0, 2.0], &[-2.0, -1.0]]);
        let s = spectral_splitting(&a, DEFAULT_GROUPING_TOL).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.jordan_degrees(), &[0]);
    }

    #[test]
    fn no_dichotomy() {
        let a = ComplexMatrix::diag_real(&[-1.0, 0.0]);
        assert!(matches!(spectral_splitting(&a, 1e-8), Err(Error::NoDichotomy { .. })));
    }

    #[test]
    fn decompose_sums() {
        let s = spectral_splitting(&ComplexMatrix::diag_real(&[-2.0, -1.0, 1.0]), DEFAULT_GROUPING_TOL).unwrap();
        assert_eq!(s.decompose(&ComplexMatrix::diag_real(&[1.0, 1.0, 0.0])).unwrap(), vec![1, 2]);
        assert!(s.decompose(&ComplexMatrix::from_real_rows(&[&[0.5, 0.5, 0.0], &[0.5, 0.5, 0.0], &[0.0, 0.0, 0.0]])).is_err());
        assert_eq!(s.exponents_of(&[1, 2]), (-2.0, -1.0));
        assert!((s.minimal_gap() - 1.0).abs() < 1e-12);
    }
}
