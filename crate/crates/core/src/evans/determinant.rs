use crate::error::{Error, Result};
use crate::jost::{JostSolution, Side};
use crate::numerics::{column_basis, lu_det, ComplexMatrix, LuDecomposition, C64};
use crate::system::SpectralSplitting;

fn coverage(solutions: &[JostSolution], side: Side, expected: &[usize]) -> Result<()> {
    let mut seen: Vec<usize> = Vec::new();
    for s in solutions {
        if s.side != side {
            return Err(Error::CoverageGap(format!("{side:?}-side list contains a {:?}-side solution", s.side)));
        }
        if !s.converged {
            return Err(Error::CoverageGap(format!("unconverged solution for projections {:?}", s.groups)));
        }
        for &g in &s.groups {
            if seen.contains(&g) {
                return Err(Error::CoverageGap(format!("projection Q_{g} covered twice on the {side:?} side")));
            }
            seen.push(g);
        }
    }
    seen.sort_unstable();
    if seen != expected {
        return Err(Error::CoverageGap(format!("{side:?} side covers projections {seen:?}, expected {expected:?}")));
    }
    Ok(())
}

/// `Y+(0) + Y-(0)` summed over the solutions, after checking that the plus
/// side covers `Q_1..Q_k0` and the minus side the remaining projections.
pub fn evans_matrix(splitting: &SpectralSplitting, plus: &[JostSolution], minus: &[JostSolution]) -> Result<ComplexMatrix> {
    let k0 = splitting.k0();
    coverage(plus, Side::Plus, &(1..=k0).collect::<Vec<_>>())?;
    coverage(minus, Side::Minus, &(k0 + 1..=splitting.len()).collect::<Vec<_>>())?;
    let d = splitting.dimension();
    Ok(plus.iter().chain(minus).fold(ComplexMatrix::zeros(d, d), |acc, s| &acc + &s.initial))
}

/// The Evans determinant `D = det(sum_j Y+^(j)(0) + sum_j Y-^(j)(0))`.
pub fn evans_determinant(splitting: &SpectralSplitting, plus: &[JostSolution], minus: &[JostSolution]) -> Result<C64> {
    Ok(lu_det(&evans_matrix(splitting, plus, minus)?))
}

/// Determinant of the matrix whose columns are the solution columns at 0
/// taken along bases of `ran Q` and `ker Q`, divided by the determinant of
/// those bases. When `Q` is a coordinate projection the bases are unit
/// vectors, the matrix consists of the nonzero columns of `Y+(0)` and
/// `Y-(0)` in place, and the value is the Evans determinant itself.
pub fn evans_from_columns(splitting: &SpectralSplitting, plus: &[JostSolution], minus: &[JostSolution]) -> Result<C64> {
    let m = evans_matrix(splitting, plus, minus)?;
    let q = splitting.sum(1..=splitting.k0());
    let d = q.rows();
    let coordinate = (0..d).all(|i| {
        (0..d).all(|j| {
            if i == j {
                q[(i, i)] == C64::new(0.0, 0.0) || q[(i, i)] == C64::new(1.0, 0.0)
            } else {
                q[(i, j)] == C64::new(0.0, 0.0)
            }
        })
    });
    if coordinate {
        let mut cols = ComplexMatrix::zeros(d, d);
        for j in 0..d {
            let stable = q[(j, j)] == C64::new(1.0, 0.0);
            let src = plus
                .iter()
                .chain(minus)
                .filter(|s| (s.side == Side::Plus) == stable)
                .fold(ComplexMatrix::zeros(d, 1), |acc, s| &acc + &s.initial.block(0, j, d, 1));
            cols.set_block(0, j, &src);
        }
        return Ok(lu_det(&cols));
    }
    let rank = crate::numerics::projection_rank(&q);
    let iq = &ComplexMatrix::identity(d) - &q;
    let mut blocks = Vec::new();
    if rank > 0 {
        blocks.push(column_basis(&q, rank, 1e-8)?);
    }
    if rank < d {
        blocks.push(column_basis(&iq, d - rank, 1e-8)?);
    }
    let t = ComplexMatrix::hstack(&blocks.iter().collect::<Vec<_>>());
    Ok(lu_det(&m.matmul(&t)) / lu_det(&t))
}

/// Commuting blocks `N_j = N_j Q_j = Q_j N_j` with invertible sum.
#[derive(Clone, Debug)]
pub struct ReferenceFrame {
    blocks: Vec<ComplexMatrix>,
    sum: ComplexMatrix,
    det: C64,
}

impl ReferenceFrame {
    pub fn new(splitting: &SpectralSplitting, blocks: Vec<ComplexMatrix>) -> Result<Self> {
        if blocks.len() != splitting.len() {
            return Err(Error::InvalidInput(format!("frame has {} blocks for {} projections", blocks.len(), splitting.len())));
        }
        for (j, n) in blocks.iter().enumerate() {
            let q = splitting.projection(j + 1);
            let scale = 1e-10 * (1.0 + n.max_abs());
            if (&n.matmul(q) - n).max_abs() > scale || (&q.matmul(n) - n).max_abs() > scale {
                return Err(Error::InvalidInput(format!("frame block {} does not commute with its projection", j + 1)));
            }
        }
        let d = splitting.dimension();
        let sum = blocks.iter().fold(ComplexMatrix::zeros(d, d), |acc, n| &acc + n);
        let det = lu_det(&sum);
        if !(det.norm() >= 1e-12) {
            return Err(Error::InvalidInput(format!("frame determinant {det} is below 1e-12")));
        }
        Ok(Self { blocks, sum, det })
    }

    /// `N_j = Q_j`.
    pub fn identity(splitting: &SpectralSplitting) -> Self {
        Self::new(splitting, splitting.projections().to_vec()).expect("splitting projections form a frame")
    }

    pub fn blocks(&self) -> &[ComplexMatrix] {
        &self.blocks
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.sum
    }

    pub fn det(&self) -> C64 {
        self.det
    }

    /// Values at 0 of the solutions `Y^(j) N_j` asymptotic to `Phi N_j`,
    /// one per projection, taken from the Jost solutions covering each `Q_j`.
    pub fn framed_solutions(&self, plus: &[JostSolution], minus: &[JostSolution]) -> Result<Vec<ComplexMatrix>> {
        (1..=self.blocks.len())
            .map(|j| {
                let s = plus
                    .iter()
                    .chain(minus)
                    .find(|s| s.groups.contains(&j))
                    .ok_or_else(|| Error::CoverageGap(format!("no solution covers Q_{j}")))?;
                Ok(s.initial.matmul(&self.blocks[j - 1]))
            })
            .collect()
    }
}

/// `det(N~) / det(N)` with `N~ = sum_j Y~^(j)(0)`.
pub fn evans_ratio(frame: &ReferenceFrame, tilde: &[ComplexMatrix]) -> Result<C64> {
    if tilde.len() != frame.blocks.len() {
        return Err(Error::InvalidInput(format!("{} framed solutions for {} blocks", tilde.len(), frame.blocks.len())));
    }
    let d = frame.sum.rows();
    let n_tilde = tilde.iter().fold(ComplexMatrix::zeros(d, d), |acc, t| &acc + t);
    Ok(LuDecomposition::new(&n_tilde).det() / frame.det)
}
