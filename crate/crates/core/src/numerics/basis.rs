use super::matrix::{ComplexMatrix, C64};
use crate::error::{Error, Result};

/// Orthonormal basis of the column span of `m`, by Gram-Schmidt with column
/// pivoting. Stops after `rank` columns or when the largest remaining column
/// norm drops below `rel_tol` times the largest original one.
pub fn column_basis(m: &ComplexMatrix, rank: usize, rel_tol: f64) -> Result<ComplexMatrix> {
    let n = m.rows();
    let mut cols: Vec<Vec<C64>> = (0..m.cols()).map(|j| m.column(j)).collect();
    let norm = |v: &[C64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let scale = cols.iter().map(|c| norm(c)).fold(0.0, f64::max);
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(rank);
    while basis.len() < rank {
        let (best, best_norm) =
            cols.iter()
                .enumerate()
                .map(|(j, c)| (j, norm(c)))
                .fold((usize::MAX, 0.0), |acc, (j, v)| if v > acc.1 { (j, v) } else { acc });
        if best == usize::MAX || best_norm <= rel_tol * scale || scale == 0.0 {
            return Err(Error::RankDeficient { found: basis.len(), expected: rank });
        }
        let mut v = cols.swap_remove(best);
        // two passes of classical Gram-Schmidt keep orthogonality at roundoff level
        for _ in 0..2 {
            for b in &basis {
                let dot: C64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= dot * bi;
                }
            }
        }
        let vn = norm(&v);
        for vi in v.iter_mut() {
            *vi /= vn;
        }
        for c in cols.iter_mut() {
            let dot: C64 = v.iter().zip(c.iter()).map(|(x, y)| x.conj() * y).sum();
            for (ci, vi) in c.iter_mut().zip(&v) {
                *ci -= dot * vi;
            }
        }
        basis.push(v);
    }
    let mut out = ComplexMatrix::zeros(n, rank);
    for (j, b) in basis.iter().enumerate() {
        for (i, &z) in b.iter().enumerate() {
            out[(i, j)] = z;
        }
    }
    Ok(out)
}

/// Numerical rank of a projection, as its rounded trace.
pub fn projection_rank(q: &ComplexMatrix) -> usize {
    q.trace().re.round().max(0.0) as usize
}
