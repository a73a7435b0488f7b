use super::matrix::{ComplexMatrix, C64, ONE, ZERO};
use crate::error::{Error, Result};

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Clone, Debug)]
pub struct LuDecomposition {
    lu: ComplexMatrix,
    perm: Vec<usize>,
    sign: f64,
}

impl LuDecomposition {
    pub fn new(m: &ComplexMatrix) -> Self {
        assert!(m.is_square(), "LU requires a square matrix");
        let n = m.rows();
        let mut lu = m.clone();
        let (perm, sign) = factor_in_place(lu.as_mut_slice(), n);
        Self { lu, perm, sign }
    }

    pub fn det(&self) -> C64 {
        let n = self.lu.rows();
        let mut d = C64::new(self.sign, 0.0);
        for i in 0..n {
            d *= self.lu[(i, i)];
        }
        d
    }

    /// Ratio of the smallest to the largest pivot modulus, a cheap
    /// conditioning diagnostic. Zero means exactly singular.
    pub fn pivot_ratio(&self) -> f64 {
        let n = self.lu.rows();
        if n == 0 {
            return 1.0;
        }
        let mods: Vec<f64> = (0..n).map(|i| self.lu[(i, i)].norm()).collect();
        let max = mods.iter().copied().fold(0.0, f64::max);
        if max == 0.0 {
            return 0.0;
        }
        mods.iter().copied().fold(f64::INFINITY, f64::min) / max
    }

    pub fn solve(&self, b: &ComplexMatrix) -> Result<ComplexMatrix> {
        let n = self.lu.rows();
        assert_eq!(b.rows(), n, "right-hand side has wrong row count");
        if (0..n).any(|i| self.lu[(i, i)] == ZERO) {
            return Err(Error::Singular);
        }
        let m = b.cols();
        let mut x = ComplexMatrix::from_fn(n, m, |i, j| b[(self.perm[i], j)]);
        for i in 0..n {
            for k in 0..i {
                let l = self.lu[(i, k)];
                if l != ZERO {
                    for j in 0..m {
                        let v = x[(k, j)];
                        x[(i, j)] -= l * v;
                    }
                }
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let u = self.lu[(i, k)];
                if u != ZERO {
                    for j in 0..m {
                        let v = x[(k, j)];
                        x[(i, j)] -= u * v;
                    }
                }
            }
            let piv = self.lu[(i, i)];
            for j in 0..m {
                x[(i, j)] /= piv;
            }
        }
        if !x.is_finite() {
            return Err(Error::Singular);
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<ComplexMatrix> {
        self.solve(&ComplexMatrix::identity(self.lu.rows()))
    }
}

/// Column block width of [`factor_in_place`].
const BLOCK: usize = 48;

/// In-place row-major LU with partial pivoting. Returns the row permutation
/// and its sign. Right-looking and blocked: each panel of `BLOCK` columns is
/// factored, then the trailing rows are updated against the panel rows.
pub(crate) fn factor_in_place(a: &mut [C64], n: usize) -> (Vec<usize>, f64) {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign = 1.0;
    for k0 in (0..n).step_by(BLOCK) {
        let k1 = (k0 + BLOCK).min(n);
        for k in k0..k1 {
            let mut p = k;
            let mut best = a[k * n + k].norm_sqr();
            for i in k + 1..n {
                let v = a[i * n + k].norm_sqr();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 {
                continue;
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let (upper, lower) = a.split_at_mut((k + 1) * n);
            let pivot_row = &upper[k * n..(k + 1) * n];
            let inv = ONE / pivot_row[k];
            for row in lower.chunks_exact_mut(n) {
                let l = row[k] * inv;
                row[k] = l;
                if l == ZERO {
                    continue;
                }
                for (r, &u) in row[k + 1..k1].iter_mut().zip(&pivot_row[k + 1..k1]) {
                    *r -= l * u;
                }
            }
        }
        if k1 == n {
            break;
        }
        // panel rows right of the block: U12 = L11^{-1} A12
        for k in k0..k1 {
            let (upper, lower) = a.split_at_mut((k + 1) * n);
            let src = &upper[k * n + k1..(k + 1) * n];
            for row in lower[..(k1 - k - 1) * n].chunks_exact_mut(n) {
                let l = row[k];
                if l == ZERO {
                    continue;
                }
                for (r, &u) in row[k1..].iter_mut().zip(src) {
                    *r -= l * u;
                }
            }
        }
        let (upper, lower) = a.split_at_mut(k1 * n);
        let panel = &upper[k0 * n..];
        for row in lower.chunks_exact_mut(n) {
            for k in k0..k1 {
                let l = row[k];
                if l == ZERO {
                    continue;
                }
                let src = &panel[(k - k0) * n + k1..(k - k0 + 1) * n];
                for (r, &u) in row[k1..].iter_mut().zip(src) {
                    *r -= l * u;
                }
            }
        }
    }
    (perm, sign)
}

/// Determinant via pivoted triangular factorization. A zero determinant is a
/// legitimate result and is returned as such.
pub fn lu_det(m: &ComplexMatrix) -> C64 {
    assert!(m.is_square(), "determinant of a non-square matrix");
    let n = m.rows();
    match n {
        0 => ONE,
        1 => m[(0, 0)],
        2 => m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)],
        _ => {
            let mut a = m.as_slice().to_vec();
            det_in_place(&mut a, n)
        }
    }
}

/// Determinant of a row-major buffer, destroying it.
pub(crate) fn det_in_place(a: &mut [C64], n: usize) -> C64 {
    let (_, sign) = factor_in_place(a, n);
    let mut d = C64::new(sign, 0.0);
    for i in 0..n {
        d *= a[i * n + i];
    }
    d
}

pub fn inverse(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    LuDecomposition::new(m).inverse()
}

/// Solves `m X = b`.
pub fn solve(m: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    LuDecomposition::new(m).solve(b)
}
