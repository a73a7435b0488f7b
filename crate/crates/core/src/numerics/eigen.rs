use super::lu::LuDecomposition;
use super::matrix::{ComplexMatrix, C64, ONE, ZERO};
use crate::error::{Error, Result};

const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues (unsorted) and a unitary matrix whose columns are the
/// corresponding eigenvectors. Only the Hermitian part of the input is used.
pub fn hermitian_eigen(h: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    assert!(h.is_square(), "Hermitian eigenproblem needs a square matrix");
    let n = h.rows();
    let mut a = ComplexMatrix::from_fn(n, n, |i, j| (h[(i, j)] + h[(j, i)].conj()) * 0.5);
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm();
    if scale == 0.0 {
        return (vec![0.0; n], v);
    }
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-16 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= 1e-300 {
                    continue;
                }
                let phase = apq / r;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * r);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // G = diag(1, conj(phase)) * [[c, s], [-s, c]]
                let g_qp = -phase.conj() * s;
                let g_qq = phase.conj() * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c + akq * g_qp;
                    a[(k, q)] = akp * s + akq * g_qq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c + aqk * g_qp.conj();
                    a[(q, k)] = apk * s + aqk * g_qq.conj();
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c + vkq * g_qp;
                    v[(k, q)] = vkp * s + vkq * g_qq;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
            }
        }
    }
    ((0..n).map(|i| a[(i, i)].re).collect(), v)
}

/// Applies a scalar function to the spectrum of a Hermitian matrix.
pub fn hermitian_function(h: &ComplexMatrix, f: impl Fn(f64) -> f64) -> ComplexMatrix {
    let (values, v) = hermitian_eigen(h);
    let n = h.rows();
    let scaled = ComplexMatrix::from_fn(n, n, |i, j| v[(i, j)] * f(values[j]));
    scaled.matmul(&v.adjoint())
}

/// Unique positive semi-definite square root. Eigenvalues in
/// `[-1e-8 |H|, 0)` are clamped to zero; anything more negative is rejected.
pub fn hermitian_sqrt_psd(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (values, v) = hermitian_eigen(h);
    let norm = values.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if values.is_empty() {
        return Ok(h.clone());
    }
    if min < -1e-8 * norm {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    let n = h.rows();
    let scaled = ComplexMatrix::from_fn(n, n, |i, j| v[(i, j)] * values[j].max(0.0).sqrt());
    Ok(scaled.matmul(&v.adjoint()))
}

/// Reduces a square matrix to upper Hessenberg form by Householder
/// reflections (similarity preserving).
fn hessenberg(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.rows();
    let mut h = a.clone();
    for k in 0..n.saturating_sub(2) {
        let alpha_norm: f64 = (k + 1..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if alpha_norm == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() == 0.0 { ONE } else { x0 / x0.norm() };
        let mut u: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        u[0] += phase * alpha_norm;
        let unorm: f64 = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if unorm == 0.0 {
            continue;
        }
        for z in &mut u {
            *z /= unorm;
        }
        // H <- (I - 2uu*) H (I - 2uu*)
        for j in 0..n {
            let dot: C64 = u.iter().enumerate().map(|(t, ut)| ut.conj() * h[(k + 1 + t, j)]).sum();
            for (t, ut) in u.iter().enumerate() {
                h[(k + 1 + t, j)] -= *ut * dot * 2.0;
            }
        }
        for i in 0..n {
            let dot: C64 = u.iter().enumerate().map(|(t, ut)| h[(i, k + 1 + t)] * ut).sum();
            for (t, ut) in u.iter().enumerate() {
                h[(i, k + 1 + t)] -= dot * ut.conj() * 2.0;
            }
        }
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
    h
}

fn givens(a: C64, b: C64) -> (f64, C64) {
    let an = a.norm();
    let r = (an * an + b.norm_sqr()).sqrt();
    if r == 0.0 {
        return (1.0, ZERO);
    }
    if an == 0.0 {
        return (0.0, ONE);
    }
    (an / r, (a / an) * b.conj() / r)
}

/// Eigenvalues of a general complex matrix via shifted Hessenberg QR.
/// Intended for the small orders (d <= 8) used throughout the crate.
pub fn eigenvalues(a: &ComplexMatrix) -> Result<Vec<C64>> {
    assert!(a.is_square(), "eigenvalues of a non-square matrix");
    let n = a.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    if !a.is_finite() {
        return Err(Error::InvalidInput("non-finite matrix entries".into()));
    }
    let mut h = hessenberg(a);
    let mut out = vec![ZERO; n];
    let mut hi = n - 1;
    let mut iter = 0usize;
    let budget = 60 * n;
    loop {
        if hi == 0 {
            out[0] = h[(0, 0)];
            break;
        }
        let mut l = hi;
        while l > 0 {
            let s = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            let s = if s == 0.0 { 1.0 } else { s };
            if h[(l, l - 1)].norm() <= f64::EPSILON * s {
                h[(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            out[hi] = h[(hi, hi)];
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        if iter > budget {
            return Err(Error::EigenFailure);
        }
        let mu = if iter.is_multiple_of(11) {
            h[(hi, hi)] + C64::new(h[(hi, hi - 1)].norm(), 0.0) * 0.75
        } else {
            let a11 = h[(hi - 1, hi - 1)];
            let a12 = h[(hi - 1, hi)];
            let a21 = h[(hi, hi - 1)];
            let a22 = h[(hi, hi)];
            let tr = a11 + a22;
            let det = a11 * a22 - a12 * a21;
            let disc = (tr * tr - det * 4.0).sqrt();
            let e1 = (tr + disc) * 0.5;
            let e2 = (tr - disc) * 0.5;
            if (e1 - a22).norm() < (e2 - a22).norm() {
                e1
            } else {
                e2
            }
        };
        for i in l..=hi {
            h[(i, i)] -= mu;
        }
        let mut rots = Vec::with_capacity(hi - l);
        for k in l..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..=hi {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = x * c + s * y;
                h[(k + 1, j)] = -s.conj() * x + y * c;
            }
            rots.push((c, s));
        }
        for (idx, k) in (l..hi).enumerate() {
            let (c, s) = rots[idx];
            for i in l..=(k + 2).min(hi) {
                let x = h[(i, k)];
                let y = h[(i, k + 1)];
                h[(i, k)] = x * c + y * s.conj();
                h[(i, k + 1)] = -x * s + y * c;
            }
        }
        for i in l..=hi {
            h[(i, i)] += mu;
        }
    }
    Ok(out)
}

/// Matrix sign function by scaled Newton iteration. The input must have no
/// eigenvalue on the imaginary axis.
pub fn matrix_sign(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.rows();
    let mut s = a.clone();
    let mut last_diff = f64::INFINITY;
    for it in 0..100 {
        let lu = LuDecomposition::new(&s);
        let det = lu.det();
        let inv = lu.inverse()?;
        let mu = if it < 6 && det.norm() > 0.0 { det.norm().powf(-1.0 / n as f64) } else { 1.0 };
        let next = ComplexMatrix::from_fn(n, n, |i, j| (s[(i, j)] * mu + inv[(i, j)] / mu) * 0.5);
        let diff = (&next - &s).frobenius_norm();
        let scale = next.frobenius_norm();
        s = next;
        if mu == 1.0 && (diff <= 1e-14 * scale || (diff <= 1e-10 * scale && diff >= 0.5 * last_diff)) {
            return Ok(s);
        }
        last_diff = diff;
    }
    Err(Error::NonConvergence { iterations: 100, ratio: f64::NAN })
}
