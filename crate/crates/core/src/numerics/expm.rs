use super::lu::solve;
use super::matrix::{ComplexMatrix, C64};
use crate::error::{Error, Result};

/// Largest admissible one-norm of `x * A` before the exponential is refused.
pub const EXP_NORM_CAP: f64 = 700.0;

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// `e^{xA}` by scaling and squaring with the degree-13 Pade approximant.
pub fn matrix_exp(a: &ComplexMatrix, x: f64) -> Result<ComplexMatrix> {
    assert!(a.is_square(), "matrix exponential of a non-square matrix");
    if !x.is_finite() || !a.is_finite() {
        return Err(Error::InvalidInput("non-finite input to matrix_exp".into()));
    }
    let n = a.rows();
    let m = a.scale_real(x);
    let norm = m.norm1();
    if norm > EXP_NORM_CAP {
        return Err(Error::Overflow { norm, cap: EXP_NORM_CAP });
    }
    if norm == 0.0 {
        return Ok(ComplexMatrix::identity(n));
    }
    let s = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let m = m.scale_real(0.5f64.powi(s));
    let b = |k: usize| C64::new(PADE13[k], 0.0);
    let id = ComplexMatrix::identity(n);
    let m2 = m.matmul(&m);
    let m4 = m2.matmul(&m2);
    let m6 = m4.matmul(&m2);

    let mut inner_u = m6.scale(b(13));
    inner_u.add_scaled(b(11), &m4);
    inner_u.add_scaled(b(9), &m2);
    let mut u = m6.matmul(&inner_u);
    u.add_scaled(b(7), &m6);
    u.add_scaled(b(5), &m4);
    u.add_scaled(b(3), &m2);
    u.add_scaled(b(1), &id);
    let u = m.matmul(&u);

    let mut inner_v = m6.scale(b(12));
    inner_v.add_scaled(b(10), &m4);
    inner_v.add_scaled(b(8), &m2);
    let mut v = m6.matmul(&inner_v);
    v.add_scaled(b(6), &m6);
    v.add_scaled(b(4), &m4);
    v.add_scaled(b(2), &m2);
    v.add_scaled(b(0), &id);

    let mut r = solve(&(&v - &u), &(&v + &u))?;
    for _ in 0..s {
        r = r.matmul(&r);
    }
    if !r.is_finite() {
        return Err(Error::Overflow { norm, cap: EXP_NORM_CAP });
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn nilpotent_block() {
        let j = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let e = matrix_exp(&j, 1.0).unwrap();
        assert!(e.approx_eq(&ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]), 1e-15, 0.0));
    }

    #[test]
    fn diagonal_example() {
        let a = ComplexMatrix::diag_real(&[-2.0, -1.0, 1.0]);
        for &x in &[-3.0, 0.5, 2.0, 7.0] {
            let e = matrix_exp(&a, x).unwrap();
            let expect = ComplexMatrix::diag_real(&[(-2.0 * x).exp(), (-x).exp(), x.exp()]);
            assert!(e.approx_eq(&expect, 0.0, 1e-13), "x = {x}");
        }
    }

    #[test]
    fn schrodinger_generator_closed_form() {
        // A(k) = [[0,1],[-k^2,0]] at k = 2i: e^{A} = [[cos k, sin k / k], [-k sin k, cos k]]
        let k = C64::new(0.0, 2.0);
        let a = ComplexMatrix::from_rows(&[vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)], vec![-k * k, C64::new(0.0, 0.0)]]);
        let e = matrix_exp(&a, 1.0).unwrap();
        let expect = ComplexMatrix::from_rows(&[vec![k.cos(), k.sin() / k], vec![-k * k.sin(), k.cos()]]);
        assert!(e.approx_eq(&expect, 1e-14, 1e-13));
    }

    #[test]
    fn group_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = ComplexMatrix::from_fn(4, 4, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let lhs = matrix_exp(&a, 0.7).unwrap().matmul(&matrix_exp(&a, 1.9).unwrap());
        let rhs = matrix_exp(&a, 2.6).unwrap();
        assert!(lhs.approx_eq(&rhs, 1e-12, 1e-10));
    }

    #[test]
    fn overflow_is_reported() {
        let a = ComplexMatrix::identity(2);
        assert!(matches!(matrix_exp(&a, 1e4), Err(Error::Overflow { .. })));
    }

    #[test]
    fn derivative_converges_first_order() {
        let a = ComplexMatrix::from_real_rows(&[&[-1.0, 2.0], &[0.5, -0.3]]);
        let x = 0.8;
        let exact = a.matmul(&matrix_exp(&a, x).unwrap());
        let mut errs = Vec::new();
        for &h in &[1e-3, 1e-4, 1e-5] {
            let fd = (&matrix_exp(&a, x + h).unwrap() - &matrix_exp(&a, x).unwrap()).scale_real(1.0 / h);
            errs.push((&fd - &exact).max_abs());
        }
        assert!(errs[1] < errs[0] * 0.2 && errs[2] < errs[1] * 0.2, "{errs:?}");
    }
}
