use rayon::prelude::*;

use super::kernel::SemiSeparableKernel;
use crate::error::{Error, Result};
use crate::numerics::lu::det_in_place;
use crate::numerics::{ComplexMatrix, QuadratureGrid, C64};

/// Result of a Nyström determinant evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NystromDet2 {
    pub value: C64,
    /// Size of the assembled matrix before zero rows were dropped.
    pub size: usize,
    /// Size of the matrix actually factored.
    pub reduced_size: usize,
}

/// `det2(I + M) = det(I + M) e^{-tr M}` for a finite square matrix.
pub fn det2_matrix(m: &ComplexMatrix) -> C64 {
    assert!(m.is_square(), "det2 of a non-square matrix");
    let n = m.rows();
    let mut a = m.as_slice().to_vec();
    for i in 0..n {
        a[i * n + i] += 1.0;
    }
    det_in_place(&mut a, n) * (-m.trace()).exp()
}

/// Determinant of `I + M` for a row-major `n x n` buffer, dropping rows of
/// `M` that vanish identically (they contribute unit rows).
fn det2_buffer(mut m: Vec<C64>, n: usize) -> Result<NystromDet2> {
    let trace: C64 = (0..n).map(|i| m[i * n + i]).sum();
    let keep: Vec<usize> = (0..n).filter(|&i| m[i * n..(i + 1) * n].iter().any(|v| *v != C64::new(0.0, 0.0))).collect();
    let k = keep.len();
    let det = if k == n {
        for i in 0..n {
            m[i * n + i] += 1.0;
        }
        det_in_place(&mut m, n)
    } else {
        let mut a = vec![C64::new(0.0, 0.0); k * k];
        a.par_chunks_mut(k.max(1)).zip(&keep).for_each(|(row, &i)| {
            for (c, &j) in keep.iter().enumerate() {
                row[c] = m[i * n + j];
            }
        });
        for i in 0..k {
            a[i * k + i] += 1.0;
        }
        det_in_place(&mut a, k)
    };
    let value = det * (-trace).exp();
    if !value.is_finite() {
        let norm = m.iter().map(|v| v.norm()).fold(0.0, f64::max);
        return Err(Error::Overflow { norm, cap: f64::MAX });
    }
    Ok(NystromDet2 { value, size: n, reduced_size: k })
}

/// Nyström approximation of `det2(I + K)`: the block matrix with blocks
/// `sqrt(w_i) K(x_i, x_j) sqrt(w_j)` on the grid nodes.
pub fn det2_nystrom(
    kernel_eval: &(dyn Fn(f64, f64) -> Result<ComplexMatrix> + Sync),
    grid: &QuadratureGrid,
) -> Result<NystromDet2> {
    let nodes = grid.nodes();
    let sw: Vec<f64> = grid.weights().iter().map(|w| w.sqrt()).collect();
    let d = kernel_eval(nodes[0], nodes[0])?.rows();
    let n = d * nodes.len();
    let mut m = vec![C64::new(0.0, 0.0); n * n];
    m.par_chunks_mut(d * n).enumerate().try_for_each(|(i, block)| -> Result<()> {
        for (j, &xj) in nodes.iter().enumerate() {
            let k = kernel_eval(nodes[i], xj)?;
            let s = sw[i] * sw[j];
            for a in 0..d {
                for b in 0..d {
                    block[a * n + j * d + b] = k[(a, b)] * s;
                }
            }
        }
        Ok(())
    })?;
    det2_buffer(m, n)
}

/// Quadrature used for a tabulated semi-separable kernel.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum NystromRule {
    /// Gauss weights everywhere, `x >= x'` branch on the diagonal. First
    /// order in the panel width because of the jump across the diagonal.
    Plain,
    /// Inside the diagonal panel each branch is integrated up to the node with
    /// interpolatory partial weights, and `tr A^2` is replaced by `tr K^2`
    /// integrated branch by branch. The remaining terms `tr A^n`, `n >= 3`,
    /// see a continuous kernel.
    #[default]
    TraceCorrected,
}

/// `tr K^2 = 2 int tr(g2(x) f1(x) int_a^x g1 f2)` on the kernel grid.
pub fn kernel_trace_square(kernel: &SemiSeparableKernel) -> C64 {
    if kernel.d1 == 0 || kernel.d2 == 0 {
        return C64::new(0.0, 0.0);
    }
    let grid = kernel.grid();
    let (f1, f2, g1, g2) = kernel.tables();
    let ppp = grid.points_per_panel();
    let mut before = ComplexMatrix::zeros(kernel.d1, kernel.d2);
    let mut total = C64::new(0.0, 0.0);
    for p in 0..grid.panels().len() {
        let at: Vec<usize> = (0..ppp).map(|i| crate::jost::picard::node_point(ppp, p, i)).collect();
        let inner: Vec<ComplexMatrix> = at.iter().map(|&k| g1[k].matmul(&f2[k])).collect();
        for (i, &k) in at.iter().enumerate() {
            let mut c = before.clone();
            for (w, m) in grid.lower_partial_weights(p, i).zip(&inner) {
                c.add_scaled(C64::new(w, 0.0), m);
            }
            total += g2[k].matmul(&f1[k]).matmul(&c).trace() * grid.weights()[p * ppp + i];
        }
        for (i, m) in inner.iter().enumerate() {
            before.add_scaled(C64::new(grid.weights()[p * ppp + i], 0.0), m);
        }
    }
    total * 2.0
}

/// Nyström determinant of a tabulated semi-separable kernel on its own grid,
/// assembled from the factor tables. With [`NystromRule::Plain`] this equals
/// [`det2_nystrom`] applied to [`SemiSeparableKernel::evaluate`].
pub fn det2_nystrom_kernel(kernel: &SemiSeparableKernel, rule: NystromRule) -> Result<NystromDet2> {
    let grid = kernel.grid();
    let (f1, f2, g1, g2) = kernel.tables();
    let ppp = grid.points_per_panel();
    let idx: Vec<usize> =
        (0..grid.panels().len()).flat_map(|p| (0..ppp).map(move |i| crate::jost::picard::node_point(ppp, p, i))).collect();
    let weights = grid.weights();
    let sw: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let d = kernel.d;
    let n = d * idx.len();
    let mut m = vec![C64::new(0.0, 0.0); n * n];
    m.par_chunks_mut(d * n).enumerate().for_each(|(i, block)| {
        let (a1, a2) = (f1[idx[i]].scale_real(-1.0), f2[idx[i]].scale_real(-1.0));
        if a1.is_zero() && a2.is_zero() {
            return;
        }
        let (panel, local) = (i / ppp, i % ppp);
        let (lower, upper): (Vec<f64>, Vec<f64>) = match rule {
            NystromRule::Plain => (Vec::new(), Vec::new()),
            NystromRule::TraceCorrected => {
                (grid.lower_partial_weights(panel, local).collect(), grid.upper_partial_weights(panel, local).collect())
            }
        };
        for (j, &kj) in idx.iter().enumerate() {
            let k = match rule {
                NystromRule::TraceCorrected if j / ppp == panel => {
                    let mut k = a1.matmul(&g1[kj]).scale_real(lower[j % ppp]);
                    k.add_scaled(C64::new(upper[j % ppp], 0.0), &a2.matmul(&g2[kj]));
                    k
                }
                NystromRule::TraceCorrected => if i > j { a1.matmul(&g1[kj]) } else { a2.matmul(&g2[kj]) }.scale_real(weights[j]),
                NystromRule::Plain => if i >= j { a1.matmul(&g1[kj]) } else { a2.matmul(&g2[kj]) }.scale_real(sw[i] * sw[j]),
            };
            for a in 0..d {
                for b in 0..d {
                    block[a * n + j * d + b] = k[(a, b)];
                }
            }
        }
    });
    let square = match rule {
        NystromRule::Plain => None,
        NystromRule::TraceCorrected => {
            let discrete: C64 = (0..n).into_par_iter().map(|p| (0..n).map(|q| m[p * n + q] * m[q * n + p]).sum::<C64>()).sum();
            Some(discrete)
        }
    };
    let mut out = det2_buffer(m, n)?;
    if let Some(discrete) = square {
        out.value *= (0.5 * (discrete - kernel_trace_square(kernel))).exp();
        if !out.value.is_finite() {
            return Err(Error::Overflow { norm: discrete.norm(), cap: f64::MAX });
        }
    }
    Ok(out)
}
