//! Sum factorization on one batch of elements: nodal values to reference
//! gradients at the quadrature points and the transposed integration sweep.
//! Layouts: element vectors `[component][node]`, gradients
//! `[component * 3 + direction][qp]`, x index fastest.

use crate::mesh::Basis1d;
use crate::scalar::Scalar;

/// 1D tables in the working precision.
#[derive(Debug, Clone)]
pub(crate) struct Tables<S> {
    pub nd: usize,
    pub nq: usize,
    /// `nq × nd`, values of the nodal basis at the quadrature points.
    pub shape: Vec<S>,
    /// `nq × nq`, derivative of the collocation basis on the quadrature points.
    pub colloc: Vec<S>,
}

impl<S: Scalar> Tables<S> {
    pub fn new(b: &Basis1d) -> Self {
        Tables {
            nd: b.n_nodes(),
            nq: b.n_q(),
            shape: b.shape.iter().map(|&v| S::lit(v)).collect(),
            colloc: b.colloc.iter().map(|&v| S::lit(v)).collect(),
        }
    }

    pub fn nd3(&self) -> usize {
        self.nd.pow(3)
    }

    pub fn nq3(&self) -> usize {
        self.nq.pow(3)
    }
}

/// Contraction along one axis of a 3D array: `out[.., r, ..] (+)= Σ_c M[r, c] in[.., c, ..]`
/// with `M` stored `rows × cols`, or `Mᵀ` if `transpose`.
#[inline(always)]
#[allow(clippy::too_many_arguments)]
fn contract<S: Scalar>(
    m: &[S],
    rows: usize,
    cols: usize,
    transpose: bool,
    input: &[S],
    dims: [usize; 3],
    axis: usize,
    out: &mut [S],
    accumulate: bool,
) {
    let (n_in, n_out) = if transpose { (rows, cols) } else { (cols, rows) };
    debug_assert_eq!(dims[axis], n_in);
    let stride: usize = dims[..axis].iter().product();
    let outer: usize = dims[axis + 1..].iter().product();
    for o in 0..outer {
        let src = &input[o * n_in * stride..(o + 1) * n_in * stride];
        let dst = &mut out[o * n_out * stride..(o + 1) * n_out * stride];
        for r in 0..n_out {
            for s in 0..stride {
                let mut acc = S::zero();
                for c in 0..n_in {
                    let w = if transpose { m[c * cols + r] } else { m[r * cols + c] };
                    acc += w * src[c * stride + s];
                }
                if accumulate {
                    dst[r * stride + s] += acc;
                } else {
                    dst[r * stride + s] = acc;
                }
            }
        }
    }
}

/// Scratch buffers of one worker.
#[derive(Debug, Clone)]
pub(crate) struct Work<S> {
    pub xe: Vec<S>,
    pub ye: Vec<S>,
    pub grad: Vec<S>,
    pub grad_k: Vec<S>,
    t1: Vec<S>,
    t2: Vec<S>,
    t3: Vec<S>,
}

impl<S: Scalar> Work<S> {
    pub fn new(t: &Tables<S>) -> Self {
        let big = t.nd.max(t.nq).pow(3);
        let z = S::zero();
        Work {
            xe: vec![z; 3 * t.nd3()],
            ye: vec![z; 3 * t.nd3()],
            grad: vec![z; 9 * t.nq3()],
            grad_k: vec![z; 9 * t.nq3()],
            t1: vec![z; big],
            t2: vec![z; big],
            t3: vec![z; big],
        }
    }
}

/// Reference gradients at the quadrature points of the element vector `xe`.
pub(crate) fn gradients<S: Scalar>(
    t: &Tables<S>,
    xe: &[S],
    grad: &mut [S],
    t1: &mut [S],
    t2: &mut [S],
    t3: &mut [S],
) {
    let (nd, nq) = (t.nd, t.nq);
    let (nd3, nq3) = (t.nd3(), t.nq3());
    for c in 0..3 {
        let x = &xe[c * nd3..(c + 1) * nd3];
        contract(&t.shape, nq, nd, false, x, [nd, nd, nd], 0, t1, false);
        contract(&t.shape, nq, nd, false, t1, [nq, nd, nd], 1, t2, false);
        contract(&t.shape, nq, nd, false, t2, [nq, nq, nd], 2, t3, false);
        for d in 0..3 {
            let g = &mut grad[(c * 3 + d) * nq3..(c * 3 + d + 1) * nq3];
            contract(&t.colloc, nq, nq, false, &t3[..nq3], [nq, nq, nq], d, g, false);
        }
    }
}

/// Transposed sweep: `ye[c][n] = Σ_q Σ_d ∂φ_n/∂ξ_d(q) flux[c][d][q]`.
pub(crate) fn integrate<S: Scalar>(
    t: &Tables<S>,
    flux: &[S],
    ye: &mut [S],
    t1: &mut [S],
    t2: &mut [S],
    t3: &mut [S],
) {
    let (nd, nq) = (t.nd, t.nq);
    let (nd3, nq3) = (t.nd3(), t.nq3());
    for c in 0..3 {
        for d in 0..3 {
            let f = &flux[(c * 3 + d) * nq3..(c * 3 + d + 1) * nq3];
            contract(&t.colloc, nq, nq, true, f, [nq, nq, nq], d, &mut t3[..nq3], d > 0);
        }
        contract(&t.shape, nq, nd, true, &t3[..nq3], [nq, nq, nq], 2, t1, false);
        contract(&t.shape, nq, nd, true, t1, [nq, nq, nd], 1, t2, false);
        contract(&t.shape, nq, nd, true, t2, [nq, nd, nd], 0, &mut ye[c * nd3..(c + 1) * nd3], false);
    }
}

/// Transposed value sweep: `ye[c][n] = Σ_q φ_n(q) vals[c][q]`.
pub(crate) fn integrate_values<S: Scalar>(
    t: &Tables<S>,
    vals: &[S],
    ye: &mut [S],
    t1: &mut [S],
    t2: &mut [S],
) {
    let (nd, nq) = (t.nd, t.nq);
    let (nd3, nq3) = (t.nd3(), t.nq3());
    for c in 0..3 {
        let v = &vals[c * nq3..(c + 1) * nq3];
        contract(&t.shape, nq, nd, true, v, [nq, nq, nq], 2, t1, false);
        contract(&t.shape, nq, nd, true, t1, [nq, nq, nd], 1, t2, false);
        contract(&t.shape, nq, nd, true, t2, [nq, nd, nd], 0, &mut ye[c * nd3..(c + 1) * nd3], false);
    }
}

impl<S: Scalar> Work<S> {
    pub fn gradients_of_xe(&mut self, t: &Tables<S>) {
        gradients(t, &self.xe, &mut self.grad, &mut self.t1, &mut self.t2, &mut self.t3);
    }

    /// Gradients of `xe` into `grad_k` (linearization point).
    pub fn gradients_k(&mut self, t: &Tables<S>) {
        gradients(t, &self.xe, &mut self.grad_k, &mut self.t1, &mut self.t2, &mut self.t3);
    }

    pub fn integrate_grad(&mut self, t: &Tables<S>) {
        integrate(t, &self.grad, &mut self.ye, &mut self.t1, &mut self.t2, &mut self.t3);
    }
}
