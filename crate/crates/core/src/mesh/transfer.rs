//! Grid transfers between nested spaces on the same cube. On a structured mesh
//! every transfer is a tensor product of one 1D interpolation matrix, applied
//! axis by axis to each of the three components.

use crate::scalar::Real;

use super::basis::lagrange_values;
use super::{lattice_coordinates, FeLevel, HexMesh, MeshError};

/// Sparse 1D interpolation matrix: row `r` holds `(column, weight)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Interp1d {
    pub rows: Vec<Vec<(usize, f64)>>,
    pub n_cols: usize,
}

impl Interp1d {
    /// Evaluates the degree-`p` space on `source` at `targets`.
    pub fn new(source: &HexMesh, source_nodes: &[f64], targets: &[f64]) -> Self {
        let n = source.n();
        let p = source_nodes.len() - 1;
        let h = source.h();
        let rows = targets
            .iter()
            .map(|&x| {
                let t = x / h;
                let e = (t.floor().max(0.0) as usize).min(n - 1);
                let local = t - e as f64;
                if let Some(a) = source_nodes.iter().position(|&s| (s - local).abs() < 1e-12) {
                    return vec![(e * p + a, 1.0)];
                }
                lagrange_values(source_nodes, local)
                    .into_iter()
                    .enumerate()
                    .filter(|&(_, w)| w != 0.0)
                    .map(|(a, w)| (e * p + a, w))
                    .collect()
            })
            .collect();
        Interp1d { rows, n_cols: n * p + 1 }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }
}

/// Applies `m` (or its transpose) along one axis of an array shaped
/// `[outer][axis][inner]`.
fn sweep<T: Real>(m: &Interp1d, transpose: bool, input: &[T], outer: usize, inner: usize) -> Vec<T> {
    let (n_in, n_out) = if transpose { (m.n_rows(), m.n_cols) } else { (m.n_cols, m.n_rows()) };
    debug_assert_eq!(input.len(), outer * n_in * inner);
    let mut out = vec![T::zero(); outer * n_out * inner];
    for o in 0..outer {
        let src = &input[o * n_in * inner..(o + 1) * n_in * inner];
        let dst = &mut out[o * n_out * inner..(o + 1) * n_out * inner];
        for (r, row) in m.rows.iter().enumerate() {
            for &(c, w) in row {
                let w = T::from_f64(w);
                let (i, j) = if transpose { (r, c) } else { (c, r) };
                let (s, d) = (&src[i * inner..(i + 1) * inner], &mut dst[j * inner..(j + 1) * inner]);
                for (d, &s) in d.iter_mut().zip(s) {
                    *d = *d + w * s;
                }
            }
        }
    }
    out
}

/// `m ⊗ m ⊗ m` (or its transpose) applied to a three-component nodal vector.
pub fn apply_tensor<T: Real>(m: &Interp1d, transpose: bool, input: &[T]) -> Vec<T> {
    let (a, b) = if transpose { (m.n_rows(), m.n_cols) } else { (m.n_cols, m.n_rows()) };
    let x = sweep(m, transpose, input, a * a, 3);
    let y = sweep(m, transpose, &x, a, 3 * b);
    sweep(m, transpose, &y, 1, 3 * b * b)
}

/// Transfers between a fine level and the next coarser one.
#[derive(Debug, Clone, PartialEq)]
pub struct Transfer {
    /// Coarse-to-fine interpolation (prolongation).
    pub prolong: Interp1d,
    /// Nodal interpolation of fine functions at coarse nodes.
    pub inject: Interp1d,
}

impl Transfer {
    /// Requires the coarse space to be contained in the fine one.
    pub fn new(fine: &FeLevel, coarse: &FeLevel) -> Result<Self, MeshError> {
        let (nf, nc) = (fine.mesh.n(), coarse.mesh.n());
        if nf % nc != 0 || fine.degree() < coarse.degree() || fine.mesh.extent != coarse.mesh.extent {
            return Err(MeshError::Config("coarse space is not nested in the fine space".into()));
        }
        let fine_line = lattice_coordinates(&fine.mesh, &fine.basis.nodes);
        let coarse_line = lattice_coordinates(&coarse.mesh, &coarse.basis.nodes);
        Ok(Transfer {
            prolong: Interp1d::new(&coarse.mesh, &coarse.basis.nodes, &fine_line),
            inject: Interp1d::new(&fine.mesh, &fine.basis.nodes, &coarse_line),
        })
    }

    pub fn fine_len(&self) -> usize {
        3 * self.prolong.n_rows().pow(3)
    }

    pub fn coarse_len(&self) -> usize {
        3 * self.prolong.n_cols.pow(3)
    }

    pub fn prolongate<T: Real>(&self, coarse: &[T]) -> Vec<T> {
        apply_tensor(&self.prolong, false, coarse)
    }

    /// Transpose of the prolongation.
    pub fn restrict<T: Real>(&self, fine: &[T]) -> Vec<T> {
        apply_tensor(&self.prolong, true, fine)
    }

    /// Nodal interpolation of a fine function (used for linearization points).
    pub fn interpolate_down(&self, fine: &[f64]) -> Vec<f64> {
        apply_tensor(&self.inject, false, fine)
    }
}
