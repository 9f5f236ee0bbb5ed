use crate::tensor::Tensor2;

use super::basis::{self, Basis1d};
use super::{lattice_coordinates, Face, HexMesh, Mapping, MeshError};

/// Quadrature-point geometry of the reference configuration, indexed
/// `element * n_qp + qp` with the x-direction point fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    /// `J0 = ∂X/∂ξ` on the unit element.
    pub j0: Vec<Tensor2<f64>>,
    pub j0_inv: Vec<Tensor2<f64>>,
    /// `det J0` times the quadrature weight.
    pub jxw: Vec<f64>,
}

/// How constrained entries of a vector are overwritten.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirichletMode {
    SetValues,
    SetZero,
}

/// Constrained unknowns and their prescribed values.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dirichlet {
    pub mask: Vec<bool>,
    pub values: Vec<f64>,
}

impl Dirichlet {
    pub fn apply(&self, v: &mut [f64], mode: DirichletMode) {
        for (i, x) in v.iter_mut().enumerate() {
            if self.mask[i] {
                *x = match mode {
                    DirichletMode::SetValues => self.values[i],
                    DirichletMode::SetZero => 0.0,
                };
            }
        }
    }

    pub fn zero<T: num_traits::Zero + Copy>(&self, v: &mut [T]) {
        for (x, &m) in v.iter_mut().zip(&self.mask) {
            if m {
                *x = T::zero();
            }
        }
    }

    pub fn n_constrained(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }
}

/// Degree-`p` continuous Lagrange space (three components) on a mapped mesh.
/// Unknown `3 * node + component`; nodes lexicographic on the global lattice.
#[derive(Debug, Clone)]
pub struct FeLevel {
    pub mesh: HexMesh,
    pub basis: Basis1d,
    pub mapping: Mapping,
    pub geometry: Geometry,
    pub dirichlet: Dirichlet,
    /// Lattice offset of each local node relative to the element's first node.
    offsets: Vec<usize>,
}

impl FeLevel {
    pub fn new(mesh: &HexMesh, degree: usize, mapping: &Mapping) -> Result<Self, MeshError> {
        if degree == 0 {
            return Err(MeshError::Config("polynomial degree must be positive".into()));
        }
        let mapping = if mapping.mesh == *mesh { mapping.clone() } else { mapping.interpolate_to(mesh)? };
        let basis = Basis1d::new(degree);
        let geometry = compute_geometry(mesh, &basis, &mapping)?;
        let m = mesh.n() * degree + 1;
        let p1 = degree + 1;
        let mut offsets = Vec::with_capacity(p1.pow(3));
        for c in 0..p1 {
            for b in 0..p1 {
                for a in 0..p1 {
                    offsets.push(a + m * (b + m * c));
                }
            }
        }
        let n_dofs = 3 * m * m * m;
        Ok(FeLevel {
            mesh: *mesh,
            basis,
            mapping,
            geometry,
            dirichlet: Dirichlet { mask: vec![false; n_dofs], values: vec![0.0; n_dofs] },
            offsets,
        })
    }

    pub fn degree(&self) -> usize {
        self.basis.degree
    }

    /// Nodes per axis of the global lattice.
    pub fn line_len(&self) -> usize {
        self.mesh.n() * self.degree() + 1
    }

    pub fn n_nodes(&self) -> usize {
        self.line_len().pow(3)
    }

    pub fn n_dofs(&self) -> usize {
        3 * self.n_nodes()
    }

    pub fn n_elements(&self) -> usize {
        self.mesh.n_elements()
    }

    pub fn nodes_per_element(&self) -> usize {
        self.offsets.len()
    }

    pub fn qp_per_element(&self) -> usize {
        self.basis.n_q().pow(3)
    }

    /// Global index of the first node of element `e`.
    #[inline]
    pub fn element_base(&self, e: usize) -> usize {
        let [i, j, k] = self.mesh.element_ijk(e);
        let p = self.degree();
        let m = self.line_len();
        i * p + m * (j * p + m * (k * p))
    }

    /// Lattice offsets of the local nodes.
    #[inline]
    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    /// Reference coordinates of the global 1D node lattice.
    pub fn lattice_line(&self) -> Vec<f64> {
        lattice_coordinates(&self.mesh, &self.basis.nodes)
    }

    /// Positions of all nodes in the reference configuration.
    pub fn node_positions(&self) -> Vec<[f64; 3]> {
        let line = self.lattice_line();
        let m = line.len();
        let mut out = Vec::with_capacity(m * m * m);
        for k in 0..m {
            for j in 0..m {
                for i in 0..m {
                    out.push(self.mapping.evaluate([line[i], line[j], line[k]]));
                }
            }
        }
        out
    }

    /// Quadrature-point positions of element `e`.
    pub fn qp_positions(&self, e: usize) -> Vec<[f64; 3]> {
        let [ei, ej, ek] = self.mesh.element_ijk(e);
        let h = self.mesh.h();
        let qp = &self.basis.qpoints;
        let mut out = Vec::with_capacity(self.qp_per_element());
        for &z in qp {
            for &y in qp {
                for &x in qp {
                    let r = [(ei as f64 + x) * h, (ej as f64 + y) * h, (ek as f64 + z) * h];
                    out.push(self.mapping.evaluate(r));
                }
            }
        }
        out
    }

    /// Value of the finite element function `u` at local coordinates `xi` of element `e`.
    pub fn evaluate(&self, u: &[f64], e: usize, xi: [f64; 3]) -> [f64; 3] {
        let v: [Vec<f64>; 3] = std::array::from_fn(|d| basis::lagrange_values(&self.basis.nodes, xi[d]));
        let nd = self.degree() + 1;
        let base = self.element_base(e);
        let mut out = [0.0; 3];
        for (n, &off) in self.offsets.iter().enumerate() {
            let w = v[0][n % nd] * v[1][(n / nd) % nd] * v[2][n / (nd * nd)];
            for c in 0..3 {
                out[c] += w * u[3 * (base + off) + c];
            }
        }
        out
    }

    /// `∂u/∂ξ` at local coordinates `xi` of element `e`.
    pub fn reference_gradient(&self, u: &[f64], e: usize, xi: [f64; 3]) -> Tensor2<f64> {
        let v: [Vec<f64>; 3] = std::array::from_fn(|d| basis::lagrange_values(&self.basis.nodes, xi[d]));
        let dv: [Vec<f64>; 3] = std::array::from_fn(|d| basis::lagrange_derivatives(&self.basis.nodes, xi[d]));
        let nd = self.degree() + 1;
        let base = self.element_base(e);
        let mut g = Tensor2::<f64>::zero();
        for (n, &off) in self.offsets.iter().enumerate() {
            let [a, b, c] = [n % nd, (n / nd) % nd, n / (nd * nd)];
            let w = [dv[0][a] * v[1][b] * v[2][c], v[0][a] * dv[1][b] * v[2][c], v[0][a] * v[1][b] * dv[2][c]];
            for comp in 0..3 {
                for d in 0..3 {
                    g.m[comp][d] += w[d] * u[3 * (base + off) + comp];
                }
            }
        }
        g
    }

    /// Nodal interpolant of a vector field given at reference positions.
    pub fn interpolate(&self, f: impl Fn([f64; 3]) -> [f64; 3]) -> Vec<f64> {
        self.node_positions().into_iter().flat_map(f).collect()
    }

    /// Node indices on a boundary face.
    pub fn face_nodes(&self, face: Face) -> Vec<usize> {
        let m = self.line_len();
        let fixed = if face.is_max() { m - 1 } else { 0 };
        let mut out = Vec::with_capacity(m * m);
        for s in 0..m {
            for r in 0..m {
                let ijk = match face.axis() {
                    0 => [fixed, r, s],
                    1 => [r, fixed, s],
                    _ => [r, s, fixed],
                };
                out.push(ijk[0] + m * (ijk[1] + m * ijk[2]));
            }
        }
        out
    }

    /// Constrains all components on `faces` to `g(X)`.
    pub fn set_dirichlet(&mut self, faces: &[Face], g: impl Fn([f64; 3]) -> [f64; 3]) {
        let pos = self.node_positions();
        for &face in faces {
            for node in self.face_nodes(face) {
                let v = g(pos[node]);
                for c in 0..3 {
                    self.dirichlet.mask[3 * node + c] = true;
                    self.dirichlet.values[3 * node + c] = v[c];
                }
            }
        }
    }

    /// Homogeneous constraints on `faces`.
    pub fn clamp(&mut self, faces: &[Face]) {
        for &face in faces {
            for node in self.face_nodes(face) {
                for c in 0..3 {
                    self.dirichlet.mask[3 * node + c] = true;
                    self.dirichlet.values[3 * node + c] = 0.0;
                }
            }
        }
    }

    /// Constrained faces copied from another level of the same cube.
    pub fn copy_constraint_faces(&mut self, other: &FeLevel) {
        for face in Face::ALL {
            let nodes = other.face_nodes(face);
            if nodes.iter().all(|&n| other.dirichlet.mask[3 * n]) {
                self.clamp(&[face]);
            }
        }
    }
}

fn compute_geometry(mesh: &HexMesh, basis: &Basis1d, mapping: &Mapping) -> Result<Geometry, MeshError> {
    let map_nodes = basis::gauss_lobatto(mapping.degree);
    let nq = basis.n_q();
    let nm = map_nodes.len();
    let v: Vec<Vec<f64>> = basis.qpoints.iter().map(|&x| basis::lagrange_values(&map_nodes, x)).collect();
    let dv: Vec<Vec<f64>> =
        basis.qpoints.iter().map(|&x| basis::lagrange_derivatives(&map_nodes, x)).collect();
    let n_el = mesh.n_elements();
    let nq3 = nq * nq * nq;
    let mut geo = Geometry {
        j0: Vec::with_capacity(n_el * nq3),
        j0_inv: Vec::with_capacity(n_el * nq3),
        jxw: Vec::with_capacity(n_el * nq3),
    };
    for e in 0..n_el {
        let nodes = mapping.element_nodes(e);
        for qz in 0..nq {
            for qy in 0..nq {
                for qx in 0..nq {
                    let mut j = [[0.0; 3]; 3];
                    for c in 0..nm {
                        for b in 0..nm {
                            for a in 0..nm {
                                let g = [
                                    dv[qx][a] * v[qy][b] * v[qz][c],
                                    v[qx][a] * dv[qy][b] * v[qz][c],
                                    v[qx][a] * v[qy][b] * dv[qz][c],
                                ];
                                let x = nodes[a + nm * (b + nm * c)];
                                for r in 0..3 {
                                    for s in 0..3 {
                                        j[r][s] += x[r] * g[s];
                                    }
                                }
                            }
                        }
                    }
                    let j = Tensor2 { m: j };
                    let det = j.determinant();
                    if !(det > 0.0) {
                        return Err(MeshError::DegenerateMapping { element: e, det });
                    }
                    let w = basis.qweights[qx] * basis.qweights[qy] * basis.qweights[qz];
                    geo.j0_inv.push(j.inverse_unchecked_with_det(det));
                    geo.j0.push(j);
                    geo.jxw.push(det * w);
                }
            }
        }
    }
    Ok(geo)
}
