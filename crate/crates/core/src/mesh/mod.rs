//! Structured hexahedral meshes of a cube, continuous Lagrange spaces on them,
//! curved geometry mappings and the transfer operators of a multigrid hierarchy.

pub mod basis;
mod level;
mod transfer;

pub use basis::Basis1d;
pub use level::{Dirichlet, DirichletMode, FeLevel, Geometry};
pub use transfer::{Interp1d, Transfer};

use crate::tensor::Tensor2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeshError {
    #[error("invalid mesh configuration: {0}")]
    Config(String),
    #[error("degenerate mapping in element {element}: det J0 = {det:e}")]
    DegenerateMapping { element: usize, det: f64 },
    #[error("size mismatch: expected {expected}, got {found}")]
    SizeMismatch { expected: usize, found: usize },
}

/// Uniform hexahedral mesh of the cube `[0, extent]³`: `n0` elements per axis
/// refined `level` times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HexMesh {
    pub n0: usize,
    pub level: u32,
    pub extent: f64,
}

/// `n0³` elements refined `level` times.
pub fn build_cube(n0: usize, level: u32, extent: f64) -> Result<HexMesh, MeshError> {
    if n0 == 0 {
        return Err(MeshError::Config("n0 must be positive".into()));
    }
    if level > 20 {
        return Err(MeshError::Config(format!("refinement level {level} is too large")));
    }
    if !(extent > 0.0 && extent.is_finite()) {
        return Err(MeshError::Config("extent must be positive".into()));
    }
    Ok(HexMesh { n0, level, extent })
}

impl HexMesh {
    /// Elements per axis.
    pub fn n(&self) -> usize {
        self.n0 << self.level
    }

    pub fn n_elements(&self) -> usize {
        self.n().pow(3)
    }

    /// Element edge length.
    pub fn h(&self) -> f64 {
        self.extent / self.n() as f64
    }

    /// Element index of lattice position `(i, j, k)`, `i` fastest.
    pub fn element(&self, i: usize, j: usize, k: usize) -> usize {
        let n = self.n();
        i + n * (j + n * k)
    }

    pub fn element_ijk(&self, e: usize) -> [usize; 3] {
        let n = self.n();
        [e % n, (e / n) % n, e / (n * n)]
    }

    /// Once-coarsened mesh, if the level allows it.
    pub fn coarsened(&self) -> Option<HexMesh> {
        (self.level > 0).then(|| HexMesh { level: self.level - 1, ..*self })
    }
}

/// Number of unknowns of the degree-`p` vector-valued space on `mesh`.
pub fn count_dofs(mesh: &HexMesh, p: usize) -> usize {
    3 * (mesh.n() * p + 1).pow(3)
}

/// Boundary faces of the cube, by reference coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Face {
    XMin,
    XMax,
    YMin,
    YMax,
    ZMin,
    ZMax,
}

impl Face {
    pub const ALL: [Face; 6] = [Face::XMin, Face::XMax, Face::YMin, Face::YMax, Face::ZMin, Face::ZMax];

    pub fn axis(self) -> usize {
        match self {
            Face::XMin | Face::XMax => 0,
            Face::YMin | Face::YMax => 1,
            Face::ZMin | Face::ZMax => 2,
        }
    }

    pub fn is_max(self) -> bool {
        matches!(self, Face::XMax | Face::YMax | Face::ZMax)
    }
}

/// Deformation of the reference cube into the computational domain,
/// `x = X + A L (sin πY sin πZ, sin πZ sin πX, sin πX sin πY)` with
/// normalized coordinates `X/L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deformation {
    pub amplitude: f64,
}

impl Default for Deformation {
    fn default() -> Self {
        Deformation { amplitude: 0.05 }
    }
}

impl Deformation {
    pub fn identity() -> Self {
        Deformation { amplitude: 0.0 }
    }

    pub fn map(&self, extent: f64, x: [f64; 3]) -> [f64; 3] {
        use std::f64::consts::PI;
        let s = x.map(|v| (PI * v / extent).sin());
        let a = self.amplitude * extent;
        [x[0] + a * s[1] * s[2], x[1] + a * s[2] * s[0], x[2] + a * s[0] * s[1]]
    }
}

/// Geometry mapping of fixed polynomial degree `q`, stored as node positions
/// on the global Gauss–Lobatto lattice of the mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct Mapping {
    pub mesh: HexMesh,
    pub degree: usize,
    nodes1d: Vec<f64>,
    /// Positions of the lattice nodes, `i` fastest.
    pub coords: Vec<[f64; 3]>,
}

impl Mapping {
    /// Interpolant of `deformation` on `mesh`.
    pub fn new(mesh: &HexMesh, degree: usize, deformation: &Deformation) -> Result<Self, MeshError> {
        if degree == 0 {
            return Err(MeshError::Config("mapping degree must be positive".into()));
        }
        let nodes1d = basis::gauss_lobatto(degree);
        let line = lattice_coordinates(mesh, &nodes1d);
        let m = line.len();
        let mut coords = Vec::with_capacity(m * m * m);
        for k in 0..m {
            for j in 0..m {
                for i in 0..m {
                    coords.push(deformation.map(mesh.extent, [line[i], line[j], line[k]]));
                }
            }
        }
        Ok(Mapping { mesh: *mesh, degree, nodes1d, coords })
    }

    /// Interpolant of this mapping on another mesh of the same cube, with the same degree.
    pub fn interpolate_to(&self, mesh: &HexMesh) -> Result<Self, MeshError> {
        if (mesh.extent - self.mesh.extent).abs() > 0.0 {
            return Err(MeshError::Config("meshes cover different cubes".into()));
        }
        let line = lattice_coordinates(mesh, &self.nodes1d);
        let m = line.len();
        let mut coords = Vec::with_capacity(m * m * m);
        for k in 0..m {
            for j in 0..m {
                for i in 0..m {
                    coords.push(self.evaluate([line[i], line[j], line[k]]));
                }
            }
        }
        Ok(Mapping { mesh: *mesh, degree: self.degree, nodes1d: self.nodes1d.clone(), coords })
    }

    fn line_len(&self) -> usize {
        self.mesh.n() * self.degree + 1
    }

    /// Image of the reference point `x ∈ [0, extent]³`.
    pub fn evaluate(&self, x: [f64; 3]) -> [f64; 3] {
        let (elem, local) = locate(&self.mesh, x);
        let w: [Vec<f64>; 3] =
            std::array::from_fn(|d| basis::lagrange_values(&self.nodes1d, local[d]));
        let m = self.line_len();
        let q = self.degree;
        let mut out = [0.0; 3];
        for c in 0..=q {
            for b in 0..=q {
                for a in 0..=q {
                    let wt = w[0][a] * w[1][b] * w[2][c];
                    let idx = (elem[0] * q + a) + m * ((elem[1] * q + b) + m * (elem[2] * q + c));
                    for d in 0..3 {
                        out[d] += wt * self.coords[idx][d];
                    }
                }
            }
        }
        out
    }

    /// Node positions of element `e`, lexicographic.
    pub fn element_nodes(&self, e: usize) -> Vec<[f64; 3]> {
        let [ei, ej, ek] = self.mesh.element_ijk(e);
        let q = self.degree;
        let m = self.line_len();
        let mut out = Vec::with_capacity((q + 1).pow(3));
        for c in 0..=q {
            for b in 0..=q {
                for a in 0..=q {
                    out.push(self.coords[(ei * q + a) + m * ((ej * q + b) + m * (ek * q + c))]);
                }
            }
        }
        out
    }

    /// `∂x/∂ξ` at local coordinates `xi ∈ [0, 1]³` of element `e`.
    pub fn jacobian(&self, e: usize, xi: [f64; 3]) -> Tensor2<f64> {
        let nodes = self.element_nodes(e);
        let v: [Vec<f64>; 3] = std::array::from_fn(|d| basis::lagrange_values(&self.nodes1d, xi[d]));
        let dv: [Vec<f64>; 3] =
            std::array::from_fn(|d| basis::lagrange_derivatives(&self.nodes1d, xi[d]));
        let q = self.degree + 1;
        let mut j = [[0.0; 3]; 3];
        for c in 0..q {
            for b in 0..q {
                for a in 0..q {
                    let g = [dv[0][a] * v[1][b] * v[2][c], v[0][a] * dv[1][b] * v[2][c], v[0][a] * v[1][b] * dv[2][c]];
                    let x = nodes[a + q * (b + q * c)];
                    for r in 0..3 {
                        for s in 0..3 {
                            j[r][s] += x[r] * g[s];
                        }
                    }
                }
            }
        }
        Tensor2 { m: j }
    }
}

/// Polynomial degrees of a p-coarsening sequence: `p, ⌊p/2⌋, …, 1`.
pub fn degree_ladder(p: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut q = p;
    while q >= 1 {
        out.push(q);
        if q == 1 {
            break;
        }
        q /= 2;
    }
    out
}

/// Reference coordinates of the global 1D lattice with local nodes `nodes1d`.
pub(crate) fn lattice_coordinates(mesh: &HexMesh, nodes1d: &[f64]) -> Vec<f64> {
    let n = mesh.n();
    let q = nodes1d.len() - 1;
    let h = mesh.h();
    let mut out = Vec::with_capacity(n * q + 1);
    for e in 0..n {
        for &t in &nodes1d[..q] {
            out.push((e as f64 + t) * h);
        }
    }
    out.push(mesh.extent);
    out
}

/// Element lattice position and local coordinates of a reference point.
pub(crate) fn locate(mesh: &HexMesh, x: [f64; 3]) -> ([usize; 3], [f64; 3]) {
    let n = mesh.n();
    let mut elem = [0; 3];
    let mut local = [0.0; 3];
    for d in 0..3 {
        let t = x[d] / mesh.h();
        let e = (t.floor().max(0.0) as usize).min(n - 1);
        elem[d] = e;
        local[d] = t - e as f64;
    }
    (elem, local)
}
