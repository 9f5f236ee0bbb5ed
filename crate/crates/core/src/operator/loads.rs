//! Load vectors, always integrated over the reference configuration.

use crate::mesh::basis::{gauss_legendre, lagrange_values};
use crate::mesh::{Face, FeLevel};

use super::kernel::{integrate_values, Tables, Work};

fn scatter(level: &FeLevel, e: usize, ye: &[f64], out: &mut [f64]) {
    let nd3 = level.nodes_per_element();
    let base = level.element_base(e);
    for (n, &off) in level.offsets().iter().enumerate() {
        for c in 0..3 {
            out[3 * (base + off) + c] += ye[c * nd3 + n];
        }
    }
}

/// `∫ B · v dX` for a body force `B(X)` per unit reference volume.
pub fn assemble_body_force(level: &FeLevel, b: impl Fn([f64; 3]) -> [f64; 3]) -> Vec<f64> {
    let tables = Tables::<f64>::new(&level.basis);
    let mut w = Work::new(&tables);
    let nq3 = level.qp_per_element();
    let mut out = vec![0.0; level.n_dofs()];
    let mut vals = vec![0.0; 3 * nq3];
    let (mut t1, mut t2) = (vec![0.0; w.xe.len().max(nq3)], vec![0.0; w.xe.len().max(nq3)]);
    for e in 0..level.n_elements() {
        for (q, x) in level.qp_positions(e).into_iter().enumerate() {
            let f = b(x);
            let jxw = level.geometry.jxw[e * nq3 + q];
            for c in 0..3 {
                vals[c * nq3 + q] = f[c] * jxw;
            }
        }
        integrate_values(&tables, &vals, &mut w.ye, &mut t1, &mut t2);
        scatter(level, e, &w.ye, &mut out);
    }
    out
}

/// `∫ h · v dA` over a face of the reference configuration with `(p + 1)²`
/// Gauss points; `h(X, N)` receives the outward unit normal.
pub fn assemble_traction(
    level: &FeLevel,
    face: Face,
    h: impl Fn([f64; 3], [f64; 3]) -> [f64; 3],
) -> Vec<f64> {
    let p = level.degree();
    let nd = p + 1;
    let nd3 = nd.pow(3);
    let axis = face.axis();
    let (a, b) = match axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    // orientation of T_a × T_b relative to the outward normal
    let sign = if (axis == 1) ^ face.is_max() { 1.0 } else { -1.0 };
    let fixed = if face.is_max() { 1.0 } else { 0.0 };
    let (pts, wts) = gauss_legendre(nd);
    let n = level.mesh.n();
    let hgt = level.mesh.h();
    let mut out = vec![0.0; level.n_dofs()];
    let mut ye = vec![0.0; 3 * nd3];
    for e in 0..level.n_elements() {
        let ijk = level.mesh.element_ijk(e);
        if ijk[axis] != if face.is_max() { n - 1 } else { 0 } {
            continue;
        }
        ye.iter_mut().for_each(|v| *v = 0.0);
        for (s, &ws) in pts.iter().zip(&wts) {
            for (t, &wt) in pts.iter().zip(&wts) {
                let mut xi = [0.0; 3];
                xi[axis] = fixed;
                xi[a] = *s;
                xi[b] = *t;
                let j = level.mapping.jacobian(e, xi);
                let ta = [j.m[0][a], j.m[1][a], j.m[2][a]];
                let tb = [j.m[0][b], j.m[1][b], j.m[2][b]];
                let cr = [
                    ta[1] * tb[2] - ta[2] * tb[1],
                    ta[2] * tb[0] - ta[0] * tb[2],
                    ta[0] * tb[1] - ta[1] * tb[0],
                ];
                let da = (cr[0] * cr[0] + cr[1] * cr[1] + cr[2] * cr[2]).sqrt();
                let normal = cr.map(|v| sign * v / da);
                let r = [
                    (ijk[0] as f64 + xi[0]) * hgt,
                    (ijk[1] as f64 + xi[1]) * hgt,
                    (ijk[2] as f64 + xi[2]) * hgt,
                ];
                let x = level.mapping.evaluate(r);
                let f = h(x, normal);
                let phi: [Vec<f64>; 3] = std::array::from_fn(|d| lagrange_values(&level.basis.nodes, xi[d]));
                let wgt = ws * wt * da;
                for k in 0..nd {
                    for jj in 0..nd {
                        for i in 0..nd {
                            let v = phi[0][i] * phi[1][jj] * phi[2][k];
                            if v == 0.0 {
                                continue;
                            }
                            let node = i + nd * (jj + nd * k);
                            for c in 0..3 {
                                ye[c * nd3 + node] += wgt * v * f[c];
                            }
                        }
                    }
                }
            }
        }
        scatter(level, e, &ye, &mut out);
    }
    out
}
