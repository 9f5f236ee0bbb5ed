//! One-dimensional building blocks on the unit interval `[0, 1]`.

/// Gauss–Legendre rule with `n` points, weights summing to one.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut pts = vec![0.0; n];
    let mut wts = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        // map [-1, 1] -> [0, 1], ascending
        pts[n - 1 - i] = 0.5 * (x + 1.0);
        wts[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (pts, wts)
}

/// Legendre polynomial `P_n(x)` and its derivative.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss–Lobatto points for polynomial degree `p` (`p + 1` points including both ends).
pub fn gauss_lobatto(p: usize) -> Vec<f64> {
    assert!(p >= 1);
    let n = p + 1;
    let mut pts = vec![0.0; n];
    pts[0] = 0.0;
    pts[p] = 1.0;
    // interior points are the roots of P'_p
    for i in 1..p {
        let mut x = -(std::f64::consts::PI * i as f64 / p as f64).cos();
        for _ in 0..100 {
            // P'_p and P''_p from the Legendre ODE
            let (pp, dp) = legendre(p, x);
            let ddp = (2.0 * x * dp - (p * (p + 1)) as f64 * pp) / (1.0 - x * x);
            let dx = dp / ddp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        pts[i] = 0.5 * (x + 1.0);
    }
    pts
}

/// Values of the Lagrange polynomials on `nodes` at `x`.
pub fn lagrange_values(nodes: &[f64], x: f64) -> Vec<f64> {
    (0..nodes.len())
        .map(|i| {
            nodes
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &xj)| (x - xj) / (nodes[i] - xj))
                .product()
        })
        .collect()
}

/// Derivatives of the Lagrange polynomials on `nodes` at `x`.
pub fn lagrange_derivatives(nodes: &[f64], x: f64) -> Vec<f64> {
    let n = nodes.len();
    (0..n)
        .map(|i| {
            let mut sum = 0.0;
            for k in 0..n {
                if k == i {
                    continue;
                }
                let mut prod = 1.0 / (nodes[i] - nodes[k]);
                for j in 0..n {
                    if j != i && j != k {
                        prod *= (x - nodes[j]) / (nodes[i] - nodes[j]);
                    }
                }
                sum += prod;
            }
            sum
        })
        .collect()
}

/// Lagrange basis of degree `p` on Gauss–Lobatto nodes together with a
/// `(p + 1)`-point Gauss rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis1d {
    pub degree: usize,
    pub nodes: Vec<f64>,
    pub qpoints: Vec<f64>,
    pub qweights: Vec<f64>,
    /// `shape[q * n_nodes + i]` = `φ_i(x_q)`.
    pub shape: Vec<f64>,
    /// `grad[q * n_nodes + i]` = `φ_i'(x_q)`.
    pub grad: Vec<f64>,
    /// `colloc[q * n_q + r]` = derivative at `x_q` of the Lagrange polynomial
    /// through the quadrature points that is one at `x_r`.
    pub colloc: Vec<f64>,
}

impl Basis1d {
    pub fn new(degree: usize) -> Self {
        let nodes = gauss_lobatto(degree);
        let (qpoints, qweights) = gauss_legendre(degree + 1);
        let shape = qpoints.iter().flat_map(|&x| lagrange_values(&nodes, x)).collect();
        let grad = qpoints.iter().flat_map(|&x| lagrange_derivatives(&nodes, x)).collect();
        let colloc = qpoints.iter().flat_map(|&x| lagrange_derivatives(&qpoints, x)).collect();
        Basis1d { degree, nodes, qpoints, qweights, shape, grad, colloc }
    }

    pub fn n_nodes(&self) -> usize {
        self.degree + 1
    }

    pub fn n_q(&self) -> usize {
        self.qpoints.len()
    }
}
