//! Lagrange basis on the reference element [0, 1].

use ndarray::Array2;

/// Placement of the local interpolation nodes inside an element.
///
/// Equispaced nodes are the default and are adequate for the degrees the
/// solver targets (k <= 5); Gauss-Lobatto placement keeps the Lebesgue
/// constant small for higher degrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NodePlacement {
    #[default]
    Equispaced,
    GaussLobatto,
}

/// Degree-k nodal Lagrange basis on `[0, 1]`.
#[derive(Debug, Clone)]
pub struct LagrangeBasis {
    degree: usize,
    nodes: Vec<f64>,
}

impl LagrangeBasis {
    pub fn new(degree: usize, placement: NodePlacement) -> Self {
        assert!(degree >= 1);
        let nodes = match placement {
            NodePlacement::Equispaced => (0..=degree).map(|j| j as f64 / degree as f64).collect(),
            NodePlacement::GaussLobatto => lobatto_nodes(degree),
        };
        Self { degree, nodes }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Local node coordinates in `[0, 1]`, ascending; endpoints included.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Value of basis function `j` at reference coordinate `xi`.
    pub fn eval(&self, j: usize, xi: f64) -> f64 {
        let mut p = 1.0;
        for m in 0..self.nodes.len() {
            if m != j {
                p *= (xi - self.nodes[m]) / (self.nodes[j] - self.nodes[m]);
            }
        }
        p
    }

    /// Derivative of basis function `j` at `xi`, from the product-rule sum
    /// (stable at the nodes themselves, unlike the logarithmic form).
    pub fn eval_deriv(&self, j: usize, xi: f64) -> f64 {
        let n = self.nodes.len();
        let mut sum = 0.0;
        for m in 0..n {
            if m == j {
                continue;
            }
            let mut term = 1.0 / (self.nodes[j] - self.nodes[m]);
            for l in 0..n {
                if l != j && l != m {
                    term *= (xi - self.nodes[l]) / (self.nodes[j] - self.nodes[l]);
                }
            }
            sum += term;
        }
        sum
    }

    /// Tabulate values and derivatives of all basis functions at `points`;
    /// rows are points, columns are basis indices.
    pub fn tabulate(&self, points: &[f64]) -> (Array2<f64>, Array2<f64>) {
        let np = points.len();
        let nb = self.nodes.len();
        let mut values = Array2::zeros((np, nb));
        let mut derivs = Array2::zeros((np, nb));
        for (q, &xi) in points.iter().enumerate() {
            for j in 0..nb {
                values[(q, j)] = self.eval(j, xi);
                derivs[(q, j)] = self.eval_deriv(j, xi);
            }
        }
        (values, derivs)
    }
}

/// Gauss-Lobatto nodes of degree `k` on `[0, 1]`: the endpoints plus the
/// roots of P'_k, found by Newton iteration on the Legendre recurrence.
fn lobatto_nodes(degree: usize) -> Vec<f64> {
    let k = degree;
    let mut nodes = vec![0.0; k + 1];
    nodes[k] = 1.0;
    for (i, node) in nodes.iter_mut().enumerate().take(k).skip(1) {
        // Interior roots of P'_k, approximated by Chebyshev-Lobatto points.
        let mut x = (std::f64::consts::PI * (k - i) as f64 / k as f64).cos();
        for _ in 0..100 {
            let (_, dp, ddp) = legendre_with_second(k, x);
            let dx = dp / ddp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        *node = 0.5 * (1.0 + x);
    }
    nodes
}

fn legendre_with_second(n: usize, x: f64) -> (f64, f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for kk in 2..=n {
        let kf = kk as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let one_minus = 1.0 - x * x;
    let dp = n as f64 * (p0 - x * p1) / one_minus;
    // From the Legendre differential equation.
    let ddp = (2.0 * x * dp - (n * (n + 1)) as f64 * p1) / one_minus;
    (p1, dp, ddp)
}
