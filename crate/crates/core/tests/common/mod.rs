//! Dense, independently coded re-implementation of the discrete step
//! systems, used as the oracle the banded production path is checked
//! against. Everything here works on plain `Vec` matrices with its own
//! basis evaluation, assembly loops, Gaussian elimination and fixed-point
//! iteration.

use mbfem::femspace::gauss_legendre;
use mbfem::geometry::BoundaryMotion;
use mbfem::problem::FixedProblem;

pub struct DenseOracle {
    pub element_count: usize,
    pub degree: usize,
    pub unknowns: usize,
}

impl DenseOracle {
    pub fn new(element_count: usize, degree: usize) -> Self {
        Self {
            element_count,
            degree,
            unknowns: degree * element_count - 1,
        }
    }

    fn local_node(&self, j: usize) -> f64 {
        j as f64 / self.degree as f64
    }

    fn basis(&self, j: usize, xi: f64) -> f64 {
        let mut p = 1.0;
        for m in 0..=self.degree {
            if m != j {
                p *= (xi - self.local_node(m)) / (self.local_node(j) - self.local_node(m));
            }
        }
        p
    }

    fn dbasis(&self, j: usize, xi: f64) -> f64 {
        let mut sum = 0.0;
        for m in 0..=self.degree {
            if m == j {
                continue;
            }
            let mut term = 1.0 / (self.local_node(j) - self.local_node(m));
            for l in 0..=self.degree {
                if l != j && l != m {
                    term *= (xi - self.local_node(l)) / (self.local_node(j) - self.local_node(l));
                }
            }
            sum += term;
        }
        sum
    }

    fn unknown(&self, e: usize, j: usize) -> Option<usize> {
        let g = e * self.degree + j;
        (g >= 1 && g <= self.unknowns).then(|| g - 1)
    }

    fn element_width(&self) -> f64 {
        1.0 / self.element_count as f64
    }

    /// Assemble a dense bilinear form with `points` Gauss points:
    /// `integral of c(y) * trial_d(phi_j) * test_d(phi_i)`.
    fn form(
        &self,
        points: usize,
        coefficient: impl Fn(f64) -> f64,
        trial_deriv: bool,
        test_deriv: bool,
    ) -> Vec<Vec<f64>> {
        let n = self.unknowns;
        let mut out = vec![vec![0.0; n]; n];
        let rule = gauss_legendre(points);
        let h = self.element_width();
        for e in 0..self.element_count {
            let y0 = h * e as f64;
            for (&p, &w) in rule.points.iter().zip(&rule.weights) {
                let y = y0 + h * p;
                let c = coefficient(y);
                for jl in 0..=self.degree {
                    let Some(gj) = self.unknown(e, jl) else {
                        continue;
                    };
                    let trial = if trial_deriv {
                        self.dbasis(jl, p) / h
                    } else {
                        self.basis(jl, p)
                    };
                    for il in 0..=self.degree {
                        let Some(gi) = self.unknown(e, il) else {
                            continue;
                        };
                        let test = if test_deriv {
                            self.dbasis(il, p) / h
                        } else {
                            self.basis(il, p)
                        };
                        out[gi][gj] += h * w * c * trial * test;
                    }
                }
            }
        }
        out
    }

    pub fn mass(&self) -> Vec<Vec<f64>> {
        self.form(self.degree + 2, |_| 1.0, false, false)
    }

    pub fn stiffness(&self) -> Vec<Vec<f64>> {
        self.form(self.degree + 2, |_| 1.0, true, true)
    }

    pub fn advection(&self, motion: &BoundaryMotion, t: f64) -> Vec<Vec<f64>> {
        self.form(
            self.degree + 2,
            |y| motion.b1(y, t).expect("valid motion"),
            true,
            false,
        )
    }

    /// Load vector with the production rule's point count (`k + 2`) so
    /// non-polynomial forcing integrates to the same values.
    pub fn load(&self, g: impl Fn(f64) -> f64) -> Vec<f64> {
        let n = self.unknowns;
        let mut out = vec![0.0; n];
        let rule = gauss_legendre(self.degree + 2);
        let h = self.element_width();
        for e in 0..self.element_count {
            let y0 = h * e as f64;
            for (&p, &w) in rule.points.iter().zip(&rule.weights) {
                let y = y0 + h * p;
                let gv = g(y);
                for il in 0..=self.degree {
                    if let Some(gi) = self.unknown(e, il) {
                        out[gi] += h * w * gv * self.basis(il, p);
                    }
                }
            }
        }
        out
    }

    pub fn integral(&self, coef: &[f64]) -> f64 {
        let rule = gauss_legendre(self.degree + 2);
        let h = self.element_width();
        let mut total = 0.0;
        for e in 0..self.element_count {
            for (&p, &w) in rule.points.iter().zip(&rule.weights) {
                let mut v = 0.0;
                for jl in 0..=self.degree {
                    if let Some(gj) = self.unknown(e, jl) {
                        v += coef[gj] * self.basis(jl, p);
                    }
                }
                total += h * w * v;
            }
        }
        total
    }
}

#[allow(clippy::needless_range_loop)]
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for c in 0..n {
        let pivot = (c..n)
            .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
            .unwrap();
        a.swap(c, pivot);
        b.swap(c, pivot);
        assert!(a[c][c] != 0.0, "oracle system is singular");
        for r in (c + 1)..n {
            let f = a[r][c] / a[c][c];
            for j in c..n {
                a[r][j] -= f * a[c][j];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut s = b[r];
        for j in (r + 1)..n {
            s -= a[r][j] * x[j];
        }
        x[r] = s / a[r][r];
    }
    x
}

fn mat_vec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(r, v)| r * v).sum())
        .collect()
}

fn combine(terms: &[(f64, &Vec<Vec<f64>>)]) -> Vec<Vec<f64>> {
    let n = terms[0].1.len();
    let mut out = vec![vec![0.0; n]; n];
    for &(c, m) in terms {
        for i in 0..n {
            for j in 0..n {
                out[i][j] += c * m[i][j];
            }
        }
    }
    out
}

fn max_change(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(u, v)| (u - v).abs()))
        .fold(0.0, f64::max)
}

/// Dense re-implementation of one backward Euler step with its own
/// fixed-point loop.
pub fn oracle_euler_step(
    oracle: &DenseOracle,
    problem: &FixedProblem,
    prev: &[Vec<f64>],
    delta: f64,
    t_next: f64,
    tol: f64,
    max_iterations: usize,
) -> Vec<Vec<f64>> {
    let mass = oracle.mass();
    let stiffness = oracle.stiffness();
    let advection = oracle.advection(&problem.motion, t_next);
    let b2 = problem.motion.b2(t_next).unwrap();
    let gamma = problem.motion.gamma(t_next).unwrap();
    let loads: Vec<Vec<f64>> = problem
        .forcing
        .iter()
        .map(|g| oracle.load(|y| g(y, t_next)))
        .collect();
    let mut current: Vec<Vec<f64>> = prev.to_vec();
    for _ in 0..max_iterations {
        let l: Vec<f64> = current.iter().map(|v| gamma * oracle.integral(v)).collect();
        let mut next = Vec::with_capacity(prev.len());
        for (i, v_prev) in prev.iter().enumerate() {
            let a = problem.diffusion[i].eval(&l).unwrap();
            let system = combine(&[
                (1.0, &mass),
                (delta * b2 * a, &stiffness),
                (-delta, &advection),
            ]);
            let mut rhs = mat_vec(&mass, v_prev);
            for (r, g) in rhs.iter_mut().zip(&loads[i]) {
                *r += delta * g;
            }
            next.push(dense_solve(system, rhs));
        }
        let change = max_change(&next, &current);
        current = next;
        if change <= tol {
            return current;
        }
    }
    panic!("oracle fixed point did not converge");
}

/// Dense re-implementation of one Crank-Nicolson step.
pub fn oracle_cn_step(
    oracle: &DenseOracle,
    problem: &FixedProblem,
    prev: &[Vec<f64>],
    delta: f64,
    t_mid: f64,
    tol: f64,
    max_iterations: usize,
) -> Vec<Vec<f64>> {
    let (mass, stiffness) = (oracle.mass(), oracle.stiffness());
    let advection = oracle.advection(&problem.motion, t_mid);
    let b2 = problem.motion.b2(t_mid).unwrap();
    let gamma = problem.motion.gamma(t_mid).unwrap();
    let loads: Vec<Vec<f64>> = problem
        .forcing
        .iter()
        .map(|g| oracle.load(|y| g(y, t_mid)))
        .collect();
    let mut current: Vec<Vec<f64>> = prev.to_vec();
    for _ in 0..max_iterations {
        let l: Vec<f64> = current
            .iter()
            .zip(prev)
            .map(|(v, p)| {
                let avg: Vec<f64> = v.iter().zip(p).map(|(a, b)| 0.5 * (a + b)).collect();
                gamma * oracle.integral(&avg)
            })
            .collect();
        let next = oracle_cn_solve(
            oracle, problem, prev, &l, delta, b2, &mass, &stiffness, &advection, &loads,
        );
        let change = max_change(&next, &current);
        current = next;
        if change <= tol {
            return current;
        }
    }
    panic!("oracle fixed point did not converge");
}

#[allow(clippy::too_many_arguments)]
fn oracle_cn_solve(
    _oracle: &DenseOracle,
    problem: &FixedProblem,
    prev: &[Vec<f64>],
    l: &[f64],
    delta: f64,
    b2: f64,
    mass: &Vec<Vec<f64>>,
    stiffness: &Vec<Vec<f64>>,
    advection: &Vec<Vec<f64>>,
    loads: &[Vec<f64>],
) -> Vec<Vec<f64>> {
    let mut next = Vec::with_capacity(prev.len());
    for (i, v_prev) in prev.iter().enumerate() {
        let a = problem.diffusion[i].eval(l).unwrap();
        let c = 0.5 * delta * b2 * a;
        let system = combine(&[(1.0, mass), (c, stiffness), (-0.5 * delta, advection)]);
        let rhs_m = combine(&[(1.0, mass), (-c, stiffness), (0.5 * delta, advection)]);
        let mut rhs = mat_vec(&rhs_m, v_prev);
        for (r, g) in rhs.iter_mut().zip(&loads[i]) {
            *r += delta * g;
        }
        next.push(dense_solve(system, rhs));
    }
    next
}

/// Dense re-implementation of a linearized Crank-Nicolson multistep
/// level: diffusion frozen at the extrapolation of the two previous
/// levels, one linear solve per equation.
pub fn oracle_lcn_step(
    oracle: &DenseOracle,
    problem: &FixedProblem,
    prev: &[Vec<f64>],
    prev_prev: &[Vec<f64>],
    delta: f64,
    t_mid: f64,
) -> Vec<Vec<f64>> {
    let (mass, stiffness) = (oracle.mass(), oracle.stiffness());
    let advection = oracle.advection(&problem.motion, t_mid);
    let b2 = problem.motion.b2(t_mid).unwrap();
    let gamma = problem.motion.gamma(t_mid).unwrap();
    let loads: Vec<Vec<f64>> = problem
        .forcing
        .iter()
        .map(|g| oracle.load(|y| g(y, t_mid)))
        .collect();
    let l: Vec<f64> = prev
        .iter()
        .zip(prev_prev)
        .map(|(v1, v2)| {
            let extrap: Vec<f64> = v1.iter().zip(v2).map(|(a, b)| 1.5 * a - 0.5 * b).collect();
            gamma * oracle.integral(&extrap)
        })
        .collect();
    oracle_cn_solve(
        oracle, problem, prev, &l, delta, b2, &mass, &stiffness, &advection, &loads,
    )
}
