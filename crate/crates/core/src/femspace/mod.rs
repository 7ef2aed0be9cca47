//! Degree-k Lagrange finite element space on the unit interval with
//! homogeneous Dirichlet conditions, plus the matrix and vector assembly
//! the time-stepping schemes need.
//!
//! Unknowns are the interior global nodes numbered left to right;
//! boundary rows and columns are eliminated, never penalized. Quadrature
//! uses `k + 1` Gauss points for the bilinear forms (exact, the advection
//! coefficient is affine in `y`), `k + 2` points for load vectors and
//! `k + 3` points for Ritz right-hand sides and error norms.

mod banded;
mod lagrange;
mod quadrature;

pub use banded::{BandedLu, BandedMatrix};
pub use lagrange::{LagrangeBasis, NodePlacement};
pub use quadrature::{gauss_legendre, QuadratureRule};

use ndarray::{Array1, Array2};

use crate::geometry::BoundaryMotion;
use crate::{Error, Result};

/// Nodal coefficients of one equation: one value per interior global node.
pub type CoefVector = Array1<f64>;

/// Mesh grading for [`FemSpace::new`].
#[derive(Debug, Clone)]
pub enum Grading {
    Uniform(usize),
    Explicit(Vec<f64>),
}

/// Basis values and derivatives tabulated at one quadrature rule.
#[derive(Debug, Clone)]
struct TabulatedRule {
    rule: QuadratureRule,
    values: Array2<f64>,
    derivs: Array2<f64>,
}

impl TabulatedRule {
    fn new(basis: &LagrangeBasis, points: usize) -> Self {
        let rule = gauss_legendre(points);
        let (values, derivs) = basis.tabulate(&rule.points);
        Self {
            rule,
            values,
            derivs,
        }
    }
}

/// Continuous piecewise-polynomial space of degree `k` on a partition of
/// `(0, 1)`, vanishing at both endpoints.
#[derive(Debug, Clone)]
pub struct FemSpace {
    element_boundaries: Vec<f64>,
    degree: usize,
    basis: LagrangeBasis,
    interior_node_count: usize,
    node_positions: Vec<f64>,
    forms: TabulatedRule,
    load: TabulatedRule,
    fine: TabulatedRule,
}

impl FemSpace {
    /// Uniform mesh with `element_count` elements and equispaced local
    /// nodes.
    pub fn uniform(element_count: usize, degree: usize) -> Result<Self> {
        Self::new(
            Grading::Uniform(element_count),
            degree,
            NodePlacement::Equispaced,
        )
    }

    pub fn new(grading: Grading, degree: usize, placement: NodePlacement) -> Result<Self> {
        if !(1..=10).contains(&degree) {
            return Err(Error::InvalidSpace(format!(
                "degree {degree} outside the supported range 1..=10"
            )));
        }
        let element_boundaries = match grading {
            Grading::Uniform(n) => {
                if n < 2 {
                    return Err(Error::InvalidSpace(format!(
                        "element count {n} is below the minimum of 2"
                    )));
                }
                (0..=n).map(|i| i as f64 / n as f64).collect::<Vec<_>>()
            }
            Grading::Explicit(b) => b,
        };
        if element_boundaries.len() < 3 {
            return Err(Error::InvalidSpace("need at least 2 elements".to_string()));
        }
        if (element_boundaries[0]).abs() > 1e-14
            || (element_boundaries[element_boundaries.len() - 1] - 1.0).abs() > 1e-14
        {
            return Err(Error::InvalidSpace(
                "element boundaries must start at 0 and end at 1".to_string(),
            ));
        }
        for w in element_boundaries.windows(2) {
            if w[1] - w[0] <= 0.0 {
                return Err(Error::InvalidSpace(format!(
                    "degenerate element [{}, {}]",
                    w[0], w[1]
                )));
            }
        }

        let basis = LagrangeBasis::new(degree, placement);
        let element_count = element_boundaries.len() - 1;
        let interior_node_count = degree * element_count - 1;
        let mut node_positions = Vec::with_capacity(interior_node_count);
        for e in 0..element_count {
            let (a, b) = (element_boundaries[e], element_boundaries[e + 1]);
            for (j, &xi) in basis.nodes().iter().enumerate() {
                if e > 0 && j == 0 {
                    continue; // shared with the previous element
                }
                let g = e * degree + j;
                if g >= 1 && g <= interior_node_count {
                    node_positions.push(a + (b - a) * xi);
                }
            }
        }
        debug_assert_eq!(node_positions.len(), interior_node_count);

        let forms = TabulatedRule::new(&basis, degree + 1);
        let load = TabulatedRule::new(&basis, degree + 2);
        let fine = TabulatedRule::new(&basis, degree + 3);
        Ok(Self {
            element_boundaries,
            degree,
            basis,
            interior_node_count,
            node_positions,
            forms,
            load,
            fine,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn element_count(&self) -> usize {
        self.element_boundaries.len() - 1
    }

    pub fn element_boundaries(&self) -> &[f64] {
        &self.element_boundaries
    }

    pub fn interior_node_count(&self) -> usize {
        self.interior_node_count
    }

    /// Positions of the interior global nodes, left to right.
    pub fn node_positions(&self) -> &[f64] {
        &self.node_positions
    }

    pub fn basis(&self) -> &LagrangeBasis {
        &self.basis
    }

    /// Largest element width.
    pub fn h_max(&self) -> f64 {
        self.element_boundaries
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// Unknown index of local node `j` of element `e`, or `None` for the
    /// two boundary nodes.
    fn unknown_index(&self, e: usize, j: usize) -> Option<usize> {
        let g = e * self.degree + j;
        if g >= 1 && g <= self.interior_node_count {
            Some(g - 1)
        } else {
            None
        }
    }

    fn element_of(&self, y: f64) -> usize {
        let n = self.element_count();
        match self
            .element_boundaries
            .binary_search_by(|b| b.total_cmp(&y))
        {
            Ok(i) => i.min(n - 1),
            Err(i) => i.saturating_sub(1).min(n - 1),
        }
    }

    /// Nodal interpolant of `f`; the resulting finite element function
    /// agrees with `f` at every interior node.
    pub fn interpolate(&self, f: impl Fn(f64) -> f64) -> CoefVector {
        Array1::from_iter(self.node_positions.iter().map(|&y| f(y)))
    }

    /// Mass matrix `M[i][j] = integral of phi_j phi_i`.
    pub fn assemble_mass(&self) -> BandedMatrix {
        let mut m = BandedMatrix::zeros(self.interior_node_count, self.degree);
        let t = &self.forms;
        for e in 0..self.element_count() {
            let h = self.element_boundaries[e + 1] - self.element_boundaries[e];
            for jl in 0..=self.degree {
                let Some(gj) = self.unknown_index(e, jl) else {
                    continue;
                };
                for il in 0..=self.degree {
                    let Some(gi) = self.unknown_index(e, il) else {
                        continue;
                    };
                    let mut s = 0.0;
                    for q in 0..t.rule.len() {
                        s += t.rule.weights[q] * t.values[(q, il)] * t.values[(q, jl)];
                    }
                    m.add(gi, gj, h * s);
                }
            }
        }
        m
    }

    /// Stiffness matrix `A[i][j] = integral of phi_j' phi_i'`.
    pub fn assemble_stiffness(&self) -> BandedMatrix {
        let mut a = BandedMatrix::zeros(self.interior_node_count, self.degree);
        let t = &self.forms;
        for e in 0..self.element_count() {
            let h = self.element_boundaries[e + 1] - self.element_boundaries[e];
            for jl in 0..=self.degree {
                let Some(gj) = self.unknown_index(e, jl) else {
                    continue;
                };
                for il in 0..=self.degree {
                    let Some(gi) = self.unknown_index(e, il) else {
                        continue;
                    };
                    let mut s = 0.0;
                    for q in 0..t.rule.len() {
                        s += t.rule.weights[q] * t.derivs[(q, il)] * t.derivs[(q, jl)];
                    }
                    a.add(gi, gj, s / h);
                }
            }
        }
        a
    }

    /// Advection matrix `B(t)[i][j] = integral of b1(y, t) phi_j' phi_i`.
    /// The `k + 1`-point rule is exact: the integrand has degree `2k + 1`
    /// because `b1` is affine in `y`.
    pub fn assemble_advection(&self, motion: &BoundaryMotion, time: f64) -> Result<BandedMatrix> {
        let mut b = BandedMatrix::zeros(self.interior_node_count, self.degree);
        let t = &self.forms;
        for e in 0..self.element_count() {
            let (lo, hi) = (self.element_boundaries[e], self.element_boundaries[e + 1]);
            let h = hi - lo;
            let b1q: Vec<f64> = t
                .rule
                .points
                .iter()
                .map(|&xi| motion.b1(lo + h * xi, time))
                .collect::<Result<_>>()?;
            // The h from dy and the 1/h from phi_j' cancel.
            for jl in 0..=self.degree {
                let Some(gj) = self.unknown_index(e, jl) else {
                    continue;
                };
                for il in 0..=self.degree {
                    let Some(gi) = self.unknown_index(e, il) else {
                        continue;
                    };
                    let mut s = 0.0;
                    for (q, &b1v) in b1q.iter().enumerate() {
                        s += t.rule.weights[q] * b1v * t.derivs[(q, jl)] * t.values[(q, il)];
                    }
                    b.add(gi, gj, s);
                }
            }
        }
        Ok(b)
    }

    /// Load vector `G[i] = integral of g(y, t) phi_i`, over-integrated
    /// with `k + 2` points.
    pub fn assemble_load(&self, g: impl Fn(f64, f64) -> f64, time: f64) -> Result<CoefVector> {
        let mut out = Array1::zeros(self.interior_node_count);
        let t = &self.load;
        for e in 0..self.element_count() {
            let (lo, hi) = (self.element_boundaries[e], self.element_boundaries[e + 1]);
            let h = hi - lo;
            for q in 0..t.rule.len() {
                let y = lo + h * t.rule.points[q];
                let gv = g(y, time);
                if !gv.is_finite() {
                    return Err(Error::Evaluation(format!(
                        "load integrand is {gv} at y = {y}, t = {time}"
                    )));
                }
                let w = h * t.rule.weights[q] * gv;
                for il in 0..=self.degree {
                    if let Some(gi) = self.unknown_index(e, il) {
                        out[gi] += w * t.values[(q, il)];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Value of the finite element function at `y` in `[0, 1]`.
    pub fn evaluate(&self, coef: &CoefVector, y: f64) -> f64 {
        assert_eq!(coef.len(), self.interior_node_count);
        let e = self.element_of(y.clamp(0.0, 1.0));
        let (lo, hi) = (self.element_boundaries[e], self.element_boundaries[e + 1]);
        let xi = (y - lo) / (hi - lo);
        let mut v = 0.0;
        for j in 0..=self.degree {
            if let Some(g) = self.unknown_index(e, j) {
                v += coef[g] * self.basis.eval(j, xi);
            }
        }
        v
    }

    /// `integral of V dy` over `(0, 1)`, exact for finite element
    /// functions.
    pub fn integral(&self, coef: &CoefVector) -> f64 {
        assert_eq!(coef.len(), self.interior_node_count);
        let t = &self.forms;
        let mut total = 0.0;
        for e in 0..self.element_count() {
            let h = self.element_boundaries[e + 1] - self.element_boundaries[e];
            for q in 0..t.rule.len() {
                let mut v = 0.0;
                for j in 0..=self.degree {
                    if let Some(g) = self.unknown_index(e, j) {
                        v += coef[g] * t.values[(q, j)];
                    }
                }
                total += h * t.rule.weights[q] * v;
            }
        }
        total
    }

    /// Nonlocal functional `l(V) = gamma(t) * integral of V dy`, the
    /// argument fed to the diffusion coefficients.
    pub fn nonlocal_value(
        &self,
        coef: &CoefVector,
        motion: &BoundaryMotion,
        t: f64,
    ) -> Result<f64> {
        Ok(motion.gamma(t)? * self.integral(coef))
    }

    /// `sqrt(coef^T M coef)`, evaluated by element quadrature.
    pub fn l2_norm(&self, coef: &CoefVector) -> f64 {
        assert_eq!(coef.len(), self.interior_node_count);
        let t = &self.forms;
        let mut total = 0.0;
        for e in 0..self.element_count() {
            let h = self.element_boundaries[e + 1] - self.element_boundaries[e];
            for q in 0..t.rule.len() {
                let mut v = 0.0;
                for j in 0..=self.degree {
                    if let Some(g) = self.unknown_index(e, j) {
                        v += coef[g] * t.values[(q, j)];
                    }
                }
                total += h * t.rule.weights[q] * v * v;
            }
        }
        total.sqrt()
    }

    /// L2 distance between the finite element function and an arbitrary
    /// `f`, with the fine (`k + 3` point) rule.
    pub fn l2_error(&self, coef: &CoefVector, f: impl Fn(f64) -> f64) -> f64 {
        assert_eq!(coef.len(), self.interior_node_count);
        let t = &self.fine;
        let mut total = 0.0;
        for e in 0..self.element_count() {
            let (lo, hi) = (self.element_boundaries[e], self.element_boundaries[e + 1]);
            let h = hi - lo;
            for q in 0..t.rule.len() {
                let y = lo + h * t.rule.points[q];
                let mut v = 0.0;
                for j in 0..=self.degree {
                    if let Some(g) = self.unknown_index(e, j) {
                        v += coef[g] * t.values[(q, j)];
                    }
                }
                let d = v - f(y);
                total += h * t.rule.weights[q] * d * d;
            }
        }
        total.sqrt()
    }

    /// Ritz projection of `u`: the finite element function whose gradient
    /// matches `u`'s against every test gradient. The right-hand side is
    /// over-integrated with `k + 3` points. `u` must vanish at both ends;
    /// only its derivative enters the projection system.
    pub fn ritz_projection(
        &self,
        u: impl Fn(f64) -> f64,
        u_prime: impl Fn(f64) -> f64,
    ) -> Result<CoefVector> {
        debug_assert!(
            u(0.0).abs() < 1e-10 && u(1.0).abs() < 1e-10,
            "ritz projection expects homogeneous boundary values"
        );
        let mut rhs = Array1::zeros(self.interior_node_count);
        let t = &self.fine;
        for e in 0..self.element_count() {
            let (lo, hi) = (self.element_boundaries[e], self.element_boundaries[e + 1]);
            let h = hi - lo;
            for q in 0..t.rule.len() {
                let y = lo + h * t.rule.points[q];
                let w = t.rule.weights[q] * u_prime(y);
                for il in 0..=self.degree {
                    if let Some(gi) = self.unknown_index(e, il) {
                        // h from dy cancels against 1/h from phi_i'.
                        rhs[gi] += w * t.derivs[(q, il)];
                    }
                }
            }
        }
        let stiffness = self.assemble_stiffness();
        solve_banded(&stiffness, &rhs)
    }
}

/// Solve `matrix * x = rhs` by banded LU with partial pivoting and verify
/// the residual contract `max|Ax - b| <= 1e-10 (1 + max|b|)`.
pub fn solve_banded(matrix: &BandedMatrix, rhs: &CoefVector) -> Result<CoefVector> {
    let x = matrix.factor()?.solve(rhs);
    let residual = &matrix.matvec(&x) - rhs;
    let r = residual.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
    let b = rhs.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
    let tolerance = 1e-10 * (1.0 + b);
    if r > tolerance {
        return Err(Error::ResidualTooLarge {
            residual: r,
            tolerance,
        });
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BoundaryMotion;
    use ndarray::array;
    use std::f64::consts::PI;

    fn benchmark_motion() -> BoundaryMotion {
        BoundaryMotion::new(
            |t| -t / (1.0 + t),
            |t| 1.0 + 2.0 * t / (1.0 + t),
            |t| -1.0 / (1.0 + t).powi(2),
            |t| 2.0 / (1.0 + t).powi(2),
            1.0,
            4.0,
            3.0,
            1.0,
        )
    }

    #[test]
    fn space_construction_counts_nodes() {
        let s = FemSpace::uniform(2, 1).unwrap();
        assert_eq!(s.interior_node_count(), 1);
        assert!((s.node_positions()[0] - 0.5).abs() < 1e-15);

        let s = FemSpace::uniform(4, 5).unwrap();
        assert_eq!(s.interior_node_count(), 19);

        let s = FemSpace::uniform(3, 2).unwrap();
        assert_eq!(s.interior_node_count(), 5);
        assert!((s.h_max() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn explicit_grading_supports_nonuniform_meshes() {
        let s = FemSpace::new(
            Grading::Explicit(vec![0.0, 0.3, 0.7, 1.0]),
            2,
            NodePlacement::Equispaced,
        )
        .unwrap();
        assert_eq!(s.interior_node_count(), 5);
        assert!((s.h_max() - 0.4).abs() < 1e-15);
        // degree-2 space reproduces quadratics on any grading
        let c = s.interpolate(|y| y * (1.0 - y));
        assert!(s.l2_error(&c, |y| y * (1.0 - y)) < 1e-14);
        assert!((s.integral(&c) - 1.0 / 6.0).abs() < 1e-14);
        let m = s.assemble_mass();
        assert!(m.is_symmetric(1e-14));
        assert!(m.cholesky().is_ok());
    }

    #[test]
    fn degenerate_meshes_are_rejected() {
        assert!(matches!(
            FemSpace::new(
                Grading::Explicit(vec![0.0, 0.5, 0.5, 1.0]),
                1,
                NodePlacement::Equispaced
            ),
            Err(Error::InvalidSpace(_))
        ));
        assert!(FemSpace::uniform(1, 3).is_err());
        assert!(FemSpace::uniform(4, 0).is_err());
        assert!(FemSpace::uniform(4, 11).is_err());
    }

    #[test]
    fn interpolation_examples() {
        let s = FemSpace::uniform(2, 1).unwrap();
        let zero = s.interpolate(|_| 0.0);
        assert!(zero.iter().all(|&v| v == 0.0));

        let f = |y: f64| y * (1.0 - y);
        let c = s.interpolate(f);
        assert_eq!(c.len(), 1);
        assert!((c[0] - 0.25).abs() < 1e-15);

        // analytic interpolation error for the hat interpolant of y(1-y)
        let err = s.l2_error(&c, f);
        assert!((err - (1.0_f64 / 480.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn mass_matrix_analytic_stencils() {
        let s = FemSpace::uniform(2, 1).unwrap();
        let m = s.assemble_mass();
        assert!((m.get(0, 0) - 1.0 / 3.0).abs() < 1e-14);

        let s = FemSpace::uniform(4, 1).unwrap();
        let m = s.assemble_mass();
        let h = 0.25;
        for i in 0..3 {
            assert!((m.get(i, i) - 2.0 * h / 3.0).abs() < 1e-14);
            if i > 0 {
                assert!((m.get(i, i - 1) - h / 6.0).abs() < 1e-14);
                assert!((m.get(i - 1, i) - h / 6.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn mass_row_sums_match_basis_integrals_away_from_boundary() {
        // Interior hats integrate to h; row sums hit it once the row's
        // support stays away from the end elements.
        let s = FemSpace::uniform(6, 1).unwrap();
        let m = s.assemble_mass();
        let h = 1.0 / 6.0;
        for i in 1..4 {
            let sum: f64 = (0..s.interior_node_count()).map(|j| m.get(i, j)).sum();
            assert!((sum - h).abs() < 1e-14);
        }
    }

    #[test]
    fn stiffness_matrix_analytic_stencils() {
        let s = FemSpace::uniform(2, 1).unwrap();
        let a = s.assemble_stiffness();
        assert!((a.get(0, 0) - 4.0).abs() < 1e-13);

        let s = FemSpace::uniform(5, 1).unwrap();
        let a = s.assemble_stiffness();
        let h = 0.2;
        for i in 0..4 {
            assert!((a.get(i, i) - 2.0 / h).abs() < 1e-12);
            if i > 0 {
                assert!((a.get(i, i - 1) + 1.0 / h).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn stiffness_quadratic_form_approaches_dirichlet_energy() {
        // integral of (pi cos(pi y))^2 = pi^2 / 2
        let s = FemSpace::uniform(64, 2).unwrap();
        let c = s.interpolate(|y| (PI * y).sin());
        let a = s.assemble_stiffness();
        let form = a.bilinear(&c, &c);
        assert!((form - PI * PI / 2.0).abs() < 1e-5);
    }

    #[test]
    fn advection_zero_for_fixed_domain() {
        let s = FemSpace::uniform(4, 2).unwrap();
        let b = s
            .assemble_advection(&BoundaryMotion::identity(), 0.3)
            .unwrap();
        assert!(b.max_abs() < 1e-15);
    }

    #[test]
    fn advection_constant_b1_stencil() {
        // alpha' = c, gamma' = 0, gamma = 1 gives b1 = c everywhere.
        let c = 0.7;
        let motion = BoundaryMotion::new(
            move |t| c * t,
            move |t| 1.0 + c * t,
            move |_| c,
            move |_| c,
            1.0,
            1.0,
            0.0,
            c,
        );
        let s = FemSpace::uniform(5, 1).unwrap();
        let b = s.assemble_advection(&motion, 0.2).unwrap();
        for i in 0..s.interior_node_count() {
            assert!(b.get(i, i).abs() < 1e-14);
            if i > 0 {
                assert!((b.get(i, i - 1) + c / 2.0).abs() < 1e-14);
                assert!((b.get(i - 1, i) - c / 2.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn advection_mass_identity() {
        // V^T B V = -(gamma' / (2 gamma)) V^T M V for every V: the
        // integration-by-parts identity behind the stability proofs.
        let motion = benchmark_motion();
        for &(nel, k) in &[(4usize, 1usize), (3, 3), (5, 2)] {
            let s = FemSpace::uniform(nel, k).unwrap();
            let m = s.assemble_mass();
            for &t in &[0.0, 0.4, 1.0] {
                let b = s.assemble_advection(&motion, t).unwrap();
                let factor = motion.gamma_prime(t) / (2.0 * motion.gamma(t).unwrap());
                for seed in 0..5 {
                    let v = Array1::from_iter(
                        (0..s.interior_node_count()).map(|i| ((i * 37 + seed * 11) as f64).sin()),
                    );
                    let lhs = b.bilinear(&v, &v);
                    let rhs = -factor * m.bilinear(&v, &v);
                    assert!(
                        (lhs - rhs).abs() < 1e-12,
                        "nel={nel} k={k} t={t}: {lhs} vs {rhs}"
                    );
                }
            }
        }
    }

    #[test]
    fn load_examples() {
        let s = FemSpace::uniform(4, 1).unwrap();
        let zero = s.assemble_load(|_, _| 0.0, 0.0).unwrap();
        assert!(zero.iter().all(|&v| v == 0.0));

        let ones = s.assemble_load(|_, _| 1.0, 0.0).unwrap();
        for &v in ones.iter() {
            assert!((v - 0.25).abs() < 1e-14);
        }

        // g = phi_m reproduces column m of the mass matrix
        let s = FemSpace::uniform(3, 2).unwrap();
        let m = s.assemble_mass();
        let mid = 2; // a mid-element node
        let mut unit = Array1::zeros(s.interior_node_count());
        unit[mid] = 1.0;
        let g = s.assemble_load(|y, _| s.evaluate(&unit, y), 0.0).unwrap();
        for i in 0..s.interior_node_count() {
            assert!((g[i] - m.get(i, mid)).abs() < 1e-13);
        }
    }

    #[test]
    fn load_rejects_non_finite_values() {
        let s = FemSpace::uniform(2, 1).unwrap();
        assert!(matches!(
            s.assemble_load(|_, _| f64::NAN, 0.0),
            Err(Error::Evaluation(_))
        ));
    }

    #[test]
    fn nonlocal_value_examples() {
        let s = FemSpace::uniform(3, 2).unwrap();
        let zero = Array1::zeros(s.interior_node_count());
        assert_eq!(
            s.nonlocal_value(&zero, &BoundaryMotion::identity(), 0.0)
                .unwrap(),
            0.0
        );

        // degree 2 represents y(1 - y) exactly; integral is 1/6
        let c = s.interpolate(|y| y * (1.0 - y));
        let v = s
            .nonlocal_value(&c, &BoundaryMotion::identity(), 0.7)
            .unwrap();
        assert!((v - 1.0 / 6.0).abs() < 1e-14);

        let v = s.nonlocal_value(&c, &benchmark_motion(), 1.0).unwrap();
        assert!((v - 2.5 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn l2_norm_examples() {
        let s = FemSpace::uniform(2, 1).unwrap();
        let zero = Array1::zeros(1);
        assert_eq!(s.l2_norm(&zero), 0.0);
        assert!((s.l2_norm(&array![1.0]) - (1.0_f64 / 3.0).sqrt()).abs() < 1e-14);

        let s = FemSpace::uniform(200, 2).unwrap();
        let c = s.interpolate(|y| (PI * y).sin());
        assert!((s.l2_norm(&c) - 0.5_f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn ritz_projection_is_identity_on_the_space() {
        let s = FemSpace::uniform(4, 2).unwrap();
        // pick a function already in the space: the interpolant of any
        // coefficient vector
        let coef = Array1::from_iter((0..s.interior_node_count()).map(|i| (i as f64 * 0.7).cos()));
        let h = 1e-7;
        let u = |y: f64| s.evaluate(&coef, y);
        let up = |y: f64| {
            let lo = (y - h).max(0.0);
            let hi = (y + h).min(1.0);
            (s.evaluate(&coef, hi) - s.evaluate(&coef, lo)) / (hi - lo)
        };
        let proj = s.ritz_projection(u, up).unwrap();
        for i in 0..coef.len() {
            assert!((proj[i] - coef[i]).abs() < 1e-6);
        }
    }

    #[test]
    fn ritz_projection_exact_at_element_vertices() {
        // 1-D Ritz projection interpolates at the mesh vertices.
        for k in 1..=3 {
            let s = FemSpace::uniform(5, k).unwrap();
            let proj = s
                .ritz_projection(|y| (PI * y).sin(), |y| PI * (PI * y).cos())
                .unwrap();
            for e in 1..s.element_count() {
                let y = s.element_boundaries()[e];
                let exact = (PI * y).sin();
                assert!(
                    (s.evaluate(&proj, y) - exact).abs() < 1e-10,
                    "k={k}, vertex {y}"
                );
            }
        }
    }

    #[test]
    fn solve_banded_examples() {
        let s = FemSpace::uniform(2, 1).unwrap();
        let m = s.assemble_mass();
        let x = solve_banded(&m, &array![1.0]).unwrap();
        assert!((x[0] - 3.0).abs() < 1e-12);

        // mass system with rhs = M * ones has solution ones
        let s = FemSpace::uniform(6, 3).unwrap();
        let m = s.assemble_mass();
        let ones = Array1::ones(s.interior_node_count());
        let rhs = m.matvec(&ones);
        let x = solve_banded(&m, &rhs).unwrap();
        for &v in x.iter() {
            assert!((v - 1.0).abs() < 1e-11);
        }
    }

    #[test]
    fn mass_and_stiffness_are_spd() {
        for &(nel, k) in &[(4usize, 1usize), (3, 4), (6, 2)] {
            let s = FemSpace::uniform(nel, k).unwrap();
            let m = s.assemble_mass();
            let a = s.assemble_stiffness();
            assert!(m.is_symmetric(1e-14));
            assert!(a.is_symmetric(1e-14));
            assert!(m.cholesky().is_ok());
            assert!(a.cholesky().is_ok());
        }
    }

    #[test]
    fn gauss_lobatto_placement_builds_a_valid_space() {
        let s = FemSpace::new(Grading::Uniform(4), 6, NodePlacement::GaussLobatto).unwrap();
        assert_eq!(s.interior_node_count(), 23);
        let c = s.interpolate(|y| y * y * (1.0 - y));
        // cubic is reproduced exactly by a degree-6 space
        assert!(s.l2_error(&c, |y| y * y * (1.0 - y)) < 1e-14);
    }

    #[test]
    fn refinement_reproduces_coarse_functions() {
        // interpolating a coarse FE function on the refined mesh changes
        // nothing: the spaces are nested
        let coarse = FemSpace::uniform(3, 2).unwrap();
        let fine = FemSpace::uniform(6, 2).unwrap();
        let c = Array1::from_iter((0..coarse.interior_node_count()).map(|i| (i as f64).sin()));
        let refined = fine.interpolate(|y| coarse.evaluate(&c, y));
        for i in 0..=60 {
            let y = i as f64 / 60.0;
            assert!((fine.evaluate(&refined, y) - coarse.evaluate(&c, y)).abs() < 1e-13);
        }
    }
}
