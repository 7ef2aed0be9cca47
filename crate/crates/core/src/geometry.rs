//! Moving domain geometry and the boundary-fixing coordinate transform.
//!
//! The spatial domain at time `t` is the interval `(alpha(t), beta(t))`.
//! The transform `y = (x - alpha(t)) / gamma(t)` with
//! `gamma(t) = beta(t) - alpha(t)` maps it to the unit interval and turns
//! the boundary motion into the advection coefficient
//! `b1(y, t) = (alpha'(t) + gamma'(t) y) / gamma(t)` and the diffusion
//! scaling `b2(t) = 1 / gamma(t)^2`.

use std::sync::Arc;

use crate::{Error, Result};

/// Scalar function of time shared across threads.
pub type TimeFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Boundary curves of the moving domain together with their derivatives
/// and the user-declared bounds that the stability conditions use.
///
/// Derivatives are supplied as closures rather than derived symbolically;
/// [`BoundaryMotion::validate`] cross-checks them against central finite
/// differences and samples the declared bounds.
#[derive(Clone)]
pub struct BoundaryMotion {
    alpha: TimeFn,
    beta: TimeFn,
    alpha_prime: TimeFn,
    beta_prime: TimeFn,
    gamma0: f64,
    gamma1: f64,
    gamma_prime_max: f64,
    alpha_prime_max: f64,
}

impl std::fmt::Debug for BoundaryMotion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BoundaryMotion")
            .field("gamma0", &self.gamma0)
            .field("gamma1", &self.gamma1)
            .field("gamma_prime_max", &self.gamma_prime_max)
            .field("alpha_prime_max", &self.alpha_prime_max)
            .finish_non_exhaustive()
    }
}

/// Outcome of sampling a motion against its declared bounds.
#[derive(Debug, Clone, Default)]
pub struct MotionReport {
    pub failures: Vec<String>,
    pub warnings: Vec<String>,
    /// Whether `gamma` was nondecreasing over the sampled range.
    pub gamma_nondecreasing: bool,
}

impl MotionReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl BoundaryMotion {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        alpha: impl Fn(f64) -> f64 + Send + Sync + 'static,
        beta: impl Fn(f64) -> f64 + Send + Sync + 'static,
        alpha_prime: impl Fn(f64) -> f64 + Send + Sync + 'static,
        beta_prime: impl Fn(f64) -> f64 + Send + Sync + 'static,
        gamma0: f64,
        gamma1: f64,
        gamma_prime_max: f64,
        alpha_prime_max: f64,
    ) -> Self {
        assert!(gamma0 > 0.0 && gamma1 >= gamma0);
        assert!(gamma_prime_max >= 0.0 && alpha_prime_max >= 0.0);
        Self {
            alpha: Arc::new(alpha),
            beta: Arc::new(beta),
            alpha_prime: Arc::new(alpha_prime),
            beta_prime: Arc::new(beta_prime),
            gamma0,
            gamma1,
            gamma_prime_max,
            alpha_prime_max,
        }
    }

    /// The fixed unit interval: `alpha = 0`, `beta = 1`.
    pub fn identity() -> Self {
        Self::new(|_| 0.0, |_| 1.0, |_| 0.0, |_| 0.0, 1.0, 1.0, 0.0, 0.0)
    }

    pub fn alpha(&self, t: f64) -> f64 {
        (self.alpha)(t)
    }

    pub fn beta(&self, t: f64) -> f64 {
        (self.beta)(t)
    }

    pub fn alpha_prime(&self, t: f64) -> f64 {
        (self.alpha_prime)(t)
    }

    pub fn beta_prime(&self, t: f64) -> f64 {
        (self.beta_prime)(t)
    }

    pub fn gamma_prime(&self, t: f64) -> f64 {
        self.beta_prime(t) - self.alpha_prime(t)
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    pub fn gamma1(&self) -> f64 {
        self.gamma1
    }

    pub fn gamma_prime_max(&self) -> f64 {
        self.gamma_prime_max
    }

    pub fn alpha_prime_max(&self) -> f64 {
        self.alpha_prime_max
    }

    /// Domain width `gamma(t) = beta(t) - alpha(t)`.
    pub fn gamma(&self, t: f64) -> Result<f64> {
        let g = self.beta(t) - self.alpha(t);
        if g > 0.0 {
            Ok(g)
        } else {
            Err(Error::DomainCollapse { t, gamma: g })
        }
    }

    /// Advection coefficient `b1(y, t)`; affine in `y` for fixed `t`.
    pub fn b1(&self, y: f64, t: f64) -> Result<f64> {
        let g = self.gamma(t)?;
        Ok((self.alpha_prime(t) + self.gamma_prime(t) * y) / g)
    }

    /// Diffusion scaling `b2(t) = 1 / gamma(t)^2`.
    pub fn b2(&self, t: f64) -> Result<f64> {
        let g = self.gamma(t)?;
        Ok(1.0 / (g * g))
    }

    /// Map a physical coordinate onto the unit interval.
    pub fn to_fixed(&self, x: f64, t: f64) -> Result<f64> {
        let g = self.gamma(t)?;
        let a = self.alpha(t);
        let slack = 1e-10 * g;
        if x < a - slack || x > a + g + slack {
            return Err(Error::OutOfDomain {
                x,
                t,
                lower: a,
                upper: a + g,
            });
        }
        Ok(((x - a) / g).clamp(0.0, 1.0))
    }

    /// Map a unit-interval coordinate back to the moving domain.
    pub fn to_moving(&self, y: f64, t: f64) -> f64 {
        let a = self.alpha(t);
        a + (self.beta(t) - a) * y
    }

    /// Sample `[0, horizon]` uniformly and report violations of the
    /// declared bounds. Derivative closures are cross-checked against
    /// central finite differences; a nonincreasing `gamma` is only a
    /// warning because the discrete schemes use the bounds, not
    /// monotonicity.
    pub fn validate(&self, horizon: f64, samples: usize) -> MotionReport {
        assert!(samples >= 2);
        self.validate_impl(horizon, samples)
    }

    /// [`validate`](Self::validate) with the default sample count.
    pub fn validate_default(&self, horizon: f64) -> MotionReport {
        self.validate_impl(horizon, Self::DEFAULT_VALIDATION_SAMPLES)
    }

    /// Exact suprema of user closures are unknowable; this many uniform
    /// samples stand in for them by default.
    pub const DEFAULT_VALIDATION_SAMPLES: usize = 1024;

    fn validate_impl(&self, horizon: f64, samples: usize) -> MotionReport {
        let mut report = MotionReport {
            gamma_nondecreasing: true,
            ..Default::default()
        };
        const FD_STEP: f64 = 1e-6;
        const FD_REL_TOL: f64 = 1e-4;
        let mut prev_gamma = f64::NEG_INFINITY;
        for s in 0..samples {
            let t = horizon * s as f64 / (samples - 1) as f64;
            let g = self.beta(t) - self.alpha(t);
            if g <= 0.0 {
                report
                    .failures
                    .push(format!("gamma({t}) = {g} is not positive"));
                prev_gamma = g;
                continue;
            }
            if g < self.gamma0 || g > self.gamma1 {
                report.failures.push(format!(
                    "gamma({t}) = {g} outside declared bounds [{}, {}]",
                    self.gamma0, self.gamma1
                ));
            }
            if self.alpha_prime(t).abs() > self.alpha_prime_max * (1.0 + 1e-12) {
                report.failures.push(format!(
                    "|alpha'({t})| = {} exceeds declared bound {}",
                    self.alpha_prime(t).abs(),
                    self.alpha_prime_max
                ));
            }
            if self.gamma_prime(t).abs() > self.gamma_prime_max * (1.0 + 1e-12) {
                report.failures.push(format!(
                    "|gamma'({t})| = {} exceeds declared bound {}",
                    self.gamma_prime(t).abs(),
                    self.gamma_prime_max
                ));
            }
            // Finite-difference cross-check, evaluated away from the ends
            // so central differences stay inside [0, horizon].
            let tc = t.clamp(FD_STEP, (horizon - FD_STEP).max(FD_STEP));
            let fd_alpha = (self.alpha(tc + FD_STEP) - self.alpha(tc - FD_STEP)) / (2.0 * FD_STEP);
            let fd_beta = (self.beta(tc + FD_STEP) - self.beta(tc - FD_STEP)) / (2.0 * FD_STEP);
            let scale_a = 1.0_f64.max(self.alpha_prime(tc).abs());
            let scale_b = 1.0_f64.max(self.beta_prime(tc).abs());
            if (fd_alpha - self.alpha_prime(tc)).abs() > FD_REL_TOL * scale_a {
                report.failures.push(format!(
                    "alpha'({tc}) = {} disagrees with finite difference {fd_alpha}",
                    self.alpha_prime(tc)
                ));
            }
            if (fd_beta - self.beta_prime(tc)).abs() > FD_REL_TOL * scale_b {
                report.failures.push(format!(
                    "beta'({tc}) = {} disagrees with finite difference {fd_beta}",
                    self.beta_prime(tc)
                ));
            }
            if g < prev_gamma - 1e-12 {
                report.gamma_nondecreasing = false;
            }
            prev_gamma = g;
        }
        if !report.gamma_nondecreasing {
            report
                .warnings
                .push("gamma is not nondecreasing over the sampled range".to_string());
        }
        report
    }
}
