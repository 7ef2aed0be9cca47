//! Banded matrices with LU factorization under partial pivoting.
//!
//! All matrices assembled by the solver share the same band profile: order
//! `n_p` with half-bandwidth equal to the polynomial degree `k`. Partial
//! pivoting widens the factored upper band to `2k`, which the compact
//! storage already accommodates because rows are left-aligned during
//! factorization.

use ndarray::{Array1, Array2};

use crate::{Error, Result};

/// Square banded matrix with equal lower and upper half-bandwidth.
///
/// Entry `(i, j)` with `|i - j| <= half_bandwidth` is stored at
/// `data[(i, j - i + half_bandwidth)]`; everything outside the band is
/// identically zero.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    order: usize,
    half_bandwidth: usize,
    data: Array2<f64>,
}

impl BandedMatrix {
    pub fn zeros(order: usize, half_bandwidth: usize) -> Self {
        assert!(order >= 1);
        Self {
            order,
            half_bandwidth,
            data: Array2::zeros((order, 2 * half_bandwidth + 1)),
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn half_bandwidth(&self) -> usize {
        self.half_bandwidth
    }

    fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.order && j < self.order && i.abs_diff(j) <= self.half_bandwidth
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.data[(i, j + self.half_bandwidth - i)]
        } else {
            0.0
        }
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside the band");
        self.data[(i, j + self.half_bandwidth - i)] = value;
    }

    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside the band");
        self.data[(i, j + self.half_bandwidth - i)] += value;
    }

    /// `self * x`.
    pub fn matvec(&self, x: &Array1<f64>) -> Array1<f64> {
        assert_eq!(x.len(), self.order);
        let k = self.half_bandwidth;
        let mut y = Array1::zeros(self.order);
        for i in 0..self.order {
            let lo = i.saturating_sub(k);
            let hi = (i + k).min(self.order - 1);
            let mut s = 0.0;
            for j in lo..=hi {
                s += self.data[(i, j + k - i)] * x[j];
            }
            y[i] = s;
        }
        y
    }

    /// `x^T self y`.
    pub fn bilinear(&self, x: &Array1<f64>, y: &Array1<f64>) -> f64 {
        x.dot(&self.matvec(y))
    }

    /// Linear combination of band-compatible matrices.
    pub fn linear_combination(terms: &[(f64, &BandedMatrix)]) -> BandedMatrix {
        let first = terms.first().expect("at least one term").1;
        let mut out = BandedMatrix::zeros(first.order, first.half_bandwidth);
        for &(c, m) in terms {
            assert_eq!(m.order, out.order);
            assert_eq!(m.half_bandwidth, out.half_bandwidth);
            out.data.scaled_add(c, &m.data);
        }
        out
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut out = Array2::zeros((self.order, self.order));
        for i in 0..self.order {
            for j in 0..self.order {
                out[(i, j)] = self.get(i, j);
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &v| m.max(v.abs()))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        for i in 0..self.order {
            let hi = (i + self.half_bandwidth).min(self.order - 1);
            for j in i..=hi {
                if (self.get(i, j) - self.get(j, i)).abs() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Banded Cholesky factor; fails on any nonpositive pivot, so success
    /// certifies positive definiteness of a symmetric matrix.
    pub fn cholesky(&self) -> Result<BandedMatrix> {
        let n = self.order;
        let m = self.half_bandwidth;
        let mut l = BandedMatrix::zeros(n, m);
        for j in 0..n {
            let lo = j.saturating_sub(m);
            let mut s = self.get(j, j);
            for p in lo..j {
                let v = l.get(j, p);
                s -= v * v;
            }
            if s <= 0.0 {
                return Err(Error::Singular { row: j });
            }
            let d = s.sqrt();
            l.set(j, j, d);
            for i in (j + 1)..=(j + m).min(n - 1) {
                let lo_i = i.saturating_sub(m).max(lo);
                let mut s = self.get(i, j);
                for p in lo_i..j {
                    s -= l.get(i, p) * l.get(j, p);
                }
                l.set(i, j, s / d);
            }
        }
        Ok(l)
    }

    /// LU factorization with partial pivoting. Rows are left-aligned in
    /// compact storage and the upper band widens to `2 * half_bandwidth`
    /// as eliminations shift columns.
    pub fn factor(&self) -> Result<BandedLu> {
        let n = self.order;
        let m = self.half_bandwidth;
        let mm = 2 * m + 1;
        let mut a = self.data.clone();
        let mut multipliers = Array2::zeros((n, m.max(1)));
        let mut pivots = vec![0usize; n];

        // Left-align the first m rows so column 0 always holds the entry
        // being eliminated.
        for i in 0..m.min(n) {
            let shift = m - i;
            for j in shift..mm {
                a[(i, j - shift)] = a[(i, j)];
            }
            for j in (mm - shift)..mm {
                a[(i, j)] = 0.0;
            }
        }

        for k in 0..n {
            let last = (k + m).min(n - 1);
            let mut piv = k;
            let mut piv_abs = a[(k, 0)].abs();
            for r in (k + 1)..=last {
                if a[(r, 0)].abs() > piv_abs {
                    piv_abs = a[(r, 0)].abs();
                    piv = r;
                }
            }
            pivots[k] = piv;
            if piv_abs < f64::MIN_POSITIVE {
                return Err(Error::Singular { row: k });
            }
            if piv != k {
                for j in 0..mm {
                    a.swap((k, j), (piv, j));
                }
            }
            for r in (k + 1)..=last {
                let mult = a[(r, 0)] / a[(k, 0)];
                multipliers[(k, r - k - 1)] = mult;
                for j in 1..mm {
                    a[(r, j - 1)] = a[(r, j)] - mult * a[(k, j)];
                }
                a[(r, mm - 1)] = 0.0;
            }
        }

        Ok(BandedLu {
            order: n,
            half_bandwidth: m,
            upper: a,
            multipliers,
            pivots,
        })
    }
}

/// Factored form produced by [`BandedMatrix::factor`].
#[derive(Debug, Clone)]
pub struct BandedLu {
    order: usize,
    half_bandwidth: usize,
    upper: Array2<f64>,
    multipliers: Array2<f64>,
    pivots: Vec<usize>,
}

impl BandedLu {
    pub fn solve(&self, rhs: &Array1<f64>) -> Array1<f64> {
        assert_eq!(rhs.len(), self.order);
        let n = self.order;
        let m = self.half_bandwidth;
        let mm = 2 * m + 1;
        let mut x = rhs.clone();
        for k in 0..n {
            let piv = self.pivots[k];
            if piv != k {
                x.swap(k, piv);
            }
            let last = (k + m).min(n - 1);
            for r in (k + 1)..=last {
                x[r] -= self.multipliers[(k, r - k - 1)] * x[k];
            }
        }
        for i in (0..n).rev() {
            let mut sum = x[i];
            let reach = (mm - 1).min(n - 1 - i);
            for o in 1..=reach {
                sum -= self.upper[(i, o)] * x[i + o];
            }
            x[i] = sum / self.upper[(i, 0)];
        }
        x
    }
}
