//! Phase-space grid and distribution fields sampled on it.

use crate::quad::MomentumQuadrature;
use crate::{lit, Error, Real, Result};

/// Tensor product of a uniform spatial grid on [0, 1] and a truncated
/// momentum quadrature.
#[derive(Debug, Clone)]
pub struct PhaseGrid<R> {
    pub xs: Vec<R>,
    pub quad: MomentumQuadrature<R>,
}

impl<R: Real> PhaseGrid<R> {
    pub fn new(n_x: usize, quad: MomentumQuadrature<R>) -> Result<Self> {
        if n_x < 2 {
            return Err(Error::Config("n_x must be at least 2".into()));
        }
        let h = (lit::<R>(n_x as f64) - R::one()).recip();
        let xs = (0..n_x).map(|i| lit::<R>(i as f64) * h).collect();
        Ok(Self { xs, quad })
    }

    #[inline]
    pub fn n_x(&self) -> usize {
        self.xs.len()
    }

    #[inline]
    pub fn n_p(&self) -> usize {
        self.quad.len()
    }

    #[inline]
    pub fn dx(&self) -> R {
        self.xs[1] - self.xs[0]
    }
}

/// A distribution function f(x1, p) sampled on a [`PhaseGrid`].
///
/// Storage is momentum-major: `values[ip * n_x + ix]`, so the spatial
/// profile of each momentum node is contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct DistField<R> {
    pub values: Vec<R>,
    pub n_x: usize,
    pub n_p: usize,
}

impl<R: Real> DistField<R> {
    pub fn zeros(grid: &PhaseGrid<R>) -> Self {
        Self {
            values: vec![R::zero(); grid.n_x() * grid.n_p()],
            n_x: grid.n_x(),
            n_p: grid.n_p(),
        }
    }

    pub fn from_fn<F: Fn(usize, usize) -> R>(grid: &PhaseGrid<R>, f: F) -> Self {
        let n_x = grid.n_x();
        let n_p = grid.n_p();
        let mut values = Vec::with_capacity(n_x * n_p);
        for ip in 0..n_p {
            for ix in 0..n_x {
                values.push(f(ix, ip));
            }
        }
        Self { values, n_x, n_p }
    }

    #[inline]
    pub fn get(&self, ix: usize, ip: usize) -> R {
        self.values[ip * self.n_x + ix]
    }

    #[inline]
    pub fn set(&mut self, ix: usize, ip: usize, v: R) {
        self.values[ip * self.n_x + ix] = v;
    }

    /// Contiguous spatial profile of one momentum node.
    #[inline]
    pub fn profile(&self, ip: usize) -> &[R] {
        &self.values[ip * self.n_x..(ip + 1) * self.n_x]
    }

    /// Materializes the momentum slice at a fixed spatial index.
    pub fn slice_at_x(&self, ix: usize) -> Vec<R> {
        (0..self.n_p).map(|ip| self.get(ix, ip)).collect()
    }

    /// Max over x1 of |f| for each momentum node.
    pub fn sup_over_x(&self) -> Vec<R> {
        (0..self.n_p)
            .map(|ip| {
                self.profile(ip)
                    .iter()
                    .fold(R::zero(), |m, &v| m.max(v.abs()))
            })
            .collect()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|v| *v >= R::zero())
    }

    pub fn has_nan(&self) -> bool {
        self.values.iter().any(|v| v.is_nan())
    }

    /// In-place convex combination `self = (1 - lambda) self + lambda other`.
    pub fn blend(&mut self, other: &Self, lambda: R) {
        let one_minus = R::one() - lambda;
        for (a, &b) in self.values.iter_mut().zip(other.values.iter()) {
            *a = one_minus * *a + lambda * b;
        }
    }

    pub fn scale_in_place(&mut self, c: R) {
        for v in self.values.iter_mut() {
            *v *= c;
        }
    }
}

/// The solution-space norm `int sup_x |f| (p0)^(1/2) e^(k p0) dp` evaluated
/// on the grid. Shared by the solver stopping rule and the norm diagnostics.
pub fn weighted_sup_norm<R: Real>(field: &DistField<R>, grid: &PhaseGrid<R>, k: R) -> R {
    let half = lit::<R>(0.5);
    (0..field.n_p)
        .map(|ip| {
            let sup = field
                .profile(ip)
                .iter()
                .fold(R::zero(), |m, &v| m.max(v.abs()));
            let e = grid.quad.nodes[ip].energy();
            grid.quad.weights[ip] * sup * e.powf(half) * (k * e).exp()
        })
        .sum()
}

/// Same weighted quadrature of the pointwise difference |f - h|.
pub fn weighted_sup_norm_diff<R: Real>(
    f: &DistField<R>,
    h: &DistField<R>,
    grid: &PhaseGrid<R>,
    k: R,
) -> R {
    let half = lit::<R>(0.5);
    (0..f.n_p)
        .map(|ip| {
            let sup = f
                .profile(ip)
                .iter()
                .zip(h.profile(ip).iter())
                .fold(R::zero(), |m, (&a, &b)| m.max((a - b).abs()));
            let e = grid.quad.nodes[ip].energy();
            grid.quad.weights[ip] * sup * e.powf(half) * (k * e).exp()
        })
        .sum()
}
