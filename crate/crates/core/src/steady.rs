//! Boundary profiles, the mild-formulation solution operator A, and the
//! damped fixed-point solver on the slab.
//!
//! Along the characteristic of a momentum node with p1 > 0 the transport
//! equation integrates to
//! `Af(x1,p) = f_L(p) e^(-I(x1)/phat1)
//!           + (1/phat1) int_0^x1 e^(-(I(x1)-I(z))/phat1) Q+(f,f)(z,p) dz`
//! with `I(x1) = int_0^x1 Lf(z,p) dz`; nodes with p1 < 0 mirror from x1 = 1.
//! Both integrals use the trapezoid rule on the spatial grid. The sweep is
//! organized as a forward recurrence in the increments of I, so no factor
//! `e^(+I/phat1)` is ever formed and the evaluation stays finite for any
//! optical depth.

use rayon::prelude::*;

use crate::collision::{eval_l, loss_field, qplus_field, Kernel, MomentumSlice};
use crate::field::{weighted_sup_norm, weighted_sup_norm_diff, DistField, PhaseGrid};
use crate::quad::{MomentumQuadrature, SphereQuadrature};
use crate::relkin::Momentum3;
use crate::{lit, Error, Real, Result};

type BoundaryFn<R> = Box<dyn Fn(&Momentum3<R>) -> R + Send + Sync>;

/// Inflow data: f_L on x1 = 0 for p1 > 0 and f_R on x1 = 1 for p1 < 0,
/// as evaluable functions plus samples on the momentum quadrature.
pub struct BoundaryProfile<R> {
    pub f_l: BoundaryFn<R>,
    pub f_r: BoundaryFn<R>,
    pub samples_l: Vec<R>,
    pub samples_r: Vec<R>,
}

impl<R: Real> BoundaryProfile<R> {
    pub fn new(f_l: BoundaryFn<R>, f_r: BoundaryFn<R>, quad: &MomentumQuadrature<R>) -> Result<Self> {
        let samples_l: Vec<R> = quad.nodes.iter().map(|p| f_l(p)).collect();
        let samples_r: Vec<R> = quad.nodes.iter().map(|p| f_r(p)).collect();
        if samples_l.iter().chain(samples_r.iter()).any(|v| *v < R::zero() || v.is_nan()) {
            return Err(Error::Config("boundary profile must be nonnegative".into()));
        }
        Ok(Self { f_l, f_r, samples_l, samples_r })
    }

    /// Jüttner inflow `A e^(-p0 / T)` on each side.
    pub fn juttner(
        a_l: R,
        t_l: R,
        a_r: R,
        t_r: R,
        quad: &MomentumQuadrature<R>,
    ) -> Result<Self> {
        if t_l <= R::zero() || t_r <= R::zero() {
            return Err(Error::Config("Jüttner temperature must be positive".into()));
        }
        if a_l < R::zero() || a_r < R::zero() {
            return Err(Error::Config("Jüttner amplitude must be nonnegative".into()));
        }
        Self::new(
            Box::new(move |p| a_l * (-p.energy() / t_l).exp()),
            Box::new(move |p| a_r * (-p.energy() / t_r).exp()),
            quad,
        )
    }

    pub fn zero(quad: &MomentumQuadrature<R>) -> Self {
        Self {
            f_l: Box::new(|_| R::zero()),
            f_r: Box::new(|_| R::zero()),
            samples_l: vec![R::zero(); quad.len()],
            samples_r: vec![R::zero(); quad.len()],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.samples_l.iter().chain(self.samples_r.iter()).all(|v| *v == R::zero())
    }

    /// Min over the grid of L applied to each inflow profile, the empirical
    /// loss floor of the boundary data.
    pub fn loss_floor(&self, quad: &MomentumQuadrature<R>, kernel: &Kernel<R>) -> (R, R) {
        let sl = MomentumSlice::new(&self.samples_l);
        let sr = MomentumSlice::new(&self.samples_r);
        let mut lo_l = R::infinity();
        let mut lo_r = R::infinity();
        for p in &quad.nodes {
            lo_l = lo_l.min(eval_l(&sl, p, quad, kernel));
            lo_r = lo_r.min(eval_l(&sr, p, quad, kernel));
        }
        (lo_l, lo_r)
    }
}

impl<R: Real> std::fmt::Debug for BoundaryProfile<R> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BoundaryProfile")
            .field("n_samples", &self.samples_l.len())
            .finish()
    }
}

/// Numeric parameters of the fixed-point solver. Grid, kernel, and boundary
/// objects are passed to [`solve`] separately.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct SolverConfig<R> {
    /// Exponential weight rate of the stopping-rule norm.
    pub k: R,
    /// Coercivity floor used by the lower envelope.
    pub c1: R,
    /// Picard damping factor in (0, 1].
    pub lambda: R,
    /// Relative fixed-point tolerance.
    pub tol: R,
    pub max_iter: usize,
}

impl<R: Real> SolverConfig<R> {
    pub fn validate(&self) -> Result<()> {
        if !(self.k > R::zero()) {
            return Err(Error::Config("k must be positive".into()));
        }
        if !(self.c1 > R::zero()) {
            return Err(Error::Config("c1 must be positive".into()));
        }
        if !(self.lambda > R::zero() && self.lambda <= R::one()) {
            return Err(Error::Config("lambda must lie in (0, 1]".into()));
        }
        if !(self.tol > R::zero()) {
            return Err(Error::Config("tol must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be positive".into()));
        }
        Ok(())
    }
}

impl<R: Real> Default for SolverConfig<R> {
    fn default() -> Self {
        Self {
            k: lit(0.1),
            c1: R::one(),
            lambda: R::one(),
            tol: lit(1e-6),
            max_iter: 200,
        }
    }
}

/// Flux mismatch `int (1, p, p0) phat1 f_L dp - int (1, p, p0) phat1 f_R dp`.
/// Purely diagnostic: the solver runs regardless of its size.
pub fn compatibility_check<R: Real>(
    bp: &BoundaryProfile<R>,
    quad: &MomentumQuadrature<R>,
) -> [R; 5] {
    let mut out = [R::zero(); 5];
    for (ip, (p, &w)) in quad.nodes.iter().zip(quad.weights.iter()).enumerate() {
        let e = p.energy();
        let c = w * p.p[0] / e * (bp.samples_l[ip] - bp.samples_r[ip]);
        out[0] += c;
        out[1] += c * p.p[0];
        out[2] += c * p.p[1];
        out[3] += c * p.p[2];
        out[4] += c * e;
    }
    out
}

/// The attenuated free-transport lower envelope
/// `1_{p1>0} f_L(p) e^(-c1 x1 / phat1) + 1_{p1<0} f_R(p) e^(c1 (1-x1) / phat1)`.
pub fn lower_envelope<R: Real>(
    bp: &BoundaryProfile<R>,
    grid: &PhaseGrid<R>,
    c1: R,
) -> DistField<R> {
    DistField::from_fn(grid, |ix, ip| {
        let p = &grid.quad.nodes[ip];
        let phat1 = p.p[0] / p.energy();
        let x = grid.xs[ix];
        if phat1 > R::zero() {
            bp.samples_l[ip] * (-c1 * x / phat1).exp()
        } else {
            bp.samples_r[ip] * (c1 * (R::one() - x) / phat1).exp()
        }
    })
}

/// Initial iterate of the solver: the lower envelope itself.
pub fn initial_field<R: Real>(
    bp: &BoundaryProfile<R>,
    grid: &PhaseGrid<R>,
    c1: R,
) -> Result<DistField<R>> {
    if !(c1 > R::zero()) {
        return Err(Error::Config("c1 must be positive".into()));
    }
    Ok(lower_envelope(bp, grid, c1))
}

/// True when `f >= env` pointwise within slack `1e-12 * (1 + |env|)`.
pub fn dominates_envelope<R: Real>(f: &DistField<R>, env: &DistField<R>) -> bool {
    let slack = lit::<R>(1e-12);
    f.values
        .iter()
        .zip(env.values.iter())
        .all(|(&a, &b)| a >= b - slack * (R::one() + b.abs()))
}

/// One application of the solution operator with the collision fields of the
/// input already evaluated. Parallel over momentum nodes; each node's
/// x1-sweep is an independent forward recurrence.
fn apply_a_with<R: Real>(
    lf: &DistField<R>,
    qp: &DistField<R>,
    grid: &PhaseGrid<R>,
    bp: &BoundaryProfile<R>,
) -> Result<DistField<R>> {
    let n_x = grid.n_x();
    let dx = grid.dx();
    let half = lit::<R>(0.5);
    if grid.quad.nodes.iter().any(|p| p.p[0] == R::zero()) {
        return Err(Error::Config("momentum grid contains a node with p1 = 0".into()));
    }
    let mut out = DistField::zeros(grid);
    out.values
        .par_chunks_mut(n_x)
        .enumerate()
        .for_each(|(ip, row)| {
            let p = &grid.quad.nodes[ip];
            let phat1 = p.p[0] / p.energy();
            let l_row = lf.profile(ip);
            let q_row = qp.profile(ip);
            if phat1 > R::zero() {
                let inv = phat1.recip();
                let mut boundary = bp.samples_l[ip];
                let mut source = R::zero();
                row[0] = boundary;
                for j in 0..n_x - 1 {
                    let att = (-(dx * half * (l_row[j] + l_row[j + 1])) * inv).exp();
                    boundary *= att;
                    source = att * source + dx * half * inv * (att * q_row[j] + q_row[j + 1]);
                    row[j + 1] = boundary + source;
                }
            } else {
                let inv = (-phat1).recip();
                let mut boundary = bp.samples_r[ip];
                let mut source = R::zero();
                row[n_x - 1] = boundary;
                for j in (0..n_x - 1).rev() {
                    let att = (-(dx * half * (l_row[j] + l_row[j + 1])) * inv).exp();
                    boundary *= att;
                    source = att * source + dx * half * inv * (att * q_row[j + 1] + q_row[j]);
                    row[j] = boundary + source;
                }
            }
        });
    Ok(out)
}

/// One application of the solution operator A.
pub fn apply_a<R: Real>(
    f: &DistField<R>,
    grid: &PhaseGrid<R>,
    squad: &SphereQuadrature<R>,
    kernel: &Kernel<R>,
    bp: &BoundaryProfile<R>,
) -> Result<DistField<R>> {
    let lf = loss_field(f, grid, kernel);
    let qp = qplus_field(f, grid, squad, kernel);
    apply_a_with(&lf, &qp, grid, bp)
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct TraceRow<R> {
    pub iteration: usize,
    /// `||f_{n+1} - f_n|| / ||f_n||` (absolute when `||f_n|| = 0`).
    pub residual: R,
    pub norm: R,
    /// `sup_x int |f| (p0)^(1/2) dp` of the new iterate.
    pub norm_linf_l1: R,
    /// `int sup_x |f| (p0)^(1/2) dp` of the new iterate.
    pub norm_l1_linf: R,
    /// `||f|| = int sup_x |f| (p0)^(1/2) e^(k p0) dp` of the new iterate.
    pub norm_main: R,
    /// `||f_{n+1} - f_n|| / ||f_n - f_{n-1}||`, absent on the first step.
    pub contraction_ratio: Option<R>,
    /// Min over the grid of Lf of the current iterate.
    pub min_lf: R,
    /// Min over the grid of `Lf / (p0)^(1/2)`, the empirical C_l.
    pub min_lf_ratio: R,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ConvergenceTrace<R> {
    pub rows: Vec<TraceRow<R>>,
    pub converged: bool,
    /// `||A f* - f*|| / ||f*||` from one extra operator application.
    pub fixed_point_residual: R,
    /// True when `min Lf >= c1` held at every iterate, the condition under
    /// which the lower envelope is a certified bound.
    pub c1_enforced: bool,
    /// True when every iterate dominated the lower envelope.
    pub envelope_held: bool,
}

/// Damped Picard iteration `f_{n+1} = (1 - lambda) f_n + lambda A f_n`
/// starting from the lower envelope.
pub fn solve<R: Real>(
    grid: &PhaseGrid<R>,
    squad: &SphereQuadrature<R>,
    kernel: &Kernel<R>,
    bp: &BoundaryProfile<R>,
    cfg: &SolverConfig<R>,
) -> Result<(DistField<R>, ConvergenceTrace<R>)> {
    cfg.validate()?;
    let env = lower_envelope(bp, grid, cfg.c1);
    let mut f = env.clone();
    let half = lit::<R>(0.5);
    let mut rows: Vec<TraceRow<R>> = Vec::new();
    let mut prev_diff: Option<R> = None;
    let mut c1_enforced = true;
    let mut envelope_held = true;
    let mut last_residual = R::infinity();

    for iteration in 1..=cfg.max_iter {
        let lf = loss_field(&f, grid, kernel);
        let mut min_lf = R::infinity();
        let mut min_lf_ratio = R::infinity();
        for ip in 0..f.n_p {
            let sqrt_e = grid.quad.nodes[ip].energy().powf(half);
            for &l in lf.profile(ip) {
                min_lf = min_lf.min(l);
                min_lf_ratio = min_lf_ratio.min(l / sqrt_e);
            }
        }
        c1_enforced = c1_enforced && min_lf >= cfg.c1;

        let qp = qplus_field(&f, grid, squad, kernel);
        let af = apply_a_with(&lf, &qp, grid, bp)?;
        if af.has_nan() {
            return Err(Error::StateCorruption {
                iteration,
                what: "NaN in operator output".into(),
            });
        }
        if !af.is_nonnegative() {
            return Err(Error::StateCorruption {
                iteration,
                what: "negative value in operator output".into(),
            });
        }

        let mut next = f.clone();
        next.blend(&af, cfg.lambda);
        envelope_held = envelope_held && dominates_envelope(&next, &env);

        let diff = weighted_sup_norm_diff(&next, &f, grid, cfg.k);
        let norm = weighted_sup_norm(&f, grid, cfg.k);
        let residual = if norm > R::zero() { diff / norm } else { diff };
        let contraction_ratio = prev_diff.and_then(|d| (d > R::zero()).then(|| diff / d));
        rows.push(TraceRow {
            iteration,
            residual,
            norm,
            norm_linf_l1: crate::norms::norm_linf_l1(&next, grid),
            norm_l1_linf: crate::norms::norm_l1_linf(&next, grid),
            norm_main: crate::norms::norm_main(&next, grid, cfg.k),
            contraction_ratio,
            min_lf,
            min_lf_ratio,
        });
        prev_diff = Some(diff);
        f = next;
        last_residual = residual;

        if residual < cfg.tol {
            let af_star = apply_a(&f, grid, squad, kernel, bp)?;
            let fd = weighted_sup_norm_diff(&af_star, &f, grid, cfg.k);
            let fnorm = weighted_sup_norm(&f, grid, cfg.k);
            let fixed_point_residual = if fnorm > R::zero() { fd / fnorm } else { fd };
            return Ok((
                f,
                ConvergenceTrace {
                    rows,
                    converged: true,
                    fixed_point_residual,
                    c1_enforced,
                    envelope_held,
                },
            ));
        }
    }

    Err(Error::NonConvergence {
        max_iter: cfg.max_iter,
        residual: last_residual.to_f64().unwrap_or(f64::NAN),
    })
}
