//! The scattering kernel, the loss operator L, the gain operator Q+, and the
//! coercivity/continuity diagnostics built on them.
//!
//! The loss operator exploits that the angular dependence of the integrand
//! sits entirely in sigma_0, so the sphere integral reduces analytically to
//! the constant c0 and L costs a single momentum sum. The gain operator is a
//! full momentum-times-sphere sum with trilinear interpolation at the
//! post-collision momenta; [`qplus_field`] is the vectorized whole-grid
//! evaluation used by the solver, with the inner loop running over the
//! contiguous spatial profiles.

use rayon::prelude::*;

use crate::field::{weighted_sup_norm_diff, DistField, PhaseGrid};
use crate::quad::{gauss_legendre, MomentumQuadrature, SphereQuadrature};
use crate::relkin::{add, dot, invariants, moller_velocity, scale, scattering_cos, sub, Momentum3};
use crate::{lit, Error, Real, Result};

/// Product-form hard-sphere scattering kernel
/// `sigma(g, theta) = c_kernel * g * sigma_0(theta)` with
/// `sigma_0(theta) = (1/(4 pi)) sin^gamma(theta)`.
#[derive(Debug, Clone, Copy)]
pub struct Kernel<R> {
    pub c_kernel: R,
    pub gamma_ang: R,
    /// `c0 = int_{S^2} sigma_0 d omega <= 1`, precomputed at construction.
    c0: R,
}

impl<R: Real> Kernel<R> {
    pub fn new(c_kernel: R, gamma_ang: R) -> Result<Self> {
        if c_kernel <= R::zero() {
            return Err(Error::Config("c_kernel must be positive".into()));
        }
        if gamma_ang < R::zero() {
            return Err(Error::Config("gamma_ang must be nonnegative".into()));
        }
        let c0 = if gamma_ang == R::zero() {
            R::one()
        } else {
            // c0 = 2 pi int_{-1}^{1} sigma_0(z) dz, Gauss-Legendre
            let two_pi = lit::<R>(2.0) * R::PI();
            let sum: R = gauss_legendre::<R>(64)
                .into_iter()
                .map(|(z, w)| w * sigma0_of(gamma_ang, z))
                .sum();
            two_pi * sum
        };
        Ok(Self { c_kernel, gamma_ang, c0 })
    }

    /// Angular part at a given scattering cosine; bounded by `1/(4 pi)`.
    #[inline]
    pub fn sigma0(&self, cos_theta: R) -> R {
        sigma0_of(self.gamma_ang, cos_theta)
    }

    #[inline]
    pub fn c0(&self) -> R {
        self.c0
    }

    #[inline]
    pub fn is_isotropic(&self) -> bool {
        self.gamma_ang == R::zero()
    }
}

#[inline]
fn sigma0_of<R: Real>(gamma: R, cos_theta: R) -> R {
    let inv_4pi = (lit::<R>(4.0) * R::PI()).recip();
    if gamma == R::zero() {
        inv_4pi
    } else {
        let sin_sq = (R::one() - cos_theta * cos_theta).max(R::zero());
        inv_4pi * sin_sq.powf(gamma * lit::<R>(0.5))
    }
}

/// A distribution sampled on a momentum quadrature at one fixed x1.
#[derive(Debug, Clone, Copy)]
pub struct MomentumSlice<'a, R> {
    pub values: &'a [R],
}

impl<'a, R: Real> MomentumSlice<'a, R> {
    pub fn new(values: &'a [R]) -> Self {
        Self { values }
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|v| *v >= R::zero())
    }
}

/// Loss operator at one momentum:
/// `Lf(p) = c0 * c_kernel * sum_q w_q vM(p,q) g(p,q) f(q)`.
pub fn eval_l<R: Real>(
    slice: &MomentumSlice<'_, R>,
    p: &Momentum3<R>,
    quad: &MomentumQuadrature<R>,
    kernel: &Kernel<R>,
) -> R {
    let pref = kernel.c0() * kernel.c_kernel;
    let sum: R = quad
        .nodes
        .iter()
        .zip(quad.weights.iter())
        .zip(slice.values.iter())
        .map(|((q, &w), &fq)| {
            let (_, g) = invariants(p, q);
            w * moller_velocity(p, q) * g * fq
        })
        .sum();
    pref * sum
}

/// Gain operator at one momentum:
/// `Q+(f,h)(p) = sum_q sum_w w_q w_w vM sigma(g, cos theta) f~(p') h~(q')`
/// with `f~` the trilinear interpolation of the slice (zero outside pmax).
pub fn eval_qplus<R: Real>(
    slice_f: &MomentumSlice<'_, R>,
    slice_h: &MomentumSlice<'_, R>,
    p: &Momentum3<R>,
    quad: &MomentumQuadrature<R>,
    squad: &SphereQuadrature<R>,
    kernel: &Kernel<R>,
) -> R {
    let mut acc = R::zero();
    for (q, &wq) in quad.nodes.iter().zip(quad.weights.iter()) {
        let (_, g) = invariants(p, q);
        if g <= R::zero() {
            continue;
        }
        let vm = moller_velocity(p, q);
        let pair_pref = wq * vm * kernel.c_kernel * g;
        for (omega, &ww) in squad.nodes.iter().zip(squad.weights.iter()) {
            let (pp, qp) = crate::relkin::post_collision(p, q, omega);
            let fv = quad.interpolate(slice_f.values, &pp);
            if fv == R::zero() {
                continue;
            }
            let hv = quad.interpolate(slice_h.values, &qp);
            if hv == R::zero() {
                continue;
            }
            let sigma0 = if kernel.is_isotropic() {
                (lit::<R>(4.0) * R::PI()).recip()
            } else {
                kernel.sigma0(scattering_cos(p, q, omega).unwrap_or(R::one()))
            };
            acc += pair_pref * sigma0 * ww * fv * hv;
        }
    }
    acc
}

/// Loss part of the collision operator, always the exact factorization
/// `Q-(f,h)(p) = f(p) * Lh(p)`.
pub fn eval_qminus<R: Real>(
    slice_f: &MomentumSlice<'_, R>,
    slice_h: &MomentumSlice<'_, R>,
    p: &Momentum3<R>,
    quad: &MomentumQuadrature<R>,
    kernel: &Kernel<R>,
) -> R {
    let fp = quad.interpolate(slice_f.values, p);
    if fp == R::zero() {
        return R::zero();
    }
    fp * eval_l(slice_h, p, quad, kernel)
}

/// Applies L to every (x1, p) grid point. Parallel over momentum nodes with
/// a fixed per-node summation order, so the result is identical for any
/// thread count.
pub fn loss_field<R: Real>(
    field: &DistField<R>,
    grid: &PhaseGrid<R>,
    kernel: &Kernel<R>,
) -> DistField<R> {
    let n_x = field.n_x;
    let quad = &grid.quad;
    let pref = kernel.c0() * kernel.c_kernel;
    let mut out = DistField::zeros(grid);
    out.values
        .par_chunks_mut(n_x)
        .enumerate()
        .for_each(|(ip, row)| {
            let p = &quad.nodes[ip];
            for (iq, (q, &wq)) in quad.nodes.iter().zip(quad.weights.iter()).enumerate() {
                let (_, g) = invariants(p, q);
                if g <= R::zero() {
                    continue;
                }
                let c = pref * wq * moller_velocity(p, q) * g;
                for (o, &fv) in row.iter_mut().zip(field.profile(iq).iter()) {
                    *o += c * fv;
                }
            }
        });
    out
}

/// Applies Q+(f, f) to every (x1, p) grid point.
///
/// The post-collision kinematics and interpolation stencils depend only on
/// (p, q, omega), so they are computed once per triple and reused across the
/// whole spatial profile.
pub fn qplus_field<R: Real>(
    field: &DistField<R>,
    grid: &PhaseGrid<R>,
    squad: &SphereQuadrature<R>,
    kernel: &Kernel<R>,
) -> DistField<R> {
    let n_x = field.n_x;
    let quad = &grid.quad;
    let inv_4pi = (lit::<R>(4.0) * R::PI()).recip();

    // omega -> -omega swaps p' and q'; the f = h integrand is invariant
    // (sigma_0 is even in cos theta), so paired nodes fold to half the
    // sphere at doubled weight
    let pairs = squad.antipodal_pairs();
    let omega_set: Vec<(usize, R)> = match &pairs {
        Some(p) => (0..squad.nodes.len())
            .filter(|&i| i < p[i] as usize)
            .map(|i| (i, squad.weights[i] * lit::<R>(2.0)))
            .collect(),
        None => (0..squad.nodes.len()).map(|i| (i, squad.weights[i])).collect(),
    };

    let mut out = DistField::zeros(grid);
    out.values
        .par_chunks_mut(n_x)
        .enumerate()
        .for_each(|(ip, row)| {
            let p = &quad.nodes[ip];
            let pe = p.energy();
            let half = lit::<R>(0.5);
            for (q, &wq) in quad.nodes.iter().zip(quad.weights.iter()) {
                let (s, g) = invariants(p, q);
                if g <= R::zero() {
                    continue;
                }
                let vm = moller_velocity(p, q);
                let pair_pref = wq * vm * kernel.c_kernel * g;
                let qe = q.energy();
                let sqrt_s = s.sqrt();
                let total = add(&p.p, &q.p);
                let tot_norm = dot(&total, &total).sqrt();
                let center = scale(&total, half);
                let half_g = half * g;
                let com_limit = tot_norm < lit::<R>(1e-10);
                let gm1_over_tot_sq = (sqrt_s * (pe + qe + sqrt_s)).recip();
                for &(iw, ww) in &omega_set {
                    let omega = &squad.nodes[iw];
                    let shift = if com_limit {
                        scale(omega, half_g)
                    } else {
                        let along = dot(&total, omega) * gm1_over_tot_sq;
                        scale(&add(omega, &scale(&total, along)), half_g)
                    };
                    let pp = Momentum3 { p: add(&center, &shift) };
                    let Some(st_p) = quad.stencil(&pp) else { continue };
                    let qp = Momentum3 { p: sub(&center, &shift) };
                    let Some(st_q) = quad.stencil(&qp) else { continue };

                    let sigma0 = if kernel.is_isotropic() {
                        inv_4pi
                    } else {
                        // cos theta = (p-q)^mu (p'-q')_mu / g^2 with on-shell lifts
                        let ppe = (R::one() + dot(&pp.p, &pp.p)).sqrt();
                        let qpe = (R::one() + dot(&qp.p, &qp.p)).sqrt();
                        let dpre = sub(&p.p, &q.p);
                        let dpost = sub(&pp.p, &qp.p);
                        let c = (-(pe - qe) * (ppe - qpe) + dot(&dpre, &dpost)) / (g * g);
                        kernel.sigma0(c.max(-R::one()).min(R::one()))
                    };
                    let c = pair_pref * sigma0 * ww;

                    // fused gather: interpolate both spatial profiles and
                    // accumulate their product in one pass over x1
                    let values = field.values.as_slice();
                    let po: [usize; 8] = st_p.idx.map(|i| i as usize * n_x);
                    let qo: [usize; 8] = st_q.idx.map(|i| i as usize * n_x);
                    let pw = &st_p.w;
                    let qw = &st_q.w;
                    debug_assert!(po.iter().chain(qo.iter()).all(|&o| o + n_x <= values.len()));
                    for (ix, o) in row.iter_mut().enumerate() {
                        // stencil indices are < n_p and ix < n_x by
                        // construction, so every offset is in bounds
                        let at = |off: usize| unsafe { *values.get_unchecked(off + ix) };
                        let uu = pw[0] * at(po[0])
                            + pw[1] * at(po[1])
                            + pw[2] * at(po[2])
                            + pw[3] * at(po[3])
                            + pw[4] * at(po[4])
                            + pw[5] * at(po[5])
                            + pw[6] * at(po[6])
                            + pw[7] * at(po[7]);
                        let vv = qw[0] * at(qo[0])
                            + qw[1] * at(qo[1])
                            + qw[2] * at(qo[2])
                            + qw[3] * at(qo[3])
                            + qw[4] * at(qo[4])
                            + qw[5] * at(qo[5])
                            + qw[6] * at(qo[6])
                            + qw[7] * at(qo[7]);
                        *o += c * uu * vv;
                    }
                }
            }
        });
    out
}

/// Empirical coercivity constants of Proposition-style bounds
/// `C_l (p0)^(1/2) <= Lf <= C_u (p0)^(1/2)`: the min and max over the grid
/// of the ratio `Lf / (p0)^(1/2)`.
pub fn coercivity_scan<R: Real>(
    field: &DistField<R>,
    grid: &PhaseGrid<R>,
    kernel: &Kernel<R>,
) -> Result<(R, R)> {
    if field.values.iter().all(|v| *v == R::zero()) {
        return Err(Error::VacuumField);
    }
    let lf = loss_field(field, grid, kernel);
    let half = lit::<R>(0.5);
    let mut lo = R::infinity();
    let mut hi = R::zero();
    for ip in 0..field.n_p {
        let sqrt_e = grid.quad.nodes[ip].energy().powf(half);
        for &l in lf.profile(ip) {
            let ratio = l / sqrt_e;
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
    }
    Ok((lo, hi))
}

/// Continuity diagnostic for L.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ContinuityReport<R> {
    /// max over the grid of `|Lf - Lh| / ((p0)^(1/2) ||f - h||)`.
    pub ratio_plain: R,
    /// Same ratio against the full bound `e^(-k/sqrt(2)) (p0)^(1/2) ||f - h||`.
    pub ratio_weighted: R,
    pub norm_diff: R,
}

pub fn continuity_check<R: Real>(
    f: &DistField<R>,
    h: &DistField<R>,
    grid: &PhaseGrid<R>,
    kernel: &Kernel<R>,
    k: R,
) -> ContinuityReport<R> {
    let norm_diff = weighted_sup_norm_diff(f, h, grid, k);
    if norm_diff == R::zero() {
        return ContinuityReport { ratio_plain: R::zero(), ratio_weighted: R::zero(), norm_diff };
    }
    let lf = loss_field(f, grid, kernel);
    let lh = loss_field(h, grid, kernel);
    let half = lit::<R>(0.5);
    let mut worst = R::zero();
    for ip in 0..f.n_p {
        let sqrt_e = grid.quad.nodes[ip].energy().powf(half);
        for (&a, &b) in lf.profile(ip).iter().zip(lh.profile(ip).iter()) {
            worst = worst.max((a - b).abs() / sqrt_e);
        }
    }
    let ratio_plain = worst / norm_diff;
    let damp = (-k / lit::<R>(2.0).sqrt()).exp();
    ContinuityReport { ratio_plain, ratio_weighted: ratio_plain / damp, norm_diff }
}

/// Conservation residuals `int (1, p, p0) Q(f,f) dp` with `Q = Q+ - f Lf`,
/// computed on the grid. These converge to zero under refinement rather than
/// vanishing exactly.
pub fn moment_residuals<R: Real>(
    slice_f: &MomentumSlice<'_, R>,
    quad: &MomentumQuadrature<R>,
    squad: &SphereQuadrature<R>,
    kernel: &Kernel<R>,
) -> [R; 5] {
    let collisions: Vec<R> = quad
        .nodes
        .par_iter()
        .enumerate()
        .map(|(ip, p)| {
            let gain = eval_qplus(slice_f, slice_f, p, quad, squad, kernel);
            let loss = slice_f.values[ip] * eval_l(slice_f, p, quad, kernel);
            gain - loss
        })
        .collect();
    let mut out = [R::zero(); 5];
    for (ip, (p, &w)) in quad.nodes.iter().zip(quad.weights.iter()).enumerate() {
        let q = w * collisions[ip];
        out[0] += q;
        out[1] += q * p.p[0];
        out[2] += q * p.p[1];
        out[3] += q * p.p[2];
        out[4] += q * p.energy();
    }
    out
}
