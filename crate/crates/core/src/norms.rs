//! Weighted norms of slab distributions, the inverse-Laplacian and
//! hyperplane norms, and the gain-estimate ratio diagnostics.
//!
//! The two sups that are analytically taken over continua (the shift `a` of
//! the Riesz potential and the plane through the origin) are discretized:
//! a finite candidate set plus one local refinement. The reported values are
//! therefore lower bounds of the continuum sups, and every criterion built
//! on them is phrased against the discrete quantities.

use rayon::prelude::*;

use crate::collision::{qplus_field, Kernel};
use crate::field::{weighted_sup_norm, DistField, PhaseGrid};
use crate::quad::{gauss_legendre, MomentumQuadrature, SphereQuadrature};
use crate::relkin::Momentum3;
use crate::{lit, Error, Real, Result};

/// All norm and gain-ratio diagnostics of one field.
#[derive(Debug, Clone, serde::Serialize)]
pub struct NormReport<R> {
    /// `sup_x int |f| (p0)^(1/2) dp`.
    pub norm_linf_l1: R,
    /// `int sup_x |f| (p0)^(1/2) dp`.
    pub norm_l1_linf: R,
    /// `int sup_x |f| (p0)^(1/2) e^(k p0) dp`.
    pub norm_main: R,
    /// Discrete sup (lower bound) of the Riesz-potential norm.
    pub norm_inv: R,
    pub argmax_a: [R; 3],
    /// Discrete sup (lower bound) over planes through the origin.
    pub norm_hyp: R,
    pub argmax_normal: [R; 3],
    pub r1: R,
    /// `(k, R2(k))` pairs.
    pub r2: Vec<(R, R)>,
    pub r_hyp: R,
}

/// `||f|| = int sup_x |f| (p0)^(1/2) e^(k p0) dp`.
pub fn norm_main<R: Real>(f: &DistField<R>, grid: &PhaseGrid<R>, k: R) -> R {
    weighted_sup_norm(f, grid, k)
}

/// `sup_x int |f| (p0)^(1/2) dp`.
pub fn norm_linf_l1<R: Real>(f: &DistField<R>, grid: &PhaseGrid<R>) -> R {
    let half = lit::<R>(0.5);
    let mut best = R::zero();
    for ix in 0..f.n_x {
        let mut acc = R::zero();
        for ip in 0..f.n_p {
            let e = grid.quad.nodes[ip].energy();
            acc += grid.quad.weights[ip] * f.get(ix, ip).abs() * e.powf(half);
        }
        best = best.max(acc);
    }
    best
}

/// `int sup_x |f| (p0)^(1/2) dp`.
pub fn norm_l1_linf<R: Real>(f: &DistField<R>, grid: &PhaseGrid<R>) -> R {
    let half = lit::<R>(0.5);
    f.sup_over_x()
        .into_iter()
        .enumerate()
        .map(|(ip, sup)| {
            let e = grid.quad.nodes[ip].energy();
            grid.quad.weights[ip] * sup * e.powf(half)
        })
        .sum()
}

/// Riesz kernel at displacement `p - a`, with the cell-average
/// desingularization `3/(2 h)` inside a ball of the local mesh size.
#[inline]
fn riesz_weight<R: Real>(dist: R, h_min: R) -> R {
    if dist < h_min {
        lit::<R>(1.5) / h_min
    } else {
        dist.recip()
    }
}

/// Discrete sup over `a` of `sum_p w_p vals[p] / |p - a|`, with the
/// desingularized kernel. `vals` carries everything except the weight and
/// the Riesz factor. Candidates: all grid nodes, the origin, and a 5^3
/// lattice over the search cube, followed by one pattern-search refinement.
fn riesz_sup<R: Real>(vals: &[R], quad: &MomentumQuadrature<R>) -> (R, [R; 3]) {
    let h_min: Vec<R> = (0..quad.len()).map(|ip| quad.local_mesh_size(ip)).collect();
    let value_at = |a: &[R; 3]| -> R {
        quad.nodes
            .iter()
            .zip(quad.weights.iter())
            .zip(vals.iter().zip(h_min.iter()))
            .map(|((p, &w), (&v, &h))| {
                let d = [p.p[0] - a[0], p.p[1] - a[1], p.p[2] - a[2]];
                let dist = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
                w * v * riesz_weight(dist, h)
            })
            .sum()
    };

    let mut candidates: Vec<[R; 3]> = quad.nodes.iter().map(|p| p.p).collect();
    candidates.push([R::zero(); 3]);
    let pmax = quad.pmax;
    for i in 0..5 {
        for j in 0..5 {
            for l in 0..5 {
                let c = |m: usize| (lit::<R>(m as f64) / lit::<R>(2.0) - R::one()) * pmax;
                candidates.push([c(i), c(j), c(l)]);
            }
        }
    }

    let values: Vec<R> = candidates.par_iter().map(value_at).collect();
    let (mut best_i, mut best_v) = (0usize, values[0]);
    for (i, &v) in values.iter().enumerate() {
        if v > best_v {
            best_i = i;
            best_v = v;
        }
    }
    let mut best_a = candidates[best_i];

    // pattern search: axis steps, halved on failure
    let mut step = pmax / lit::<R>(4.0);
    let floor = pmax * lit::<R>(1e-3);
    while step > floor {
        let mut improved = false;
        for axis in 0..3 {
            for sgn in [R::one(), -R::one()] {
                let mut a = best_a;
                a[axis] += sgn * step;
                let v = value_at(&a);
                if v > best_v {
                    best_v = v;
                    best_a = a;
                    improved = true;
                }
            }
        }
        if !improved {
            step = step * lit::<R>(0.5);
        }
    }
    (best_v, best_a)
}

/// `||f||_{-1}`: discrete sup over `a` of
/// `int (p0)^(1/2) e^(k p0) / |p - a| sup_x |f| dp`, with its argmax.
pub fn norm_inv<R: Real>(f: &DistField<R>, grid: &PhaseGrid<R>, k: R) -> (R, [R; 3]) {
    let half = lit::<R>(0.5);
    let vals: Vec<R> = f
        .sup_over_x()
        .into_iter()
        .enumerate()
        .map(|(ip, sup)| {
            let e = grid.quad.nodes[ip].energy();
            sup * e.powf(half) * (k * e).exp()
        })
        .collect();
    riesz_sup(&vals, &grid.quad)
}

/// Fixed 2D polar rule on the plane `{p3 = 0}` truncated at `pmax`;
/// rotated onto an arbitrary plane through the origin by its unit normal.
struct PlaneRule<R> {
    /// (radius, azimuth, weight) triples; weight includes the r Jacobian.
    pts: Vec<(R, R, R)>,
}

impl<R: Real> PlaneRule<R> {
    fn new(pmax: R, n_radial: usize, n_azimuth: usize) -> Self {
        let half = lit::<R>(0.5);
        let two_pi = lit::<R>(2.0) * R::PI();
        let w_phi = two_pi / lit::<R>(n_azimuth as f64);
        let mut pts = Vec::with_capacity(n_radial * n_azimuth);
        for (x, w) in gauss_legendre::<R>(n_radial) {
            let r = half * pmax * (x + R::one());
            let wr = half * pmax * w;
            for j in 0..n_azimuth {
                let phi = two_pi * (lit::<R>(j as f64) + half) / lit::<R>(n_azimuth as f64);
                pts.push((r, phi, wr * r * w_phi));
            }
        }
        Self { pts }
    }
}

/// Orthonormal basis of the plane orthogonal to the unit vector `n`.
fn plane_basis<R: Real>(n: &[R; 3]) -> ([R; 3], [R; 3]) {
    // pick the seed axis least aligned with n
    let seed = if n[0].abs() <= n[1].abs() && n[0].abs() <= n[2].abs() {
        [R::one(), R::zero(), R::zero()]
    } else if n[1].abs() <= n[2].abs() {
        [R::zero(), R::one(), R::zero()]
    } else {
        [R::zero(), R::zero(), R::one()]
    };
    let d = seed[0] * n[0] + seed[1] * n[1] + seed[2] * n[2];
    let mut e1 = [seed[0] - d * n[0], seed[1] - d * n[1], seed[2] - d * n[2]];
    let norm = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
    for c in &mut e1 {
        *c /= norm;
    }
    let e2 = [
        n[1] * e1[2] - n[2] * e1[1],
        n[2] * e1[0] - n[0] * e1[2],
        n[0] * e1[1] - n[1] * e1[0],
    ];
    (e1, e2)
}

/// Integral over the plane with unit normal `n` of the interpolated
/// node-value vector against `(p0)^(1/2) e^(k p0)`.
fn plane_value<R: Real>(
    vals: &[R],
    quad: &MomentumQuadrature<R>,
    k: R,
    rule: &PlaneRule<R>,
    n: &[R; 3],
) -> R {
    let (e1, e2) = plane_basis(n);
    let half = lit::<R>(0.5);
    rule.pts
        .iter()
        .map(|&(r, phi, w)| {
            let (c, s) = (phi.cos(), phi.sin());
            let p = Momentum3 {
                p: [
                    r * (c * e1[0] + s * e2[0]),
                    r * (c * e1[1] + s * e2[1]),
                    r * (c * e1[2] + s * e2[2]),
                ],
            };
            let v = quad.interpolate(vals, &p);
            if v == R::zero() {
                R::zero()
            } else {
                let e = p.energy();
                w * v * e.powf(half) * (k * e).exp()
            }
        })
        .sum()
}

/// Fibonacci half-sphere of unit normals (planes are sign-invariant).
fn fibonacci_normals<R: Real>(n: usize) -> Vec<[R; 3]> {
    let golden = (R::one() + lit::<R>(5.0).sqrt()) * lit::<R>(0.5);
    let two_pi = lit::<R>(2.0) * R::PI();
    (0..n)
        .map(|i| {
            let z = (lit::<R>(i as f64) + lit::<R>(0.5)) / lit::<R>(n as f64);
            let rho = (R::one() - z * z).max(R::zero()).sqrt();
            let phi = two_pi * lit::<R>(i as f64) / golden;
            [rho * phi.cos(), rho * phi.sin(), z]
        })
        .collect()
}

/// Discrete sup over plane normals of [`plane_value`], with one local
/// angular refinement around the argmax.
fn hyp_sup<R: Real>(vals: &[R], quad: &MomentumQuadrature<R>, k: R, n_normals: usize) -> (R, [R; 3]) {
    let rule = PlaneRule::new(quad.pmax, 32, 64);
    let normals = fibonacci_normals::<R>(n_normals);
    let values: Vec<R> = normals
        .par_iter()
        .map(|n| plane_value(vals, quad, k, &rule, n))
        .collect();
    let (mut best_i, mut best_v) = (0usize, values[0]);
    for (i, &v) in values.iter().enumerate() {
        if v > best_v {
            best_i = i;
            best_v = v;
        }
    }
    let mut best_n = normals[best_i];

    // local refinement: shrinking angular cap around the argmax; the cap
    // center is frozen per round so every candidate is built from tangents
    // orthogonal to it (and stays a unit normal)
    let mut delta = R::PI() / lit::<R>((n_normals as f64).sqrt());
    for _ in 0..4 {
        let center = best_n;
        let (t1, t2) = plane_basis(&center);
        let (cd, sd) = (delta.cos(), delta.sin());
        let mut improved = false;
        for j in 0..8 {
            let phi = lit::<R>(2.0) * R::PI() * lit::<R>(j as f64) / lit::<R>(8.0);
            let (c, s) = (phi.cos(), phi.sin());
            let mut cand = [
                cd * center[0] + sd * (c * t1[0] + s * t2[0]),
                cd * center[1] + sd * (c * t1[1] + s * t2[1]),
                cd * center[2] + sd * (c * t1[2] + s * t2[2]),
            ];
            let nn = (cand[0] * cand[0] + cand[1] * cand[1] + cand[2] * cand[2]).sqrt();
            for x in &mut cand {
                *x /= nn;
            }
            let v = plane_value(vals, quad, k, &rule, &cand);
            if v > best_v {
                best_v = v;
                best_n = cand;
                improved = true;
            }
        }
        if !improved {
            delta = delta * lit::<R>(0.5);
        }
    }
    (best_v, best_n)
}

/// `||f||_hyp`: discrete sup over planes through the origin of the plane
/// integral of `sup_x |f|` against `(p0)^(1/2) e^(k p0)`.
pub fn norm_hyp<R: Real>(
    f: &DistField<R>,
    grid: &PhaseGrid<R>,
    k: R,
    n_normals: usize,
) -> Result<(R, [R; 3])> {
    if n_normals < 3 {
        return Err(Error::Config("n_normals must be at least 3".into()));
    }
    Ok(hyp_sup(&f.sup_over_x(), &grid.quad, k, n_normals))
}

/// Plane integral at one fixed normal; exposed for symmetry tests.
pub fn hyp_plane_value<R: Real>(
    f: &DistField<R>,
    grid: &PhaseGrid<R>,
    k: R,
    normal: &[R; 3],
) -> R {
    let rule = PlaneRule::new(grid.quad.pmax, 32, 64);
    let nn = (normal[0] * normal[0] + normal[1] * normal[1] + normal[2] * normal[2]).sqrt();
    let unit = [normal[0] / nn, normal[1] / nn, normal[2] / nn];
    plane_value(&f.sup_over_x(), &grid.quad, k, &rule, &unit)
}

/// `R1 = sup_a int e^(k p0) / |p - a| sup_x Q+(f,f) dp / ||f||^2`.
pub fn gain_ratio_inv<R: Real>(
    f: &DistField<R>,
    grid: &PhaseGrid<R>,
    squad: &SphereQuadrature<R>,
    kernel: &Kernel<R>,
    k: R,
) -> Result<R> {
    let nf = weighted_sup_norm(f, grid, k);
    if nf == R::zero() {
        return Err(Error::ZeroFieldRatio);
    }
    let qp = qplus_field(f, grid, squad, kernel);
    let vals: Vec<R> = qp
        .sup_over_x()
        .into_iter()
        .enumerate()
        .map(|(ip, sup)| sup * (k * grid.quad.nodes[ip].energy()).exp())
        .collect();
    let (v, _) = riesz_sup(&vals, &grid.quad);
    Ok(v / (nf * nf))
}

/// `R2(k) = k int e^(k p0) sup_x Q+(f,f) dp / (||f||_{-1} ||f||)`
/// for each k in `k_list`.
pub fn gain_ratio_pointwise<R: Real>(
    f: &DistField<R>,
    grid: &PhaseGrid<R>,
    squad: &SphereQuadrature<R>,
    kernel: &Kernel<R>,
    k_list: &[R],
) -> Result<Vec<(R, R)>> {
    let qp = qplus_field(f, grid, squad, kernel);
    let qp_sup = qp.sup_over_x();
    let mut out = Vec::with_capacity(k_list.len());
    for &k in k_list {
        let (ninv, _) = norm_inv(f, grid, k);
        let nf = weighted_sup_norm(f, grid, k);
        if ninv == R::zero() || nf == R::zero() {
            return Err(Error::ZeroFieldRatio);
        }
        let num: R = qp_sup
            .iter()
            .enumerate()
            .map(|(ip, &sup)| {
                grid.quad.weights[ip] * sup * (k * grid.quad.nodes[ip].energy()).exp()
            })
            .sum();
        out.push((k, k * num / (ninv * nf)));
    }
    Ok(out)
}

/// `R_hyp = sup_E int_E (p0)^(1/2) e^(k p0) sup_x Q+(f,f) dsigma / ||f||^2`.
pub fn gain_ratio_hyp<R: Real>(
    f: &DistField<R>,
    grid: &PhaseGrid<R>,
    squad: &SphereQuadrature<R>,
    kernel: &Kernel<R>,
    k: R,
    n_normals: usize,
) -> Result<R> {
    if n_normals < 3 {
        return Err(Error::Config("n_normals must be at least 3".into()));
    }
    let nf = weighted_sup_norm(f, grid, k);
    if nf == R::zero() {
        return Err(Error::ZeroFieldRatio);
    }
    let qp = qplus_field(f, grid, squad, kernel);
    let (v, _) = hyp_sup(&qp.sup_over_x(), &grid.quad, k, n_normals);
    Ok(v / (nf * nf))
}

/// Full diagnostic report of one field. Errors on the zero field, where the
/// gain ratios are undefined.
pub fn compute_norm_report<R: Real>(
    f: &DistField<R>,
    grid: &PhaseGrid<R>,
    squad: &SphereQuadrature<R>,
    kernel: &Kernel<R>,
    k: R,
    k_list: &[R],
    n_normals: usize,
) -> Result<NormReport<R>> {
    if n_normals < 3 {
        return Err(Error::Config("n_normals must be at least 3".into()));
    }
    let nf = weighted_sup_norm(f, grid, k);
    if nf == R::zero() {
        return Err(Error::ZeroFieldRatio);
    }
    let (ninv, argmax_a) = norm_inv(f, grid, k);
    let (nhyp, argmax_normal) = hyp_sup(&f.sup_over_x(), &grid.quad, k, n_normals);

    let qp = qplus_field(f, grid, squad, kernel);
    let qp_sup = qp.sup_over_x();
    let r1_vals: Vec<R> = qp_sup
        .iter()
        .enumerate()
        .map(|(ip, &sup)| sup * (k * grid.quad.nodes[ip].energy()).exp())
        .collect();
    let (r1_num, _) = riesz_sup(&r1_vals, &grid.quad);
    let r1 = r1_num / (nf * nf);

    let mut r2 = Vec::with_capacity(k_list.len());
    for &kk in k_list {
        let (ninv_k, _) = norm_inv(f, grid, kk);
        let nf_k = weighted_sup_norm(f, grid, kk);
        if ninv_k == R::zero() || nf_k == R::zero() {
            return Err(Error::ZeroFieldRatio);
        }
        let num: R = qp_sup
            .iter()
            .enumerate()
            .map(|(ip, &sup)| {
                grid.quad.weights[ip] * sup * (kk * grid.quad.nodes[ip].energy()).exp()
            })
            .sum();
        r2.push((kk, kk * num / (ninv_k * nf_k)));
    }

    let (rh_num, _) = hyp_sup(&qp_sup, &grid.quad, k, n_normals);
    let r_hyp = rh_num / (nf * nf);

    Ok(NormReport {
        norm_linf_l1: norm_linf_l1(f, grid),
        norm_l1_linf: norm_l1_linf(f, grid),
        norm_main: nf,
        norm_inv: ninv,
        argmax_a,
        norm_hyp: nhyp,
        argmax_normal,
        r1,
        r2,
        r_hyp,
    })
}
