//! Quadrature rules for the unit sphere and the truncated momentum ball,
//! plus the two closed-form sphere integrals used as convergence oracles.
//!
//! The momentum rule is a spherical-polar product grid (Gauss-Legendre in
//! radius and polar cosine, midpoint in azimuth) whose polar axis is rotated
//! by fixed irrational angles so that no node lands on the p1 = 0 plane.

use crate::relkin::Momentum3;
use crate::{lit, Error, Real, Result};

/// Gauss-Legendre nodes and weights on [-1, 1], computed in `f64` by Newton
/// iteration on the Legendre recurrence and converted to the working scalar.
pub fn gauss_legendre<R: Real>(n: usize) -> Vec<(R, R)> {
    assert!(n >= 1);
    let mut out = Vec::with_capacity(n);
    let nf = n as f64;
    for i in 0..n {
        // Tricomi initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_n(x) and P'_n(x)
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            pp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / pp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * pp * pp);
        out.push((lit::<R>(-x), lit::<R>(w))); // ascending order
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

/// Product quadrature on the unit sphere: Gauss-Legendre in the polar cosine
/// times a uniform (periodic trapezoid) rule in azimuth. Weights carry the
/// steradian measure, so they sum to 4 pi.
#[derive(Debug, Clone)]
pub struct SphereQuadrature<R> {
    pub nodes: Vec<[R; 3]>,
    pub weights: Vec<R>,
    pub n_polar: usize,
    pub n_azimuth: usize,
}

/// Builds a sphere rule with `n_polar >= 2` Gauss nodes in cos(theta) and
/// `n_azimuth >= 4` uniform azimuth nodes.
pub fn make_sphere_quadrature<R: Real>(
    n_polar: usize,
    n_azimuth: usize,
) -> Result<SphereQuadrature<R>> {
    if n_polar < 2 {
        return Err(Error::Config(format!("n_polar must be >= 2, got {n_polar}")));
    }
    if n_azimuth < 4 {
        return Err(Error::Config(format!("n_azimuth must be >= 4, got {n_azimuth}")));
    }
    let gl = gauss_legendre::<R>(n_polar);
    let two_pi = R::PI() * lit::<R>(2.0);
    let w_phi = two_pi / lit::<R>(n_azimuth as f64);
    let mut nodes = Vec::with_capacity(n_polar * n_azimuth);
    let mut weights = Vec::with_capacity(n_polar * n_azimuth);
    for &(z, wz) in &gl {
        let sin_theta = (R::one() - z * z).max(R::zero()).sqrt();
        for j in 0..n_azimuth {
            let phi = two_pi * lit::<R>(j as f64) / lit::<R>(n_azimuth as f64);
            nodes.push([sin_theta * phi.cos(), sin_theta * phi.sin(), z]);
            weights.push(wz * w_phi);
        }
    }
    Ok(SphereQuadrature { nodes, weights, n_polar, n_azimuth })
}

impl<R: Real> SphereQuadrature<R> {
    /// Applies the rule to a function of the unit direction.
    pub fn integrate<F: Fn(&[R; 3]) -> R>(&self, f: F) -> R {
        self.nodes
            .iter()
            .zip(self.weights.iter())
            .map(|(n, &w)| w * f(n))
            .sum()
    }

    /// Partner index of each node under `omega -> -omega` when the node set
    /// is antipodally symmetric with matching weights (even azimuth count),
    /// `None` otherwise. Integrands even under the flip only need half the
    /// nodes at doubled weight.
    pub fn antipodal_pairs(&self) -> Option<Vec<u32>> {
        let tol = lit::<R>(1e-12);
        let mut pairs = vec![u32::MAX; self.nodes.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            if pairs[i] != u32::MAX {
                continue;
            }
            let j = self.nodes.iter().position(|m| {
                (m[0] + n[0]).abs() < tol
                    && (m[1] + n[1]).abs() < tol
                    && (m[2] + n[2]).abs() < tol
            })?;
            if j == i || (self.weights[i] - self.weights[j]).abs() > tol {
                return None;
            }
            pairs[i] = j as u32;
            pairs[j] = i as u32;
        }
        Some(pairs)
    }
}

/// Closed form of `int_{S^2} d omega / |omega - a|`:
/// `4 pi` for `|a| <= 1` and `4 pi / |a|` otherwise.
pub fn sphere_inv_distance<R: Real>(a: &[R; 3]) -> R {
    let four_pi = lit::<R>(4.0) * R::PI();
    let r = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    if r <= R::one() {
        four_pi
    } else {
        four_pi / r
    }
}

/// Threshold on `c |v|` below which the series branch of [`sphere_exp`] is
/// used; the two-term series is accurate to ~1e-13 there.
const SINHC_SERIES_CUTOFF: f64 = 1e-6;

/// Closed form of `int_{S^2} e^{c omega . v} d omega = 4 pi sinh(c|v|)/(c|v|)`
/// with the limit `4 pi` as `c|v| -> 0`.
pub fn sphere_exp<R: Real>(c: R, v: &[R; 3]) -> R {
    let four_pi = lit::<R>(4.0) * R::PI();
    let x = c * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if x.abs() < lit::<R>(SINHC_SERIES_CUTOFF) {
        let x2 = x * x;
        four_pi * (R::one() + x2 / lit::<R>(6.0) + x2 * x2 / lit::<R>(120.0))
    } else {
        four_pi * x.sinh() / x
    }
}

/// Fixed rotation angles (irrational) staggering the momentum grid off the
/// p1 = 0 plane.
const STAGGER_ALPHA: f64 = 0.414_213_562_373_095_1; // sqrt(2) - 1
const STAGGER_BETA: f64 = 0.732_050_807_568_877_3; // sqrt(3) - 1

/// Spherical-polar product quadrature on the ball `|p| <= pmax`, with the
/// r^2 Jacobian folded into the weights and the polar axis rotated so that
/// no node lies on p1 = 0.
///
/// Node order: `idx = (i_r * n_polar + i_z) * n_azimuth + i_phi`.
#[derive(Debug, Clone)]
pub struct MomentumQuadrature<R> {
    pub nodes: Vec<Momentum3<R>>,
    pub weights: Vec<R>,
    pub pmax: R,
    pub n_radial: usize,
    pub n_polar: usize,
    pub n_azimuth: usize,
    /// Radial Gauss nodes on (0, pmax), ascending.
    pub r_nodes: Vec<R>,
    /// Polar cosine Gauss nodes on (-1, 1), ascending.
    pub z_nodes: Vec<R>,
    /// Midpoint azimuth nodes `2 pi (k + 1/2) / n_azimuth`.
    pub phi_nodes: Vec<R>,
    /// Rotation from the local (grid-aligned) frame to the lab frame.
    rot: [[R; 3]; 3],
}

/// Interpolation stencil of a point inside the momentum ball: eight node
/// indices and nonnegative weights of the trilinear rule in index space.
#[derive(Debug, Clone, Copy)]
pub struct Stencil<R> {
    pub idx: [u32; 8],
    pub w: [R; 8],
}

pub fn make_momentum_quadrature<R: Real>(
    pmax: R,
    n_radial: usize,
    n_polar: usize,
    n_azimuth: usize,
) -> Result<MomentumQuadrature<R>> {
    if pmax <= R::zero() {
        return Err(Error::Config("pmax must be positive".into()));
    }
    if n_radial < 2 || n_polar < 2 || n_azimuth < 2 {
        return Err(Error::Config(
            "momentum quadrature needs at least 2 nodes per direction".into(),
        ));
    }

    let half = lit::<R>(0.5);
    let two_pi = R::PI() * lit::<R>(2.0);

    let r_rule: Vec<(R, R)> = gauss_legendre::<R>(n_radial)
        .into_iter()
        .map(|(x, w)| (half * pmax * (x + R::one()), half * pmax * w))
        .collect();
    let z_rule = gauss_legendre::<R>(n_polar);
    let w_phi = two_pi / lit::<R>(n_azimuth as f64);
    let phi_nodes: Vec<R> = (0..n_azimuth)
        .map(|k| two_pi * (lit::<R>(k as f64) + half) / lit::<R>(n_azimuth as f64))
        .collect();

    // lab_from_local = Rz(beta) * Ry(alpha)
    let (ca, sa) = (lit::<R>(STAGGER_ALPHA.cos()), lit::<R>(STAGGER_ALPHA.sin()));
    let (cb, sb) = (lit::<R>(STAGGER_BETA.cos()), lit::<R>(STAGGER_BETA.sin()));
    let rot = [
        [cb * ca, -sb, cb * sa],
        [sb * ca, cb, sb * sa],
        [-sa, R::zero(), ca],
    ];

    let mut nodes = Vec::with_capacity(n_radial * n_polar * n_azimuth);
    let mut weights = Vec::with_capacity(nodes.capacity());
    for &(r, wr) in &r_rule {
        for &(z, wz) in &z_rule {
            let sin_theta = (R::one() - z * z).max(R::zero()).sqrt();
            for &phi in &phi_nodes {
                let local = [r * sin_theta * phi.cos(), r * sin_theta * phi.sin(), r * z];
                let lab = mat_vec(&rot, &local);
                nodes.push(Momentum3 { p: lab });
                weights.push(wr * r * r * wz * w_phi);
            }
        }
    }

    let stagger_floor = pmax * lit::<R>(1e-9);
    if nodes.iter().any(|n| n.p[0].abs() < stagger_floor) {
        return Err(Error::Config(
            "momentum grid node on the p1 = 0 plane; adjust resolutions".into(),
        ));
    }

    Ok(MomentumQuadrature {
        nodes,
        weights,
        pmax,
        n_radial,
        n_polar,
        n_azimuth,
        r_nodes: r_rule.into_iter().map(|(r, _)| r).collect(),
        z_nodes: z_rule.into_iter().map(|(z, _)| z).collect(),
        phi_nodes,
        rot,
    })
}

#[inline]
fn mat_vec<R: Real>(m: &[[R; 3]; 3], v: &[R; 3]) -> [R; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

#[inline]
fn mat_t_vec<R: Real>(m: &[[R; 3]; 3], v: &[R; 3]) -> [R; 3] {
    [
        m[0][0] * v[0] + m[1][0] * v[1] + m[2][0] * v[2],
        m[0][1] * v[0] + m[1][1] * v[1] + m[2][1] * v[2],
        m[0][2] * v[0] + m[1][2] * v[1] + m[2][2] * v[2],
    ]
}

/// Fractional bracket of `x` in an ascending coordinate array: lower index
/// and weight of the upper neighbor, clamped (constant beyond the ends).
#[inline]
fn bracket<R: Real>(coords: &[R], x: R) -> (usize, R) {
    let n = coords.len();
    if x <= coords[0] {
        return (0, R::zero());
    }
    if x >= coords[n - 1] {
        return (n - 2, R::one());
    }
    // branch-free counting scan; the coordinate arrays are short
    let mut lo = 0usize;
    for c in &coords[1..n - 1] {
        lo += usize::from(*c <= x);
    }
    let t = (x - coords[lo]) / (coords[lo + 1] - coords[lo]);
    (lo, t)
}

impl<R: Real> MomentumQuadrature<R> {
    #[inline]
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Applies the rule to a function of the momentum node.
    pub fn integrate<F: Fn(&Momentum3<R>) -> R>(&self, f: F) -> R {
        self.nodes
            .iter()
            .zip(self.weights.iter())
            .map(|(n, &w)| w * f(n))
            .sum()
    }

    #[inline]
    fn node_index(&self, ir: usize, iz: usize, ip: usize) -> u32 {
        ((ir * self.n_polar + iz) * self.n_azimuth + ip) as u32
    }

    /// Trilinear interpolation stencil in spherical-polar index space for a
    /// lab-frame momentum. Returns `None` outside the truncation radius
    /// (value 0 by convention). Between the outermost radial node and `pmax`
    /// the value decays linearly to zero.
    pub fn stencil(&self, v: &Momentum3<R>) -> Option<Stencil<R>> {
        let local = mat_t_vec(&self.rot, &v.p);
        let r = (local[0] * local[0] + local[1] * local[1] + local[2] * local[2]).sqrt();
        if r > self.pmax {
            return None;
        }

        let nr = self.r_nodes.len();
        let r_last = self.r_nodes[nr - 1];
        let (ir, tr, edge_scale) = if r >= r_last {
            // linear decay from the outermost shell to zero at pmax
            let span = self.pmax - r_last;
            let scale = if span > R::zero() {
                (self.pmax - r) / span
            } else {
                R::one()
            };
            (nr - 2, R::one(), scale)
        } else {
            let (i, t) = bracket(&self.r_nodes, r);
            (i, t, R::one())
        };

        let z = if r > R::zero() { local[2] / r } else { R::zero() };
        let (iz, tz) = bracket(&self.z_nodes, z);

        let phi = local[1].atan2(local[0]);
        let two_pi = R::PI() * lit::<R>(2.0);
        let phi = if phi < R::zero() { phi + two_pi } else { phi };
        let dphi = two_pi / lit::<R>(self.n_azimuth as f64);
        // continuous azimuth index against midpoint nodes, periodic
        let u = phi / dphi - lit::<R>(0.5);
        let n_az = self.n_azimuth as f64;
        let u = if u < R::zero() { u + lit::<R>(n_az) } else { u };
        let ip0f = u.floor();
        let tp = u - ip0f;
        let mut ip0 = ip0f.to_usize().unwrap_or(0);
        if ip0 >= self.n_azimuth {
            ip0 = 0;
        }
        let ip1 = if ip0 + 1 == self.n_azimuth { 0 } else { ip0 + 1 };

        let one = R::one();
        let wr = [(one - tr) * edge_scale, tr * edge_scale];
        let wz = [one - tz, tz];
        let wp = [one - tp, tp];

        let mut idx = [0u32; 8];
        let mut w = [R::zero(); 8];
        let mut n = 0;
        for (a, &wra) in wr.iter().enumerate() {
            for (b, &wzb) in wz.iter().enumerate() {
                for (c, &wpc) in wp.iter().enumerate() {
                    idx[n] = self.node_index(ir + a, iz + b, if c == 0 { ip0 } else { ip1 });
                    w[n] = wra * wzb * wpc;
                    n += 1;
                }
            }
        }
        Some(Stencil { idx, w })
    }

    /// Interpolates values sampled on the grid at an arbitrary momentum.
    pub fn interpolate(&self, values: &[R], v: &Momentum3<R>) -> R {
        match self.stencil(v) {
            None => R::zero(),
            Some(st) => st
                .idx
                .iter()
                .zip(st.w.iter())
                .map(|(&i, &w)| w * values[i as usize])
                .sum(),
        }
    }

    /// Local mesh size at a node: cube root of its quadrature weight
    /// (the volume of the cell the node represents).
    pub fn local_mesh_size(&self, idx: usize) -> R {
        self.weights[idx].cbrt()
    }
}
