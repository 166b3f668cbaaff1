//! Closed-form and Monte Carlo oracles for the quadrature rules, the
//! kinematics, and the collision operators.
//!
//! The Monte Carlo estimators integrate exactly the same truncated-ball
//! integrands as the deterministic code (including the trilinear
//! interpolant in the gain term), so the comparison isolates quadrature
//! error against an independent sampling method. Momentum samples use
//! importance density `e^(-r) / (8 pi P_t)` (a truncated Gamma(3,1) radius
//! with uniform direction); sphere samples are uniform.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use rbe_slab_core::collision::{eval_l, eval_qplus, Kernel, MomentumSlice};
use rbe_slab_core::quad::{
    gauss_legendre, make_momentum_quadrature, make_sphere_quadrature, sphere_exp,
    sphere_inv_distance, MomentumQuadrature, SphereQuadrature,
};
use rbe_slab_core::relkin::{
    invariants, moller_velocity, post_collision, rotation_taking, scattering_cos, Momentum3,
};

#[derive(Debug, Clone, Copy)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
}

/// One row of the oracle table: a computed value against its independent
/// reference and the tolerance that decides the verdict.
#[derive(Debug, Clone, Serialize)]
pub struct OracleRow {
    pub name: String,
    pub value: f64,
    pub reference: f64,
    /// Absolute tolerance on `|value - reference|`.
    pub tol: f64,
    pub pass: bool,
}

impl OracleRow {
    fn new(name: &str, value: f64, reference: f64, tol: f64) -> Self {
        let pass = (value - reference).abs() <= tol && value.is_finite();
        Self { name: name.into(), value, reference, tol, pass }
    }
}

/// Samples a momentum in the ball `|q| <= pmax` from density
/// `e^(-r) / (8 pi P_t)`; returns the point and its density value.
fn sample_momentum(rng: &mut ChaCha8Rng, pmax: f64, p_trunc: f64) -> (Momentum3<f64>, f64) {
    let r = loop {
        let e: f64 = -(rng.gen_range(0.0f64..1.0).ln())
            - rng.gen_range(0.0f64..1.0).ln()
            - rng.gen_range(0.0f64..1.0).ln();
        if e <= pmax {
            break e;
        }
    };
    let z: f64 = rng.gen_range(-1.0..1.0);
    let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let rho = (1.0 - z * z).sqrt();
    let q = Momentum3::new(r * rho * phi.cos(), r * rho * phi.sin(), r * z);
    let pdf = (-r).exp() / (8.0 * std::f64::consts::PI * p_trunc);
    (q, pdf)
}

fn sample_direction(rng: &mut ChaCha8Rng) -> [f64; 3] {
    let z: f64 = rng.gen_range(-1.0..1.0);
    let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let rho = (1.0 - z * z).sqrt();
    [rho * phi.cos(), rho * phi.sin(), z]
}

/// Fraction of Gamma(3,1) mass below `pmax`.
fn gamma3_trunc(pmax: f64) -> f64 {
    1.0 - (-pmax).exp() * (1.0 + pmax + 0.5 * pmax * pmax)
}

/// Monte Carlo estimate of `Lf(p) = c0 c_kernel int vM g f(q) dq` over the
/// truncated ball, for an evaluable `f`.
pub fn mc_eval_l(
    f: &dyn Fn(&Momentum3<f64>) -> f64,
    p: &Momentum3<f64>,
    pmax: f64,
    kernel: &Kernel<f64>,
    n: usize,
    seed: u64,
) -> McEstimate {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p_trunc = gamma3_trunc(pmax);
    let pref = kernel.c0() * kernel.c_kernel;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..n {
        let (q, pdf) = sample_momentum(&mut rng, pmax, p_trunc);
        let (_, g) = invariants(p, &q);
        let x = pref * moller_velocity(p, &q) * g * f(&q) / pdf;
        sum += x;
        sum_sq += x * x;
    }
    let mean = sum / n as f64;
    let var = (sum_sq / n as f64 - mean * mean).max(0.0);
    McEstimate { mean, std_error: (var / n as f64).sqrt() }
}

/// Monte Carlo estimate of `Q+(f,h)(p)` with `f`, `h` the trilinear
/// interpolants of the given slices (the same integrand the deterministic
/// operator integrates).
pub fn mc_eval_qplus(
    f_vals: &[f64],
    h_vals: &[f64],
    p: &Momentum3<f64>,
    quad: &MomentumQuadrature<f64>,
    kernel: &Kernel<f64>,
    n: usize,
    seed: u64,
) -> McEstimate {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p_trunc = gamma3_trunc(quad.pmax);
    let four_pi = 4.0 * std::f64::consts::PI;
    let inv_4pi = 1.0 / four_pi;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..n {
        let (q, pdf) = sample_momentum(&mut rng, quad.pmax, p_trunc);
        let omega = sample_direction(&mut rng);
        let (_, g) = invariants(p, &q);
        let mut x = 0.0;
        if g > 0.0 {
            let (pp, qp) = post_collision(p, &q, &omega);
            let fv = quad.interpolate(f_vals, &pp);
            if fv != 0.0 {
                let hv = quad.interpolate(h_vals, &qp);
                if hv != 0.0 {
                    let sigma0 = if kernel.is_isotropic() {
                        inv_4pi
                    } else {
                        kernel.sigma0(scattering_cos(p, &q, &omega).unwrap_or(1.0))
                    };
                    x = kernel.c_kernel
                        * moller_velocity(p, &q)
                        * g
                        * sigma0
                        * fv
                        * hv
                        * four_pi
                        / pdf;
                }
            }
        }
        sum += x;
        sum_sq += x * x;
    }
    let mean = sum / n as f64;
    let var = (sum_sq / n as f64 - mean * mean).max(0.0);
    McEstimate { mean, std_error: (var / n as f64).sqrt() }
}

/// Closed-form oracle rows for the quadrature rules and the kinematics.
pub fn closed_form_rows() -> Vec<OracleRow> {
    let mut rows = Vec::new();
    let four_pi = 4.0 * std::f64::consts::PI;

    // Gauss-Legendre exactness
    let gl = gauss_legendre::<f64>(64);
    let sum_w: f64 = gl.iter().map(|&(_, w)| w).sum();
    rows.push(OracleRow::new("gl64 weight sum = 2", sum_w, 2.0, 1e-13));
    let x2: f64 = gl.iter().map(|&(x, w)| w * x * x).sum();
    rows.push(OracleRow::new("gl64 int x^2 = 2/3", x2, 2.0 / 3.0, 1e-13));

    // sphere rule (16, 32) against the exponential closed form
    let s16 = make_sphere_quadrature::<f64>(16, 32).unwrap();
    for cv in [0.5, 2.0, 5.0] {
        let v = [0.0, 0.6, 0.8];
        let got =
            s16.integrate(|w| (cv * (w[0] * v[0] + w[1] * v[1] + w[2] * v[2])).exp());
        let want = sphere_exp(cv, &v);
        rows.push(OracleRow::new(
            &format!("sphere(16,32) exp c|v|={cv}"),
            got,
            want,
            1e-8 * want.abs(),
        ));
    }

    // sphere rule (64, 128) against the inverse-distance closed form
    let s64 = make_sphere_quadrature::<f64>(64, 128).unwrap();
    for amag in [0.0, 0.5, 2.0, 10.0] {
        let a = [amag / 3.0, 2.0 * amag / 3.0, 2.0 * amag / 3.0];
        let got = s64.integrate(|w| {
            let d = [w[0] - a[0], w[1] - a[1], w[2] - a[2]];
            1.0 / (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
        });
        let want = sphere_inv_distance(&a);
        rows.push(OracleRow::new(
            &format!("sphere(64,128) 1/|w-a| |a|={amag}"),
            got,
            want,
            1e-6 * want.abs(),
        ));
    }

    // momentum rule: ball volume is integrated exactly by the radial rule
    let mq = make_momentum_quadrature::<f64>(12.0, 16, 8, 16).unwrap();
    let vol = mq.integrate(|_| 1.0);
    let want = four_pi / 3.0 * 12.0f64.powi(3);
    rows.push(OracleRow::new("momentum rule ball volume", vol, want, 1e-9 * want));

    // kinematics spot checks
    let p = Momentum3::new(3.0, 4.0, 0.0);
    rows.push(OracleRow::new("energy(3,4,0)", p.energy(), 26.0f64.sqrt(), 1e-14));
    let a = Momentum3::new(1.0, 0.0, 0.0);
    let b = Momentum3::new(-1.0, 0.0, 0.0);
    let (s, g) = invariants(&a, &b);
    rows.push(OracleRow::new("s for (1,0,0),(-1,0,0)", s, 8.0, 1e-13));
    rows.push(OracleRow::new("g for (1,0,0),(-1,0,0)", g, 2.0, 1e-13));
    rows.push(OracleRow::new(
        "moller velocity for (1,0,0),(-1,0,0)",
        moller_velocity(&a, &b),
        2.0f64.sqrt(),
        1e-13,
    ));
    let rot = rotation_taking(&[3.0, 4.0, 0.0]).unwrap();
    let out = rot.apply(&p.lift());
    rows.push(OracleRow::new("rotation_taking z1", out.x[0], 0.0, 1e-12));
    rows.push(OracleRow::new("rotation_taking z2", out.x[1], 0.0, 1e-12));
    rows.push(OracleRow::new("rotation_taking z3", out.x[2], 5.0, 1e-12));

    rows
}

/// Monte Carlo oracle rows for the collision operators on Jüttner slices.
pub fn monte_carlo_rows(
    quad: &MomentumQuadrature<f64>,
    squad: &SphereQuadrature<f64>,
    kernel: &Kernel<f64>,
    n_mc: usize,
    seed: u64,
) -> Vec<OracleRow> {
    let juttner = |p: &Momentum3<f64>| (-p.energy()).exp();
    let vals: Vec<f64> = quad.nodes.iter().map(|p| juttner(p)).collect();
    let slice = MomentumSlice::new(&vals);
    let probes = [
        Momentum3::new(0.37, 0.0, 0.0),
        Momentum3::new(-1.1, 0.4, 0.2),
        Momentum3::new(2.0, -1.5, 1.0),
        Momentum3::new(0.1, 0.2, -3.0),
        Momentum3::new(-4.0, 2.0, -1.0),
    ];
    let mut rows = Vec::new();
    for (i, p) in probes.iter().enumerate() {
        let det = eval_l(&slice, p, quad, kernel);
        let mc = mc_eval_l(&juttner, p, quad.pmax, kernel, n_mc, seed ^ (i as u64));
        rows.push(OracleRow::new(
            &format!("mc L probe {i}"),
            det,
            mc.mean,
            3.0 * mc.std_error,
        ));
    }
    for (i, p) in probes.iter().enumerate() {
        let det = eval_qplus(&slice, &slice, p, quad, squad, kernel);
        let mc = mc_eval_qplus(&vals, &vals, p, quad, kernel, n_mc, seed ^ (0x100 + i as u64));
        rows.push(OracleRow::new(
            &format!("mc Q+ probe {i}"),
            det,
            mc.mean,
            3.0 * mc.std_error,
        ));
    }
    rows
}
