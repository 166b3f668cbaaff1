//! End-to-end acceptance suite: twelve verification criteria, each printing
//! one pass/fail line (run with `-- --nocapture` to see them as they
//! complete). Runtime budgets are stated for 8 workers and scaled by the
//! actual worker count of this run.
//!
//! Criteria 6-9 and 12 share one full-resolution solve (16x8x16 momentum
//! grid, n_x = 33); criteria 10-11 share a family of smaller solves.

use std::path::PathBuf;
use std::time::Instant;

use once_cell::sync::Lazy;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rbe_slab_cli::config::RunConfig;
use rbe_slab_cli::dump::read_field;
use rbe_slab_cli::oracle::{closed_form_rows, monte_carlo_rows};
use rbe_slab_cli::run::{run, Mode, RunArgs, EXIT_OK};

use rbe_slab_core::collision::{coercivity_scan, moment_residuals, MomentumSlice};
use rbe_slab_core::field::{DistField, PhaseGrid};
use rbe_slab_core::norms::{gain_ratio_hyp, gain_ratio_inv, gain_ratio_pointwise, norm_hyp, norm_main};
use rbe_slab_core::quad::{make_sphere_quadrature, sphere_exp, sphere_inv_distance, SphereQuadrature};
use rbe_slab_core::relkin::{
    boost_to, invariants, post_collision, post_collision_energies, rotation_taking, FourVector,
    Momentum3,
};
use rbe_slab_core::steady::{dominates_envelope, lower_envelope, solve, ConvergenceTrace};

/// Boundary amplitude of the full-resolution run. The Picard map is a
/// contraction only for small enough data (the gain term is quadratic);
/// this value converges in a few iterations with a wide margin while
/// keeping every reported diagnostic well above rounding level.
const DESK_AMP: f64 = 2e-4;

/// Scales a budget quoted for 8 workers to this run's worker count.
fn budget(seconds_on_8_workers: f64) -> f64 {
    seconds_on_8_workers * 8.0 / rayon::current_num_threads() as f64
}

fn verdict(criterion: u32, pass: bool, detail: &str) {
    println!(
        "criterion {criterion:2}: {} - {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} failed: {detail}");
}

fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0xacce97)
}

fn random_momentum(rng: &mut ChaCha8Rng, scale: f64) -> Momentum3<f64> {
    Momentum3::new(
        scale * rng.gen_range(-1.0..1.0),
        scale * rng.gen_range(-1.0..1.0),
        scale * rng.gen_range(-1.0..1.0),
    )
}

fn random_direction(rng: &mut ChaCha8Rng) -> [f64; 3] {
    let z: f64 = rng.gen_range(-1.0f64..1.0);
    let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let r = (1.0 - z * z).sqrt();
    [r * phi.cos(), r * phi.sin(), z]
}

fn norm3(a: &[f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

// ---------------------------------------------------------------------------
// shared runs

fn desk_config() -> RunConfig {
    RunConfig {
        a_left: DESK_AMP,
        a_right: DESK_AMP,
        t_right: 1.25,
        ..RunConfig::default()
    }
}

struct DeskRun {
    dir: PathBuf,
    report: serde_json::Value,
    elapsed: f64,
}

fn desk_solve(dir: &PathBuf) -> (serde_json::Value, f64) {
    std::fs::create_dir_all(dir).unwrap();
    let t0 = Instant::now();
    let code = run(&RunArgs { mode: Mode::Solve, config: desk_config(), out: dir.clone() });
    let elapsed = t0.elapsed().as_secs_f64();
    assert_eq!(code, EXIT_OK, "full-resolution solve did not exit cleanly");
    let text = std::fs::read_to_string(dir.join("report.json")).unwrap();
    (serde_json::from_str(&text).unwrap(), elapsed)
}

static DESK: Lazy<DeskRun> = Lazy::new(|| {
    let dir = std::env::temp_dir().join("rbe-slab-acceptance-desk");
    let (report, elapsed) = desk_solve(&dir);
    DeskRun { dir, report, elapsed }
});

/// Smaller configuration used for the scaled-boundary family and the
/// refinement study; same pmax and physics, coarser grids.
fn small_config(amp: f64) -> RunConfig {
    RunConfig {
        n_x: 17,
        n_radial: 12,
        n_polar: 6,
        n_azimuth: 12,
        sphere_polar: 8,
        sphere_azimuth: 16,
        a_left: amp,
        a_right: amp,
        t_right: 1.25,
        ..RunConfig::default()
    }
}

struct CoreSolve {
    cfg: RunConfig,
    grid: PhaseGrid<f64>,
    squad: SphereQuadrature<f64>,
    field: DistField<f64>,
    trace: ConvergenceTrace<f64>,
}

fn core_solve(cfg: RunConfig) -> CoreSolve {
    let grid = cfg.grid().unwrap();
    let squad = cfg.sphere_quadrature().unwrap();
    let kernel = cfg.kernel().unwrap();
    let bp = cfg.boundary(&grid.quad).unwrap();
    let (field, trace) = solve(&grid, &squad, &kernel, &bp, &cfg.solver_config()).unwrap();
    CoreSolve { cfg, grid, squad, field, trace }
}

struct SmallRuns {
    /// Converged solves for boundary scale eps in {1, 0.5, 0.1}.
    family: Vec<(f64, CoreSolve)>,
}

static SMALL: Lazy<SmallRuns> = Lazy::new(|| {
    let family = [1.0, 0.5, 0.1]
        .into_iter()
        .map(|eps| (eps, core_solve(small_config(eps * DESK_AMP))))
        .collect();
    SmallRuns { family }
});

/// Refinement pair for criterion 11: production momentum resolution with a
/// deliberately coarse transport/sphere base, so that the quantities being
/// doubled (n_x and the sphere rule) are the limiting discretization errors
/// rather than the fixed momentum grid.
static REFINEMENT: Lazy<(CoreSolve, CoreSolve)> = Lazy::new(|| {
    let base_cfg = RunConfig {
        n_x: 17,
        sphere_polar: 2,
        sphere_azimuth: 4,
        a_left: DESK_AMP,
        a_right: DESK_AMP,
        t_right: 1.25,
        ..RunConfig::default()
    };
    let refined_cfg = RunConfig {
        n_x: 33,
        sphere_polar: 4,
        sphere_azimuth: 8,
        ..base_cfg.clone()
    };
    (core_solve(base_cfg), core_solve(refined_cfg))
});

// ---------------------------------------------------------------------------
// criteria

/// 1e5 seeded on-shell pairs: s = g^2 + 4 within 1e-12, the two-sided g
/// bounds, and |p-q| >= |p0-q0|, with zero violations, under 5 s.
#[test]
fn criterion_01_kinematics() {
    let t0 = Instant::now();
    let mut rng = rng();
    let mut ok = true;
    for _ in 0..100_000 {
        let scale = 10.0f64.powf(rng.gen_range(-2.0..1.5));
        let p = random_momentum(&mut rng, scale);
        let q = random_momentum(&mut rng, scale);
        let (s, g) = invariants(&p, &q);
        ok &= (s - g * g - 4.0).abs() <= 1e-12 * s;

        let d = [p.p[0] - q.p[0], p.p[1] - q.p[1], p.p[2] - q.p[2]];
        let dmag = norm3(&d);
        let x = [
            p.p[1] * q.p[2] - p.p[2] * q.p[1],
            p.p[2] * q.p[0] - p.p[0] * q.p[2],
            p.p[0] * q.p[1] - p.p[1] * q.p[0],
        ];
        let lower = (dmag * dmag + norm3(&x).powi(2)).sqrt() / (p.energy() * q.energy()).sqrt();
        let upper = dmag.min(2.0 * (p.energy() * q.energy()).sqrt());
        let tol = 1e-12 * (1.0 + g);
        ok &= lower <= g + tol && g <= upper + tol;
        ok &= dmag + 1e-12 * (1.0 + dmag) >= (p.energy() - q.energy()).abs();
    }
    let secs = t0.elapsed().as_secs_f64();
    verdict(
        1,
        ok && secs < budget(5.0),
        &format!("kinematic identities on 1e5 pairs, {secs:.2} s"),
    );
}

/// 1e5 seeded collision triples: 3-momentum conserved within 1e-12, energy
/// within 1e-10, (s, g) invariant within 1e-10, closed-form post-collision
/// energies on shell within 1e-10, under 10 s.
#[test]
fn criterion_02_collision_map() {
    let t0 = Instant::now();
    let mut rng = rng();
    let mut ok = true;
    for _ in 0..100_000 {
        let scale = 10.0f64.powf(rng.gen_range(-2.0..1.5));
        let p = random_momentum(&mut rng, scale);
        let q = random_momentum(&mut rng, scale);
        let omega = random_direction(&mut rng);
        let (s, g) = invariants(&p, &q);
        let (pp, qp) = post_collision(&p, &q, &omega);
        for i in 0..3 {
            let a = p.p[i] + q.p[i];
            ok &= (a - pp.p[i] - qp.p[i]).abs() <= 1e-12 * (1.0 + a.abs());
        }
        let e = p.energy() + q.energy();
        ok &= (e - pp.energy() - qp.energy()).abs() <= 1e-10 * e;
        let (sp, gp) = invariants(&pp, &qp);
        ok &= (s - sp).abs() <= 1e-10 * s && (g - gp).abs() <= 1e-10 * (1.0 + g);
        let (e1, e2) = post_collision_energies(&p, &q, &omega);
        ok &= (e1 - pp.energy()).abs() <= 1e-10 * e1;
        ok &= (e2 - qp.energy()).abs() <= 1e-10 * e2;
    }
    let secs = t0.elapsed().as_secs_f64();
    verdict(
        2,
        ok && secs < budget(10.0),
        &format!("collision map conservation on 1e5 triples, {secs:.2} s"),
    );
}

/// 1e3 constructed boosts and rotations: metric preserved and det = 1
/// within 1e-12; rotation_taking maps a to (0,0,0,|a|); Minkowski products
/// invariant.
#[test]
fn criterion_03_lorentz() {
    let mut rng = rng();
    let eta = [-1.0, 1.0, 1.0, 1.0];
    let mut ok = true;
    let mut checked = 0;
    while checked < 1_000 {
        let lt = if checked % 2 == 0 {
            let p = random_momentum(&mut rng, 2.0);
            let e = p.energy();
            boost_to(&[p.p[0] / e, p.p[1] / e, p.p[2] / e]).unwrap()
        } else {
            let a = [
                rng.gen_range(-5.0f64..5.0),
                rng.gen_range(-5.0..5.0),
                rng.gen_range(-5.0..5.0),
            ];
            if norm3(&a) < 1e-3 {
                continue;
            }
            let rot = rotation_taking(&a).unwrap();
            let img = rot.apply(&FourVector { t: 0.0, x: a });
            let n = norm3(&a);
            ok &= img.t.abs() <= 1e-12 * (1.0 + n)
                && img.x[0].abs() <= 1e-12 * (1.0 + n)
                && img.x[1].abs() <= 1e-12 * (1.0 + n)
                && (img.x[2] - n).abs() <= 1e-12 * (1.0 + n);
            rot
        };
        checked += 1;

        let mut cols = [[0.0f64; 4]; 4];
        for j in 0..4 {
            let mut e = FourVector { t: 0.0, x: [0.0; 3] };
            if j == 0 {
                e.t = 1.0;
            } else {
                e.x[j - 1] = 1.0;
            }
            let img = lt.apply(&e);
            cols[j] = [img.t, img.x[0], img.x[1], img.x[2]];
        }
        for a in 0..4 {
            for b in 0..4 {
                let mut acc = 0.0;
                for m in 0..4 {
                    acc += cols[a][m] * eta[m] * cols[b][m];
                }
                let want = if a == b { eta[a] } else { 0.0 };
                ok &= (acc - want).abs() <= 1e-12 * (1.0 + acc.abs());
            }
        }
        ok &= (det4(&cols) - 1.0).abs() <= 1e-12;

        let u = random_momentum(&mut rng, 3.0).lift();
        let v = random_momentum(&mut rng, 3.0).lift();
        let before = u.minkowski_dot(&v);
        let after = lt.apply(&u).minkowski_dot(&lt.apply(&v));
        ok &= (before - after).abs() <= 1e-12 * (1.0 + before.abs());
    }
    verdict(3, ok, "1e3 Lorentz transforms: metric, det, invariance");
}

fn det4(cols: &[[f64; 4]; 4]) -> f64 {
    let m = |r: usize, c: usize| cols[c][r];
    let det3 = |r: [usize; 3], c: [usize; 3]| {
        m(r[0], c[0]) * (m(r[1], c[1]) * m(r[2], c[2]) - m(r[1], c[2]) * m(r[2], c[1]))
            - m(r[0], c[1]) * (m(r[1], c[0]) * m(r[2], c[2]) - m(r[1], c[2]) * m(r[2], c[0]))
            + m(r[0], c[2]) * (m(r[1], c[0]) * m(r[2], c[1]) - m(r[1], c[1]) * m(r[2], c[0]))
    };
    m(0, 0) * det3([1, 2, 3], [1, 2, 3]) - m(1, 0) * det3([0, 2, 3], [1, 2, 3])
        + m(2, 0) * det3([0, 1, 3], [1, 2, 3])
        - m(3, 0) * det3([0, 1, 2], [1, 2, 3])
}

/// Sphere rule (16, 32) vs the exponential closed form within 1e-8 relative
/// for c|v| <= 5; rule (64, 128) vs the inverse-distance closed form within
/// 1e-6 for |a| in {0, 0.5, 2, 10}.
#[test]
fn criterion_04_sphere_quadrature() {
    let mut rng = rng();
    let mut ok = true;
    let s16 = make_sphere_quadrature::<f64>(16, 32).unwrap();
    for _ in 0..100 {
        let c: f64 = rng.gen_range(0.01..5.0);
        let v = random_direction(&mut rng);
        let got = s16.integrate(|w| (c * (w[0] * v[0] + w[1] * v[1] + w[2] * v[2])).exp());
        ok &= (got - sphere_exp(c, &v)).abs() <= 1e-8 * sphere_exp(c, &v);
    }
    let s64 = make_sphere_quadrature::<f64>(64, 128).unwrap();
    for amag in [0.0, 0.5, 2.0, 10.0] {
        let dir = random_direction(&mut rng);
        let a = [amag * dir[0], amag * dir[1], amag * dir[2]];
        let got = s64.integrate(|w| {
            1.0 / norm3(&[w[0] - a[0], w[1] - a[1], w[2] - a[2]])
        });
        ok &= (got - sphere_inv_distance(&a)).abs() <= 1e-6 * sphere_inv_distance(&a);
    }
    verdict(4, ok, "sphere rules vs closed forms at both resolutions");
}

/// eval_L and eval_Qplus on Jüttner slices vs seeded Monte Carlo (1e7
/// samples) within 3 standard errors at 5 probes, plus the closed-form
/// oracle table, under 2 min.
#[test]
fn criterion_05_collision_oracle() {
    let t0 = Instant::now();
    // finer quadrature than the production grid so the cubature error of
    // the deterministic operators sits well below 3 Monte Carlo standard
    // errors at 1e7 samples
    let cfg = RunConfig {
        n_radial: 32,
        n_polar: 16,
        n_azimuth: 32,
        sphere_polar: 32,
        sphere_azimuth: 64,
        ..RunConfig::default()
    };
    let quad = cfg.momentum_quadrature().unwrap();
    let squad = cfg.sphere_quadrature().unwrap();
    let kernel = cfg.kernel().unwrap();
    let mut rows = closed_form_rows();
    rows.extend(monte_carlo_rows(&quad, &squad, &kernel, 10_000_000, 0));
    let ok = rows.iter().all(|r| r.pass);
    for r in rows.iter().filter(|r| !r.pass) {
        println!(
            "  oracle row failed: {} value {} reference {} tol {}",
            r.name, r.value, r.reference, r.tol
        );
    }
    let secs = t0.elapsed().as_secs_f64();
    verdict(
        5,
        ok && secs < budget(120.0),
        &format!("operator values vs 1e7-sample Monte Carlo, {secs:.1} s"),
    );
}

/// Full-resolution solve: geometric residual decay, convergence within 200
/// iterations, fixed-point residual < 2e-6, field nonnegative and above the
/// lower envelope, under 10 min on 8 workers.
#[test]
fn criterion_06_solver_convergence() {
    let desk = &*DESK;
    let trace = &desk.report["trace"];
    let rows = trace["rows"].as_array().unwrap();
    let converged = trace["converged"].as_bool().unwrap();
    let fp_res = trace["fixed_point_residual"].as_f64().unwrap();
    let geometric = rows.iter().all(|r| {
        r["iteration"].as_u64().unwrap() <= 2
            || r["contraction_ratio"].as_f64().map_or(false, |c| c < 1.0)
    });

    let cfg = desk_config();
    let grid = cfg.grid().unwrap();
    let bp = cfg.boundary(&grid.quad).unwrap();
    let (_, field) = read_field(&desk.dir.join("field.bin")).unwrap();
    let nonneg = field.is_nonnegative();
    let env = lower_envelope(&bp, &grid, cfg.c1);
    let above = dominates_envelope(&field, &env)
        && desk.report["trace"]["envelope_held"].as_bool().unwrap();

    let within_budget = desk.elapsed < budget(600.0);
    verdict(
        6,
        converged && rows.len() <= 200 && geometric && fp_res < 2e-6 && nonneg && above
            && within_budget,
        &format!(
            "converged in {} iterations, fixed-point residual {fp_res:.2e}, {:.0} s",
            rows.len(),
            desk.elapsed
        ),
    );
}

/// Coercivity of the converged field: C_l_hat > 0, C_u_hat/C_l_hat finite,
/// and C_l_hat at least half its value on the initial envelope.
#[test]
fn criterion_07_coercivity() {
    let desk = &*DESK;
    let c_l = desk.report["coercivity"]["c_l_hat"].as_f64().unwrap();
    let c_u = desk.report["coercivity"]["c_u_hat"].as_f64().unwrap();

    let cfg = desk_config();
    let grid = cfg.grid().unwrap();
    let kernel = cfg.kernel().unwrap();
    let bp = cfg.boundary(&grid.quad).unwrap();
    let env = lower_envelope(&bp, &grid, cfg.c1);
    let (c_l_env, _) = coercivity_scan(&env, &grid, &kernel).unwrap();

    verdict(
        7,
        c_l > 0.0 && (c_u / c_l).is_finite() && c_l > 0.5 * c_l_env,
        &format!("C_l_hat {c_l:.3e} (envelope {c_l_env:.3e}), C_u_hat/C_l_hat {:.2}", c_u / c_l),
    );
}

/// Norm ordering on every iterate of the full-resolution run:
/// LinfL1 <= L1Linf <= weighted norm.
#[test]
fn criterion_08_norm_ordering() {
    let desk = &*DESK;
    let rows = desk.report["trace"]["rows"].as_array().unwrap();
    let slack = 1e-12;
    let ok = rows.iter().all(|r| {
        let a = r["norm_linf_l1"].as_f64().unwrap();
        let b = r["norm_l1_linf"].as_f64().unwrap();
        let c = r["norm_main"].as_f64().unwrap();
        a <= b * (1.0 + slack) && b <= c * (1.0 + slack)
    });
    verdict(8, ok, &format!("ordering held on all {} iterates", rows.len()));
}

/// Gain ratios on the converged field: R1, R2(k), R_hyp finite; the
/// per-unit-rate constant R2(k)/k non-increasing in k within 5% (the
/// recorded R2 carries an explicit factor k, so the inverse-rate decay of
/// the underlying integral ratio shows up in R2(k)/k); all three ratios
/// invariant under halving the field to 1e-10 relative.
#[test]
fn criterion_09_gain_ratios() {
    let desk = &*DESK;
    let norms = &desk.report["norms"];
    let r1 = norms["r1"].as_f64().unwrap();
    let r_hyp = norms["r_hyp"].as_f64().unwrap();
    let r2: Vec<(f64, f64)> = norms["r2"]
        .as_array()
        .unwrap()
        .iter()
        .map(|kv| (kv[0].as_f64().unwrap(), kv[1].as_f64().unwrap()))
        .collect();
    let finite = r1.is_finite() && r_hyp.is_finite() && r2.iter().all(|(_, v)| v.is_finite());
    let monotone = r2
        .windows(2)
        .all(|w| w[1].1 / w[1].0 <= 1.05 * (w[0].1 / w[0].0));

    // quadratic homogeneity, demonstrated on the small converged field
    // (identical code path, two full gain evaluations per ratio)
    let small = &SMALL.family[0].1;
    let kernel = small.cfg.kernel().unwrap();
    let mut half = small.field.clone();
    half.scale_in_place(0.5);
    let k = small.cfg.k;
    let pairs = [
        (
            gain_ratio_inv(&small.field, &small.grid, &small.squad, &kernel, k).unwrap(),
            gain_ratio_inv(&half, &small.grid, &small.squad, &kernel, k).unwrap(),
        ),
        (
            gain_ratio_hyp(&small.field, &small.grid, &small.squad, &kernel, k, 64).unwrap(),
            gain_ratio_hyp(&half, &small.grid, &small.squad, &kernel, k, 64).unwrap(),
        ),
    ];
    let r2_full =
        gain_ratio_pointwise(&small.field, &small.grid, &small.squad, &kernel, &[k]).unwrap();
    let r2_half = gain_ratio_pointwise(&half, &small.grid, &small.squad, &kernel, &[k]).unwrap();
    let scale_invariant = pairs
        .iter()
        .all(|(a, b)| (a - b).abs() <= 1e-10 * a.abs())
        && (r2_full[0].1 - r2_half[0].1).abs() <= 1e-10 * r2_full[0].1.abs();

    verdict(
        9,
        finite && monotone && scale_invariant,
        &format!("r1 {r1:.3}, r_hyp {r_hyp:.3}, r2 {r2:?}"),
    );
}

/// Hyperplane norm of the converged field stays proportional to the
/// boundary data across boundary scales eps in {1, 0.5, 0.1}: the ratio
/// ||f||_hyp / (||f_LR||_hyp + ||f||^2) is finite and varies by less than a
/// factor 2 over the family.
#[test]
fn criterion_10_hyperplane_propagation() {
    let mut ratios = Vec::new();
    for (eps, run) in &SMALL.family {
        let k = run.cfg.k;
        let bp = run.cfg.boundary(&run.grid.quad).unwrap();
        // pure boundary-data field: the inflow profile of each side,
        // constant in x1
        let f_lr = DistField::from_fn(&run.grid, |_, ip| {
            if run.grid.quad.nodes[ip].p[0] > 0.0 {
                bp.samples_l[ip]
            } else {
                bp.samples_r[ip]
            }
        });
        let (hyp_f, _) = norm_hyp(&run.field, &run.grid, k, run.cfg.n_normals).unwrap();
        let (hyp_lr, _) = norm_hyp(&f_lr, &run.grid, k, run.cfg.n_normals).unwrap();
        let main = norm_main(&run.field, &run.grid, k);
        let ratio = hyp_f / (hyp_lr + main * main);
        println!("  eps {eps}: ||f||_hyp {hyp_f:.4e}, ratio {ratio:.4}");
        ratios.push(ratio);
    }
    let finite = ratios.iter().all(|r| r.is_finite() && *r > 0.0);
    let spread = ratios.iter().cloned().fold(f64::MIN, f64::max)
        / ratios.iter().cloned().fold(f64::MAX, f64::min);
    verdict(
        10,
        finite && spread < 2.0,
        &format!("family ratios {ratios:?}, spread {spread:.3}"),
    );
}

/// Doubling n_x and the sphere resolution changes the converged norm by
/// less than 1% and decreases the moment residuals.
#[test]
fn criterion_11_refinement() {
    let (base, refined) = &*REFINEMENT;
    let k = base.cfg.k;
    let n_base = norm_main(&base.field, &base.grid, k);
    let n_ref = norm_main(&refined.field, &refined.grid, k);
    let change = (n_ref - n_base).abs() / n_base;

    let res_norm = |run: &CoreSolve| {
        let mid = run.field.n_x / 2;
        let slice: Vec<f64> = (0..run.field.n_p).map(|ip| run.field.get(mid, ip)).collect();
        let kernel = run.cfg.kernel().unwrap();
        let r = moment_residuals(&MomentumSlice::new(&slice), &run.grid.quad, &run.squad, &kernel);
        r.iter().map(|v| v * v).sum::<f64>().sqrt()
    };
    let res_base = res_norm(base);
    let res_refined = res_norm(refined);

    verdict(
        11,
        base.trace.converged
            && refined.trace.converged
            && change < 0.01
            && res_refined < res_base,
        &format!(
            "norm change {change:.3e}, moment residual {res_base:.3e} -> {res_refined:.3e}"
        ),
    );
}

/// Rerunning the full-resolution solve with the same configuration and
/// worker count yields a byte-identical report.
#[test]
fn criterion_12_determinism() {
    let desk = &*DESK;
    let dir = std::env::temp_dir().join("rbe-slab-acceptance-desk-rerun");
    let (_, _) = desk_solve(&dir);
    let a = std::fs::read(desk.dir.join("report.json")).unwrap();
    let b = std::fs::read(dir.join("report.json")).unwrap();
    verdict(
        12,
        a == b,
        &format!("report.json byte-identical across reruns ({} bytes)", a.len()),
    );
}
