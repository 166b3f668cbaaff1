//! Randomized verification of the kinematics, the collision map, the
//! Lorentz utilities, and the quadrature rules, against exact identities
//! and closed forms.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rbe_slab_core::quad::{
    make_sphere_quadrature, sphere_exp, sphere_inv_distance,
};
use rbe_slab_core::relkin::{
    boost_to, invariants, post_collision, post_collision_energies, rotation_taking,
    scattering_cos, FourVector, Momentum3,
};

fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eed)
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

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm3(a: &[f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

fn sub3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// s = g^2 + 4, the two-sided g bounds, and |p - q| >= |p0 - q0| over 1e5
/// seeded pairs with zero violations.
#[test]
fn kinematic_identities_hold_on_random_pairs() {
    let mut rng = rng();
    for _ in 0..100_000 {
        let scale = 10.0f64.powf(rng.gen_range(-2.0..1.5));
        let p = random_momentum(&mut rng, scale);
        let q = random_momentum(&mut rng, scale);
        let (s, g) = invariants(&p, &q);
        assert!((s - g * g - 4.0).abs() <= 1e-12 * s, "s {s}, g {g}");

        let d = norm3(&sub3(&p.p, &q.p));
        let x = cross(&p.p, &q.p);
        let lower = (d * d + norm3(&x).powi(2)).sqrt() / (p.energy() * q.energy()).sqrt();
        let upper = d.min(2.0 * (p.energy() * q.energy()).sqrt());
        let tol = 1e-12 * (1.0 + g);
        assert!(lower <= g + tol, "lower {lower} > g {g}");
        assert!(g <= upper + tol, "g {g} > upper {upper}");
        assert!(d + 1e-12 * (1.0 + d) >= (p.energy() - q.energy()).abs());
    }
}

/// The collision map conserves 4-momentum and the invariants, and its
/// energies match the closed-form shift, over 1e5 seeded triples.
#[test]
fn collision_map_conserves_momentum_and_invariants() {
    let mut rng = rng();
    for _ in 0..100_000 {
        let scale = 10.0f64.powf(rng.gen_range(-2.0..1.5));
        let p = random_momentum(&mut rng, scale);
        let q = random_momentum(&mut rng, scale);
        let omega = random_direction(&mut rng);
        let (s, g) = invariants(&p, &q);
        let (pp, qp) = post_collision(&p, &q, &omega);

        for i in 0..3 {
            let a = p.p[i] + q.p[i];
            let b = pp.p[i] + qp.p[i];
            assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "momentum {i}: {a} vs {b}");
        }
        let e_pre = p.energy() + q.energy();
        let e_post = pp.energy() + qp.energy();
        assert!((e_pre - e_post).abs() <= 1e-10 * e_pre, "energy {e_pre} vs {e_post}");

        let (sp, gp) = invariants(&pp, &qp);
        assert!((s - sp).abs() <= 1e-10 * s);
        assert!((g - gp).abs() <= 1e-10 * (1.0 + g));

        let (e1, e2) = post_collision_energies(&p, &q, &omega);
        assert!((e1 - pp.energy()).abs() <= 1e-10 * e1);
        assert!((e2 - qp.energy()).abs() <= 1e-10 * e2);

        if g > 1e-6 {
            let c = scattering_cos(&p, &q, &omega).unwrap();
            assert!((-1.0..=1.0).contains(&c));
        }
    }
}

/// Constructed boosts and rotations preserve the metric, have unit
/// determinant, and leave the Minkowski product invariant.
#[test]
fn lorentz_transforms_preserve_metric_and_products() {
    let mut rng = rng();
    let eta = [-1.0, 1.0, 1.0, 1.0];
    for i in 0..1_000 {
        let lt = if i % 2 == 0 {
            // velocity of an on-shell momentum, always inside the light cone
            let p = random_momentum(&mut rng, 2.0);
            let e = p.energy();
            boost_to(&[p.p[0] / e, p.p[1] / e, p.p[2] / e]).unwrap()
        } else {
            let a = [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ];
            if norm3(&a) < 1e-3 {
                continue;
            }
            rotation_taking(&a).unwrap()
        };

        // columns of the matrix = images of the basis vectors
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
        // Lambda^T eta Lambda = eta
        for a in 0..4 {
            for b in 0..4 {
                let mut acc = 0.0;
                for m in 0..4 {
                    acc += cols[a][m] * eta[m] * cols[b][m];
                }
                let want = if a == b { eta[a] } else { 0.0 };
                assert!((acc - want).abs() <= 1e-12 * (1.0 + acc.abs()), "eta entry ({a},{b}): {acc}");
            }
        }
        let det = det4(&cols);
        assert!((det - 1.0).abs() <= 1e-12 * det.abs().max(1.0), "det {det}");

        // Minkowski product invariance on a random pair of four-vectors
        let u = random_momentum(&mut rng, 3.0).lift();
        let v = random_momentum(&mut rng, 3.0).lift();
        let dot = |a: &FourVector<f64>, b: &FourVector<f64>| {
            -a.t * b.t + a.x[0] * b.x[0] + a.x[1] * b.x[1] + a.x[2] * b.x[2]
        };
        let before = dot(&u, &v);
        let after = dot(&lt.apply(&u), &lt.apply(&v));
        assert!((before - after).abs() <= 1e-12 * (1.0 + before.abs()));
    }
}

#[test]
fn rotation_taking_sends_a_to_polar_axis() {
    let mut rng = rng();
    for _ in 0..1_000 {
        let a = [
            rng.gen_range(-5.0..5.0),
            rng.gen_range(-5.0..5.0),
            rng.gen_range(-5.0..5.0),
        ];
        let n = norm3(&a);
        if n < 1e-3 {
            continue;
        }
        let rot = rotation_taking(&a).unwrap();
        let img = rot.apply(&FourVector { t: 0.0, x: a });
        assert!(img.t.abs() <= 1e-12 * (1.0 + n));
        assert!(img.x[0].abs() <= 1e-12 * (1.0 + n));
        assert!(img.x[1].abs() <= 1e-12 * (1.0 + n));
        assert!((img.x[2] - n).abs() <= 1e-12 * (1.0 + n));
    }
}

fn det4(cols: &[[f64; 4]; 4]) -> f64 {
    // expansion along the first column of the column-major matrix
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

/// The (16, 32) sphere rule reproduces the exponential closed form to 1e-8
/// relative for c|v| <= 5; the (64, 128) rule reproduces the
/// inverse-distance closed form to 1e-6.
#[test]
fn sphere_rules_match_closed_forms() {
    let mut rng = rng();
    let s16 = make_sphere_quadrature::<f64>(16, 32).unwrap();
    for _ in 0..50 {
        let c: f64 = rng.gen_range(0.01..5.0);
        let v = random_direction(&mut rng);
        let got = s16.integrate(|w| (c * (w[0] * v[0] + w[1] * v[1] + w[2] * v[2])).exp());
        let want = sphere_exp(c, &v);
        assert!((got - want).abs() <= 1e-8 * want, "c {c}: {got} vs {want}");
    }

    let s64 = make_sphere_quadrature::<f64>(64, 128).unwrap();
    for amag in [0.0, 0.5, 2.0, 10.0] {
        let dir = random_direction(&mut rng);
        let a = [amag * dir[0], amag * dir[1], amag * dir[2]];
        let got = s64.integrate(|w| 1.0 / norm3(&sub3(w, &a)));
        let want = sphere_inv_distance(&a);
        assert!((got - want).abs() <= 1e-6 * want, "|a| {amag}: {got} vs {want}");
    }
}
