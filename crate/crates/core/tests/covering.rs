//! Covering lattice checks by brute force.

use enstrophy_cert::covering::{count_lattice_points, LatticeSpec};
use enstrophy_cert::sampling::{random_in_h2_ball, random_on_h2_sphere};
use enstrophy_cert::GalerkinSpace;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Squared V distance from `v` to the nearest lattice point, scanning all.
fn nearest_v_distance_sq(v: &[f64], lambdas: &[f64], points: &[Vec<f64>]) -> f64 {
    let n = points.first().map_or(0, Vec::len);
    let tail: f64 = v[n..].iter().zip(&lambdas[n..]).map(|(a, l)| l * a * a).sum();
    let head = points
        .iter()
        .map(|p| {
            p.iter()
                .zip(v)
                .zip(lambdas)
                .map(|((c, a), l)| l * (a - c) * (a - c))
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min);
    head + tail
}

fn check_covering(n: usize, m: usize, s: f64, delta: f64, seed: u64) {
    let spec = LatticeSpec::new(n, m, s, delta).unwrap();
    let points: Vec<Vec<f64>> = spec.points().map(|a| spec.coefficients(&a)).collect();
    assert_eq!(points.len() as u64, spec.count(u64::MAX).unwrap());
    // every point lies in the ball
    let lambdas: Vec<f64> = GalerkinSpace::ball(2).eigenvalues().collect();
    for p in &points {
        let h2: f64 = p.iter().zip(&lambdas).map(|(a, l)| l * l * a * a).sum();
        assert!(h2 <= s * s * (1.0 + 1e-12));
    }
    // fields carry modes beyond the lattice dimension
    let space = GalerkinSpace::ball(2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let v = if i % 2 == 0 {
            random_in_h2_ball(&space, s, &mut rng)
        } else {
            random_on_h2_sphere(&space, s, &mut rng)
        };
        let d = nearest_v_distance_sq(&v, &lambdas, &points).sqrt();
        worst = worst.max(d);
    }
    assert!(worst <= delta, "N = {n}, M = {m}: worst distance {worst} > {delta}");
}

#[test]
fn degenerate_lattice_covers_small_ball() {
    check_covering(0, 0, 0.1, 0.2, 201);
}

#[test]
fn first_shell_lattice_covers() {
    check_covering(12, 1, 1.05, 2.05, 202);
}

#[test]
fn finer_first_shell_lattice_covers() {
    check_covering(12, 2, 0.6, 1.0, 203);
}

#[test]
fn counts_match_brute_force_enumeration() {
    // lambda_1 = ... = lambda_3 = 1, so the condition is sum a_j^2 <= S^2 4^M
    for n in 0..=3usize {
        for m in 0..=2usize {
            for s in [0.3, 0.7, 1.0, 1.6, 2.5] {
                let budget = s * s * 4f64.powi(m as i32);
                let b = budget.sqrt().ceil() as i64 + 1;
                let mut brute = 0u64;
                let total = (2 * b + 1).pow(n as u32);
                for code in 0..total {
                    let mut c = code;
                    let mut sum = 0i64;
                    for _ in 0..n {
                        let a = c % (2 * b + 1) - b;
                        c /= 2 * b + 1;
                        sum += a * a;
                    }
                    if (sum as f64) <= budget {
                        brute += 1;
                    }
                }
                assert_eq!(
                    count_lattice_points(n, m, s, u64::MAX).unwrap(),
                    brute,
                    "N = {n}, M = {m}, S = {s}"
                );
                let delta = (2.0 * s).max(0.5f64.powi(m as i32) * (n as f64).sqrt() / 0.86) * 1.001;
                let spec = LatticeSpec::new(n, m, s, delta).unwrap();
                let listed: Vec<Vec<i64>> = spec.points().collect();
                assert_eq!(listed.len() as u64, brute);
                assert!(listed.windows(2).all(|w| w[0] < w[1]), "lexicographic order");
            }
        }
    }
}

#[test]
fn lattice_uses_the_eigenvalue_weights() {
    // first 16 functions: 12 with lambda = 1, then 4 with lambda = 2
    let count = count_lattice_points(13, 0, 2.0, u64::MAX).unwrap();
    // a_13 in {-1, 0, 1} costs 4 a^2; the rest sum a^2 over 12 coordinates
    let ball = |n: usize, r2: i64| -> u64 {
        let mut ways = vec![0u64; (r2 + 1) as usize];
        ways[0] = 1;
        for _ in 0..n {
            let mut next = vec![0u64; ways.len()];
            for (used, &w) in ways.iter().enumerate() {
                for a in -2i64..=2 {
                    let u = used as i64 + a * a;
                    if u <= r2 {
                        next[u as usize] += w;
                    }
                }
            }
            ways = next;
        }
        ways.iter().sum()
    };
    assert_eq!(count, ball(12, 4) + 2 * ball(12, 0));
}
