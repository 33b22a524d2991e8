mod common;

use common::*;
use ggl::rep::{p_operator_norm, FiberOperator, NormOptions};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn p_norm(v: &[f64], p: f64) -> f64 {
    v.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

/// `max ‖Ax‖_p / ‖x‖_p` over a mesh of nonnegative directions, which is
/// where the norm of a nonnegative matrix is attained.
fn mesh_norm(a: &[Vec<f64>], p: f64, steps: usize) -> f64 {
    let n = a.len();
    let mut best = 0.0f64;
    let mut idx = vec![0usize; n];
    loop {
        let x: Vec<f64> = idx.iter().map(|&i| i as f64 / steps as f64).collect();
        if x.iter().any(|&t| t > 0.0) {
            let ax: Vec<f64> = a.iter().map(|row| row.iter().zip(&x).map(|(r, t)| r * t).sum()).collect();
            best = best.max(p_norm(&ax, p) / p_norm(&x, p));
        }
        let mut k = 0;
        while k < n {
            idx[k] += 1;
            if idx[k] <= steps {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == n {
            break;
        }
    }
    best
}

fn operator(a: &[Vec<f64>]) -> FiberOperator {
    let n = a.len();
    let entries = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| ((i, j), c(a[i][j], 0.0)));
    FiberOperator::new((0..n).collect(), entries, true).unwrap()
}

#[test]
fn intervals_bracket_mesh_maximum() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for trial in 0..40 {
        let n = 2 + trial % 2;
        let a: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.random_range(0.0..2.0)).collect()).collect();
        let op = operator(&a);
        for p in [1.5, 3.0, 4.0] {
            let iv = p_operator_norm(&op, &NormOptions::with_p(p)).unwrap();
            let mesh = mesh_norm(&a, p, if n == 2 { 400 } else { 60 });
            assert!(mesh <= iv.upper, "p = {p}: mesh {mesh} above upper {}", iv.upper);
            assert!(iv.lower <= iv.upper);
            // the mesh misses the maximizer by at most its spacing
            assert!(iv.lower >= mesh * (1.0 - 1e-3), "p = {p}: lower {} far below mesh {mesh}", iv.lower);
        }
    }
}

#[test]
fn endpoint_exponents_are_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..20 {
        let n = rng.random_range(1..6);
        let m: Vec<Vec<Complex64>> =
            (0..n).map(|_| (0..n).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()).collect();
        let entries = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| ((i, j), m[i][j]));
        let op = FiberOperator::new((0..n).collect(), entries, true).unwrap();
        let col = (0..n).map(|j| (0..n).map(|i| m[i][j].norm()).sum::<f64>()).fold(0.0, f64::max);
        let row = (0..n).map(|i| (0..n).map(|j| m[i][j].norm()).sum::<f64>()).fold(0.0, f64::max);
        let one = p_operator_norm(&op, &NormOptions::with_p(1.0)).unwrap();
        let inf = p_operator_norm(&op, &NormOptions::with_p(f64::INFINITY)).unwrap();
        assert!((one.lower - col).abs() <= 1e-12 * col && one.lower == one.upper);
        assert!((inf.lower - row).abs() <= 1e-12 * row && inf.lower == inf.upper);
        let two = p_operator_norm(&op, &NormOptions::with_p(2.0)).unwrap();
        let s = jacobi_singular_values(n, n, |i, j| m[i][j])[0];
        assert!((two.lower - s).abs() <= 1e-8 * s && (two.upper - s).abs() <= 1e-8 * s);
        // Riesz–Thorin between the endpoints
        let three = p_operator_norm(&op, &NormOptions::with_p(3.0)).unwrap();
        assert!(three.upper <= col.powf(1.0 / 3.0) * row.powf(2.0 / 3.0) * (1.0 + 1e-12));
    }
}

#[test]
fn dump_round_trip() {
    let a = vec![vec![1.0, 0.0, 2.5], vec![0.0, 0.0, 0.0], vec![-1.0, 0.5, 0.0]];
    let op = operator(&a);
    let back = FiberOperator::parse_dump(&op.dump()).unwrap();
    assert_eq!(back.max_abs_diff(&op), 0.0);
    assert_eq!(back.fiber(), op.fiber());
}
