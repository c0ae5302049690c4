//! LSQR/LSMR against dense QR and SVD oracles.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sbp_hodge::krylov::{lsmr, lsqr, DenseMap, KrylovOptions, LinearMap, Solver};

fn random_matrix(rng: &mut ChaCha8Rng, m: usize, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(m, n, |_, _| rng.gen_range(-1.0..1.0))
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Random matrix of the given rank with singular values in [0.5, 2].
fn rank_deficient(rng: &mut ChaCha8Rng, m: usize, n: usize, rank: usize) -> DMatrix<f64> {
    let u = random_matrix(rng, m, rank).qr().q();
    let v = random_matrix(rng, n, rank).qr().q();
    let s = DMatrix::from_diagonal(&DVector::from_fn(rank, |_, _| rng.gen_range(0.5..2.0)));
    u * s * v.transpose()
}

fn pinv_solution(a: &DMatrix<f64>, b: &[f64]) -> DVector<f64> {
    // SVD of the tall transpose: A = V S U^T, so x = U S^+ V^T b.
    let svd = a.transpose().svd(true, true);
    let u = svd.u.unwrap();
    let v_t = svd.v_t.unwrap();
    let s = &svd.singular_values;
    let cutoff = 1e-10 * s.max();
    let vb = v_t * DVector::from_column_slice(b);
    let mut x = DVector::zeros(a.ncols());
    for k in 0..s.len() {
        if s[k] > cutoff {
            x += u.column(k) * (vb[k] / s[k]);
        }
    }
    x
}

fn rel_err(x: &[f64], reference: &DVector<f64>) -> f64 {
    let diff: f64 = x
        .iter()
        .zip(reference.iter())
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    diff / reference.norm()
}

#[test]
fn full_rank_matches_dense_qr() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let a = random_matrix(&mut rng, 10, 6);
    let b = random_vec(&mut rng, 10);
    let qr = a.clone().qr();
    let rhs = qr.q().transpose() * DVector::from_column_slice(&b);
    let reference = qr.r().solve_upper_triangular(&rhs).unwrap();
    for solver in [Solver::Lsqr, Solver::Lsmr] {
        let (x, stats) = solver
            .solve(&DenseMap(a.clone()), &b, &KrylovOptions::with_tol(1e-12))
            .unwrap();
        assert!(stats.converged());
        assert!(rel_err(&x, &reference) < 1e-8, "{solver:?}");
    }
}

#[test]
fn rank_deficient_matches_pseudoinverse() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let a = rank_deficient(&mut rng, 8, 10, 5);
    let b = random_vec(&mut rng, 8);
    let reference = pinv_solution(&a, &b);
    for solver in [Solver::Lsqr, Solver::Lsmr] {
        let (x, stats) = solver
            .solve(&DenseMap(a.clone()), &b, &KrylovOptions::with_tol(1e-12))
            .unwrap();
        let e = rel_err(&x, &reference);
        assert!(e < 1e-6, "{solver:?} {e} {:?}", stats.stop_reason);
    }
}

#[test]
fn residual_monotonicity() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    for trial in 0..5 {
        let a = rank_deficient(&mut rng, 25, 20, 12 + trial);
        let b = random_vec(&mut rng, 25);
        let opts = KrylovOptions {
            track_true_residuals: true,
            ..KrylovOptions::with_tol(1e-12)
        };
        let (_, s) = lsqr(&DenseMap(a.clone()), &b, &opts).unwrap();
        for w in s.residual_history.windows(2) {
            assert!(w[1] <= w[0]);
        }
        for w in s.true_residual_history.windows(2) {
            assert!(w[1].0 <= w[0].0 * (1.0 + 1e-12) + 1e-14);
        }
        let (_, s) = lsmr(&DenseMap(a), &b, &opts).unwrap();
        for w in s.normal_residual_history.windows(2) {
            assert!(w[1] <= w[0]);
        }
        for w in s.true_residual_history.windows(2) {
            assert!(w[1].1 <= w[0].1 * (1.0 + 1e-10) + 1e-13);
        }
    }
}

#[test]
fn well_conditioned_terminates_within_2n() {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let n = 20;
    let q = random_matrix(&mut rng, n, n).qr().q();
    let s = DMatrix::from_diagonal(&DVector::from_fn(n, |i, _| 1.0 + i as f64 / n as f64));
    let a = &q * s * q.transpose();
    let xs = random_vec(&mut rng, n);
    let b = (&a * DVector::from_column_slice(&xs)).as_slice().to_vec();
    for solver in [Solver::Lsqr, Solver::Lsmr] {
        let (x, stats) = solver
            .solve(&DenseMap(a.clone()), &b, &KrylovOptions::with_tol(1e-12))
            .unwrap();
        assert!(stats.iterations <= 2 * n, "{solver:?} {}", stats.iterations);
        let err = rel_err(&x, &DVector::from_column_slice(&xs));
        assert!(err < 1e-10, "{solver:?} {err}");
    }
}

#[test]
fn dense_map_adjoint_is_consistent() {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let a = DenseMap(random_matrix(&mut rng, 7, 4));
    assert!(sbp_hodge::krylov::adjoint_defect(&a, 3) < 1e-15);
    assert_eq!(a.nrows(), 7);
}
