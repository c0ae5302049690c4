//! Acceptance suite: runs every criterion, prints one PASS/FAIL line each and
//! exits with a nonzero status if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sbp_hodge::krylov::{lsmr, lsqr, DenseMap};
use sbp_hodge::potential::{
    harmonic_neumann_potential, operator_kernel, scalar_potential_integral, NeumannOptions,
};
use sbp_hodge::sbp::minimum_nodes;
use sbp_hodge::{
    helmholtz, DiffOperator, Grid1D, GridField, HodgeOptions, KrylovOptions, ProjectionOrder,
    SbpOperator1D, Solver, TensorOps,
};
use sbp_hodge_cli::config::ExperimentConfig;
use sbp_hodge_cli::experiments::{convergence, mhd, oscillations, remainder, theorems};

type Outcome = anyhow::Result<(bool, String)>;

struct Criterion {
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn random_scalar(ops: &TensorOps, rng: &mut ChaCha8Rng) -> GridField {
    let data = (0..ops.n_nodes())
        .map(|_| rng.gen_range(-1.0..1.0))
        .collect();
    ops.scalar_field(data).expect("matching length")
}

fn random_vector(ops: &TensorOps, rng: &mut ChaCha8Rng) -> GridField {
    let components = (0..ops.dim())
        .map(|_| {
            (0..ops.n_nodes())
                .map(|_| rng.gen_range(-1.0..1.0))
                .collect()
        })
        .collect();
    ops.vector_field(components).expect("matching lengths")
}

fn sbp_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    for order in [2, 4, 6, 8] {
        for n in minimum_nodes(order)?..=64 {
            let op = SbpOperator1D::new(order, Grid1D::new(-1.0, 1.0, n)?)?;
            let dense = op.dense();
            let md = dense
                .row_iter()
                .zip(op.mass())
                .map(|(row, m)| m * row.amax())
                .fold(0.0, f64::max);
            worst = worst.max(op.sbp_residual() / md);
        }
    }
    Ok((worst <= 1e-13, format!("max relative residual {worst:.2e}")))
}

fn kernel_dimensions() -> Outcome {
    let tol = theorems::RANK_TOL_FACTOR;
    let ops2 = TensorOps::uniform(2, 2, -1.0, 1.0, 6)?;
    let ops3 = TensorOps::uniform(2, 3, -1.0, 1.0, 4)?;
    let found = [
        operator_kernel(&ops2, DiffOperator::Curl, tol)?.kernel_dim,
        operator_kernel(&ops2, DiffOperator::Divergence, tol)?.kernel_dim,
        operator_kernel(&ops2, DiffOperator::Gradient, tol)?.image_dim(),
        operator_kernel(&ops3, DiffOperator::Curl, tol)?.kernel_dim,
        operator_kernel(&ops3, DiffOperator::Divergence, tol)?.kernel_dim,
        operator_kernel(&ops3, DiffOperator::Curl, tol)?.image_dim(),
    ];
    let expected = [37, 37, 35, 66, 129, 126];
    Ok((
        found == expected,
        format!("found {found:?}, expected {expected:?}"),
    ))
}

fn oscillation_structure() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for n in [50, 51] {
        let d = oscillations::oscillations(2, Grid1D::new(-1.0, 1.0, n)?, false)?;
        ok &= d.alternates_everywhere && d.max_deviation <= 1e-12;
        notes.push(format!("p2 N={n} dev {:.1e}", d.max_deviation));
    }
    for order in [4, 6, 8] {
        for n in [100, 101] {
            let d = oscillations::oscillations(order, Grid1D::new(-1.0, 1.0, n)?, false)?;
            ok &= d.interior_alternates && d.interior_spread <= 1e-10 && d.max_deviation > 0.01;
            notes.push(format!(
                "p{order} N={n} interior {:.1e} boundary {:.2}",
                d.interior_spread, d.max_deviation
            ));
        }
    }
    Ok((ok, notes.join(", ")))
}

fn filter_projection() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let grids = [(2, 2, 7), (4, 2, 12), (6, 2, 15), (8, 2, 17), (4, 3, 9)];
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let (order, dim, n) = grids[k % grids.len()];
        let ops = TensorOps::uniform(order, dim, -1.0, 1.0, n)?;
        let u = random_vector(&ops, &mut rng);
        let w = random_vector(&ops, &mut rng);
        let (nu, nw) = (ops.m_norm(&u)?, ops.m_norm(&w)?);
        let fu = ops.filter(&u)?;
        let fw = ops.filter(&w)?;
        let idempotent = ops.m_norm(&(&ops.filter(&fu)? - &fu))? / nu;
        let adjoint = (ops.inner_product(&fu, &w)? - ops.inner_product(&u, &fw)?).abs() / (nu * nw);
        let contraction = (ops.m_norm(&fu)? - nu).max(0.0) / nu;
        worst = worst.max(idempotent).max(adjoint).max(contraction);
    }
    Ok((worst <= 1e-12, format!("worst relative defect {worst:.2e}")))
}

fn integral_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let grids = [
        (2, 2, 6),
        (4, 2, 10),
        (6, 2, 13),
        (8, 2, 16),
        (2, 3, 5),
        (4, 3, 8),
    ];
    let mut worst: f64 = 0.0;
    for k in 0..50 {
        let (order, dim, n) = grids[k % grids.len()];
        let ops = TensorOps::uniform(order, dim, 0.0, 1.0, n)?;
        let u = ops.gradient(&random_scalar(&ops, &mut rng))?;
        let phi = scalar_potential_integral(&ops, &u)?;
        let err = ops.m_norm(&(&ops.gradient(&phi)? - &u))? / ops.m_norm(&u)?;
        worst = worst.max(err);
    }
    Ok((worst <= 1e-9, format!("worst relative error {worst:.2e}")))
}

fn harmonic_neumann() -> Outcome {
    type Potential = fn(&[f64]) -> f64;
    let linear: Potential = |x| x[0] - 0.5 * x[1];
    let bilinear: Potential = |x| x[0] * x[1];
    let saddle: Potential = |x| x[0] * x[0] - x[1] * x[1];
    let trilinear: Potential = |x| x[0] * x[1] * x[2];
    let cases: Vec<(usize, usize, usize, Potential)> = vec![
        (2, 2, 20, linear),
        (4, 2, 20, linear),
        (4, 2, 20, bilinear),
        (4, 2, 20, saddle),
        (6, 2, 24, saddle),
        (8, 2, 24, bilinear),
        (8, 2, 24, saddle),
        (2, 3, 8, linear),
        (4, 3, 10, saddle),
        (6, 3, 12, trilinear),
    ];
    let mut worst: f64 = 0.0;
    for (order, dim, n, h) in cases {
        let ops = TensorOps::uniform(order, dim, -1.0, 1.0, n)?;
        let u = ops.gradient(&ops.sample_scalar(h))?;
        let sol = harmonic_neumann_potential(&ops, &u, &NeumannOptions::default())?;
        let err = ops.m_norm(&(&ops.gradient(&sol.phi)? - &u))? / ops.m_norm(&u)?;
        worst = worst.max(err);
    }
    Ok((worst <= 1e-9, format!("worst relative error {worst:.2e}")))
}

fn non_increasing(values: impl Iterator<Item = f64>, slack: f64) -> bool {
    let v: Vec<f64> = values.collect();
    v.windows(2).all(|w| w[1] <= w[0] * (1.0 + slack))
}

fn krylov_min_norm() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    let mut monotone = true;
    let opts = KrylovOptions {
        track_true_residuals: true,
        ..KrylovOptions::with_tol(1e-12)
    };
    for _ in 0..20 {
        let m = rng.gen_range(5..=30);
        let n = rng.gen_range(5..=30);
        let rank = rng.gen_range(1..m.min(n));
        let left = DMatrix::from_fn(m, rank, |_, _| rng.gen_range(-1.0..1.0))
            .qr()
            .q();
        let right = DMatrix::from_fn(n, rank, |_, _| rng.gen_range(-1.0..1.0))
            .qr()
            .q();
        let sigma = DMatrix::from_diagonal(&DVector::from_fn(rank, |_, _| rng.gen_range(0.5..2.0)));
        let a = &left * &sigma * right.transpose();
        let b = DVector::from_fn(m, |_, _| rng.gen_range(-1.0..1.0));
        // Pseudoinverse from the singular value decomposition known by construction.
        let sigma_inv = sigma.try_inverse().expect("positive singular values");
        let reference = right * sigma_inv * left.transpose() * &b;
        let map = DenseMap(a);
        let (x, s) = lsqr(&map, b.as_slice(), &opts)?;
        worst = worst.max((DVector::from_vec(x) - &reference).norm() / reference.norm());
        monotone &= non_increasing(s.residual_history.iter().copied(), 0.0);
        monotone &= non_increasing(s.true_residual_history.iter().map(|r| r.0), 1e-12);
        let (x, s) = lsmr(&map, b.as_slice(), &opts)?;
        worst = worst.max((DVector::from_vec(x) - &reference).norm() / reference.norm());
        monotone &= non_increasing(s.normal_residual_history.iter().copied(), 0.0);
        monotone &= non_increasing(s.true_residual_history.iter().map(|r| r.1), 1e-10);
    }
    Ok((
        worst <= 1e-6 && monotone,
        format!("worst relative error {worst:.2e}, monotone {monotone}"),
    ))
}

fn remainder_study() -> Outcome {
    let cfg = ExperimentConfig {
        order: 6,
        sizes: vec![60],
        ..ExperimentConfig::default()
    };
    let run = remainder::remainder(&cfg)?;
    let d = &run.summary.diagnostics;
    let u2 = d.norm_u.powi(2);
    let grad = d.grad_orthogonality.abs() / u2;
    let rot = d.remainder_sol_inner.abs() / u2;
    let ratio = run.summary.remainder_norm_ratio;
    Ok((
        grad <= 1e-12 && rot <= 1e-12 && ratio <= 1e-3,
        format!("<u-grad phi, grad phi> {grad:.1e}, <r, rot v> {rot:.1e}, |r|/|u| {ratio:.2e}"),
    ))
}

fn impossibility_witness() -> Outcome {
    let mut worst: f64 = 0.0;
    for (order, n) in [(2, 9), (4, 13), (6, 20), (8, 24)] {
        let ops = TensorOps::uniform(order, 2, -1.0, 1.0, n)?;
        let osc12 = ops
            .oscillations()
            .pair(0, 1)
            .expect("2D pair oscillation")
            .to_vec();
        let u = ops.vector_field(vec![osc12, vec![0.0; ops.n_nodes()]])?;
        for order in [ProjectionOrder::GradFirst, ProjectionOrder::CurlFirst] {
            let options = HodgeOptions {
                solver: Solver::Lsqr,
                krylov: KrylovOptions::with_tol(1e-12),
                order,
            };
            let d = helmholtz(&ops, &u, &options)?;
            let nu = ops.m_norm(&u)?;
            let images = (ops.m_norm(&d.grad_phi)? + ops.m_norm(&d.sol_part)?) / nu;
            let rest = ops.m_norm(&(&d.remainder - &u))? / nu;
            worst = worst.max(images).max(rest);
        }
    }
    Ok((worst <= 1e-6, format!("worst relative leak {worst:.2e}")))
}

fn convergence_2d() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for order in [2, 4, 6, 8] {
        let cfg = ExperimentConfig {
            order,
            sizes: vec![17, 33, 49, 65],
            tol: 1e-12,
            ..ExperimentConfig::default()
        };
        let table = convergence::convergence(&cfg, 2)?;
        let p = (order / 2) as f64;
        for key in ["u_irr", "u_sol", "phi"] {
            let e = table.eoc[key];
            ok &= (p + 0.6..=p + 2.1).contains(&e);
            notes.push(format!("p{order} {key} {e:.2}"));
        }
        if order == 6 {
            let e = table.eoc["v"];
            ok &= (4.0..=5.2).contains(&e);
            notes.push(format!("p6 v {e:.2}"));
        }
    }
    Ok((ok, notes.join(", ")))
}

fn convergence_3d() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for order in [2, 4] {
        let cfg = ExperimentConfig {
            order,
            dim: 3,
            sizes: vec![9, 13, 17, 21],
            solver: Solver::Lsmr,
            projection_order: ProjectionOrder::CurlFirst,
            tol: 1e-12,
            ..ExperimentConfig::default()
        };
        let table = convergence::convergence(&cfg, 3)?;
        let p = (order / 2) as f64;
        for key in ["u_irr", "u_sol"] {
            let e = table.eoc[key];
            ok &= e >= p + 0.6;
            notes.push(format!("p{order} {key} {e:.2}"));
        }
    }
    Ok((ok, notes.join(", ")))
}

fn mhd_run(eps_a: f64, eps_m: f64, order: ProjectionOrder) -> anyhow::Result<mhd::MhdReport> {
    let cfg = mhd::MhdConfig {
        k1: 5.0 * PI,
        k3: 5.0 * PI,
        eps_a,
        eps_m,
        n: 101,
        order: 6,
        projection_order: order,
    };
    Ok(mhd::mhd(&cfg, Solver::Lsqr, KrylovOptions::default(), false)?.report)
}

fn mhd_separation() -> Outcome {
    use ProjectionOrder::{CurlFirst, GradFirst};
    let good = mhd_run(1e-2, 1e-5, GradFirst)?;
    let bad = mhd_run(1e-2, 1e-5, CurlFirst)?;
    let primary = good.alfven_interior_error <= 0.1
        && good.magnetosonic_interior_error <= 0.1
        && bad.magnetosonic_interior_error >= 10.0 * good.magnetosonic_interior_error;

    let good_m = mhd_run(1e-5, 1e-2, CurlFirst)?;
    let bad_m = mhd_run(1e-5, 1e-2, GradFirst)?;
    let mirrored = good_m.alfven_interior_error <= 0.1
        && good_m.magnetosonic_interior_error <= 0.1
        && bad_m.alfven_interior_error >= 10.0 * good_m.alfven_interior_error;

    Ok((
        primary && mirrored,
        format!(
            "grad-first alfven {:.2e} magnetosonic {:.2e}, curl-first magnetosonic {:.2e} (ratio {:.2}); \
             mirrored curl-first alfven {:.2e} magnetosonic {:.2e}, grad-first alfven {:.2e} (ratio {:.1}); \
             primary {}, mirrored {}",
            good.alfven_interior_error,
            good.magnetosonic_interior_error,
            bad.magnetosonic_interior_error,
            bad.magnetosonic_interior_error / good.magnetosonic_interior_error,
            good_m.alfven_interior_error,
            good_m.magnetosonic_interior_error,
            bad_m.alfven_interior_error,
            bad_m.alfven_interior_error / good_m.alfven_interior_error,
            if primary { "pass" } else { "fail" },
            if mirrored { "pass" } else { "fail" },
        ),
    ))
}

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            name: "SBP identity",
            budget: secs(1),
            run: sbp_identity,
        },
        Criterion {
            name: "kernel dimensions",
            budget: secs(30),
            run: kernel_dimensions,
        },
        Criterion {
            name: "oscillation structure",
            budget: secs(60),
            run: oscillation_structure,
        },
        Criterion {
            name: "filter projection",
            budget: secs(60),
            run: filter_projection,
        },
        Criterion {
            name: "integral potential round trip",
            budget: secs(60),
            run: integral_round_trip,
        },
        Criterion {
            name: "harmonic Neumann recovery",
            budget: secs(60),
            run: harmonic_neumann,
        },
        Criterion {
            name: "Krylov minimum norm",
            budget: secs(60),
            run: krylov_min_norm,
        },
        Criterion {
            name: "remainder study",
            budget: secs(120),
            run: remainder_study,
        },
        Criterion {
            name: "impossibility witness",
            budget: secs(60),
            run: impossibility_witness,
        },
        Criterion {
            name: "2D convergence",
            budget: secs(600),
            run: convergence_2d,
        },
        Criterion {
            name: "3D convergence",
            budget: secs(900),
            run: convergence_3d,
        },
        Criterion {
            name: "MHD mode separation",
            budget: secs(600),
            run: mhd_separation,
        },
    ];
    let mut failures = 0;
    for (i, c) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let (passed, detail) = match outcome {
            Ok((passed, detail)) if elapsed <= c.budget => (passed, detail),
            Ok((_, detail)) => (false, format!("{detail}; exceeded {:?}", c.budget)),
            Err(e) => (false, format!("error: {e:#}")),
        };
        if !passed {
            failures += 1;
        }
        println!(
            "criterion {:>2} {:<30} {} ({:.2}s) {}",
            i + 1,
            c.name,
            if passed { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            detail
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
