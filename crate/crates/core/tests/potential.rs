use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sbp_hodge::potential::{
    check_potential_conditions, divergence_ranks_on_curl_kernel, harmonic_neumann_potential,
    kernel_basis, operator_kernel, operator_matrix, scalar_potential_integral, NeumannOptions,
};
use sbp_hodge::{DiffOperator, Error, GridField, TensorOps};

const TOL: f64 = 10.0;

fn random_scalar(ops: &TensorOps, rng: &mut ChaCha8Rng) -> GridField {
    let data = (0..ops.n_nodes())
        .map(|_| rng.gen_range(-1.0..1.0))
        .collect();
    ops.scalar_field(data).unwrap()
}

fn kernel_dim(ops: &TensorOps, op: DiffOperator) -> usize {
    operator_kernel(ops, op, TOL).unwrap().kernel_dim
}

#[test]
fn kernel_counts_2d() {
    let ops = TensorOps::uniform(2, 2, 0.0, 1.0, 6).unwrap();
    assert_eq!(kernel_dim(&ops, DiffOperator::Curl), 37);
    assert_eq!(kernel_dim(&ops, DiffOperator::Divergence), 37);
    assert_eq!(
        operator_kernel(&ops, DiffOperator::Gradient, TOL)
            .unwrap()
            .image_dim(),
        35
    );

    let ops = TensorOps::uniform(4, 2, 0.0, 1.0, 8).unwrap();
    assert_eq!(kernel_dim(&ops, DiffOperator::Divergence), 65);
    assert_eq!(kernel_dim(&ops, DiffOperator::Curl), 65);
}

#[test]
fn kernel_counts_3d() {
    let ops = TensorOps::uniform(2, 3, 0.0, 1.0, 4).unwrap();
    assert_eq!(kernel_dim(&ops, DiffOperator::Curl), 66);
    assert_eq!(kernel_dim(&ops, DiffOperator::Divergence), 129);
    assert_eq!(
        operator_kernel(&ops, DiffOperator::Curl, TOL)
            .unwrap()
            .image_dim(),
        126
    );

    let ops = TensorOps::uniform(2, 3, 0.0, 1.0, 5).unwrap();
    assert_eq!(kernel_dim(&ops, DiffOperator::Divergence), 251);
}

#[test]
fn curl_kernel_is_gradients_plus_oscillations() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let ops = TensorOps::uniform(2, 2, 0.0, 1.0, 6).unwrap();
    let n = ops.n_nodes();
    let zero = vec![0.0; n];
    let osc = &ops.oscillations().singles;
    let witnesses = [
        ops.vector_field(vec![osc[0].clone(), zero.clone()])
            .unwrap(),
        ops.vector_field(vec![zero.clone(), osc[1].clone()])
            .unwrap(),
    ];
    for w in &witnesses {
        assert!(ops.curl(w).unwrap().max_abs() < 1e-12);
        for _ in 0..5 {
            let g = ops.gradient(&random_scalar(&ops, &mut rng)).unwrap();
            let ip = ops.inner_product(w, &g).unwrap();
            assert!(ip.abs() < 1e-12 * ops.m_norm(w).unwrap() * ops.m_norm(&g).unwrap());
        }
    }
    // Divergence kernel uses the swapped pairing.
    let swapped = [
        ops.vector_field(vec![zero.clone(), osc[0].clone()])
            .unwrap(),
        ops.vector_field(vec![osc[1].clone(), zero]).unwrap(),
    ];
    for w in &swapped {
        assert!(ops.divergence(w).unwrap().max_abs() < 1e-12);
    }
}

#[test]
fn divergence_kernel_witnesses_3d() {
    let ops = TensorOps::uniform(2, 3, 0.0, 1.0, 4).unwrap();
    let n = ops.n_nodes();
    let osc = ops.oscillations();
    for (slot, pair) in [(0, (1, 2)), (1, (0, 2)), (2, (0, 1))] {
        let mut comps = vec![vec![0.0; n]; 3];
        comps[slot] = osc.pair(pair.0, pair.1).unwrap().to_vec();
        let w = ops.vector_field(comps).unwrap();
        assert!(ops.divergence(&w).unwrap().max_abs() < 1e-12);
    }
}

#[test]
fn divergence_on_curl_kernel_loses_rank() {
    for (dim, n) in [(2, 6), (3, 4)] {
        let ops = TensorOps::uniform(2, dim, 0.0, 1.0, n).unwrap();
        let (full, restricted) = divergence_ranks_on_curl_kernel(&ops, TOL).unwrap();
        assert!(full > restricted, "{dim}D: {full} vs {restricted}");
    }
}

#[test]
fn impossibility_witness_is_orthogonal_to_both_images() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let ops = TensorOps::uniform(4, 2, -1.0, 1.0, 10).unwrap();
    let osc12 = ops.oscillations().pair(0, 1).unwrap().to_vec();
    let w = ops
        .vector_field(vec![osc12, vec![0.0; ops.n_nodes()]])
        .unwrap();
    let scale = ops.m_norm(&w).unwrap();
    for _ in 0..10 {
        let g = ops.gradient(&random_scalar(&ops, &mut rng)).unwrap();
        let r = ops.rot(&random_scalar(&ops, &mut rng)).unwrap();
        assert!(ops.inner_product(&w, &g).unwrap().abs() < 1e-12 * scale * ops.m_norm(&g).unwrap());
        assert!(ops.inner_product(&w, &r).unwrap().abs() < 1e-12 * scale * ops.m_norm(&r).unwrap());
    }
}

#[test]
fn kernel_basis_is_annihilated() {
    let ops = TensorOps::uniform(2, 2, 0.0, 1.0, 6).unwrap();
    let curl = operator_matrix(&ops, DiffOperator::Curl).unwrap();
    let basis = kernel_basis(&curl, TOL).unwrap();
    assert_eq!(basis.ncols(), 37);
    assert!((&curl * &basis).norm() < 1e-10);
}

#[test]
fn gradient_satisfies_potential_conditions() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for dim in [2, 3] {
        let ops = TensorOps::uniform(4, dim, 0.0, 1.0, 9).unwrap();
        let u = ops.gradient(&random_scalar(&ops, &mut rng)).unwrap();
        let c = check_potential_conditions(&ops, &u).unwrap();
        assert!(c.curl_residual < 1e-12, "{c:?}");
        assert!(c.oscillation_components.iter().all(|&v| v < 1e-12), "{c:?}");
    }
}

#[test]
fn integral_potential_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for (order, dim, n) in [(2, 2, 6), (4, 2, 11), (6, 2, 14), (2, 3, 5), (4, 3, 9)] {
        let ops = TensorOps::uniform(order, dim, 0.0, 1.0, n).unwrap();
        for _ in 0..5 {
            let u = ops.gradient(&random_scalar(&ops, &mut rng)).unwrap();
            let phi = scalar_potential_integral(&ops, &u).unwrap();
            let err = ops.m_norm(&(&ops.gradient(&phi).unwrap() - &u)).unwrap();
            assert!(
                err <= 1e-10 * ops.m_norm(&u).unwrap(),
                "order {order} {dim}D: {err}"
            );
        }
    }
}

#[test]
fn integral_potential_of_smooth_gradient_matches_up_to_constant() {
    let ops = TensorOps::uniform(4, 2, 0.0, 1.0, 12).unwrap();
    let f = ops.sample_scalar(|x| (x[0] * 2.0).sin() * (x[1] + 0.5).exp());
    let phi = scalar_potential_integral(&ops, &ops.gradient(&f).unwrap()).unwrap();
    // phi vanishes at the first node and differs from f by a constant.
    assert_eq!(phi.as_slice()[0], 0.0);
    let diff = &phi - &f;
    let c = diff.as_slice()[0];
    assert!(diff.as_slice().iter().all(|v| (v - c).abs() < 1e-12));
}

fn recover_harmonic(order: usize, n: usize, h: impl Fn(&[f64]) -> f64) -> f64 {
    let ops = TensorOps::uniform(order, 2, -1.0, 1.0, n).unwrap();
    let u = ops.gradient(&ops.sample_scalar(h)).unwrap();
    let sol = harmonic_neumann_potential(&ops, &u, &NeumannOptions::default()).unwrap();
    assert!(ops.mean(sol.phi.as_slice()).abs() < 1e-12);
    let err = ops
        .m_norm(&(&ops.gradient(&sol.phi).unwrap() - &u))
        .unwrap();
    err / ops.m_norm(&u).unwrap()
}

#[test]
fn neumann_recovers_harmonic_gradients() {
    for order in [2, 4, 6, 8] {
        let e = recover_harmonic(order, 20, |x| x[0]);
        assert!(e < 1e-9, "order {order} x1: {e}");
    }
    for order in [4, 6, 8] {
        let e = recover_harmonic(order, 20, |x| x[0] * x[1]);
        assert!(e < 1e-9, "order {order} x1 x2: {e}");
        let e = recover_harmonic(order, 20, |x| x[0] * x[0] - x[1] * x[1]);
        assert!(e < 1e-9, "order {order} x1^2 - x2^2: {e}");
    }
}

#[test]
fn neumann_rejects_non_harmonic_fields() {
    let ops = TensorOps::uniform(4, 2, -1.0, 1.0, 12).unwrap();
    let u = ops.gradient(&ops.sample_scalar(|x| x[0] * x[0])).unwrap();
    assert!(matches!(
        harmonic_neumann_potential(&ops, &u, &NeumannOptions::default()),
        Err(Error::NotDivCurlFree { .. })
    ));
}
