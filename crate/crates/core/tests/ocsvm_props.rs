mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use validom::datasets::{generate_dataset, DatasetSpec, PointCloud, ScaleMode, Scaler, Shape};
use validom::ocsvm::*;

fn random_cloud(rng: &mut ChaCha8Rng, n: usize) -> PointCloud {
    PointCloud::new(
        (0..n)
            .map(|_| vec![rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)])
            .collect(),
    )
    .unwrap()
}

#[test]
fn dual_matches_projected_gradient_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..10 {
        let n = rng.gen_range(8..=30);
        let nu = rng.gen_range(0.15..0.6);
        let gamma = rng.gen_range(0.2..3.0);
        let c = random_cloud(&mut rng, n);
        let (_, stats) = train_with_stats(
            &c,
            nu,
            KernelSpec::rbf(gamma).unwrap(),
            &TrainOptions::default(),
        )
        .unwrap();
        let k = common::kernel_matrix(&c, gamma);
        let cap = 1.0 / (nu * n as f64);
        let oracle = common::qp_oracle(&k, cap, 20_000);
        let ours = common::dual_objective(&k, &stats.alpha);
        let theirs = common::dual_objective(&k, &oracle);
        assert!((ours - theirs).abs() <= 1e-6, "{ours} vs {theirs}");
        assert!((ours - stats.objective).abs() < 1e-12);
        assert!(common::kkt_residual(&k, &stats.alpha, cap) <= 1e-6);
    }
}

#[test]
fn margin_vectors_sit_on_the_boundary() {
    let c = generate_dataset(&DatasetSpec::new(Shape::Oval, 300, 3)).unwrap();
    let opts = TrainOptions::default();
    let (m, stats) = train_with_stats(&c, 0.05, KernelSpec::rbf(0.5).unwrap(), &opts).unwrap();
    let cap = 1.0 / (0.05 * 300.0);
    let mut seen = 0;
    for (pos, &i) in stats.support_indices.iter().enumerate() {
        let a = m.alphas[pos];
        if a > opts.tol && a < cap - opts.tol {
            assert!(m.decision(c.point(i)).unwrap().abs() <= 10.0 * opts.tol);
            seen += 1;
        }
    }
    assert!(seen > 0);
}

#[test]
fn nu_property_and_its_failure_mode() {
    let c = generate_dataset(&DatasetSpec::new(Shape::Box, 600, 7)).unwrap();
    let m = train(&c, 0.03, KernelSpec::rbf(0.3).unwrap()).unwrap();
    let r = validate_nu_property(&m, &c, 1e-6).unwrap();
    assert!(r.pass, "{r:?}");
    let mut broken = m.clone();
    broken.rho += 1.0;
    assert!(!validate_nu_property(&broken, &c, 1e-6).unwrap().pass);
}

#[test]
fn json_round_trip_reproduces_decisions() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let c = random_cloud(&mut rng, 80);
    let s = Scaler::fit(&c, ScaleMode::MinmaxToUnitIntervalSigned).unwrap();
    let m = train(
        &s.apply_cloud(&c).unwrap(),
        0.1,
        KernelSpec::rbf(1.0).unwrap(),
    )
    .unwrap()
    .with_scaler(s);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    m.save_json(&path).unwrap();
    let back = OneClassSvmModel::load_json(&path).unwrap();
    for p in c.points() {
        assert_eq!(m.decision(p).unwrap(), back.decision(p).unwrap());
    }
    let text = std::fs::read_to_string(&path)
        .unwrap()
        .replace(MODEL_SCHEMA, "other/9");
    std::fs::write(&path, text).unwrap();
    assert!(OneClassSvmModel::load_json(&path).is_err());
}

#[test]
fn raw_terms_reproduce_scaled_decision() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let c = PointCloud::new(
        (0..60)
            .map(|_| vec![rng.gen_range(0.0..10.0), rng.gen_range(-1.0..1.0)])
            .collect(),
    )
    .unwrap();
    let s = Scaler::fit(&c, ScaleMode::MinmaxToUnitIntervalSigned).unwrap();
    let m = train(
        &s.apply_cloud(&c).unwrap(),
        0.2,
        KernelSpec::rbf(2.0).unwrap(),
    )
    .unwrap()
    .with_scaler(s);
    let (centers, w) = m.raw_terms();
    for _ in 0..50 {
        let x = [rng.gen_range(-2.0..12.0), rng.gen_range(-2.0..2.0)];
        let sum: f64 = centers
            .iter()
            .zip(&m.alphas)
            .map(|(cv, a)| a * (-(0..2).map(|j| w[j] * (x[j] - cv[j]).powi(2)).sum::<f64>()).exp())
            .sum();
        assert!((sum - m.rho - m.decision(&x).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn gamma_schedule_diagnostics() {
    let c = generate_dataset(&DatasetSpec::new(Shape::Box, 600, 7)).unwrap();
    let sel = select_gamma(
        &c,
        0.03,
        &default_gamma_schedule(),
        DEFAULT_PLATEAU,
        &TrainOptions::default(),
    )
    .unwrap();
    assert!(!sel.exhausted);
    // the count trends downward as gamma shrinks
    let first = sel.diagnostics.first().unwrap().1;
    let last = sel.diagnostics.last().unwrap().1;
    assert!(last < first);
    assert!(select_gamma(
        &c,
        0.03,
        &[0.5, 0.6],
        DEFAULT_PLATEAU,
        &TrainOptions::default()
    )
    .is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn feasibility_bounds_and_translation(
        seed in 0u64..1000,
        n in 10usize..40,
        nu in 0.1f64..0.7,
        gamma in 0.1f64..4.0,
        shift in (-50.0f64..50.0, -50.0f64..50.0),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_cloud(&mut rng, n);
        prop_assume!(nu * n as f64 > 1.0);
        let (m, stats) = train_with_stats(&c, nu, KernelSpec::rbf(gamma).unwrap(), &TrainOptions::default()).unwrap();
        let cap = 1.0 / (nu * n as f64);
        prop_assert!((stats.alpha.iter().sum::<f64>() - 1.0).abs() <= 1e-10);
        prop_assert!((m.alphas.iter().sum::<f64>() - 1.0).abs() <= 1e-10);
        for a in stats.alpha.iter().chain(&m.alphas) {
            prop_assert!(*a >= -1e-12 && *a <= cap + 1e-12);
        }
        prop_assert!(m.n_support() + 1 >= (nu * n as f64).ceil() as usize);

        let moved = c.map_points(|p| vec![p[0] + shift.0, p[1] + shift.1]).unwrap();
        let m2 = train(&moved, nu, KernelSpec::rbf(gamma).unwrap()).unwrap();
        for _ in 0..20 {
            let x = [rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0)];
            let f = m.decision(&x).unwrap();
            prop_assert!(f >= -m.rho - 1e-12 && f <= 1.0 - m.rho + 1e-12);
            let g = m2.decision(&[x[0] + shift.0, x[1] + shift.1]).unwrap();
            prop_assert!((f - g).abs() <= 1e-9, "{} vs {}", f, g);
        }
    }

    #[test]
    fn kernel_decreases_in_gamma(
        a in prop::collection::vec(-3.0f64..3.0, 3),
        b in prop::collection::vec(-3.0f64..3.0, 3),
        g1 in 0.01f64..5.0,
        dg in 0.01f64..5.0,
    ) {
        let k1 = KernelSpec::rbf(g1).unwrap().eval(&a, &b);
        let k2 = KernelSpec::rbf(g1 + dg).unwrap().eval(&a, &b);
        prop_assert!(k2 <= k1);
    }
}
