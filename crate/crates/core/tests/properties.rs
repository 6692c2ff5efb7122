use fwl_core::gp::{kmeans, GpModel, KernelSpec};
use fwl_core::numerics::{cholesky, DEFAULT_JITTER};
use fwl_core::student::{loss_and_grad, Activation, Architecture, LossSpec, StudentNet, WeightedSampler};
use fwl_core::Rng;
use proptest::prelude::*;

mod common;
use common::{dense_posterior, gradient_check, kernel_family, random_matrix};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cholesky_reconstructs_spd_matrices(n in 1usize..=200, seed in any::<u64>()) {
        let mut rng = Rng::new(seed);
        let b = random_matrix(n, n, &mut rng);
        let mut a = b.matmul(&b.transpose()).unwrap();
        a.add_to_diagonal(1e-3 * n as f64);
        let l = cholesky(&a).unwrap();
        for i in 0..n {
            for j in i + 1..n {
                prop_assert_eq!(l[(i, j)], 0.0);
            }
        }
        let residual = l.matmul(&l.transpose()).unwrap().sub(&a).unwrap().frobenius_norm();
        prop_assert!(residual <= 1e-12 * a.frobenius_norm(), "residual {}", residual);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn gp_posterior_matches_dense_inversion(
        n in 1usize..=8,
        d in 1usize..=3,
        p in 1usize..=2,
        which in 0usize..4,
        length in 0.3f64..3.0,
        noise in 0.01f64..0.5,
        seed in any::<u64>(),
    ) {
        let mut rng = Rng::new(seed);
        let x = random_matrix(n, d, &mut rng);
        let y = random_matrix(n, p, &mut rng);
        let query: Vec<f64> = (0..d).map(|_| rng.uniform_range(-1.5, 1.5)).collect();
        let terms = kernel_family(which, length, noise);
        let model = GpModel::fit(&KernelSpec::new(terms.clone()).unwrap(), &x, &y).unwrap();
        let got = model.predict(&query).unwrap();
        let (mean, var) = dense_posterior(&terms, &x, &y, &query, DEFAULT_JITTER);
        for c in 0..p {
            prop_assert!((got.mean[c] - mean[c]).abs() <= 1e-7 * mean[c].abs().max(1.0), "{} vs {}", got.mean[c], mean[c]);
        }
        prop_assert!((got.variance - var).abs() <= 1e-7 * var.max(1.0), "{} vs {}", got.variance, var);
    }
}

fn arch_strategy() -> impl Strategy<Value = (Architecture, bool)> {
    (
        1usize..=3,
        prop::collection::vec(1usize..=5, 1..=2),
        1usize..=3,
        prop::bool::ANY,
        prop::bool::ANY,
    )
        .prop_map(|(input_dim, hidden, outputs, tanh, cross_entropy)| {
            let arch = Architecture {
                input_dim,
                hidden,
                output_dim: if cross_entropy { outputs + 1 } else { outputs },
                hidden_activation: if tanh { Activation::Tanh } else { Activation::Identity },
                output_activation: if cross_entropy || !tanh { Activation::Identity } else { Activation::Tanh },
            };
            (arch, cross_entropy)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn gradients_match_central_differences(
        (arch, cross_entropy) in arch_strategy(),
        l2 in prop_oneof![Just(0.0), 0.0f64..0.1],
        seed in any::<u64>(),
    ) {
        let mut rng = Rng::new(seed);
        let net = StudentNet::new(&arch, &mut rng).unwrap();
        let x: Vec<f64> = (0..arch.input_dim).map(|_| rng.uniform_range(-2.0, 2.0)).collect();
        let (spec, target) = if cross_entropy {
            let raw: Vec<f64> = (0..arch.output_dim).map(|_| rng.uniform() + 0.05).collect();
            let s: f64 = raw.iter().sum();
            (LossSpec::cross_entropy().with_l2(l2), raw.iter().map(|v| v / s).collect::<Vec<_>>())
        } else {
            (LossSpec::mse().with_l2(l2), (0..arch.output_dim).map(|_| rng.uniform_range(-1.0, 1.0)).collect())
        };
        let worst = gradient_check(&net, &x, &target, &spec, 1e-5, 1e-7);
        prop_assert!(worst <= 0.0, "violation {}", worst);
    }

    #[test]
    fn penalty_adds_exactly_its_own_gradient(l2 in 1e-4f64..1.0, seed in any::<u64>()) {
        let arch = Architecture { input_dim: 2, hidden: vec![4], output_dim: 1, hidden_activation: Activation::Tanh, output_activation: Activation::Identity };
        let net = StudentNet::new(&arch, &mut Rng::new(seed)).unwrap();
        let (plain_loss, plain) = loss_and_grad(&net, &[0.3, -0.7], &[0.5], &LossSpec::mse()).unwrap();
        let (loss, grad) = loss_and_grad(&net, &[0.3, -0.7], &[0.5], &LossSpec::mse().with_l2(l2)).unwrap();
        let w = net.params();
        let norm: f64 = w.iter().map(|v| v * v).sum();
        prop_assert!((loss - plain_loss - l2 * norm).abs() <= 1e-12);
        for ((g, p), w) in grad.iter().zip(&plain).zip(&w) {
            prop_assert!((g - p - 2.0 * l2 * w).abs() <= 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn kmeans_sse_never_increases(n in 1usize..=40, d in 1usize..=3, k_raw in 1usize..=8, seed in any::<u64>()) {
        let mut rng = Rng::new(seed);
        let points = random_matrix(n, d, &mut rng);
        let k = k_raw.min(n);
        let fit = kmeans(&points, k, &mut rng).unwrap();
        prop_assert!(!fit.sse_trace.is_empty());
        for w in fit.sse_trace.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-15, "{:?}", fit.sse_trace);
        }
        prop_assert_eq!(fit.assignment.len(), n);
    }

    #[test]
    fn rng_streams_are_reproducible(seed in any::<u64>(), key in any::<u64>()) {
        let draw = |mut r: Rng| (0..8).map(|_| r.uniform()).collect::<Vec<_>>();
        prop_assert_eq!(draw(Rng::new(seed)), draw(Rng::new(seed)));
        let parent = Rng::new(seed);
        let mut used = Rng::new(seed);
        used.uniform();
        prop_assert_eq!(draw(parent.split(key)), draw(used.split(key)));
        prop_assert_ne!(draw(parent.split(key)), draw(parent.split(key.wrapping_add(1))));
    }
}

#[test]
fn sampler_matches_fidelity_proportions() {
    let fidelities = [0.05, 0.1, 0.15, 0.2, 0.0, 0.3, 0.4, 0.25, 0.35, 0.2];
    let total: f64 = fidelities.iter().sum();
    let sampler = WeightedSampler::new(&fidelities).unwrap();
    let mut rng = Rng::new(17);
    let draws = 100_000;
    let mut counts = [0usize; 10];
    for _ in 0..draws {
        counts[sampler.sample(&mut rng)] += 1;
    }
    for (c, f) in counts.iter().zip(fidelities) {
        assert!((*c as f64 / draws as f64 - f / total).abs() < 0.01, "{counts:?}");
    }
    assert_eq!(counts[4], 0);
}
