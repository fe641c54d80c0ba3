use civex::bench::{
    build_benchmark, generate_frame, recovery_check, sample_instance, write_jsonl, BenchmarkSpec, Confounder, Family,
    InstanceId, Label, Regime, SampleOptions, ScmSpec,
};
use civex::estimation::{adjusted_effect, unadjusted_difference};
use civex::evaluation::regime_diagnostics;
use civex::rng;

fn small_spec() -> BenchmarkSpec {
    BenchmarkSpec {
        seeds: vec![42, 43],
        moderate_per_family: 6,
        adversarial_per_family: 5,
        n_rows: 120,
        ..BenchmarkSpec::default()
    }
}

#[test]
fn consistency_with_one_observed_confounder() {
    let spec = ScmSpec {
        family: Family::DbIndex,
        theta: 1.5,
        intercept: 0.2,
        confounders: vec![Confounder {
            name: "query_volume".into(),
            mean: 100.0,
            sd: 15.0,
            treat_coef: 0.9,
            outcome_coef: 0.7,
            hidden: false,
        }],
        noise_sd: 1.0,
        safe: true,
    };
    let d = generate_frame(&spec, 10_000, false, &mut rng::keyed(["consistency"])).unwrap();
    let est = adjusted_effect(&d, "T", "Y", &["query_volume".into()], 0.05).unwrap();
    assert!((est.theta_hat - 1.5).abs() < 0.1, "{}", est.theta_hat);
}

#[test]
fn moderate_recovery_is_tight() {
    let opts = SampleOptions {
        n_rows: 10_000,
        ..SampleOptions::default()
    };
    for family in [Family::DbIndex, Family::Migration] {
        let r = recovery_check(family, Regime::Moderate, 100, &opts, 0.15, 7).unwrap();
        assert!(r.pass, "{r:?}");
    }
}

#[test]
fn adversarial_recovery_is_biased() {
    let opts = SampleOptions {
        n_rows: 2_000,
        ..SampleOptions::default()
    };
    let r = recovery_check(Family::Cache, Regime::Adversarial, 100, &opts, 0.15, 7).unwrap();
    assert!(r.mean_flip_bias > 1.0, "{r:?}");
    assert!(!r.pass);
}

#[test]
fn exact_fit_without_noise_or_hidden_confounders() {
    let opts = SampleOptions {
        latent_fraction_moderate: 0.0,
        record_decimals: None,
        grid: civex::bench::CoefficientGrid {
            noise_sd: (0.0, 0.0),
            ..Default::default()
        },
        ..SampleOptions::default()
    };
    let r = recovery_check(Family::GitBranch, Regime::Moderate, 30, &opts, 1e-8, 3).unwrap();
    assert!(r.max_abs_error < 1e-8, "{r:?}");
}

#[test]
fn experimental_frames_recover_theta() {
    let bench = build_benchmark(&BenchmarkSpec::default()).unwrap();
    let mut within = 0;
    for inst in &bench.instances {
        let est = unadjusted_difference(&inst.experimental, "T", "Y", 0.05).unwrap();
        within += usize::from((est.theta_hat - inst.spec.theta).abs() <= 3.0 * est.std_err);
    }
    let rate = within as f64 / bench.instances.len() as f64;
    assert!(rate >= 0.99, "{rate}");
}

#[test]
fn hidden_confounders_never_leak() {
    let bench = build_benchmark(&small_spec()).unwrap();
    for inst in &bench.instances {
        for h in inst.spec.hidden() {
            assert!(!inst.graph.contains(&h.name));
            assert!(inst.observational.index_of(&h.name).is_none());
            assert!(inst.experimental.index_of(&h.name).is_none());
        }
        assert_eq!(inst.spec.has_hidden(), inst.graph.has_bidirected("T", "Y"));
        assert_eq!(inst.observational.columns(), inst.experimental.columns());
        inst.observational.check_binary("T").unwrap();
        assert_eq!(inst.safe_experiment_available, inst.frame.reversible);
    }
}

#[test]
fn adversarial_signs_follow_the_label() {
    let opts = SampleOptions::default();
    for (i, label) in [Label::Safe, Label::Harmful].into_iter().cycle().take(20).enumerate() {
        let id = InstanceId::new(9, Regime::Adversarial, Family::Migration, i);
        let inst = sample_instance(id, &opts, Some(label), &mut rng::keyed(id.key_parts())).unwrap();
        let hidden: Vec<_> = inst.spec.hidden().collect();
        assert_eq!(hidden.len(), 1);
        let h = hidden[0];
        assert_eq!(h.treat_coef.abs(), 2.5);
        assert_eq!(h.outcome_coef.abs(), 2.5);
        assert_eq!(h.treat_coef * h.outcome_coef > 0.0, label == Label::Harmful);
    }
}

#[test]
fn moderate_hidden_effects_are_small() {
    let bench = build_benchmark(&small_spec()).unwrap();
    for inst in bench.instances.iter().filter(|i| i.id.regime == Regime::Moderate) {
        for h in inst.spec.hidden() {
            assert!(h.treat_coef.abs() <= 0.6 && h.outcome_coef.abs() <= 0.6);
        }
        // Association keeps the sign of theta in the population.
        assert_eq!(inst.spec.population_association().signum(), inst.spec.theta.signum());
    }
}

#[test]
fn generation_is_deterministic_across_thread_counts() {
    let spec = small_spec();
    let serial = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| build_benchmark(&spec).unwrap());
    let parallel = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap()
        .install(|| build_benchmark(&spec).unwrap());
    let bytes = |b: &civex::bench::Benchmark| {
        let mut out = Vec::new();
        write_jsonl(&b.instances, &mut out).unwrap();
        out
    };
    assert_eq!(bytes(&serial), bytes(&parallel));
    assert_eq!(bytes(&serial), bytes(&build_benchmark(&spec).unwrap()));
}

#[test]
fn default_benchmark_shape_and_counterbalance() {
    let bench = build_benchmark(&BenchmarkSpec::default()).unwrap();
    let count = |r| bench.instances.iter().filter(|i| i.id.regime == r).count();
    assert_eq!(bench.instances.len(), 1890);
    assert_eq!(count(Regime::Moderate), 1050);
    assert_eq!(count(Regime::Adversarial), 840);
    for row in bench.counterbalance.aggregated() {
        let safe = 1.0 - row.harmful_fraction();
        assert!((0.40..=0.60).contains(&safe), "{row:?}");
    }
    let adv = bench.counterbalance.regime_harmful_fraction(Regime::Adversarial);
    assert!((adv - 0.45).abs() <= 0.05, "{adv}");
    let diag = regime_diagnostics(bench.instances.iter().filter(|i| i.id.regime == Regime::Adversarial));
    assert!(diag.sign_flip_fraction > 0.95, "{diag:?}");
}

#[test]
fn instances_never_repeat_a_stream() {
    let bench = build_benchmark(&small_spec()).unwrap();
    let mut keys: Vec<u64> = bench
        .instances
        .iter()
        .map(|i| rng::stream_key(i.id.key_parts()))
        .collect();
    keys.sort();
    keys.dedup();
    assert_eq!(keys.len(), bench.instances.len());
}
