mod oracles;

use civex::bench::{generate_frame, Confounder, Family, ScmSpec};
use civex::data::DataFrame;
use civex::estimation::{adjusted_effect, provenance_hash, unadjusted_difference, z_quantile};
use civex::rng;
use oracles::{canonical_text, ols_normal_equations, sha256_hex};
use rand::Rng;
use rand_distr::StandardNormal;

fn frame(cols: Vec<(&str, Vec<f64>)>) -> DataFrame {
    DataFrame::from_columns(cols.into_iter().map(|(n, c)| (n.to_owned(), c)).collect()).unwrap()
}

/// The published 8-row fixture: one confounder `Z`.
fn eight_rows() -> DataFrame {
    frame(vec![
        ("T", vec![0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0]),
        ("Y", vec![1.2, 3.9, 0.7, 4.4, 3.1, 1.9, 5.0, 0.4]),
        ("Z", vec![0.5, 1.1, -0.3, 1.6, 0.2, 1.0, 2.1, -0.8]),
    ])
}

#[test]
fn eight_row_fixture_matches_normal_equations() {
    let d = eight_rows();
    let est = adjusted_effect(&d, "T", "Y", &["Z".into()], 0.05).unwrap();
    let (b, se) = ols_normal_equations(
        &d.column("Y").unwrap(),
        &[d.column("T").unwrap(), d.column("Z").unwrap()],
        0,
    );
    assert!((est.theta_hat - b).abs() < 1e-10, "{} vs {b}", est.theta_hat);
    assert!((est.std_err - se).abs() < 1e-10, "{} vs {se}", est.std_err);
    assert!((est.lcb - (b - z_quantile(0.05) * se)).abs() < 1e-10);
}

#[test]
fn ols_matches_oracle_on_random_fixtures() {
    let mut s = rng::keyed(["ols-fixtures"]);
    for case in 0..100 {
        let n = s.random_range(12..300);
        let k = s.random_range(0..5);
        let mut t: Vec<f64> = (0..n).map(|_| f64::from(u8::from(s.random::<bool>()))).collect();
        t[0] = 0.0;
        t[1] = 1.0;
        let covs: Vec<Vec<f64>> = (0..k)
            .map(|_| {
                let scale = 10f64.powi(s.random_range(-2..4));
                let shift = s.random_range(-50.0..50.0);
                (0..n)
                    .map(|_| shift + scale * s.sample::<f64, _>(StandardNormal))
                    .collect()
            })
            .collect();
        let theta = s.random_range(-3.0..3.0);
        let y: Vec<f64> = (0..n)
            .map(|i| theta * t[i] + covs.iter().map(|c| 0.01 * c[i]).sum::<f64>() + s.sample::<f64, _>(StandardNormal))
            .collect();
        let mut cols = vec![("T", t.clone()), ("Y", y.clone())];
        let names: Vec<String> = (0..k).map(|i| format!("c{i}")).collect();
        for (name, c) in names.iter().zip(&covs) {
            cols.push((name.as_str(), c.clone()));
        }
        let d = frame(cols);
        let est = adjusted_effect(&d, "T", "Y", &names, 0.05).unwrap();
        let mut regs = vec![t];
        regs.extend(covs);
        let (b, se) = ols_normal_equations(&y, &regs, 0);
        assert!(
            (est.theta_hat - b).abs() < 1e-8,
            "case {case}: {} vs {b}",
            est.theta_hat
        );
        assert!((est.std_err - se).abs() < 1e-8, "case {case}: {} vs {se}", est.std_err);
    }
}

#[test]
fn spec_examples() {
    let t: Vec<f64> = (0..100).map(|i| f64::from(i % 2)).collect();
    let y: Vec<f64> = t.iter().map(|v| 2.0 * v).collect();
    let est = adjusted_effect(&frame(vec![("T", t), ("Y", y)]), "T", "Y", &[], 0.05).unwrap();
    assert!((est.theta_hat - 2.0).abs() < 1e-12);
    assert!(est.std_err < 1e-12);
    assert!((est.lcb - 2.0).abs() < 1e-10);

    let d = frame(vec![("T", vec![1.0, 1.0, 0.0, 0.0]), ("Y", vec![3.0, 3.0, 1.0, 1.0])]);
    let est = unadjusted_difference(&d, "T", "Y", 0.05).unwrap();
    assert_eq!((est.theta_hat, est.std_err), (2.0, 0.0));

    assert!((z_quantile(0.05) - 1.6449).abs() < 5e-5);
}

#[test]
fn unadjusted_equals_empty_adjustment() {
    let mut s = rng::keyed(["unadjusted"]);
    for _ in 0..50 {
        let n = s.random_range(5..200);
        let mut t: Vec<f64> = (0..n).map(|_| f64::from(u8::from(s.random::<bool>()))).collect();
        t[0] = 0.0;
        t[1] = 1.0;
        let y: Vec<f64> = (0..n).map(|_| s.sample::<f64, _>(StandardNormal)).collect();
        let d = frame(vec![("T", t), ("Y", y)]);
        let a = unadjusted_difference(&d, "T", "Y", 0.05).unwrap();
        let b = adjusted_effect(&d, "T", "Y", &[], 0.05).unwrap();
        assert!((a.theta_hat - b.theta_hat).abs() < 1e-10);
        assert!((a.std_err - b.std_err).abs() < 1e-10);
    }
}

#[test]
fn adjustment_order_does_not_matter() {
    let d = eight_rows();
    let d = frame(vec![
        ("T", d.column("T").unwrap()),
        ("Y", d.column("Y").unwrap()),
        ("Z", d.column("Z").unwrap()),
        ("W", vec![3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0]),
    ]);
    let a = adjusted_effect(&d, "T", "Y", &["Z".into(), "W".into()], 0.05).unwrap();
    let b = adjusted_effect(&d, "T", "Y", &["W".into(), "Z".into()], 0.05).unwrap();
    assert!((a.theta_hat - b.theta_hat).abs() < 1e-10);
}

#[test]
fn estimation_errors() {
    let one_arm = frame(vec![("T", vec![1.0; 5]), ("Y", vec![1.0, 2.0, 3.0, 4.0, 5.0])]);
    assert!(unadjusted_difference(&one_arm, "T", "Y", 0.05).is_err());
    let collinear = frame(vec![
        ("T", vec![0.0, 1.0, 0.0, 1.0, 1.0, 0.0]),
        ("Y", vec![1.0, 2.0, 1.5, 2.5, 3.0, 0.5]),
        ("A", vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]),
        ("B", vec![2.0, 4.0, 6.0, 8.0, 10.0, 12.0]),
    ]);
    assert!(adjusted_effect(&collinear, "T", "Y", &["A".into(), "B".into()], 0.05).is_err());
    let constant = frame(vec![
        ("T", vec![0.0, 1.0, 0.0, 1.0, 1.0, 0.0]),
        ("Y", vec![1.0, 2.0, 1.5, 2.5, 3.0, 0.5]),
        ("C", vec![7.0; 6]),
    ]);
    let est = adjusted_effect(&constant, "T", "Y", &["C".into()], 0.05).unwrap();
    assert_eq!(est.dropped, vec!["C".to_owned()]);
}

#[test]
fn provenance_matches_independent_sha256() {
    assert_eq!(
        sha256_hex(b"abc"),
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
    );
    assert_eq!(
        sha256_hex(b""),
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
    );
    let mut s = rng::keyed(["provenance-fixtures"]);
    for case in 0..10 {
        let n = s.random_range(1..40);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                vec![
                    f64::from(u8::from(s.random::<bool>())),
                    s.sample::<f64, _>(StandardNormal) * 10f64.powi(s.random_range(-5..6)),
                    (s.random_range(-1e4..1e4f64) * 1e4).round() / 1e4,
                ]
            })
            .collect();
        let text = canonical_text(&["T", "Y", "x"], &rows);
        for cell in text.lines().skip(1).flat_map(|l| l.split(',')) {
            let v: f64 = cell.parse().unwrap();
            assert_eq!(v.to_string(), cell, "case {case}: not shortest round-trip");
        }
        let d = DataFrame::new(vec!["T".into(), "Y".into(), "x".into()], rows).unwrap();
        assert_eq!(d.canonical_string(), text, "case {case}");
        assert_eq!(provenance_hash(&d), sha256_hex(text.as_bytes()), "case {case}");
        assert_eq!(DataFrame::parse_canonical(&text).unwrap(), d);
        if n > 1 && d.rows()[0] != d.rows()[1] {
            assert_ne!(provenance_hash(&d.with_rows_swapped(0, 1)), provenance_hash(&d));
        }
    }
}

#[test]
fn lcb_coverage() {
    let reps = 4000;
    let alpha = 0.05;
    let mut misses = 0usize;
    for r in 0..reps {
        let mut s = rng::keyed([b"coverage".as_slice(), &(r as u64).to_le_bytes()]);
        let theta = s.random_range(-2.0..2.0);
        let spec = ScmSpec {
            family: Family::Cache,
            theta,
            intercept: 0.3,
            confounders: vec![
                Confounder {
                    name: "a".into(),
                    mean: 5.0,
                    sd: 2.0,
                    treat_coef: 0.8,
                    outcome_coef: -0.6,
                    hidden: false,
                },
                Confounder {
                    name: "b".into(),
                    mean: -1.0,
                    sd: 0.5,
                    treat_coef: -0.4,
                    outcome_coef: 0.9,
                    hidden: false,
                },
            ],
            noise_sd: 1.0,
            safe: theta > 0.0,
        };
        let d = generate_frame(&spec, 150, false, &mut s).unwrap();
        let est = adjusted_effect(&d, "T", "Y", &["a".into(), "b".into()], alpha).unwrap();
        misses += usize::from(theta < est.lcb);
    }
    let rate = misses as f64 / reps as f64;
    let se = (alpha * (1.0 - alpha) / reps as f64).sqrt();
    assert!(rate <= alpha + 2.0 * se, "P(theta < lcb) = {rate}");
    assert!(rate >= alpha - 4.0 * se, "bound is far too loose: {rate}");
}
