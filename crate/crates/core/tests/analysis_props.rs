use edudiff::analysis::{bootstrap_compare, f_classif, rank_features, BootstrapConfig};
use edudiff::classifier::DesignMatrix;
use edudiff::rng::{normal_f64, rng_for, Rng};
use edudiff::EducationLevel;
use proptest::prelude::*;
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

/// Textbook ANOVA from raw sums of squares with a statrs tail.
fn brute_anova(x: &[f64], groups: &[usize]) -> (f64, f64) {
    let present: Vec<usize> = (0..3).filter(|g| groups.contains(g)).collect();
    let n = x.len() as f64;
    let grand = x.iter().sum::<f64>() / n;
    let mut ssb = 0.0;
    let mut ssw = 0.0;
    for &g in &present {
        let members: Vec<f64> = x.iter().zip(groups).filter(|(_, &k)| k == g).map(|(v, _)| *v).collect();
        let mean = members.iter().sum::<f64>() / members.len() as f64;
        ssb += members.len() as f64 * (mean - grand).powi(2);
        ssw += members.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
    }
    let (d1, d2) = (present.len() as f64 - 1.0, n - present.len() as f64);
    let f = (ssb / d1) / (ssw / d2);
    let p = 1.0 - FisherSnedecor::new(d1, d2).unwrap().cdf(f);
    (f, p)
}

fn to_levels(g: &[usize]) -> Vec<EducationLevel> {
    g.iter().map(|&k| EducationLevel::ALL[k]).collect()
}

#[test]
fn hand_example() {
    let t = f_classif::<f64>(&[1.0, 2.0, 10.0, 11.0], &to_levels(&[0, 0, 1, 1])).unwrap();
    assert!((t.f - 162.0).abs() < 1e-9);
    assert!((t.p_value - (1.0 - (162.0f64 / 164.0).sqrt())).abs() < 1e-12);
    let c = f_classif::<f64>(&[3.0; 6], &to_levels(&[0, 1, 2, 0, 1, 2])).unwrap();
    assert_eq!((c.f, c.p_value), (0.0, 1.0));
}

#[test]
fn brute_force_agreement_on_200_draws() {
    for seed in 0..200u64 {
        let mut rng = rng_for(seed, "anova");
        let n = 6 + (seed as usize % 40);
        let groups: Vec<usize> = (0..n).map(|i| i % 3).collect();
        let shift = (seed % 5) as f64 * 0.3;
        let x: Vec<f64> = groups.iter().map(|&g| normal_f64(&mut rng) * 2.0 + shift * g as f64).collect();
        let t = f_classif(&x, &to_levels(&groups)).unwrap();
        let (f, p) = brute_anova(&x, &groups);
        assert!((t.f - f).abs() <= 1e-9 * f.max(1.0), "seed {seed}: F {} vs {f}", t.f);
        assert!((t.p_value - p).abs() <= 1e-9, "seed {seed}: p {} vs {p}", t.p_value);
    }
}

#[test]
fn label_copy_ranks_first() {
    let mut rng = rng_for(3, "rank");
    let labels: Vec<EducationLevel> = (0..30).map(|i| EducationLevel::ALL[i % 3]).collect();
    let rows = labels.iter().map(|l| vec![normal_f64(&mut rng), l.ordinal() as f64]).collect();
    let m = DesignMatrix::new(vec!["noise".into(), "copy".into()], rows, labels).unwrap();
    let r = rank_features(&m).unwrap();
    assert_eq!(r.top_k(1), ["copy"]);
    assert!(r.entries[0].infinite && r.entries[0].f == f64::MAX && r.entries[0].p_value == 0.0);
}

fn dominance_fixture(seed: u64) -> (DesignMatrix<f64>, DesignMatrix<f64>) {
    let mut rng = rng_for(seed, "dominance");
    let make = |n: usize, rng: &mut Rng| {
        let labels: Vec<EducationLevel> = (0..n).map(|i| EducationLevel::ALL[i % 3]).collect();
        let rows = labels
            .iter()
            .map(|l| vec![normal_f64(rng), normal_f64(rng), l.ordinal() as f64 + 0.1 * normal_f64(rng)])
            .collect();
        DesignMatrix::new(vec!["n1".into(), "n2".into(), "signal".into()], rows, labels).unwrap()
    };
    (make(60, &mut rng), make(30, &mut rng))
}

#[test]
fn predictive_column_is_significant() {
    let mut significant = 0;
    for seed in 0..20 {
        let (train, test) = dominance_fixture(seed);
        let cfg = BootstrapConfig {
            n_samples: 100,
            seed,
            ..BootstrapConfig::default()
        };
        let r = bootstrap_compare(&train, &test, &["n1", "n2", "signal"], &["n1", "n2"], &cfg).unwrap();
        if r.p_value < 0.05 && r.mean_diff > 0.0 {
            significant += 1;
        }
    }
    assert!(significant >= 19, "{significant}/20");
}

fn column_and_groups() -> impl Strategy<Value = (Vec<f64>, Vec<usize>)> {
    (6usize..60).prop_flat_map(|n| {
        (
            prop::collection::vec(-1e3f64..1e3, n),
            prop::collection::vec(0usize..3, n).prop_map(|mut g| {
                g[0] = 0;
                g[1] = 1;
                g
            }),
        )
    })
}

proptest! {
    #[test]
    fn affine_invariance((x, g) in column_and_groups(), a in prop_oneof![-50.0f64..-0.1, 0.1f64..50.0], b in -100.0f64..100.0) {
        let levels = to_levels(&g);
        let t1 = f_classif(&x, &levels).unwrap();
        let y: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let t2 = f_classif(&y, &levels).unwrap();
        prop_assume!(!t1.infinite && t1.f < 1e6);
        prop_assert!((t1.f - t2.f).abs() <= 1e-9 * t1.f.max(1.0), "{} vs {}", t1.f, t2.f);
    }

    #[test]
    fn p_value_is_a_probability((x, g) in column_and_groups()) {
        let t = f_classif(&x, &to_levels(&g)).unwrap();
        prop_assert!((0.0..=1.0).contains(&t.p_value));
        prop_assert!(t.f >= 0.0);
    }

    #[test]
    fn ranking_is_a_permutation(seed in 0u64..500, d in 1usize..12) {
        let mut rng = rng_for(seed, "perm");
        let labels: Vec<EducationLevel> = (0..24).map(|i| EducationLevel::ALL[i % 3]).collect();
        let rows = labels.iter().map(|_| (0..d).map(|_| normal_f64(&mut rng)).collect()).collect();
        let names: Vec<String> = (0..d).map(|j| format!("c{j:02}")).collect();
        let m = DesignMatrix::new(names.clone(), rows, labels).unwrap();
        let r = rank_features(&m).unwrap();
        let mut got: Vec<String> = r.entries.iter().map(|e| e.name.clone()).collect();
        prop_assert!(r.entries.windows(2).all(|w| w[0].f >= w[1].f));
        prop_assert!(r.entries.iter().enumerate().all(|(i, e)| e.rank == i + 1));
        got.sort();
        prop_assert_eq!(got, names);
    }
}
