use edudiff::classifier::{train, DesignMatrix, EvalReport, Hyperparams, Objective};
use edudiff::rng::{normal_f64, rng_for, uniform_index};
use edudiff::EducationLevel;
use proptest::prelude::*;

fn random_problem(seed: u64, n: usize, d: usize) -> (DesignMatrix<f64>, Vec<f64>, f64) {
    let mut rng = rng_for(seed, "problem");
    let rows = (0..n).map(|_| (0..d).map(|_| normal_f64(&mut rng)).collect()).collect();
    let labels = (0..n).map(|i| EducationLevel::ALL[if i < 3 { i } else { uniform_index(&mut rng, 3) }]).collect();
    let m = DesignMatrix::new((0..d).map(|j| format!("f{j}")).collect(), rows, labels).unwrap();
    let w = (0..3 * (d + 1)).map(|_| normal_f64(&mut rng)).collect();
    let lambda = 0.01 + normal_f64(&mut rng).abs() * 0.1;
    (m, w, lambda)
}

/// Vector relative error against central differences of the loss.
fn gradient_error(obj: &Objective<f64>, w: &[f64]) -> f64 {
    let (_, g) = obj.loss_and_gradient(w);
    let h = 1e-5;
    let mut num = vec![0.0; w.len()];
    let mut probe = w.to_vec();
    for i in 0..w.len() {
        probe[i] = w[i] + h;
        let up = obj.loss(&probe);
        probe[i] = w[i] - h;
        let down = obj.loss(&probe);
        probe[i] = w[i];
        num[i] = (up - down) / (2.0 * h);
    }
    let diff = g.iter().zip(&num).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let norm = g.iter().map(|a| a * a).sum::<f64>().sqrt() + num.iter().map(|a| a * a).sum::<f64>().sqrt();
    diff / norm.max(1e-12)
}

#[test]
fn gradient_matches_finite_differences() {
    for seed in 0..50 {
        let (m, w, lambda) = random_problem(seed, 5 + seed as usize % 20, 1 + seed as usize % 6);
        let obj = Objective { x: &m, lambda };
        let err = gradient_error(&obj, &w);
        assert!(err < 1e-5, "seed {seed}: relative error {err}");
    }
}

/// Three well separated Gaussian blobs in the plane.
fn blobs(n: usize, seed: u64) -> DesignMatrix<f64> {
    let mut rng = rng_for(seed, "blobs");
    let centers = [[-6.0, 0.0], [0.0, 6.0], [6.0, 0.0]];
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let k = i % 3;
        rows.push(vec![centers[k][0] + normal_f64(&mut rng), centers[k][1] + normal_f64(&mut rng)]);
        labels.push(EducationLevel::ALL[k]);
    }
    DesignMatrix::new(vec!["x".into(), "y".into()], rows, labels).unwrap()
}

#[test]
fn separable_blobs_are_learned() {
    let m = blobs(300, 1);
    let model = train(&m, &Hyperparams::default()).unwrap();
    let report = model.evaluate(&m).unwrap();
    assert!(report.accuracy >= 0.99, "training accuracy {}", report.accuracy);
}

#[test]
fn loss_never_increases() {
    for seed in 0..10 {
        let (m, _, lambda) = random_problem(seed, 60, 4);
        let hp = Hyperparams {
            l2_lambda: Some(lambda),
            max_iters: 300,
            ..Hyperparams::default()
        };
        let model = train(&m, &hp).unwrap();
        let h = &model.metadata.loss_history;
        assert!(h.len() > 1);
        assert!(h.windows(2).all(|w| w[1] <= w[0]), "seed {seed}: {h:?}");
    }
}

#[test]
fn hand_computed_confusion() {
    // rows: truth, columns: predicted
    let r = EvalReport::<f64>::from_confusion([[5, 1, 0], [2, 3, 1], [0, 0, 4]]);
    assert_eq!(r.precision, [5.0 / 7.0, 3.0 / 4.0, 4.0 / 5.0]);
    assert_eq!(r.recall, [5.0 / 6.0, 3.0 / 6.0, 4.0 / 4.0]);
    let f1 = |p: f64, r: f64| 2.0 * p * r / (p + r);
    let want = [f1(5.0 / 7.0, 5.0 / 6.0), f1(0.75, 0.5), f1(0.8, 1.0)];
    for k in 0..3 {
        assert!((r.f1[k] - want[k]).abs() < 1e-15);
    }
    assert!((r.macro_f1 - want.iter().sum::<f64>() / 3.0).abs() < 1e-15);
    assert_eq!(r.accuracy, 12.0 / 16.0);
    assert_eq!(r.n, 16);

    let empty = EvalReport::<f64>::from_confusion([[2, 0, 0], [0, 2, 0], [0, 0, 0]]);
    assert_eq!(empty.f1[2], 0.0, "absent class scores zero");
}

fn levels() -> impl Strategy<Value = Vec<(usize, usize)>> {
    prop::collection::vec((0usize..3, 0usize..3), 1..80)
}

proptest! {
    #[test]
    fn report_matches_direct_counting(pairs in levels()) {
        let truth: Vec<_> = pairs.iter().map(|p| EducationLevel::ALL[p.0]).collect();
        let pred: Vec<_> = pairs.iter().map(|p| EducationLevel::ALL[p.1]).collect();
        let r = EvalReport::<f64>::from_predictions(&truth, &pred);
        let correct = pairs.iter().filter(|p| p.0 == p.1).count();
        prop_assert_eq!(r.accuracy, correct as f64 / pairs.len() as f64);
        let mut f1s = [0.0; 3];
        for k in 0..3 {
            let tp = pairs.iter().filter(|p| p.0 == k && p.1 == k).count() as f64;
            let pp = pairs.iter().filter(|p| p.1 == k).count() as f64;
            let ap = pairs.iter().filter(|p| p.0 == k).count() as f64;
            let prec = if pp > 0.0 { tp / pp } else { 0.0 };
            let rec = if ap > 0.0 { tp / ap } else { 0.0 };
            prop_assert_eq!(r.precision[k], prec);
            prop_assert_eq!(r.recall[k], rec);
            f1s[k] = if prec + rec > 0.0 { 2.0 * prec * rec / (prec + rec) } else { 0.0 };
            prop_assert!((r.f1[k] - f1s[k]).abs() < 1e-15);
        }
        prop_assert!((r.macro_f1 - f1s.iter().sum::<f64>() / 3.0).abs() < 1e-15);
        prop_assert_eq!(r.confusion.iter().flatten().sum::<usize>(), pairs.len());
    }

    #[test]
    fn probabilities_form_a_simplex(seed in 0u64..1000, x in prop::collection::vec(-50.0f64..50.0, 3)) {
        let (m, _, _) = random_problem(seed, 30, 3);
        let hp = Hyperparams { max_iters: 50, ..Hyperparams::default() };
        let model = train(&m, &hp).unwrap();
        let p = model.predict_proba(&x).unwrap();
        prop_assert!(p.iter().all(|&v| (0.0..=1.0).contains(&v)));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
