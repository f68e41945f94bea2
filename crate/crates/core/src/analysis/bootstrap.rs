//! Bootstrap comparison of two feature sets and the t-tests behind it.
//!
//! Iteration `i` draws from `rng_for(seed, "bootstrap:i")`. Row indices are
//! drawn with `uniform_index(rng, n)`; a training resample missing a class is
//! redrawn from the same stream, at most `max_redraws` times.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::special::t_two_sided;
use crate::classifier::{train, DesignMatrix, DifficultyModel, Hyperparams};
use crate::error::{Error, Result};
use crate::rng::{rng_for, uniform_index};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TTestKind {
    Paired,
    Welch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest<T> {
    pub mean_diff: T,
    pub t_statistic: T,
    pub df: T,
    pub p_value: T,
    /// Both samples identical in the sense that every difference is zero.
    pub no_difference: bool,
}

fn mean_var<T: Scalar>(x: &[T]) -> (T, T) {
    let n = T::from_count(x.len());
    let mean = x.iter().copied().sum::<T>() / n;
    let ss = x.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>();
    (mean, ss / (n - T::one()))
}

fn degenerate<T: Scalar>(mean_diff: T, df: T) -> TTest<T> {
    if mean_diff == T::zero() {
        TTest {
            mean_diff,
            t_statistic: T::zero(),
            df,
            p_value: T::one(),
            no_difference: true,
        }
    } else {
        TTest {
            mean_diff,
            t_statistic: T::infinity() * mean_diff.signum(),
            df,
            p_value: T::zero(),
            no_difference: false,
        }
    }
}

/// Two-sided paired t-test on `a − b`.
pub fn paired_t_test<T: Scalar>(a: &[T], b: &[T]) -> Result<TTest<T>> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::DegenerateInput(format!(
            "paired t-test needs two equal samples of size ≥ 2, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let d: Vec<T> = a.iter().zip(b).map(|(&x, &y)| x - y).collect();
    let (mean, var) = mean_var(&d);
    let df = T::from_count(d.len() - 1);
    if var == T::zero() {
        return Ok(degenerate(mean, df));
    }
    let t = mean / (var / T::from_count(d.len())).sqrt();
    Ok(TTest {
        mean_diff: mean,
        t_statistic: t,
        df,
        p_value: t_two_sided(t, df),
        no_difference: false,
    })
}

/// Two-sided unequal-variance t-test with Welch-Satterthwaite degrees of freedom.
pub fn welch_t_test<T: Scalar>(a: &[T], b: &[T]) -> Result<TTest<T>> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::DegenerateInput("Welch t-test needs samples of size ≥ 2".into()));
    }
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let (na, nb) = (T::from_count(a.len()), T::from_count(b.len()));
    let (sa, sb) = (va / na, vb / nb);
    let se2 = sa + sb;
    let mean = ma - mb;
    if se2 == T::zero() {
        return Ok(degenerate(mean, na + nb - T::lit(2.0)));
    }
    let df = se2 * se2 / (sa * sa / (na - T::one()) + sb * sb / (nb - T::one()));
    let t = mean / se2.sqrt();
    Ok(TTest {
        mean_diff: mean,
        t_statistic: t,
        df,
        p_value: t_two_sided(t, df),
        no_difference: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResampleScheme {
    /// Resample training rows, evaluate on the fixed test set.
    Train,
    /// Train once on all training rows, resample the test rows.
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct BootstrapConfig<T> {
    pub n_samples: usize,
    pub seed: u64,
    pub hyperparams: Hyperparams<T>,
    pub scheme: ResampleScheme,
    pub test: TTestKind,
    pub max_redraws: usize,
}

impl<T: Scalar> Default for BootstrapConfig<T> {
    fn default() -> Self {
        Self {
            n_samples: 1000,
            seed: 0,
            hyperparams: Hyperparams::default(),
            scheme: ResampleScheme::Train,
            test: TTestKind::Paired,
            max_redraws: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct BootstrapResult<T> {
    pub n_samples: usize,
    pub seed: u64,
    pub scheme: ResampleScheme,
    pub test: TTestKind,
    /// Per-sample accuracy of the first (combo) model.
    pub acc_combo: Vec<T>,
    /// Per-sample accuracy of the second (static) model.
    pub acc_static: Vec<T>,
    pub mean_diff: T,
    pub t_statistic: T,
    pub p_value: T,
    pub no_difference: bool,
}

impl<T: Scalar> BootstrapResult<T> {
    pub fn significant(&self, alpha: T) -> bool {
        self.p_value < alpha
    }

    pub fn summary(&self) -> String {
        let verdict = if self.no_difference {
            "no difference".to_string()
        } else {
            format!("p = {:.4}", self.p_value.as_f64())
        };
        format!(
            "bootstrap ({} samples, {:?} resampling, {:?} t-test): mean accuracy difference {:+.4}, t = {:.3}, {verdict}",
            self.n_samples,
            self.scheme,
            self.test,
            self.mean_diff.as_f64(),
            self.t_statistic.as_f64()
        )
    }
}

fn draw(rng: &mut impl rand::RngCore, n: usize) -> Vec<usize> {
    (0..n).map(|_| uniform_index(rng, n)).collect()
}

fn accuracy<T: Scalar>(model: &DifficultyModel<T>, m: &DesignMatrix<T>) -> Result<T> {
    Ok(model.evaluate(m)?.accuracy)
}

/// Compares two column subsets of the same data. `first` plays the combo
/// role, `second` the static one; the reported difference is first − second.
pub fn bootstrap_compare<T: Scalar, S: AsRef<str> + Sync>(
    train_m: &DesignMatrix<T>,
    test_m: &DesignMatrix<T>,
    first: &[S],
    second: &[S],
    cfg: &BootstrapConfig<T>,
) -> Result<BootstrapResult<T>> {
    if cfg.n_samples < 2 {
        return Err(Error::Config("bootstrap needs at least 2 samples".into()));
    }
    let train_a = train_m.select_columns(first)?;
    let train_b = train_m.select_columns(second)?;
    let test_a = test_m.select_columns(first)?;
    let test_b = test_m.select_columns(second)?;

    let fixed_models = match cfg.scheme {
        ResampleScheme::Test => Some((train(&train_a, &cfg.hyperparams)?, train(&train_b, &cfg.hyperparams)?)),
        ResampleScheme::Train => None,
    };

    let pairs: Vec<(T, T)> = (0..cfg.n_samples)
        .into_par_iter()
        .map(|i| -> Result<(T, T)> {
            let mut rng = rng_for(cfg.seed, &format!("bootstrap:{i}"));
            match &fixed_models {
                Some((ma, mb)) => {
                    let idx = draw(&mut rng, test_m.n_rows());
                    Ok((accuracy(ma, &test_a.select_rows(&idx))?, accuracy(mb, &test_b.select_rows(&idx))?))
                }
                None => {
                    let mut idx = draw(&mut rng, train_m.n_rows());
                    let mut redraws = 0;
                    while train_a.select_rows(&idx).class_counts().contains(&0) {
                        if redraws == cfg.max_redraws {
                            return Err(Error::DegenerateLabels(format!(
                                "bootstrap sample {i} lacks a class after {redraws} redraws"
                            )));
                        }
                        idx = draw(&mut rng, train_m.n_rows());
                        redraws += 1;
                    }
                    let ma = train(&train_a.select_rows(&idx), &cfg.hyperparams)?;
                    let mb = train(&train_b.select_rows(&idx), &cfg.hyperparams)?;
                    Ok((accuracy(&ma, &test_a)?, accuracy(&mb, &test_b)?))
                }
            }
        })
        .collect::<Result<_>>()?;

    let (acc_combo, acc_static): (Vec<T>, Vec<T>) = pairs.into_iter().unzip();
    let t = match cfg.test {
        TTestKind::Paired => paired_t_test(&acc_combo, &acc_static)?,
        TTestKind::Welch => welch_t_test(&acc_combo, &acc_static)?,
    };
    Ok(BootstrapResult {
        n_samples: cfg.n_samples,
        seed: cfg.seed,
        scheme: cfg.scheme,
        test: cfg.test,
        acc_combo,
        acc_static,
        mean_diff: t.mean_diff,
        t_statistic: t.t_statistic,
        p_value: t.p_value,
        no_difference: t.no_difference,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::document::EducationLevel;
    use crate::rng::{normal_f64, rng_from_seed};

    fn data(n: usize, seed: u64) -> DesignMatrix<f64> {
        let mut rng = rng_from_seed(seed);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            let k = i % 3;
            rows.push(vec![k as f64 + 0.2 * normal_f64(&mut rng), normal_f64(&mut rng)]);
            labels.push(EducationLevel::from_ordinal(k).unwrap());
        }
        DesignMatrix::new(vec!["signal".into(), "noise".into()], rows, labels).unwrap()
    }

    #[test]
    fn t_test_conventions() {
        let t = paired_t_test(&[0.5f64, 0.6, 0.7], &[0.5, 0.6, 0.7]).unwrap();
        assert!(t.no_difference);
        assert_eq!((t.t_statistic, t.p_value), (0.0, 1.0));
        let t = paired_t_test(&[1.0f64, 2.0, 3.0, 4.0], &[0.0, 2.0, 2.0, 3.5]).unwrap();
        // d = [1, 0, 1, 0.5]: mean 0.625, sd² = 0.2291666.., t = 0.625 / sqrt(0.2291666../4)
        assert!((t.t_statistic - 0.625 / (0.229_166_666_666_666_66f64 / 4.0).sqrt()).abs() < 1e-12);
        let w = welch_t_test(&[1.0f64, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(w.p_value, 1.0);
    }

    #[test]
    fn signal_beats_noise_and_is_deterministic() {
        let tr = data(90, 1);
        let te = data(45, 2);
        let cfg = BootstrapConfig {
            n_samples: 30,
            seed: 7,
            ..Default::default()
        };
        let r = bootstrap_compare(&tr, &te, &["signal", "noise"], &["noise"], &cfg).unwrap();
        assert!(r.mean_diff > 0.3);
        assert!(r.p_value < 0.05);
        let again = bootstrap_compare(&tr, &te, &["signal", "noise"], &["noise"], &cfg).unwrap();
        assert_eq!(serde_json::to_string(&r).unwrap(), serde_json::to_string(&again).unwrap());
    }

    #[test]
    fn identical_sets_report_no_difference() {
        let tr = data(60, 3);
        let te = data(30, 4);
        for scheme in [ResampleScheme::Train, ResampleScheme::Test] {
            let cfg = BootstrapConfig {
                n_samples: 10,
                scheme,
                ..Default::default()
            };
            let r = bootstrap_compare(&tr, &te, &["noise"], &["noise"], &cfg).unwrap();
            assert_eq!(r.mean_diff, 0.0);
            assert!(r.no_difference);
        }
    }
}
