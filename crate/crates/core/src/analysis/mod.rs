//! Univariate F-test feature ranking and bootstrap model comparison.

mod bootstrap;
pub mod special;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub use bootstrap::{
    bootstrap_compare, paired_t_test, welch_t_test, BootstrapConfig, BootstrapResult, ResampleScheme, TTest, TTestKind,
};

use crate::classifier::DesignMatrix;
use crate::document::EducationLevel;
use crate::error::{Error, Result};
use crate::prompt_metrics::PromptTemplate;
use crate::report::format_g12;
use crate::scalar::Scalar;

/// One-way ANOVA outcome for one column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FTest<T> {
    /// `T::max_value()` when `infinite`.
    pub f: T,
    pub p_value: T,
    /// Zero within-group and nonzero between-group variance.
    pub infinite: bool,
}

/// One-way ANOVA F statistic of `column` grouped by `labels`, over the
/// classes present. Constant columns give `F = 0, p = 1`.
pub fn f_classif<T: Scalar>(column: &[T], labels: &[EducationLevel]) -> Result<FTest<T>> {
    if column.len() != labels.len() {
        return Err(Error::Shape {
            expected: labels.len(),
            got: column.len(),
        });
    }
    let k = EducationLevel::COUNT;
    let mut sums = vec![T::zero(); k];
    let mut counts = vec![0usize; k];
    for (&x, l) in column.iter().zip(labels) {
        sums[l.ordinal()] = sums[l.ordinal()] + x;
        counts[l.ordinal()] += 1;
    }
    let classes = counts.iter().filter(|&&c| c > 0).count();
    if classes < 2 {
        return Err(Error::DegenerateLabels("F-test needs at least two classes".into()));
    }
    let n = column.len();
    if n <= classes {
        return Err(Error::DegenerateInput(format!(
            "F-test needs more rows ({n}) than classes ({classes})"
        )));
    }
    if column.windows(2).all(|w| w[0] == w[1]) {
        return Ok(FTest {
            f: T::zero(),
            p_value: T::one(),
            infinite: false,
        });
    }
    let grand = column.iter().copied().sum::<T>() / T::from_count(n);
    let means: Vec<T> = sums
        .iter()
        .zip(&counts)
        .map(|(&s, &c)| if c > 0 { s / T::from_count(c) } else { T::zero() })
        .collect();
    let ssb = means
        .iter()
        .zip(&counts)
        .map(|(&m, &c)| T::from_count(c) * (m - grand) * (m - grand))
        .sum::<T>();
    let ssw = column
        .iter()
        .zip(labels)
        .map(|(&x, l)| {
            let d = x - means[l.ordinal()];
            d * d
        })
        .sum::<T>();
    let df_b = T::from_count(classes - 1);
    let df_w = T::from_count(n - classes);
    if ssw == T::zero() {
        return Ok(if ssb > T::zero() {
            FTest {
                f: T::max_value(),
                p_value: T::zero(),
                infinite: true,
            }
        } else {
            FTest {
                f: T::zero(),
                p_value: T::one(),
                infinite: false,
            }
        });
    }
    let f = (ssb / df_b) / (ssw / df_w);
    Ok(FTest {
        f,
        p_value: special::f_survival(f, df_b, df_w),
        infinite: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedFeature<T> {
    /// 1-based.
    pub rank: usize,
    pub name: String,
    pub f: T,
    pub p_value: T,
    pub infinite: bool,
}

/// Features by descending F; ties broken by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FRanking<T> {
    pub entries: Vec<RankedFeature<T>>,
}

pub fn rank_features<T: Scalar>(matrix: &DesignMatrix<T>) -> Result<FRanking<T>> {
    let mut scored = Vec::with_capacity(matrix.n_cols());
    for (j, name) in matrix.feature_names().iter().enumerate() {
        let t = f_classif(&matrix.column(j), matrix.labels())?;
        scored.push((name.clone(), t));
    }
    scored.sort_by(|a, b| {
        b.1.f
            .partial_cmp(&a.1.f)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.0.cmp(&b.0))
    });
    Ok(FRanking {
        entries: scored
            .into_iter()
            .enumerate()
            .map(|(i, (name, t))| RankedFeature {
                rank: i + 1,
                name,
                f: t.f,
                p_value: t.p_value,
                infinite: t.infinite,
            })
            .collect(),
    })
}

impl<T: Scalar> FRanking<T> {
    /// Names of the `k` best features (all of them when `k ≥ d`).
    pub fn top_k(&self, k: usize) -> Vec<&str> {
        self.entries.iter().take(k).map(|e| e.name.as_str()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&RankedFeature<T>> {
        self.entries.iter().find(|e| e.name == name)
    }

    /// `rank,feature,F,p`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("rank,feature,F,p\n");
        for e in &self.entries {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                e.rank,
                e.name,
                format_g12(e.f.as_f64()),
                format_g12(e.p_value.as_f64())
            );
        }
        s
    }

    /// Two blocks: the best `k` prompt metrics (shown with their question
    /// text when known) and the best `k` static metrics.
    pub fn to_table(&self, k: usize, templates: &[PromptTemplate]) -> String {
        let mut s = String::new();
        let blocks: [(&str, fn(&str) -> bool); 2] = [
            ("Prompt-based", |n: &str| n.starts_with("pm_")),
            ("Static", |n: &str| !n.starts_with("pm_")),
        ];
        for (title, member) in blocks {
            let _ = writeln!(s, "{title}");
            let _ = writeln!(s, "{:<4} {:<60} {:>10}", "rank", "metric", "F");
            for e in self.entries.iter().filter(|e| member(&e.name)).take(k) {
                let label = templates
                    .iter()
                    .find(|t| t.id == e.name)
                    .map_or(e.name.clone(), |t| format!("{} ({})", t.text, t.id));
                let f = if e.infinite { "inf".to_string() } else { format!("{:.2}", e.f.as_f64()) };
                let _ = writeln!(s, "{:<4} {:<60} {:>10}", e.rank, label, f);
            }
            s.push('\n');
        }
        s
    }
}
