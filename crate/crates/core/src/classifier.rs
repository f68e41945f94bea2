//! Three-class softmax regression over a named feature matrix.
//!
//! Training minimizes
//!
//! ```text
//! L(W) = (1/n) Σ_i −log softmax(W·[1; x_i])_{y_i} + λ·Σ_k Σ_{j≥1} W_kj²
//! ```
//!
//! over standardized inputs by full-batch gradient descent. Each step starts
//! from a Barzilai-Borwein step length and halves it until the Armijo
//! condition `L(W − αg) ≤ L(W) − 1e-4·α·‖g‖²` holds, so accepted losses never
//! increase. Weights start at zero; training is deterministic.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::document::EducationLevel;
use crate::error::{Error, Result};
use crate::prompt_metrics::N_PROMPT;
use crate::report::FeatureTable;
use crate::scalar::Scalar;
use crate::static_metrics::STATIC_FEATURE_NAMES;

const K: usize = EducationLevel::COUNT;

/// Which columns a model sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureSet {
    Static,
    Prompt,
    Combo,
}

impl FeatureSet {
    pub const ALL: [FeatureSet; 3] = [Self::Static, Self::Prompt, Self::Combo];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Static => "static",
            Self::Prompt => "prompt",
            Self::Combo => "combo",
        }
    }

    /// Static columns are the 46 static names; prompt columns are `pm_*`.
    pub fn includes(self, name: &str) -> bool {
        let is_static = STATIC_FEATURE_NAMES.contains(&name);
        let is_prompt = name.starts_with("pm_");
        match self {
            Self::Static => is_static,
            Self::Prompt => is_prompt,
            Self::Combo => is_static || is_prompt,
        }
    }

    /// Expected width on a full matrix.
    pub fn width(self) -> usize {
        match self {
            Self::Static => STATIC_FEATURE_NAMES.len(),
            Self::Prompt => N_PROMPT,
            Self::Combo => STATIC_FEATURE_NAMES.len() + N_PROMPT,
        }
    }
}

impl std::str::FromStr for FeatureSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "static" => Ok(Self::Static),
            "prompt" => Ok(Self::Prompt),
            "combo" => Ok(Self::Combo),
            other => Err(Error::Config(format!("unknown feature set '{other}'"))),
        }
    }
}

impl std::fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Row-major `n × d` matrix with names and labels.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix<T> {
    n: usize,
    d: usize,
    data: Vec<T>,
    feature_names: Vec<String>,
    labels: Vec<EducationLevel>,
    doc_ids: Vec<String>,
}

impl<T: Scalar> DesignMatrix<T> {
    pub fn new(feature_names: Vec<String>, rows: Vec<Vec<T>>, labels: Vec<EducationLevel>) -> Result<Self> {
        let doc_ids = (0..rows.len()).map(|i| i.to_string()).collect();
        Self::with_ids(feature_names, rows, labels, doc_ids)
    }

    pub fn with_ids(
        feature_names: Vec<String>,
        rows: Vec<Vec<T>>,
        labels: Vec<EducationLevel>,
        doc_ids: Vec<String>,
    ) -> Result<Self> {
        let d = feature_names.len();
        if labels.len() != rows.len() || doc_ids.len() != rows.len() {
            return Err(Error::Shape {
                expected: rows.len(),
                got: labels.len().min(doc_ids.len()),
            });
        }
        let unique: HashSet<&String> = feature_names.iter().collect();
        if unique.len() != d {
            return Err(Error::Config("feature names are not unique".into()));
        }
        let mut data = Vec::with_capacity(rows.len() * d);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != d {
                return Err(Error::Shape { expected: d, got: r.len() });
            }
            if let Some(j) = r.iter().position(|v| !v.is_finite()) {
                return Err(Error::DegenerateInput(format!(
                    "non-finite value in row {} column '{}'",
                    doc_ids[i], feature_names[j]
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            n: rows.len(),
            d,
            data,
            feature_names,
            labels,
            doc_ids,
        })
    }

    /// Every row needs a level.
    pub fn from_table(table: &FeatureTable) -> Result<Self> {
        let mut rows = Vec::with_capacity(table.len());
        let mut labels = Vec::with_capacity(table.len());
        let mut ids = Vec::with_capacity(table.len());
        for r in &table.rows {
            labels.push(r.level.ok_or_else(|| Error::Format {
                record: r.doc_id.clone(),
                message: "row has no level".into(),
            })?);
            rows.push(r.values.iter().map(|&v| T::lit(v)).collect());
            ids.push(r.doc_id.clone());
        }
        Self::with_ids(table.names.clone(), rows, labels, ids)
    }

    pub fn n_rows(&self) -> usize {
        self.n
    }

    pub fn n_cols(&self) -> usize {
        self.d
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn labels(&self) -> &[EducationLevel] {
        &self.labels
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.n).map(|i| self.data[i * self.d + j]).collect()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }

    /// Columns by name, in the given order.
    pub fn select_columns<S: AsRef<str>>(&self, names: &[S]) -> Result<Self> {
        let idx = names
            .iter()
            .map(|n| {
                self.column_index(n.as_ref())
                    .ok_or_else(|| Error::Config(format!("no column named '{}'", n.as_ref())))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut data = Vec::with_capacity(self.n * idx.len());
        for i in 0..self.n {
            let r = self.row(i);
            data.extend(idx.iter().map(|&j| r[j]));
        }
        Ok(Self {
            n: self.n,
            d: idx.len(),
            data,
            feature_names: names.iter().map(|n| n.as_ref().to_string()).collect(),
            labels: self.labels.clone(),
            doc_ids: self.doc_ids.clone(),
        })
    }

    pub fn feature_set(&self, set: FeatureSet) -> Result<Self> {
        let names: Vec<String> = self
            .feature_names
            .iter()
            .filter(|n| set.includes(n))
            .cloned()
            .collect();
        if names.is_empty() {
            return Err(Error::Config(format!("matrix has no {set} columns")));
        }
        self.select_columns(&names)
    }

    /// Rows by index; repeats allowed.
    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.d);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Self {
            n: idx.len(),
            d: self.d,
            data,
            feature_names: self.feature_names.clone(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            doc_ids: idx.iter().map(|&i| self.doc_ids[i].clone()).collect(),
        }
    }

    pub fn class_counts(&self) -> [usize; K] {
        let mut c = [0; K];
        for l in &self.labels {
            c[l.ordinal()] += 1;
        }
        c
    }
}

/// Per-column affine map fitted on training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer<T> {
    pub means: Vec<T>,
    /// Population standard deviations; 1 for constant columns.
    pub stds: Vec<T>,
    pub constant: Vec<bool>,
}

impl<T: Scalar> Standardizer<T> {
    pub fn fit(m: &DesignMatrix<T>) -> Self {
        let n = T::from_count(m.n.max(1));
        let mut means = Vec::with_capacity(m.d);
        let mut stds = Vec::with_capacity(m.d);
        let mut constant = Vec::with_capacity(m.d);
        for j in 0..m.d {
            let col = m.column(j);
            let mean = col.iter().copied().sum::<T>() / n;
            let is_const = col.windows(2).all(|w| w[0] == w[1]);
            let var = col.iter().map(|&x| (x - mean) * (x - mean)).sum::<T>() / n;
            let std = var.sqrt();
            let usable = !is_const && std > T::zero() && std.is_finite();
            means.push(mean);
            stds.push(if usable { std } else { T::one() });
            constant.push(!usable);
        }
        Self { means, stds, constant }
    }

    pub fn apply_row(&self, x: &[T]) -> Vec<T> {
        x.iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(&v, (&m, &s))| (v - m) / s)
            .collect()
    }

    pub fn apply(&self, m: &DesignMatrix<T>) -> DesignMatrix<T> {
        let mut out = m.clone();
        for i in 0..m.n {
            let z = self.apply_row(m.row(i));
            out.data[i * m.d..(i + 1) * m.d].copy_from_slice(&z);
        }
        out
    }
}

/// Returns the standardized matrix with the fitted means and stds.
pub fn standardize<T: Scalar>(m: &DesignMatrix<T>) -> (DesignMatrix<T>, Vec<T>, Vec<T>) {
    let s = Standardizer::fit(m);
    (s.apply(m), s.means, s.stds)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
#[serde(bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct Hyperparams<T> {
    /// `None` means `1/n`.
    pub l2_lambda: Option<T>,
    pub max_iters: usize,
    /// Stop when every gradient component is below this in magnitude.
    pub tolerance: T,
    pub seed: u64,
}

impl<T: Scalar> Default for Hyperparams<T> {
    fn default() -> Self {
        Self {
            l2_lambda: None,
            max_iters: 2000,
            tolerance: T::lit(1e-6),
            seed: 0,
        }
    }
}

/// Max-shifted softmax.
pub fn softmax<T: Scalar>(scores: [T; K]) -> [T; K] {
    let m = scores.iter().copied().fold(T::neg_infinity(), T::max);
    let e = scores.map(|s| (s - m).exp());
    let z = e.iter().copied().sum::<T>();
    e.map(|v| v / z)
}

/// First index of the maximum.
pub fn argmax<T: Scalar>(p: &[T; K]) -> EducationLevel {
    let mut best = 0;
    for k in 1..K {
        if p[k] > p[best] {
            best = k;
        }
    }
    EducationLevel::from_ordinal(best).expect("index within three classes")
}

fn scores<T: Scalar>(w: &[T], x: &[T]) -> [T; K] {
    let stride = x.len() + 1;
    std::array::from_fn(|k| {
        let row = &w[k * stride..(k + 1) * stride];
        row[0] + row[1..].iter().zip(x).map(|(&a, &b)| a * b).sum::<T>()
    })
}

/// Regularized cross-entropy over a standardized matrix.
pub struct Objective<'a, T> {
    pub x: &'a DesignMatrix<T>,
    pub lambda: T,
}

impl<'a, T: Scalar> Objective<'a, T> {
    pub fn n_params(&self) -> usize {
        K * (self.x.d + 1)
    }

    fn penalty(&self, w: &[T]) -> T {
        let stride = self.x.d + 1;
        self.lambda
            * (0..K)
                .map(|k| w[k * stride + 1..(k + 1) * stride].iter().map(|&v| v * v).sum::<T>())
                .sum::<T>()
    }

    pub fn loss(&self, w: &[T]) -> T {
        let mut total = T::zero();
        for i in 0..self.x.n {
            let s = scores(w, self.x.row(i));
            let m = s.iter().copied().fold(T::neg_infinity(), T::max);
            let lse = m + s.iter().map(|&v| (v - m).exp()).sum::<T>().ln();
            total = total + lse - s[self.x.labels[i].ordinal()];
        }
        total / T::from_count(self.x.n) + self.penalty(w)
    }

    pub fn loss_and_gradient(&self, w: &[T]) -> (T, Vec<T>) {
        let d = self.x.d;
        let stride = d + 1;
        let n = T::from_count(self.x.n);
        let mut g = vec![T::zero(); self.n_params()];
        let mut total = T::zero();
        for i in 0..self.x.n {
            let x = self.x.row(i);
            let s = scores(w, x);
            let m = s.iter().copied().fold(T::neg_infinity(), T::max);
            let lse = m + s.iter().map(|&v| (v - m).exp()).sum::<T>().ln();
            let y = self.x.labels[i].ordinal();
            total = total + lse - s[y];
            for k in 0..K {
                let mut r = (s[k] - lse).exp();
                if k == y {
                    r = r - T::one();
                }
                let gk = &mut g[k * stride..(k + 1) * stride];
                gk[0] = gk[0] + r;
                for (gj, &xj) in gk[1..].iter_mut().zip(x) {
                    *gj = *gj + r * xj;
                }
            }
        }
        let two = T::lit(2.0);
        for k in 0..K {
            for j in 0..stride {
                let idx = k * stride + j;
                g[idx] = g[idx] / n;
                if j > 0 {
                    g[idx] = g[idx] + two * self.lambda * w[idx];
                }
            }
        }
        (total / n + self.penalty(w), g)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct TrainingSummary<T> {
    pub n_train: usize,
    pub iterations: usize,
    pub converged: bool,
    pub final_loss: T,
    pub l2_lambda: T,
    /// Loss before the first step and after every accepted step.
    #[serde(skip)]
    pub loss_history: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct DifficultyModel<T> {
    pub feature_names: Vec<String>,
    pub means: Vec<T>,
    pub stds: Vec<T>,
    pub constant_columns: Vec<bool>,
    /// `3 × (d + 1)` row-major; column 0 is the bias.
    pub weights: Vec<T>,
    pub hyperparams: Hyperparams<T>,
    pub metadata: TrainingSummary<T>,
}

fn max_abs<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

/// Fits a model. Every class must appear in the labels.
pub fn train<T: Scalar>(matrix: &DesignMatrix<T>, hp: &Hyperparams<T>) -> Result<DifficultyModel<T>> {
    let counts = matrix.class_counts();
    if let Some(k) = counts.iter().position(|&c| c == 0) {
        let level = EducationLevel::from_ordinal(k).expect("class index");
        return Err(Error::DegenerateLabels(format!("no training rows labelled {level}")));
    }
    let scaler = Standardizer::fit(matrix);
    let z = scaler.apply(matrix);
    let lambda = hp.l2_lambda.unwrap_or_else(|| T::one() / T::from_count(matrix.n));
    let obj = Objective { x: &z, lambda };

    let armijo = T::lit(1e-4);
    let half = T::lit(0.5);
    let min_step = T::lit(1e-30);
    let mut w = vec![T::zero(); obj.n_params()];
    let (mut loss, mut g) = obj.loss_and_gradient(&w);
    let mut history = vec![loss];
    let mut step = T::one();
    let mut prev: Option<(Vec<T>, Vec<T>)> = None;
    let mut iterations = 0;
    let mut converged = max_abs(&g) < hp.tolerance;

    while !converged && iterations < hp.max_iters {
        if let Some((w_prev, g_prev)) = &prev {
            // Barzilai-Borwein: s·s / s·y
            let (mut ss, mut sy) = (T::zero(), T::zero());
            for i in 0..w.len() {
                let s = w[i] - w_prev[i];
                let y = g[i] - g_prev[i];
                ss = ss + s * s;
                sy = sy + s * y;
            }
            if sy > T::zero() && (ss / sy).is_finite() {
                step = ss / sy;
            }
        }
        let g_sq = g.iter().map(|&v| v * v).sum::<T>();
        let mut trial;
        loop {
            trial = w.iter().zip(&g).map(|(&wi, &gi)| wi - step * gi).collect::<Vec<_>>();
            let l = obj.loss(&trial);
            if l.is_finite() && l <= loss - armijo * step * g_sq {
                break;
            }
            step = step * half;
            if step < min_step {
                break;
            }
        }
        if step < min_step {
            break;
        }
        prev = Some((std::mem::replace(&mut w, trial), g));
        let (l, gn) = obj.loss_and_gradient(&w);
        loss = l;
        g = gn;
        history.push(loss);
        iterations += 1;
        converged = max_abs(&g) < hp.tolerance;
    }

    Ok(DifficultyModel {
        feature_names: matrix.feature_names.clone(),
        means: scaler.means,
        stds: scaler.stds,
        constant_columns: scaler.constant,
        weights: w,
        hyperparams: hp.clone(),
        metadata: TrainingSummary {
            n_train: matrix.n,
            iterations,
            converged,
            final_loss: loss,
            l2_lambda: lambda,
            loss_history: history,
        },
    })
}

impl<T: Scalar> DifficultyModel<T> {
    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// Weight of class `k` on standardized feature `j` (bias excluded).
    pub fn weight(&self, k: usize, j: usize) -> T {
        self.weights[k * (self.n_features() + 1) + 1 + j]
    }

    fn check_width(&self, got: usize) -> Result<()> {
        if got != self.n_features() {
            return Err(Error::Shape {
                expected: self.n_features(),
                got,
            });
        }
        Ok(())
    }

    /// Class probabilities for one raw (unstandardized) row.
    pub fn predict_proba(&self, x: &[T]) -> Result<[T; K]> {
        self.check_width(x.len())?;
        let z: Vec<T> = x
            .iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(&v, (&m, &s))| (v - m) / s)
            .collect();
        Ok(softmax(scores(&self.weights, &z)))
    }

    /// Ties go to the lowest ordinal.
    pub fn predict(&self, x: &[T]) -> Result<EducationLevel> {
        Ok(argmax(&self.predict_proba(x)?))
    }

    /// Predictions for a matrix whose columns include the model's features.
    pub fn predict_matrix(&self, m: &DesignMatrix<T>) -> Result<Vec<EducationLevel>> {
        let aligned;
        let m = if m.feature_names == self.feature_names {
            m
        } else {
            aligned = m.select_columns(&self.feature_names)?;
            &aligned
        };
        (0..m.n).map(|i| self.predict(m.row(i))).collect()
    }

    pub fn evaluate(&self, test: &DesignMatrix<T>) -> Result<EvalReport<T>> {
        let pred = self.predict_matrix(test)?;
        Ok(EvalReport::from_predictions(test.labels(), &pred))
    }

    pub fn save(&self, path: &Path) -> Result<()>
    where
        T: Serialize,
    {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self>
    where
        T: for<'de> Deserialize<'de>,
    {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let model: Self = serde_json::from_str(&text)?;
        let d = model.feature_names.len();
        if model.means.len() != d || model.stds.len() != d || model.weights.len() != K * (d + 1) {
            return Err(Error::Shape {
                expected: K * (d + 1),
                got: model.weights.len(),
            });
        }
        Ok(model)
    }
}

/// Confusion matrix and per-class scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport<T> {
    /// `confusion[true][predicted]`.
    pub confusion: [[usize; K]; K],
    pub precision: [T; K],
    pub recall: [T; K],
    pub f1: [T; K],
    pub macro_f1: T,
    pub accuracy: T,
    pub n: usize,
    /// Share of unparseable LLM answers, for baseline runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub invalid_rate: Option<T>,
}

fn ratio<T: Scalar>(num: usize, den: usize) -> T {
    if den == 0 {
        T::zero()
    } else {
        T::from_count(num) / T::from_count(den)
    }
}

impl<T: Scalar> EvalReport<T> {
    pub fn from_predictions(truth: &[EducationLevel], pred: &[EducationLevel]) -> Self {
        assert_eq!(truth.len(), pred.len(), "one prediction per label");
        let mut confusion = [[0usize; K]; K];
        for (t, p) in truth.iter().zip(pred) {
            confusion[t.ordinal()][p.ordinal()] += 1;
        }
        Self::from_confusion(confusion)
    }

    pub fn from_confusion(confusion: [[usize; K]; K]) -> Self {
        let n: usize = confusion.iter().flatten().sum();
        let tp: [usize; K] = std::array::from_fn(|k| confusion[k][k]);
        let predicted: [usize; K] = std::array::from_fn(|k| (0..K).map(|t| confusion[t][k]).sum());
        let actual: [usize; K] = std::array::from_fn(|k| confusion[k].iter().sum());
        let precision: [T; K] = std::array::from_fn(|k| ratio(tp[k], predicted[k]));
        let recall: [T; K] = std::array::from_fn(|k| ratio(tp[k], actual[k]));
        let f1: [T; K] = std::array::from_fn(|k| {
            let s = precision[k] + recall[k];
            if s == T::zero() {
                T::zero()
            } else {
                T::lit(2.0) * precision[k] * recall[k] / s
            }
        });
        let macro_f1 = f1.iter().copied().sum::<T>() / T::from_count(K);
        Self {
            confusion,
            precision,
            recall,
            f1,
            macro_f1,
            accuracy: ratio(tp.iter().sum(), n),
            n,
            invalid_rate: None,
        }
    }

    /// Per-level precision, recall and F1 followed by macro-F1 and accuracy.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<12} {:>9} {:>9} {:>9}", "level", "precision", "recall", "f1");
        for level in EducationLevel::ALL {
            let k = level.ordinal();
            let _ = writeln!(
                s,
                "{:<12} {:>9.2} {:>9.2} {:>9.2}",
                level.as_str(),
                self.precision[k].as_f64(),
                self.recall[k].as_f64(),
                self.f1[k].as_f64()
            );
        }
        let _ = writeln!(s, "{:<12} {:>29.2}", "macro-F1", self.macro_f1.as_f64());
        let _ = writeln!(s, "{:<12} {:>29.2}", "accuracy", self.accuracy.as_f64());
        if let Some(r) = self.invalid_rate {
            let _ = writeln!(s, "{:<12} {:>28.2}%", "invalid", 100.0 * r.as_f64());
        }
        s
    }
}
