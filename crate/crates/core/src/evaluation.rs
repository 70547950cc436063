//! Confusion matrices, per-class precision/recall/F1, accuracy and
//! stratified train/test splits.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("gold has {gold} labels but predictions have {pred}")]
    LengthMismatch { gold: usize, pred: usize },
    #[error("label `{0}` is not in the class list")]
    UnknownLabel(String),
    #[error("confusion matrix is empty")]
    EmptyMatrix,
    #[error("class `{class}` has {count} items; a split needs at least 2")]
    ClassTooSmall { class: String, count: usize },
    #[error("test fraction {0} is outside (0, 1)")]
    BadFraction(f64),
}

/// Rows are gold labels, columns are predictions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn from_counts(classes: Vec<String>, counts: Vec<Vec<u64>>) -> Self {
        assert!(counts.len() == classes.len() && counts.iter().all(|r| r.len() == classes.len()));
        Self { classes, counts }
    }

    pub fn index_of(&self, class: &str) -> Result<usize, EvalError> {
        self.classes
            .iter()
            .position(|c| c == class)
            .ok_or_else(|| EvalError::UnknownLabel(class.to_string()))
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.classes.len()).map(|i| self.counts[i][i]).sum()
    }

    /// Gold count of class `i`.
    pub fn support(&self, i: usize) -> u64 {
        self.counts[i].iter().sum()
    }

    pub fn transpose(&self) -> Self {
        let n = self.classes.len();
        let counts = (0..n)
            .map(|i| (0..n).map(|j| self.counts[j][i]).collect())
            .collect();
        Self {
            classes: self.classes.clone(),
            counts,
        }
    }
}

pub fn confusion<S: AsRef<str>, T: AsRef<str>>(
    classes: &[&str],
    gold: &[S],
    pred: &[T],
) -> Result<ConfusionMatrix, EvalError> {
    if gold.len() != pred.len() {
        return Err(EvalError::LengthMismatch {
            gold: gold.len(),
            pred: pred.len(),
        });
    }
    let n = classes.len();
    let mut cm = ConfusionMatrix {
        classes: classes.iter().map(|c| c.to_string()).collect(),
        counts: vec![vec![0; n]; n],
    };
    for (g, p) in gold.iter().zip(pred) {
        let gi = cm.index_of(g.as_ref())?;
        let pi = cm.index_of(p.as_ref())?;
        cm.counts[gi][pi] += 1;
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Zero denominators give 0 rather than NaN.
pub fn class_metrics(cm: &ConfusionMatrix, class: &str) -> Result<ClassMetrics, EvalError> {
    let i = cm.index_of(class)?;
    let tp = cm.counts[i][i];
    let predicted: u64 = cm.counts.iter().map(|r| r[i]).sum();
    let support = cm.support(i);
    let precision = ratio(tp, predicted);
    let recall = ratio(tp, support);
    // 2tp / (2tp + fp + fn): equal to the harmonic mean of P and R, with
    // one rounding step instead of several.
    let f1 = ratio(2 * tp, predicted + support);
    Ok(ClassMetrics {
        precision,
        recall,
        f1,
        support,
    })
}

pub fn accuracy(cm: &ConfusionMatrix) -> Result<f64, EvalError> {
    match cm.total() {
        0 => Err(EvalError::EmptyMatrix),
        total => Ok(cm.trace() as f64 / total as f64),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    /// Sorted item indices.
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Per class, `round(n * test_fraction)` items (at least 1, at most n - 1)
/// go to the test side, chosen by a seeded shuffle.
pub fn stratified_split<L: Ord + fmt::Display>(
    labels: &[L],
    test_fraction: f64,
    seed: u64,
) -> Result<Split, EvalError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(EvalError::BadFraction(test_fraction));
    }
    let mut by_class: BTreeMap<&L, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }
    if let Some((class, items)) = by_class.iter().find(|(_, v)| v.len() < 2) {
        return Err(EvalError::ClassTooSmall {
            class: class.to_string(),
            count: items.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut split = Split {
        train: Vec::new(),
        test: Vec::new(),
    };
    for (_, mut items) in by_class {
        let n = items.len();
        let k = ((n as f64 * test_fraction).round() as usize).clamp(1, n - 1);
        items.shuffle(&mut rng);
        split.test.extend_from_slice(&items[..k]);
        split.train.extend_from_slice(&items[k..]);
    }
    split.train.sort_unstable();
    split.test.sort_unstable();
    Ok(split)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitDescriptor {
    pub protocol: String,
    pub test_fraction: f64,
    pub seed: u64,
    pub train_size: usize,
    pub test_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelRow {
    pub label: String,
    #[serde(flatten)]
    pub metrics: ClassMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub task: String,
    pub rows: Vec<LabelRow>,
    pub accuracy: f64,
    pub dataset_fingerprint: String,
    pub split: SplitDescriptor,
    pub confusion: ConfusionMatrix,
}

impl EvalReport {
    pub fn new(
        task: impl Into<String>,
        cm: ConfusionMatrix,
        dataset_fingerprint: impl Into<String>,
        split: SplitDescriptor,
    ) -> Result<Self, EvalError> {
        let rows = cm
            .classes
            .iter()
            .map(|c| {
                Ok(LabelRow {
                    label: c.clone(),
                    metrics: class_metrics(&cm, c)?,
                })
            })
            .collect::<Result<_, EvalError>>()?;
        Ok(Self {
            task: task.into(),
            rows,
            accuracy: accuracy(&cm)?,
            dataset_fingerprint: dataset_fingerprint.into(),
            split,
            confusion: cm,
        })
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self
            .rows
            .iter()
            .map(|r| r.label.chars().count())
            .chain(["Accuracy".len()])
            .max()
            .unwrap_or(8)
            + 2;
        writeln!(f, "{}", self.task)?;
        writeln!(
            f,
            "{:<width$}{:>10}{:>10}{:>10}",
            "Label", "Precision", "Recall", "F1"
        )?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<width$}{:>10.3}{:>10.3}{:>10.3}",
                r.label, r.metrics.precision, r.metrics.recall, r.metrics.f1
            )?;
        }
        writeln!(f, "{:<width$}{:>10.3}", "Accuracy", self.accuracy)?;
        write!(
            f,
            "({} split, test fraction {}, seed {}, {} train / {} test)",
            self.split.protocol,
            self.split.test_fraction,
            self.split.seed,
            self.split.train_size,
            self.split.test_size
        )
    }
}

/// Unweighted mean of the reports' accuracies.
pub fn mean_accuracy(reports: &[EvalReport]) -> Option<f64> {
    (!reports.is_empty())
        .then(|| reports.iter().map(|r| r.accuracy).sum::<f64>() / reports.len() as f64)
}

/// All reports one after another, then the unweighted mean accuracy.
pub fn format_reports(reports: &[EvalReport]) -> String {
    let mut out = String::new();
    for r in reports {
        out.push_str(&r.to_string());
        out.push_str("\n\n");
    }
    if let Some(mean) = mean_accuracy(reports) {
        out.push_str(&format!(
            "Unweighted mean accuracy over {} classifiers: {mean:.3}\n",
            reports.len()
        ));
    }
    out
}
