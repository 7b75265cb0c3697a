use serde::Serialize;

use crate::error::{Error, Result};

/// Square count matrix; rows are true labels, columns predictions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix<L> {
    pub labels: Vec<L>,
    pub counts: Vec<Vec<usize>>,
}

/// Builds the confusion matrix over the union of observed labels.
pub fn evaluate<L: Ord + Clone>(truth: &[L], preds: &[L]) -> Result<ConfusionMatrix<L>> {
    if truth.len() != preds.len() {
        return Err(Error::LengthMismatch { left: truth.len(), right: preds.len() });
    }
    if truth.is_empty() {
        return Err(Error::Empty("label list"));
    }
    let mut labels: Vec<L> = truth.iter().chain(preds).cloned().collect();
    labels.sort();
    labels.dedup();
    let k = labels.len();
    let mut counts = vec![vec![0usize; k]; k];
    for (t, p) in truth.iter().zip(preds) {
        let i = labels.binary_search(t).expect("label collected above");
        let j = labels.binary_search(p).expect("label collected above");
        counts[i][j] += 1;
    }
    Ok(ConfusionMatrix { labels, counts })
}

impl<L: Ord + Clone> ConfusionMatrix<L> {
    fn index(&self, label: &L) -> Option<usize> {
        self.labels.binary_search(label).ok()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> usize {
        (0..self.labels.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn accuracy(&self) -> f64 {
        self.correct() as f64 / self.total().max(1) as f64
    }

    /// Number of instances whose true label is `label`.
    pub fn support(&self, label: &L) -> usize {
        self.index(label).map_or(0, |i| self.counts[i].iter().sum())
    }

    fn predicted(&self, i: usize) -> usize {
        self.counts.iter().map(|row| row[i]).sum()
    }

    /// `None` when `label` never occurs in the truth.
    pub fn recall_of(&self, label: &L) -> Option<f64> {
        let i = self.index(label)?;
        let support: usize = self.counts[i].iter().sum();
        (support > 0).then(|| self.counts[i][i] as f64 / support as f64)
    }

    /// `None` when `label` is never predicted.
    pub fn precision_of(&self, label: &L) -> Option<f64> {
        let i = self.index(label)?;
        let predicted = self.predicted(i);
        (predicted > 0).then(|| self.counts[i][i] as f64 / predicted as f64)
    }

    fn truth_labels(&self) -> impl Iterator<Item = &L> {
        self.labels.iter().filter(|l| self.support(l) > 0)
    }

    /// Mean per-class recall over classes present in the truth.
    pub fn macro_recall(&self) -> f64 {
        let vals: Vec<f64> = self.truth_labels().filter_map(|l| self.recall_of(l)).collect();
        vals.iter().sum::<f64>() / vals.len().max(1) as f64
    }

    /// Mean per-class precision over classes present in the truth; a class
    /// that is never predicted contributes 0.
    pub fn macro_precision(&self) -> f64 {
        let vals: Vec<f64> = self.truth_labels().map(|l| self.precision_of(l).unwrap_or(0.0)).collect();
        vals.iter().sum::<f64>() / vals.len().max(1) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfusionSummary<L> {
    pub labels: Vec<L>,
    pub counts: Vec<Vec<usize>>,
    pub instances: usize,
    pub accuracy: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    /// Pooled over classes; equals accuracy for single-label predictions.
    pub micro_precision: f64,
    pub micro_recall: f64,
}

impl<L: Ord + Clone> ConfusionMatrix<L> {
    pub fn summary(&self) -> ConfusionSummary<L> {
        ConfusionSummary {
            labels: self.labels.clone(),
            counts: self.counts.clone(),
            instances: self.total(),
            accuracy: self.accuracy(),
            macro_precision: self.macro_precision(),
            macro_recall: self.macro_recall(),
            micro_precision: self.accuracy(),
            micro_recall: self.accuracy(),
        }
    }
}
