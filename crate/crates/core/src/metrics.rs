//! Accuracy, confusion matrices and information transfer rate.

use serde::{Deserialize, Serialize};

use crate::error::MetricsError;
use crate::num::Scalar;
use crate::signal::{StimulusClass, N_CLASSES};

/// Information carried by one selection among `n` choices at accuracy `p`:
///
/// `B = log2(N) + P·log2(P) + (1−P)·log2((1−P)/(N−1))`, with `0·log2(0) = 0`.
///
/// Evaluated in the equivalent divergence form
/// `P·log2(P·N) + (1−P)·log2((N − P·N)/(N−1))` so that chance level lands on
/// exactly zero for the common case; the result is clamped at zero, which the
/// closed form never goes below.
pub fn bits_per_trial<T: Scalar>(n: usize, p: T) -> Result<T, MetricsError> {
    if n < 2 {
        return Err(MetricsError::Parameter(format!(
            "number of selections must be >= 2, got {n}"
        )));
    }
    if !(p >= T::zero() && p <= T::one()) {
        return Err(MetricsError::Parameter(format!("accuracy must lie in [0, 1], got {p}")));
    }
    let n_t = T::from_usize(n).unwrap();
    let pn = p * n_t;
    let hit = if p > T::zero() { p * pn.log2() } else { T::zero() };
    let miss_p = T::one() - p;
    let miss = if miss_p > T::zero() {
        miss_p * ((n_t - pn) / (n_t - T::one())).log2()
    } else {
        T::zero()
    };
    Ok((hit + miss).max(T::zero()))
}

/// Bits per minute: `ITR = B / T`.
pub fn itr_bpm<T: Scalar>(bits: T, t_minutes: T) -> Result<T, MetricsError> {
    if !(t_minutes > T::zero()) || !t_minutes.is_finite() {
        return Err(MetricsError::Parameter(format!(
            "time per trial must be > 0 minutes, got {t_minutes}"
        )));
    }
    Ok(bits / t_minutes)
}

/// Rows are the true class, columns the prediction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; N_CLASSES]; N_CLASSES],
}

impl ConfusionMatrix {
    pub fn from_pairs<I>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (StimulusClass, StimulusClass)>,
    {
        let mut m = Self::default();
        for (truth, predicted) in pairs {
            m.record(truth, predicted);
        }
        m
    }

    pub fn record(&mut self, truth: StimulusClass, predicted: StimulusClass) {
        self.counts[truth.index()][predicted.index()] += 1;
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        for (row, other_row) in self.counts.iter_mut().zip(&other.counts) {
            for (c, o) in row.iter_mut().zip(other_row) {
                *c += o;
            }
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn row_sums(&self) -> [u64; N_CLASSES] {
        self.counts.map(|row| row.iter().sum())
    }

    pub fn trace(&self) -> u64 {
        (0..N_CLASSES).map(|i| self.counts[i][i]).sum()
    }

    /// `trace / total`; zero for an empty matrix.
    pub fn accuracy(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            t => self.trace() as f64 / t as f64,
        }
    }

    /// Per-class recall, `None` for classes with no trials.
    pub fn recall(&self, class: StimulusClass) -> Option<f64> {
        let i = class.index();
        let row: u64 = self.counts[i].iter().sum();
        (row > 0).then(|| self.counts[i][i] as f64 / row as f64)
    }
}

/// Mean and sample standard deviation (n − 1); std is 0 for fewer than two values.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Evaluation summary written as `cv_report.json` and printed by `metrics`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub label: String,
    /// Held-out accuracy per fold or per experiment.
    pub fold_accuracies: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    /// Bits per trial at the mean accuracy.
    #[serde(rename = "B")]
    pub bits: f64,
    #[serde(rename = "T_seconds")]
    pub t_seconds: f64,
    pub itr_bpm: f64,
    pub confusion: [[u64; N_CLASSES]; N_CLASSES],
}

impl MetricsReport {
    pub fn new(
        label: impl Into<String>,
        fold_accuracies: Vec<f64>,
        t_seconds: f64,
        confusion: ConfusionMatrix,
    ) -> Result<Self, MetricsError> {
        let (mean, std) = mean_std(&fold_accuracies);
        let bits = bits_per_trial(N_CLASSES, mean.clamp(0.0, 1.0))?;
        let itr = itr_bpm(bits, t_seconds / 60.0)?;
        Ok(Self {
            label: label.into(),
            fold_accuracies,
            mean,
            std,
            bits,
            t_seconds,
            itr_bpm: itr,
            confusion: confusion.counts,
        })
    }

    /// Plain-text table.
    pub fn to_table(&self) -> String {
        let mut out = format!("== {} ==\n", self.label);
        for (i, a) in self.fold_accuracies.iter().enumerate() {
            out.push_str(&format!("  run {:>2}        {:>8.4}\n", i + 1, a));
        }
        out.push_str(&format!("  accuracy      {:>8.4} ± {:.4}\n", self.mean, self.std));
        out.push_str(&format!("  B (bits)      {:>8.4}\n", self.bits));
        out.push_str(&format!("  T (s)         {:>8.4}\n", self.t_seconds));
        out.push_str(&format!("  ITR (bpm)     {:>8.3}\n", self.itr_bpm));
        out.push_str("  confusion (rows true 10/12/15 Hz, cols predicted)\n");
        for row in &self.confusion {
            out.push_str(&format!("    {:>6} {:>6} {:>6}\n", row[0], row[1], row[2]));
        }
        out
    }
}
