//! Offline calibration: synthetic (or replayed) trials → filter → fit → CV.

use std::fs;
use std::path::Path;
use std::time::Instant;

use crate::error::{Error, ModelError};
use crate::metrics::MetricsReport;
use crate::scu::{cross_validate, fit, save_model, CvReport, ScuHyperparams, ScuModel};
use crate::signal::{
    apply_filter, design_bandpass, generate_dataset, save_dataset, FilterSpec, SsvepDataset, EPOCH_SECONDS,
    SAMPLE_RATE_HZ,
};

use super::VirtualSubject;

pub const DATASET_FILE: &str = "dataset.ssvep";
pub const MODEL_FILE: &str = "model.scu";
pub const CV_REPORT_FILE: &str = "cv_report.json";

pub const BAND_LOW_HZ: f64 = 9.0;
pub const BAND_HIGH_HZ: f64 = 100.0;

/// The preprocessing bandpass shared by calibration and online decoding.
pub fn preprocessing_filter() -> FilterSpec<f32> {
    design_bandpass(BAND_LOW_HZ, BAND_HIGH_HZ, SAMPLE_RATE_HZ as f64).expect("fixed band is valid")
}

#[derive(Clone, Debug)]
pub struct CalibrationConfig {
    pub trials_per_class: usize,
    pub folds: usize,
    pub hyperparams: ScuHyperparams,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            trials_per_class: crate::signal::DEFAULT_TRIALS_PER_CLASS,
            folds: crate::scu::DEFAULT_FOLDS,
            hyperparams: ScuHyperparams::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Calibration {
    /// Raw, unfiltered trials as recorded.
    pub dataset: SsvepDataset<f32>,
    pub model: ScuModel<f32>,
    pub cv: CvReport,
    pub report: MetricsReport,
    pub final_train_accuracy: f64,
}

/// Generates the subject's calibration set and trains on it.
pub fn run_calibration(
    subject: &VirtualSubject,
    config: &CalibrationConfig,
    out_dir: Option<&Path>,
) -> Result<Calibration, Error> {
    subject.validate()?;
    let dataset = generate_dataset::<f32>(&subject.params, config.trials_per_class)?;
    calibrate_from_dataset(dataset, config, out_dir)
}

/// Trains and cross-validates on already recorded raw trials, e.g. a
/// replayed `SSVEP1` file.
pub fn calibrate_from_dataset(
    dataset: SsvepDataset<f32>,
    config: &CalibrationConfig,
    out_dir: Option<&Path>,
) -> Result<Calibration, Error> {
    config.hyperparams.validate()?;
    let filter = preprocessing_filter();
    let filtered = dataset.try_map(|e| apply_filter(&filter, e))?;
    let trained = fit(&filtered, &config.hyperparams)?;
    let cv = cross_validate(&filtered, &config.hyperparams, config.folds)?;
    let report = MetricsReport::new(
        "calibration",
        cv.fold_accuracies.clone(),
        EPOCH_SECONDS as f64 + cv.mean_decode_latency_s,
        cv.confusion,
    )?;
    let out = Calibration {
        dataset,
        model: trained.model,
        cv,
        report,
        final_train_accuracy: trained.final_train_accuracy,
    };
    if let Some(dir) = out_dir {
        persist(&out, dir)?;
    }
    Ok(out)
}

fn persist(cal: &Calibration, dir: &Path) -> Result<(), Error> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    save_dataset(&cal.dataset, &dir.join(DATASET_FILE))?;
    save_model(&cal.model, &dir.join(MODEL_FILE))?;
    let path = dir.join(CV_REPORT_FILE);
    let json = serde_json::to_string_pretty(&cal.report)?;
    fs::write(&path, json).map_err(|source| Error::Io { path, source })?;
    Ok(())
}

/// Filters one raw epoch and decodes it, returning the prediction and the
/// wall time spent on both.
pub(crate) fn decode(
    model: &ScuModel<f32>,
    filter: &FilterSpec<f32>,
    raw: &crate::signal::EegEpoch<f32>,
) -> Result<(crate::scu::Prediction<f32>, f64), Error> {
    let start = Instant::now();
    let filtered = apply_filter(filter, raw)?;
    let p = model.predict(&filtered)?;
    Ok((p, start.elapsed().as_secs_f64()))
}

pub(crate) fn require_trained(model: &ScuModel<f32>) -> Result<(), Error> {
    if !model.is_trained() {
        return Err(ModelError::Untrained.into());
    }
    model.check_shapes()?;
    Ok(())
}
