//! The SSVEP convolutional unit: a small 1D CNN decoding the fixated
//! stimulus frequency from a filtered 9-channel epoch.

mod cv;
mod hyper;
mod model;
mod persist;
mod train;

pub use cv::{cross_validate, stratified_folds, CvReport, DEFAULT_FOLDS};
pub use hyper::ScuHyperparams;
pub use model::{BatchStats, NormStats, ParamTensor, PassMode, ScuGradients, ScuModel, BN_EPS, BN_MOMENTUM};
pub use persist::{load_model, model_from_str, model_to_string, save_model, MODEL_HEADER};
pub use train::{
    class_from_probabilities, fit, fit_with_validation, Adam, EpochStats, Prediction, TrainReport,
    ADAM_BETA1, ADAM_BETA2, ADAM_EPS,
};
