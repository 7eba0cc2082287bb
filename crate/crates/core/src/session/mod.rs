//! Calibration, closed-loop experiments, trial logs and the operator console.

mod calibration;
mod console;
mod log;
mod online;
mod protocol;
mod subject;

pub use calibration::{
    calibrate_from_dataset, preprocessing_filter, run_calibration, Calibration, CalibrationConfig, BAND_HIGH_HZ,
    BAND_LOW_HZ, CV_REPORT_FILE, DATASET_FILE, MODEL_FILE,
};
pub use console::{ConsoleServer, ConsoleSession};
pub use log::{read_log, write_log, DisplayedStimulus, SessionSummary, StimulusTarget, TrialRecord};
pub use online::{
    experiments_report, run_experiments, run_online_experiment, session_log_path, ExperimentRunner, NavSession,
    OnlineConfig, SessionStatus, DEFAULT_TRIALS_PER_STEP,
};
pub use protocol::{
    ClientMessage, DecodeResult, DetectionView, Envelope, PoseView, SceneUpdate, ServerMessage, SummaryView,
};
pub use subject::{SubjectBehavior, VirtualSubject};
