//! Closed-loop experiments: present → fixate → generate → filter → decode → move.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::calibration::{decode, preprocessing_filter, require_trained};
use super::log::{write_log, DisplayedStimulus, SessionSummary, StimulusTarget, TrialRecord};
use super::VirtualSubject;
use crate::error::Error;
use crate::metrics::{ConfusionMatrix, MetricsReport};
use crate::scu::ScuModel;
use crate::signal::{derive_seed, generate_epoch, FilterSpec, StimulusClass, EPOCH_SECONDS};
use crate::simworld::{ArrowCommand, DetectorNoise, NavMode, NavState, Navigator, PlanStep, RobotPose, World};

/// Trial cap per plan step when none is configured.
pub const DEFAULT_TRIALS_PER_STEP: usize = 4;

/// Online trial indices start here (times the experiment number) so they
/// never coincide with calibration trials of the same subject.
const ONLINE_TRIAL_STRIDE: u64 = 1 << 32;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OnlineConfig {
    /// 1-based experiment number; also selects the trial index range.
    pub experiment: u32,
    /// Seed of the subject's fixation choices.
    pub seed: u64,
    pub detector: DetectorNoise,
    /// Defaults to `DEFAULT_TRIALS_PER_STEP` × plan length.
    pub max_trials: Option<usize>,
}

impl Default for OnlineConfig {
    fn default() -> Self {
        Self {
            experiment: 1,
            seed: 0,
            detector: DetectorNoise::exact(),
            max_trials: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SessionStatus {
    Running,
    Complete,
    Incomplete { reason: String },
}

/// Result of one closed-loop experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NavSession {
    pub experiment: u32,
    pub world: String,
    pub plan_id: String,
    pub status: SessionStatus,
    pub final_pose: RobotPose<f64>,
    pub final_state: NavState,
    /// Append-only, one record per trial.
    pub log: Vec<TrialRecord>,
    /// `None` when no trial ran.
    pub summary: Option<SessionSummary>,
}

impl NavSession {
    pub fn is_complete(&self) -> bool {
        self.status == SessionStatus::Complete
    }

    pub fn accuracy(&self) -> Option<f64> {
        self.summary.as_ref().map(|s| s.accuracy)
    }
}

/// Owns one experiment and advances it a trial at a time. Virtual subjects
/// call [`step_virtual`](Self::step_virtual); an operator console calls
/// [`run_trial`](Self::run_trial) with the fixated class.
#[derive(Clone, Debug)]
pub struct ExperimentRunner {
    world: World,
    model: Arc<ScuModel<f32>>,
    filter: FilterSpec<f32>,
    subject: VirtualSubject,
    nav: Navigator,
    plan_pos: usize,
    experiment: u32,
    max_trials: usize,
    log: Vec<TrialRecord>,
    status: SessionStatus,
    choices: ChaCha8Rng,
}

impl ExperimentRunner {
    pub fn new(
        world: &World,
        model: Arc<ScuModel<f32>>,
        subject: &VirtualSubject,
        config: &OnlineConfig,
    ) -> Result<Self, Error> {
        world.validate()?;
        subject.validate()?;
        require_trained(&model)?;
        let max_trials = config
            .max_trials
            .unwrap_or(DEFAULT_TRIALS_PER_STEP * world.plan.steps.len());
        if max_trials == 0 {
            return Err(Error::Argument("max_trials must be >= 1".into()));
        }
        let mut runner = Self {
            world: world.clone(),
            model,
            filter: preprocessing_filter(),
            subject: subject.clone(),
            nav: Navigator::new(world, config.detector),
            plan_pos: 0,
            experiment: config.experiment,
            max_trials,
            log: Vec::new(),
            status: SessionStatus::Running,
            choices: ChaCha8Rng::seed_from_u64(derive_seed(config.seed, &[config.experiment as u64])),
        };
        runner.check_offer();
        Ok(runner)
    }

    pub fn status(&self) -> &SessionStatus {
        &self.status
    }

    pub fn is_running(&self) -> bool {
        self.status == SessionStatus::Running
    }

    pub fn experiment(&self) -> u32 {
        self.experiment
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn navigator(&self) -> &Navigator {
        &self.nav
    }

    pub fn log(&self) -> &[TrialRecord] {
        &self.log
    }

    /// Plan step awaiting a correct decode.
    pub fn plan_step(&self) -> Option<&PlanStep> {
        self.world.plan.steps.get(self.plan_pos)
    }

    /// Stimulus the plan calls for in the current display.
    pub fn intended(&self) -> Option<StimulusClass> {
        self.plan_step().and_then(|s| self.nav.class_for(s))
    }

    /// `"object"` or `"arrow"` for the current display.
    pub fn display_mode(&self) -> &'static str {
        match self.nav.state().mode {
            NavMode::ArrowStimuli => "arrow",
            _ => "object",
        }
    }

    pub fn displayed(&self) -> Vec<DisplayedStimulus> {
        match self.nav.state().mode {
            NavMode::ObjectStimuli => self
                .nav
                .detections()
                .iter()
                .filter_map(|d| {
                    d.stimulus.map(|c| DisplayedStimulus {
                        freq_hz: c.frequency_hz(),
                        target: StimulusTarget::Object {
                            id: d.object_id,
                            class_name: d.class_name.clone(),
                        },
                    })
                })
                .collect(),
            NavMode::ArrowStimuli => ArrowCommand::ALL
                .iter()
                .map(|a| DisplayedStimulus {
                    freq_hz: a.class().frequency_hz(),
                    target: StimulusTarget::Arrow { direction: *a },
                })
                .collect(),
            _ => Vec::new(),
        }
    }

    /// One trial with the subject fixating `fixated`. The epoch is generated
    /// from the subject's signal model, so a human choice and a scripted one
    /// yield the same data.
    pub fn run_trial(&mut self, fixated: StimulusClass) -> Result<TrialRecord, Error> {
        if !self.is_running() {
            return Err(Error::Session("experiment is not running".into()));
        }
        let trial = self.log.len() as u32 + 1;
        let trial_index = (self.experiment as u64 + 1) * ONLINE_TRIAL_STRIDE + trial as u64;
        let raw = generate_epoch::<f32>(fixated, &self.subject.params, trial_index)?;
        let (pred, latency_s) = decode(&self.model, &self.filter, &raw)?;

        let mode = self.display_mode().to_string();
        let displayed = self.displayed();
        let intended = self.intended();
        let correct = intended == Some(pred.class);
        let command = self.nav.command_for(pred.class).ok();
        if correct {
            let motion = self.nav.execute(pred.class)?;
            if let Some(fault) = motion.fault {
                self.status = SessionStatus::Incomplete { reason: fault };
            } else {
                self.plan_pos += 1;
                if self.plan_pos == self.world.plan.steps.len() {
                    self.nav.finish()?;
                    self.status = SessionStatus::Complete;
                } else {
                    self.check_offer();
                }
            }
        }
        if self.is_running() && trial as usize >= self.max_trials {
            self.status = SessionStatus::Incomplete {
                reason: format!("trial cap of {} reached", self.max_trials),
            };
        }

        let record = TrialRecord {
            experiment: self.experiment,
            trial,
            mode,
            displayed,
            intended_hz: intended.map(|c| c.frequency_hz()),
            fixated_hz: fixated.frequency_hz(),
            decoded_hz: pred.class.frequency_hz(),
            probs: pred.probabilities,
            latency_s,
            t_seconds: EPOCH_SECONDS as f64 + latency_s,
            command,
            correct,
            executed: correct,
            pose_after: *self.nav.pose(),
            state_after: self.nav.state().to_string(),
        };
        self.log.push(record.clone());
        Ok(record)
    }

    /// One trial driven by the virtual subject.
    pub fn step_virtual(&mut self) -> Result<TrialRecord, Error> {
        let intended = self
            .intended()
            .ok_or_else(|| Error::Session("current plan step is not on offer".into()))?;
        let fixated = self.subject.choose(intended, &mut self.choices);
        self.run_trial(fixated)
    }

    pub fn run_to_end(mut self) -> Result<NavSession, Error> {
        while self.is_running() {
            self.step_virtual()?;
        }
        Ok(self.session())
    }

    /// Snapshot of the experiment so far.
    pub fn session(&self) -> NavSession {
        NavSession {
            experiment: self.experiment,
            world: self.world.name.clone(),
            plan_id: self.world.plan.id.clone(),
            status: self.status.clone(),
            final_pose: *self.nav.pose(),
            final_state: *self.nav.state(),
            log: self.log.clone(),
            summary: SessionSummary::from_log(&self.log).ok(),
        }
    }

    fn check_offer(&mut self) {
        if self.is_running() && self.intended().is_none() {
            let step = self.plan_step().map(|s| format!("{s:?}")).unwrap_or_default();
            self.status = SessionStatus::Incomplete {
                reason: format!("plan step {step} is not on offer in state {}", self.nav.state()),
            };
        }
    }
}

/// Runs one experiment with a virtual subject.
pub fn run_online_experiment(
    world: &World,
    model: Arc<ScuModel<f32>>,
    subject: &VirtualSubject,
    config: &OnlineConfig,
) -> Result<NavSession, Error> {
    ExperimentRunner::new(world, model, subject, config)?.run_to_end()
}

pub fn session_log_path(dir: &Path, experiment: u32) -> PathBuf {
    dir.join(format!("session{experiment}.log"))
}

/// Runs experiments 1..=repeat, writing `sessionN.log` for each when
/// `out_dir` is given.
pub fn run_experiments(
    world: &World,
    model: Arc<ScuModel<f32>>,
    subject: &VirtualSubject,
    config: &OnlineConfig,
    repeat: u32,
    out_dir: Option<&Path>,
) -> Result<Vec<NavSession>, Error> {
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    (1..=repeat)
        .map(|experiment| {
            let cfg = OnlineConfig {
                experiment,
                ..config.clone()
            };
            let session = run_online_experiment(world, model.clone(), subject, &cfg)?;
            if let Some(dir) = out_dir {
                write_log(&session_log_path(dir, experiment), &session.log)?;
            }
            Ok(session)
        })
        .collect()
}

/// One accuracy row per experiment, T averaged over every trial.
pub fn experiments_report(sessions: &[NavSession]) -> Result<MetricsReport, Error> {
    let records: Vec<&TrialRecord> = sessions.iter().flat_map(|s| &s.log).collect();
    if records.is_empty() {
        return Err(Error::Session("no trials were run".into()));
    }
    let accuracies = sessions.iter().map(|s| s.accuracy().unwrap_or(0.0)).collect();
    let t = records.iter().map(|r| r.t_seconds).sum::<f64>() / records.len() as f64;
    let mut confusion = ConfusionMatrix::default();
    for s in sessions.iter().filter_map(|s| s.summary.as_ref()) {
        confusion.merge(&ConfusionMatrix { counts: s.confusion });
    }
    Ok(MetricsReport::new("online", accuracies, t, confusion)?)
}
