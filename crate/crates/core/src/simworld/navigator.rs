//! World + state machine + robot, advanced one decoded class at a time.

use serde::{Deserialize, Serialize};

use super::{
    apply_arrow, assign_frequencies, detect_objects, nav_transition, step_walk, Detection,
    DetectorNoise, NavEvent, NavMode, NavState, PlanStep, RobotPose, Scene, StepParams, World, WorldObject,
};
use crate::error::NavError;
use crate::geometry::{estimate_distance, CameraModel};
use crate::signal::StimulusClass;

/// Objects must be estimated at least this far beyond the stop distance to
/// be offered as targets.
pub const DEFAULT_APPROACH_MARGIN_M: f64 = 0.1;

/// Result of executing one decoded class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Motion {
    pub command: PlanStep,
    pub path: Vec<RobotPose<f64>>,
    pub fault: Option<String>,
}

#[derive(Clone, Debug)]
pub struct Navigator {
    objects: Vec<WorldObject<f64>>,
    camera: CameraModel<f64>,
    step_params: StepParams,
    noise: DetectorNoise,
    approach_margin_m: f64,
    pose: RobotPose<f64>,
    state: NavState,
    detections: Vec<Detection>,
    frame: u64,
}

impl Navigator {
    pub fn new(world: &World, noise: DetectorNoise) -> Self {
        let mut nav = Self {
            objects: world.objects.clone(),
            camera: world.camera,
            step_params: world.step_params,
            noise,
            approach_margin_m: DEFAULT_APPROACH_MARGIN_M,
            pose: world.robot_start,
            state: NavState::initial(0),
            detections: Vec::new(),
            frame: 0,
        };
        nav.detections = nav.offered();
        nav.state = NavState::initial(nav.detections.len());
        nav
    }

    pub fn pose(&self) -> &RobotPose<f64> {
        &self.pose
    }

    pub fn state(&self) -> &NavState {
        &self.state
    }

    pub fn camera(&self) -> &CameraModel<f64> {
        &self.camera
    }

    /// Targets currently on offer, left to right, with their stimuli.
    pub fn detections(&self) -> &[Detection] {
        &self.detections
    }

    pub fn offered_object_ids(&self) -> Vec<u32> {
        self.detections
            .iter()
            .filter(|d| d.stimulus.is_some())
            .map(|d| d.object_id)
            .collect()
    }

    /// Stimuli flickering in the current display.
    pub fn displayed_classes(&self) -> Vec<StimulusClass> {
        match self.state.mode {
            NavMode::ObjectStimuli => self.detections.iter().filter_map(|d| d.stimulus).collect(),
            NavMode::ArrowStimuli => StimulusClass::ALL.to_vec(),
            _ => Vec::new(),
        }
    }

    /// Stimulus an operator must fixate to carry out `step` now, if offered.
    pub fn class_for(&self, step: &PlanStep) -> Option<StimulusClass> {
        match (self.state.mode, step) {
            (NavMode::ObjectStimuli, PlanStep::Approach(id)) => self
                .detections
                .iter()
                .find(|d| d.object_id == *id)
                .and_then(|d| d.stimulus),
            (NavMode::ArrowStimuli, PlanStep::Turn(cmd)) => Some(cmd.class()),
            _ => None,
        }
    }

    /// Command a decode of `class` would issue, without moving.
    pub fn command_for(&self, class: StimulusClass) -> Result<PlanStep, NavError> {
        match nav_transition(&self.state, &NavEvent::Decode(class), &self.scene())?.mode {
            NavMode::WalkingToObject { target, .. } => Ok(PlanStep::Approach(target)),
            NavMode::Turning { command } => Ok(PlanStep::Turn(command)),
            other => unreachable!("decode led to {other:?}"),
        }
    }

    /// Applies a decoded class and runs the resulting motion to completion.
    /// On error nothing changes.
    pub fn execute(&mut self, class: StimulusClass) -> Result<Motion, NavError> {
        let moving = nav_transition(&self.state, &NavEvent::Decode(class), &self.scene())?;
        match moving.mode {
            NavMode::WalkingToObject { target, z, aov } => {
                let command = PlanStep::Approach(target);
                match step_walk(&self.pose, z, aov, &self.step_params) {
                    Ok(path) => {
                        self.pose = *path.last().unwrap();
                        self.redetect();
                        let event = NavEvent::Arrived {
                            objects_in_view: self.detections.len(),
                        };
                        self.state = nav_transition(&moving, &event, &self.scene())?;
                        Ok(Motion { command, path, fault: None })
                    }
                    Err(e) => {
                        self.state = nav_transition(&moving, &NavEvent::NavFault, &self.scene())?;
                        Ok(Motion {
                            command,
                            path: vec![self.pose],
                            fault: Some(e.to_string()),
                        })
                    }
                }
            }
            NavMode::Turning { command } => {
                self.pose = apply_arrow(&self.pose, command);
                self.redetect();
                let event = NavEvent::TurnComplete {
                    objects_in_view: self.detections.len(),
                };
                self.state = nav_transition(&moving, &event, &self.scene())?;
                Ok(Motion {
                    command: PlanStep::Turn(command),
                    path: vec![self.pose],
                    fault: None,
                })
            }
            other => unreachable!("decode led to {other:?}"),
        }
    }

    pub fn finish(&mut self) -> Result<(), NavError> {
        self.state = nav_transition(&self.state, &NavEvent::PlanComplete, &self.scene())?;
        Ok(())
    }

    fn scene(&self) -> Scene<'_> {
        Scene {
            detections: &self.detections,
            camera: &self.camera,
        }
    }

    fn redetect(&mut self) {
        self.frame += 1;
        self.detections = self.offered();
    }

    /// Detections far enough away to walk to, with frequencies assigned.
    fn offered(&self) -> Vec<Detection> {
        let min_z = self.step_params.stop_distance_m + self.approach_margin_m;
        let seen = detect_objects(&self.objects, &self.pose, &self.camera, &self.noise, self.frame);
        assign_frequencies(
            seen.into_iter()
                .filter(|d| {
                    estimate_distance(&self.camera, d.object_height_m, d.bbox.height_px).is_ok_and(|z| z > min_z)
                })
                .collect(),
        )
    }
}
