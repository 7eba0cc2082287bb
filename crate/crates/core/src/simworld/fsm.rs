//! Navigation state machine alternating object and arrow displays.
//!
//! | state            | event                 | next                                   |
//! |------------------|-----------------------|----------------------------------------|
//! | ObjectStimuli    | Decode(c)             | WalkingToObject (c assigned) / NoTarget |
//! | ArrowStimuli     | Decode(c)             | Turning(arrow for c)                   |
//! | WalkingToObject  | Arrived { n }         | ObjectStimuli if n > 0 else ArrowStimuli |
//! | WalkingToObject  | NavFault              | ArrowStimuli                           |
//! | Turning          | TurnComplete { n }    | ObjectStimuli if n > 0 else ArrowStimuli |
//! | any              | PlanComplete          | Done                                   |
//!
//! Every other pair is rejected.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{ArrowCommand, Detection};
use crate::error::NavError;
use crate::geometry::{angle_of_view, estimate_distance, CameraModel};
use crate::signal::StimulusClass;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NavMode {
    ObjectStimuli,
    ArrowStimuli,
    WalkingToObject { target: u32, z: f64, aov: f64 },
    Turning { command: ArrowCommand },
    Done,
}

impl NavMode {
    pub fn name(&self) -> &'static str {
        match self {
            NavMode::ObjectStimuli => "object_stimuli",
            NavMode::ArrowStimuli => "arrow_stimuli",
            NavMode::WalkingToObject { .. } => "walking_to_object",
            NavMode::Turning { .. } => "turning",
            NavMode::Done => "done",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NavState {
    pub mode: NavMode,
    /// Transitions taken so far.
    pub step: u64,
}

impl NavState {
    /// Opening display: objects if any are on offer, otherwise arrows.
    pub fn initial(objects_in_view: usize) -> Self {
        Self {
            mode: if objects_in_view > 0 {
                NavMode::ObjectStimuli
            } else {
                NavMode::ArrowStimuli
            },
            step: 0,
        }
    }
}

impl fmt::Display for NavState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.mode.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NavEvent {
    Decode(StimulusClass),
    /// Walk finished; count of approachable objects now offered.
    Arrived { objects_in_view: usize },
    TurnComplete { objects_in_view: usize },
    NavFault,
    PlanComplete,
}

impl fmt::Display for NavEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NavEvent::Decode(c) => write!(f, "decode({c})"),
            NavEvent::Arrived { objects_in_view } => write!(f, "arrived({objects_in_view})"),
            NavEvent::TurnComplete { objects_in_view } => write!(f, "turn_complete({objects_in_view})"),
            NavEvent::NavFault => write!(f, "nav_fault"),
            NavEvent::PlanComplete => write!(f, "plan_complete"),
        }
    }
}

/// What the robot currently sees, as needed to resolve an object decode.
#[derive(Clone, Copy, Debug)]
pub struct Scene<'a> {
    pub detections: &'a [Detection],
    pub camera: &'a CameraModel<f64>,
}

fn after_motion(objects_in_view: usize) -> NavMode {
    if objects_in_view > 0 {
        NavMode::ObjectStimuli
    } else {
        NavMode::ArrowStimuli
    }
}

pub fn nav_transition(state: &NavState, event: &NavEvent, scene: &Scene<'_>) -> Result<NavState, NavError> {
    let next = match (&state.mode, event) {
        (_, NavEvent::PlanComplete) => NavMode::Done,
        (NavMode::ObjectStimuli, NavEvent::Decode(class)) => {
            let target = scene
                .detections
                .iter()
                .find(|d| d.stimulus == Some(*class))
                .ok_or(NavError::NoTarget(class.frequency_hz()))?;
            let z = estimate_distance(scene.camera, target.object_height_m, target.bbox.height_px)
                .map_err(|e| NavError::Fault(e.to_string()))?;
            let aov = angle_of_view(scene.camera, target.bbox.center_x_px)
                .map_err(|e| NavError::Fault(e.to_string()))?;
            NavMode::WalkingToObject {
                target: target.object_id,
                z,
                aov,
            }
        }
        (NavMode::ArrowStimuli, NavEvent::Decode(class)) => NavMode::Turning {
            command: ArrowCommand::from_class(*class),
        },
        (NavMode::WalkingToObject { .. }, NavEvent::Arrived { objects_in_view }) => after_motion(*objects_in_view),
        (NavMode::WalkingToObject { .. }, NavEvent::NavFault) => NavMode::ArrowStimuli,
        (NavMode::Turning { .. }, NavEvent::TurnComplete { objects_in_view }) => after_motion(*objects_in_view),
        _ => {
            return Err(NavError::IllegalTransition {
                state: state.to_string(),
                event: event.to_string(),
            })
        }
    };
    Ok(NavState {
        mode: next,
        step: state.step + 1,
    })
}
