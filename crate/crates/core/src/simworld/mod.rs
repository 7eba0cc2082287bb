//! Desk-scale stand-in for the robot: a 2D world, a surrogate detector,
//! discrete-step kinematics and the object/arrow navigation state machine.

mod detect;
mod fsm;
mod kinematics;
mod navigator;
mod scenarios;
mod types;
mod world;

pub use detect::{assign_frequencies, detect_objects, DetectorNoise};
pub use fsm::{nav_transition, NavEvent, NavMode, NavState, Scene};
pub use kinematics::{apply_arrow, step_walk, StepParams};
pub use navigator::{Motion, Navigator, DEFAULT_APPROACH_MARGIN_M};
pub use scenarios::{desk_world, tour_world};
pub use types::*;
pub use world::{NavPlan, PlanStep, World};
