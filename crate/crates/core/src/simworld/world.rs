//! World description file and its validation.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ArrowCommand, DetectorNoise, Navigator, RobotPose, StepParams, WorldObject};
use crate::error::{Error, NavError};
use crate::geometry::CameraModel;

/// One decision the operator is expected to make.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanStep {
    /// Walk to the object with this id.
    Approach(u32),
    Turn(ArrowCommand),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NavPlan {
    pub id: String,
    pub steps: Vec<PlanStep>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct World {
    pub name: String,
    #[serde(default)]
    pub camera: CameraModel<f64>,
    pub objects: Vec<WorldObject<f64>>,
    pub robot_start: RobotPose<f64>,
    pub plan: NavPlan,
    #[serde(default)]
    pub step_params: StepParams,
}

impl World {
    /// Parses and validates, including a dry run of the plan.
    pub fn from_json(text: &str) -> Result<Self, Error> {
        let mut world: World = serde_json::from_str(text)?;
        world.robot_start = RobotPose::new(world.robot_start.x, world.robot_start.y, world.robot_start.heading);
        world.validate()?;
        Ok(world)
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("world serializes")
    }

    pub fn save(&self, path: &Path) -> Result<(), Error> {
        fs::write(path, self.to_json()).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn object(&self, id: u32) -> Option<&WorldObject<f64>> {
        self.objects.iter().find(|o| o.id == id)
    }

    pub fn validate(&self) -> Result<(), NavError> {
        let bad = |m: String| Err(NavError::World(m));
        self.camera.validate().map_err(|e| NavError::World(e.to_string()))?;
        self.step_params.validate()?;
        let mut ids = HashSet::new();
        for o in &self.objects {
            if !ids.insert(o.id) {
                return bad(format!("duplicate object id {}", o.id));
            }
            if !(o.x.is_finite() && o.y.is_finite()) {
                return bad(format!("object {} has a non-finite position", o.id));
            }
            if !(o.height_m.is_finite() && o.height_m > 0.0) {
                return bad(format!("object {} height must be > 0 m", o.id));
            }
            if o.width_m.is_some_and(|w| !(w.is_finite() && w > 0.0)) {
                return bad(format!("object {} width must be > 0 m", o.id));
            }
        }
        let s = &self.robot_start;
        if !(s.x.is_finite() && s.y.is_finite() && s.heading.is_finite()) {
            return bad("robot_start must be finite".into());
        }
        if self.plan.steps.is_empty() {
            return bad(format!("plan {:?} has no steps", self.plan.id));
        }
        for step in &self.plan.steps {
            if let PlanStep::Approach(id) = step {
                if !ids.contains(id) {
                    return bad(format!("plan approaches unknown object {id}"));
                }
            }
        }
        self.dry_run().map(|_| ())
    }

    /// Executes the plan with perfect decodes and an exact detector.
    /// Returns the pose after every step.
    pub fn dry_run(&self) -> Result<Vec<RobotPose<f64>>, NavError> {
        let mut nav = Navigator::new(self, DetectorNoise::exact());
        let mut poses = Vec::with_capacity(self.plan.steps.len());
        for (i, step) in self.plan.steps.iter().enumerate() {
            let class = nav.class_for(step).ok_or_else(|| {
                NavError::World(format!(
                    "plan step {} ({step:?}) is not on offer in state {}; offered: {:?}",
                    i + 1,
                    nav.state(),
                    nav.offered_object_ids()
                ))
            })?;
            let motion = nav.execute(class).map_err(|e| NavError::World(format!("plan step {}: {e}", i + 1)))?;
            if let Some(fault) = motion.fault {
                return Err(NavError::World(format!("plan step {}: {fault}", i + 1)));
            }
            poses.push(*nav.pose());
        }
        Ok(poses)
    }
}
