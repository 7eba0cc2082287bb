//! Discrete-step walking and in-place turns.

use serde::{Deserialize, Serialize};

use super::{normalize_angle, ArrowCommand, RobotPose};
use crate::error::NavError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepParams {
    pub step_len_m: f64,
    /// Walking stops this far short of the target.
    pub stop_distance_m: f64,
    pub max_steps: usize,
}

impl Default for StepParams {
    fn default() -> Self {
        Self {
            step_len_m: 0.2,
            stop_distance_m: 0.5,
            max_steps: 100,
        }
    }
}

impl StepParams {
    pub fn validate(&self) -> Result<(), NavError> {
        if !(self.step_len_m.is_finite() && self.step_len_m > 0.0) {
            return Err(NavError::World(format!("step_len_m must be > 0, got {}", self.step_len_m)));
        }
        if !(self.stop_distance_m.is_finite() && self.stop_distance_m >= 0.0) {
            return Err(NavError::World(format!(
                "stop_distance_m must be >= 0, got {}",
                self.stop_distance_m
            )));
        }
        Ok(())
    }
}

/// Turns toward a target seen at depth `z` and angle of view `aov`, then
/// steps straight at it until `stop_distance_m` remains. The last step is
/// shortened so the walk ends exactly at the stop distance.
///
/// The first pose is the rotated start; one pose follows per step. A target
/// already within the stop distance leaves the pose untouched.
pub fn step_walk(
    pose: &RobotPose<f64>,
    z: f64,
    aov: f64,
    params: &StepParams,
) -> Result<Vec<RobotPose<f64>>, NavError> {
    params.validate().map_err(|e| NavError::Fault(e.to_string()))?;
    if !(z.is_finite() && aov.is_finite()) {
        return Err(NavError::Fault(format!("non-finite target estimate z={z}, aov={aov}")));
    }
    if z <= params.stop_distance_m {
        return Ok(vec![*pose]);
    }
    // Positive AoV is to the right, i.e. clockwise.
    let heading = normalize_angle(pose.heading - aov);
    let range = z / aov.cos();
    let travel = range - params.stop_distance_m;
    let n_steps = (travel / params.step_len_m).ceil() as usize;
    if n_steps > params.max_steps {
        return Err(NavError::Fault(format!(
            "target {range:.2} m away needs {n_steps} steps, limit is {}",
            params.max_steps
        )));
    }
    let (sin_h, cos_h) = heading.sin_cos();
    let mut out = Vec::with_capacity(n_steps + 1);
    out.push(RobotPose::new(pose.x, pose.y, heading));
    for i in 1..=n_steps {
        let d = (i as f64 * params.step_len_m).min(travel);
        out.push(RobotPose::new(pose.x + d * cos_h, pose.y + d * sin_h, heading));
    }
    Ok(out)
}

/// In-place turn; position is unchanged.
pub fn apply_arrow(pose: &RobotPose<f64>, command: ArrowCommand) -> RobotPose<f64> {
    RobotPose::new(pose.x, pose.y, pose.heading + command.heading_delta())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn straight_walk_covers_range_minus_stop() {
        let start = RobotPose::new(1.0, 1.0, 0.0);
        let path = step_walk(&start, 2.0, 0.0, &StepParams::default()).unwrap();
        let end = path.last().unwrap();
        assert!((end.x - 2.5).abs() <= 0.1 && end.y == 1.0);
        assert_eq!(path.len(), 1 + 8);
        for w in path.windows(2) {
            assert!(w[0].distance_to(w[1].x, w[1].y) <= 0.2 + 1e-12);
        }
    }

    #[test]
    fn within_stop_distance_is_noop() {
        let start = RobotPose::new(0.3, -0.2, 1.0);
        assert_eq!(step_walk(&start, 0.5, 0.3, &StepParams::default()).unwrap(), vec![start]);
    }

    #[test]
    fn rotation_by_aov_toward_the_object() {
        let start = RobotPose::new(0.0, 0.0, 0.4);
        let path = step_walk(&start, 2.0, 0.1, &StepParams::default()).unwrap();
        let end = path.last().unwrap();
        assert!(((start.heading - end.heading) - 0.1).abs() < 1e-12);
        let left = step_walk(&start, 2.0, -0.1, &StepParams::default()).unwrap();
        assert!(((left.last().unwrap().heading - start.heading) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn too_far_is_fault() {
        let p = StepParams { max_steps: 5, ..Default::default() };
        assert!(matches!(
            step_walk(&RobotPose::new(0.0, 0.0, 0.0), 3.0, 0.0, &p),
            Err(NavError::Fault(_))
        ));
    }

    #[test]
    fn arrows() {
        let p = RobotPose::new(0.5, 0.5, 0.0);
        assert!((apply_arrow(&p, ArrowCommand::TurnLeft).heading - FRAC_PI_2).abs() < 1e-15);
        assert!((apply_arrow(&p, ArrowCommand::TurnRight).heading + FRAC_PI_2).abs() < 1e-15);
        assert_eq!(apply_arrow(&p, ArrowCommand::TurnBack).heading, PI);
        let twice = apply_arrow(&apply_arrow(&p, ArrowCommand::TurnBack), ArrowCommand::TurnBack);
        assert!(twice.heading.abs() < 1e-15);
        assert_eq!((twice.x, twice.y), (0.5, 0.5));
    }
}
