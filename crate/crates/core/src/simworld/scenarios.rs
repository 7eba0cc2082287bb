//! Built-in worlds.

use super::{ArrowCommand, NavPlan, PlanStep, RobotPose, StepParams, World, WorldObject};
use crate::geometry::CameraModel;

/// Three objects; walk to the table (middle stimulus), then the plant
/// (alone in view), then turn back. The three decisions use 12, 10 and 15 Hz.
pub fn desk_world() -> World {
    World {
        name: "desk".into(),
        camera: CameraModel::default(),
        objects: vec![
            WorldObject::new(1, "chair", 2.0, 0.6, 0.3),
            WorldObject::new(2, "table", 2.5, -0.4, 0.3),
            WorldObject::new(3, "plant", 4.5, -1.2, 0.3),
        ],
        robot_start: RobotPose::new(0.0, 0.0, 0.0),
        plan: NavPlan {
            id: "two-approaches-one-turn".into(),
            steps: vec![
                PlanStep::Approach(2),
                PlanStep::Approach(3),
                PlanStep::Turn(ArrowCommand::TurnBack),
            ],
        },
        step_params: StepParams::default(),
    }
}

/// Four objects and six decisions mixing approaches and turns.
pub fn tour_world() -> World {
    let mut world = desk_world();
    world.name = "tour".into();
    world.objects = vec![
        WorldObject::new(1, "chair", 2.0, 0.3, 0.3),
        WorldObject::new(2, "table", 4.0, 0.0, 0.3),
        WorldObject::new(3, "plant", 3.6, 2.5, 0.3),
        WorldObject::new(4, "bin", 3.0, -1.0, 0.3),
    ];
    world.plan = NavPlan {
        id: "tour-six".into(),
        steps: vec![
            PlanStep::Approach(1),
            PlanStep::Approach(2),
            PlanStep::Turn(ArrowCommand::TurnLeft),
            PlanStep::Approach(3),
            PlanStep::Turn(ArrowCommand::TurnBack),
            PlanStep::Approach(4),
        ],
    };
    world
}
