use serde::{Deserialize, Serialize};

use crate::geometry::BoundingBox;
use crate::num::Scalar;
use crate::signal::StimulusClass;

/// Wraps an angle into (−π, π].
pub fn normalize_angle<T: Scalar>(angle: T) -> T {
    let two_pi = T::PI() + T::PI();
    let mut a = angle % two_pi;
    if a <= -T::PI() {
        a = a + two_pi;
    } else if a > T::PI() {
        a = a - two_pi;
    }
    a
}

/// Planar pose; heading is counter-clockwise from the world x axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobotPose<T> {
    pub x: T,
    pub y: T,
    pub heading: T,
}

impl<T: Scalar> RobotPose<T> {
    pub fn new(x: T, y: T, heading: T) -> Self {
        Self {
            x,
            y,
            heading: normalize_angle(heading),
        }
    }

    pub fn distance_to(&self, x: T, y: T) -> T {
        (x - self.x).hypot(y - self.y)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorldObject<T> {
    pub id: u32,
    pub class_name: String,
    pub x: T,
    pub y: T,
    pub height_m: T,
    /// Physical width; defaults to the height when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width_m: Option<T>,
}

impl<T: Scalar> WorldObject<T> {
    pub fn new(id: u32, class_name: &str, x: T, y: T, height_m: T) -> Self {
        Self {
            id,
            class_name: class_name.to_string(),
            x,
            y,
            height_m,
            width_m: None,
        }
    }

    pub fn width_m(&self) -> T {
        self.width_m.unwrap_or(self.height_m)
    }
}

/// A detected object, possibly carrying a flicker frequency.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub object_id: u32,
    pub class_name: String,
    pub bbox: BoundingBox<f64>,
    /// Physical height prior for the detected class, used for ranging.
    pub object_height_m: f64,
    pub stimulus: Option<StimulusClass>,
}

/// Turn issued from the arrow display.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ArrowCommand {
    #[serde(rename = "left")]
    TurnLeft,
    #[serde(rename = "right")]
    TurnRight,
    #[serde(rename = "back")]
    TurnBack,
}

impl ArrowCommand {
    pub const ALL: [ArrowCommand; 3] = [
        ArrowCommand::TurnLeft,
        ArrowCommand::TurnRight,
        ArrowCommand::TurnBack,
    ];

    /// Fixed session mapping: 10 Hz left, 12 Hz right, 15 Hz about-turn.
    pub fn from_class(class: StimulusClass) -> Self {
        match class {
            StimulusClass::F10 => ArrowCommand::TurnLeft,
            StimulusClass::F12 => ArrowCommand::TurnRight,
            StimulusClass::F15 => ArrowCommand::TurnBack,
        }
    }

    pub fn class(self) -> StimulusClass {
        match self {
            ArrowCommand::TurnLeft => StimulusClass::F10,
            ArrowCommand::TurnRight => StimulusClass::F12,
            ArrowCommand::TurnBack => StimulusClass::F15,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ArrowCommand::TurnLeft => "left",
            ArrowCommand::TurnRight => "right",
            ArrowCommand::TurnBack => "back",
        }
    }

    /// Heading change in radians (CCW positive).
    pub fn heading_delta(self) -> f64 {
        use std::f64::consts::{FRAC_PI_2, PI};
        match self {
            ArrowCommand::TurnLeft => FRAC_PI_2,
            ArrowCommand::TurnRight => -FRAC_PI_2,
            ArrowCommand::TurnBack => PI,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn normalization_range() {
        assert_eq!(normalize_angle(PI), PI);
        assert_eq!(normalize_angle(-PI), PI);
        assert_eq!(normalize_angle(2.0 * PI), 0.0);
        assert!((normalize_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert!((normalize_angle(-7.0f32) - (-7.0 + 2.0 * std::f32::consts::PI)).abs() < 1e-5);
    }

    #[test]
    fn arrow_mapping_is_bijective() {
        for cmd in ArrowCommand::ALL {
            assert_eq!(ArrowCommand::from_class(cmd.class()), cmd);
        }
    }
}
