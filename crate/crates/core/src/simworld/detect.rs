//! Surrogate object detector: ground-truth projection plus optional jitter.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{Detection, RobotPose, WorldObject};
use crate::geometry::{project_object, CameraModel};
use crate::signal::{derive_seed, StimulusClass};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DetectorNoise {
    /// Standard deviation of the Gaussian jitter on box centre and height.
    pub sigma_px: f64,
    pub seed: u64,
}

impl DetectorNoise {
    pub fn exact() -> Self {
        Self::default()
    }
}

/// Every object whose box fits in the frame, sorted left to right, with no
/// stimulus assigned. `frame` selects an independent jitter draw.
pub fn detect_objects(
    objects: &[WorldObject<f64>],
    pose: &RobotPose<f64>,
    camera: &CameraModel<f64>,
    noise: &DetectorNoise,
    frame: u64,
) -> Vec<Detection> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(noise.seed, &[frame]));
    let mut out: Vec<Detection> = objects
        .iter()
        .filter_map(|obj| {
            let mut bbox = project_object(camera, pose, obj)?;
            if noise.sigma_px > 0.0 {
                let mut jitter = || noise.sigma_px * rng.sample::<f64, _>(StandardNormal);
                bbox.center_x_px += jitter();
                bbox.center_y_px += jitter();
                bbox.height_px += jitter();
                if !bbox.fits(camera) {
                    return None;
                }
            }
            Some(Detection {
                object_id: obj.id,
                class_name: obj.class_name.clone(),
                bbox,
                object_height_m: obj.height_m,
                stimulus: None,
            })
        })
        .collect();
    out.sort_by(|a, b| {
        a.bbox
            .center_x_px
            .total_cmp(&b.bbox.center_x_px)
            .then(a.object_id.cmp(&b.object_id))
    });
    out
}

/// Sorts left to right and hands out 10, 12, 15 Hz in that order; any
/// further detections stay unassigned.
pub fn assign_frequencies(mut detections: Vec<Detection>) -> Vec<Detection> {
    detections.sort_by(|a, b| {
        a.bbox
            .center_x_px
            .total_cmp(&b.bbox.center_x_px)
            .then(a.object_id.cmp(&b.object_id))
    });
    for (i, d) in detections.iter_mut().enumerate() {
        d.stimulus = StimulusClass::ALL.get(i).copied();
    }
    detections
}

#[cfg(test)]
mod tests {
    use super::*;

    fn objects() -> Vec<WorldObject<f64>> {
        vec![
            WorldObject::new(1, "cup", 3.0, -0.5, 0.3),
            WorldObject::new(2, "chair", 2.0, 0.4, 0.3),
            WorldObject::new(3, "ball", 2.5, 0.0, 0.3),
            WorldObject::new(4, "box", -2.0, 0.0, 0.3),
        ]
    }

    #[test]
    fn sorted_left_to_right_and_behind_dropped() {
        let pose = RobotPose::new(0.0, 0.0, 0.0);
        let d = detect_objects(&objects(), &pose, &CameraModel::default(), &DetectorNoise::exact(), 0);
        let ids: Vec<u32> = d.iter().map(|d| d.object_id).collect();
        assert_eq!(ids, vec![2, 3, 1]);
        assert!(d.windows(2).all(|w| w[0].bbox.center_x_px <= w[1].bbox.center_x_px));
        assert!(detect_objects(&[], &pose, &CameraModel::default(), &DetectorNoise::exact(), 0).is_empty());
    }

    #[test]
    fn assignment_caps_at_three_and_ignores_input_order() {
        let pose = RobotPose::new(0.0, 0.0, 0.0);
        let mut objs = objects();
        objs.push(WorldObject::new(5, "mug", 4.0, 0.2, 0.2));
        objs.push(WorldObject::new(6, "mug", 4.0, -0.9, 0.2));
        let d = detect_objects(&objs, &pose, &CameraModel::default(), &DetectorNoise::exact(), 0);
        assert_eq!(d.len(), 5);
        let a = assign_frequencies(d.clone());
        assert_eq!(a.iter().filter(|d| d.stimulus.is_some()).count(), 3);
        let mut reversed = d;
        reversed.reverse();
        assert_eq!(assign_frequencies(reversed), a);

        let two = assign_frequencies(a[..2].to_vec());
        let classes: Vec<_> = two.iter().map(|d| d.stimulus).collect();
        assert_eq!(classes, vec![Some(StimulusClass::F10), Some(StimulusClass::F12)]);
    }
}
