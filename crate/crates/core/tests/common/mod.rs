#![allow(dead_code)]

use ssvep_nav::error::NavError;
use ssvep_nav::geometry::{BoundingBox, CameraModel};
use ssvep_nav::scu::{ParamTensor, PassMode, ScuModel};
use ssvep_nav::simworld::{nav_transition, ArrowCommand, Detection, NavEvent, NavMode, NavState, Scene};
use ssvep_nav::signal::{
    apply_filter, design_bandpass, generate_epoch, EegEpoch, SsvepGenParams, StimulusClass,
};

/// Filtered labeled epochs cycling through the classes.
pub fn filtered_epochs(params: &SsvepGenParams, n: usize, first_trial: u64) -> Vec<EegEpoch<f64>> {
    let filter = design_bandpass::<f64>(9.0, 100.0, 500.0).unwrap();
    (0..n)
        .map(|i| {
            let e = generate_epoch(StimulusClass::ALL[i % 3], params, first_trial + i as u64).unwrap();
            apply_filter(&filter, &e).unwrap()
        })
        .collect()
}

/// Magnitude of the DFT of `x` at integer bin `k`, summed directly.
pub fn dft_magnitude(x: &[f64], k: usize) -> f64 {
    let n = x.len() as f64;
    let (mut re, mut im) = (0.0, 0.0);
    for (i, v) in x.iter().enumerate() {
        let w = -2.0 * std::f64::consts::PI * k as f64 * i as f64 / n;
        re += v * w.cos();
        im += v * w.sin();
    }
    re.hypot(im)
}

pub struct GradCheck {
    pub max_rel_error: f64,
    pub worst: Option<(ParamTensor, usize, f64, f64)>,
    pub checked: usize,
    /// Components whose ±h evaluations straddle a ReLU or max-pool switch.
    pub skipped_kinks: usize,
}

/// Central-difference check of every parameter component against
/// `loss_and_gradients`. Relative error is `|a − n| / max(|a|, |n|, floor)`.
pub fn check_gradients(
    model: &ScuModel<f64>,
    batch: &[(&EegEpoch<f64>, StimulusClass)],
    mode: &PassMode,
    h: f64,
    floor: f64,
) -> GradCheck {
    let (_, grads) = model.loss_and_gradients(batch, mode).unwrap();
    let epochs: Vec<_> = batch.iter().map(|(e, _)| *e).collect();
    let mut probe = model.clone();
    let mut out = GradCheck {
        max_rel_error: 0.0,
        worst: None,
        checked: 0,
        skipped_kinks: 0,
    };
    for t in ParamTensor::ALL {
        // Dense parameters sit after the last nonlinearity.
        let upstream = !matches!(t, ParamTensor::DenseWeights | ParamTensor::DenseBias);
        for i in 0..model.param(t).len() {
            let w0 = model.param(t)[i];
            probe.param_mut(t)[i] = w0 + h;
            let plus = probe.loss(batch, mode).unwrap();
            let pat_plus = upstream.then(|| probe.activation_pattern(&epochs, mode).unwrap());
            probe.param_mut(t)[i] = w0 - h;
            let minus = probe.loss(batch, mode).unwrap();
            let pat_minus = upstream.then(|| probe.activation_pattern(&epochs, mode).unwrap());
            probe.param_mut(t)[i] = w0;
            if pat_plus != pat_minus {
                out.skipped_kinks += 1;
                continue;
            }
            let numeric = (plus - minus) / (2.0 * h);
            let analytic = grads.get(t)[i];
            let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor);
            out.checked += 1;
            if rel > out.max_rel_error {
                out.max_rel_error = rel;
                out.worst = Some((t, i, analytic, numeric));
            }
        }
    }
    out
}

/// Filtered single-precision dataset, as calibration produces.
pub fn filtered_dataset(
    params: &SsvepGenParams,
    trials_per_class: usize,
) -> ssvep_nav::signal::SsvepDataset<f32> {
    let filter = design_bandpass::<f32>(9.0, 100.0, 500.0).unwrap();
    ssvep_nav::signal::generate_dataset::<f32>(params, trials_per_class)
        .unwrap()
        .try_map(|e| apply_filter(&filter, e))
        .unwrap()
}

/// Filtered epochs of one subject with trial indices disjoint from calibration.
pub fn held_out(
    params: &SsvepGenParams,
    classes: &[StimulusClass],
    first_trial: u64,
) -> Vec<EegEpoch<f32>> {
    let filter = design_bandpass::<f32>(9.0, 100.0, 500.0).unwrap();
    classes
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let e = generate_epoch(*c, params, first_trial + i as u64).unwrap();
            apply_filter(&filter, &e).unwrap()
        })
        .collect()
}

pub fn detection(id: u32, class: Option<StimulusClass>) -> Detection {
    Detection {
        object_id: id,
        class_name: "obj".into(),
        bbox: BoundingBox { center_x_px: 0.0, center_y_px: 0.0, width_px: 80.0, height_px: 120.0 },
        object_height_m: 0.3,
        stimulus: class,
    }
}

pub fn all_states() -> Vec<NavMode> {
    let mut v = vec![
        NavMode::ObjectStimuli,
        NavMode::ArrowStimuli,
        NavMode::WalkingToObject { target: 1, z: 2.0, aov: 0.0 },
        NavMode::Done,
    ];
    v.extend(ArrowCommand::ALL.map(|command| NavMode::Turning { command }));
    v
}

pub fn all_events() -> Vec<NavEvent> {
    let mut v: Vec<NavEvent> = StimulusClass::ALL.map(NavEvent::Decode).to_vec();
    for n in [0, 2] {
        v.push(NavEvent::Arrived { objects_in_view: n });
        v.push(NavEvent::TurnComplete { objects_in_view: n });
    }
    v.push(NavEvent::NavFault);
    v.push(NavEvent::PlanComplete);
    v
}

#[derive(Debug, PartialEq)]
pub enum Expect {
    To(&'static str),
    NoTarget,
    Illegal,
}

/// Hand-written table: which kind of state each pair leads to, with F10 and
/// F12 assigned to objects 10 and 12 and F15 unassigned.
pub fn expected(state: &NavMode, event: &NavEvent) -> Expect {
    use Expect::*;
    use NavEvent::*;
    match (state, event) {
        (_, PlanComplete) => To("done"),
        (NavMode::ObjectStimuli, Decode(StimulusClass::F15)) => NoTarget,
        (NavMode::ObjectStimuli, Decode(_)) => To("walking_to_object"),
        (NavMode::ArrowStimuli, Decode(_)) => To("turning"),
        (NavMode::WalkingToObject { .. }, Arrived { objects_in_view: 0 }) => To("arrow_stimuli"),
        (NavMode::WalkingToObject { .. }, Arrived { .. }) => To("object_stimuli"),
        (NavMode::WalkingToObject { .. }, NavFault) => To("arrow_stimuli"),
        (NavMode::Turning { .. }, TurnComplete { objects_in_view: 0 }) => To("arrow_stimuli"),
        (NavMode::Turning { .. }, TurnComplete { .. }) => To("object_stimuli"),
        _ => Illegal,
    }
}

/// Runs every (state, event) pair against `expected`, returning the number
/// of pairs checked or the first mismatch.
pub fn check_transition_table() -> Result<usize, String> {
    let cam = CameraModel::default();
    let dets = [detection(10, Some(StimulusClass::F10)), detection(12, Some(StimulusClass::F12)), detection(99, None)];
    let scene = Scene { detections: &dets, camera: &cam };
    let mut pairs = 0;
    for mode in all_states() {
        for event in all_events() {
            let state = NavState { mode, step: 5 };
            let got = nav_transition(&state, &event, &scene);
            let ok = match (expected(&mode, &event), &got) {
                (Expect::To(name), Ok(next)) => {
                    next.mode.name() == name
                        && next.step == 6
                        && match (event, next.mode) {
                            (NavEvent::Decode(c), NavMode::WalkingToObject { target, .. }) => {
                                target == if c == StimulusClass::F10 { 10 } else { 12 }
                            }
                            (NavEvent::Decode(c), NavMode::Turning { command }) => command == ArrowCommand::from_class(c),
                            _ => true,
                        }
                }
                (Expect::NoTarget, Err(NavError::NoTarget(15))) => true,
                (Expect::Illegal, Err(NavError::IllegalTransition { .. })) => true,
                _ => false,
            };
            if !ok {
                return Err(format!("{mode:?} + {event:?}: expected {:?}, got {got:?}", expected(&mode, &event)));
            }
            pairs += 1;
        }
    }
    Ok(pairs)
}
