//! JSON wire messages between the console service and an operator client.
//!
//! Every frame is an envelope `{"type": ..., "seq": n, "payload": {...}}`.
//! Stimulus classes travel as their flicker frequency in Hz.

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use super::log::{SessionSummary, TrialRecord};
use super::ExperimentRunner;
use crate::simworld::PlanStep;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    #[serde(rename = "type")]
    pub kind: String,
    pub seq: u64,
    #[serde(default)]
    pub payload: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "payload", rename_all = "snake_case")]
pub enum ClientMessage {
    Fixate { freq_hz: u32 },
    Start { plan_id: String },
    Pause,
    Resume,
    Reset,
}

impl ClientMessage {
    pub const TYPES: [&'static str; 5] = ["fixate", "start", "pause", "resume", "reset"];
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoseView {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxView {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionView {
    pub id: u32,
    pub class_name: String,
    pub bbox: BoxView,
    pub freq_hz: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneUpdate {
    pub state: String,
    pub pose: PoseView,
    pub detections: Vec<DetectionView>,
    /// `"object"` or `"arrow"`.
    pub mode: String,
    pub experiment: u32,
    /// Trials completed so far.
    pub trial: u32,
}

impl SceneUpdate {
    pub fn of(runner: &ExperimentRunner) -> Self {
        let nav = runner.navigator();
        let pose = nav.pose();
        Self {
            state: nav.state().to_string(),
            pose: PoseView {
                x: pose.x,
                y: pose.y,
                heading: pose.heading,
            },
            detections: nav
                .detections()
                .iter()
                .map(|d| DetectionView {
                    id: d.object_id,
                    class_name: d.class_name.clone(),
                    bbox: BoxView {
                        cx: d.bbox.center_x_px,
                        cy: d.bbox.center_y_px,
                        w: d.bbox.width_px,
                        h: d.bbox.height_px,
                    },
                    freq_hz: d.stimulus.map(|c| c.frequency_hz()),
                })
                .collect(),
            mode: runner.display_mode().to_string(),
            experiment: runner.experiment(),
            trial: runner.log().len() as u32,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecodeResult {
    /// Stimulus the plan called for, if it was on offer.
    pub true_class: Option<u32>,
    pub predicted_class: u32,
    pub probs: [f32; 3],
    pub latency_ms: f64,
    pub command: Option<PlanStep>,
    pub executed: bool,
}

impl From<&TrialRecord> for DecodeResult {
    fn from(r: &TrialRecord) -> Self {
        Self {
            true_class: r.intended_hz,
            predicted_class: r.decoded_hz,
            probs: r.probs,
            latency_ms: r.latency_s * 1e3,
            command: r.command,
            executed: r.executed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryView {
    pub accuracy: f64,
    pub itr_bpm: f64,
    pub confusion: [[u64; 3]; 3],
}

impl From<&SessionSummary> for SummaryView {
    fn from(s: &SessionSummary) -> Self {
        Self {
            accuracy: s.accuracy,
            itr_bpm: s.itr_bpm,
            confusion: s.confusion,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "payload", rename_all = "snake_case")]
pub enum ServerMessage {
    SceneUpdate(SceneUpdate),
    DecodeResult(DecodeResult),
    SessionSummary(SummaryView),
    Error { code: String, message: String },
}

impl ServerMessage {
    pub fn error(code: &str, message: impl Into<String>) -> Self {
        ServerMessage::Error {
            code: code.to_string(),
            message: message.into(),
        }
    }

    pub fn into_envelope(self, seq: u64) -> Envelope {
        let (kind, payload) = split(serde_json::to_value(self).expect("server messages serialize"));
        Envelope { kind, seq, payload }
    }

    pub fn from_envelope(env: &Envelope) -> Result<Self, serde_json::Error> {
        serde_json::from_value(join(env))
    }
}

impl ClientMessage {
    pub fn into_envelope(self, seq: u64) -> Envelope {
        let (kind, payload) = split(serde_json::to_value(self).expect("client messages serialize"));
        Envelope { kind, seq, payload }
    }

    pub fn from_envelope(env: &Envelope) -> Result<Self, serde_json::Error> {
        serde_json::from_value(join(env))
    }
}

fn split(tagged: Value) -> (String, Value) {
    let Value::Object(mut m) = tagged else {
        unreachable!("adjacently tagged enums serialize to objects")
    };
    let kind = m.remove("type").and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
    let payload = m.remove("payload").unwrap_or_else(|| Value::Object(Map::new()));
    (kind, payload)
}

fn join(env: &Envelope) -> Value {
    let empty = match &env.payload {
        Value::Null => true,
        Value::Object(m) => m.is_empty(),
        _ => false,
    };
    if empty && matches!(env.kind.as_str(), "pause" | "resume" | "reset") {
        json!({ "type": env.kind })
    } else {
        json!({ "type": env.kind, "payload": env.payload })
    }
}
