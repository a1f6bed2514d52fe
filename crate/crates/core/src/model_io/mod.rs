/*
  Copyright 2026 The a3kit Authors

  Licensed under the Apache License, Version 2.0 (the "License");
  you may not use this file except in compliance with the License.
  You may obtain a copy of the License at

      http://www.apache.org/licenses/LICENSE-2.0

  Unless required by applicable law or agreed to in writing, software
  distributed under the License is distributed on an "AS IS" BASIS,
  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
  See the License for the specific language governing permissions and
  limitations under the License.
*/
//! Model I/O: answer grammar, prediction sources and the remote VLM client.

mod grammar;

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use base64::Engine as _;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use grammar::{
    format_action_answer, format_detection_answer, format_joint_answer, format_triad_answer, format_triad_text,
    parse_triad_answer, AnswerGrammar, AnswerShape, DetectedPart, ParsedAnswer, TriadText,
};

use crate::annotation::Triad;
use crate::camera::NormalizedPoint3;
use crate::seeds::derive_seed_str;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnswerError {
    #[error("no coordinate list found in answer")]
    NoCoordinates,
    #[error("coordinate list has {found} tuples, expected {expected}")]
    Arity { expected: usize, found: usize },
    #[error("answer is missing the {0}")]
    MissingKeyword(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransportError {
    #[error("request timed out")]
    Timeout,
    #[error("connection failed: {0}")]
    Connection(String),
    #[error("server returned status {status}: {body}")]
    Status { status: u16, body: String },
    #[error("protocol error: {0}")]
    Protocol(String),
}

impl TransportError {
    pub fn from_ureq(err: ureq::Error) -> Self {
        match err {
            ureq::Error::Status(status, response) => TransportError::Status {
                status,
                body: response.into_string().unwrap_or_default(),
            },
            ureq::Error::Transport(t) => {
                let message = t.to_string();
                if message.to_lowercase().contains("timed out") {
                    TransportError::Timeout
                } else {
                    TransportError::Connection(message)
                }
            }
        }
    }
}

/// What the predictor sees for one episode.
#[derive(Debug, Clone)]
pub struct PredictionContext<'a> {
    /// Image path or identifier.
    pub image: &'a str,
    pub prompt: &'a str,
    /// Ground truth, used only by the oracle and perturbed sources.
    pub truth: &'a Triad,
}

#[derive(Debug, Serialize)]
struct InferRequest<'a> {
    image: String,
    prompt: &'a str,
}

#[derive(Debug, Deserialize)]
struct InferResponse {
    text: String,
}

/// HTTP client for a vision-language model server.
///
/// Request: `POST <endpoint>` with `{"image": <base64 bytes or path>, "prompt": ...}`.
/// Response: `{"text": ...}`.
#[derive(Debug, Clone)]
pub struct RemoteVlmClient {
    pub endpoint: String,
    pub max_in_flight: usize,
    agent: ureq::Agent,
}

impl RemoteVlmClient {
    pub fn new(endpoint: impl Into<String>, timeout: Duration, max_in_flight: usize) -> Self {
        Self {
            endpoint: endpoint.into(),
            max_in_flight: max_in_flight.max(1),
            agent: ureq::AgentBuilder::new().timeout(timeout).build(),
        }
    }

    /// Images that exist on disk are inlined as base64; anything else is
    /// forwarded as a reference string.
    fn image_payload(image: &str) -> String {
        match std::fs::read(Path::new(image)) {
            Ok(bytes) => base64::engine::general_purpose::STANDARD.encode(bytes),
            Err(_) => image.to_owned(),
        }
    }

    pub fn infer(&self, image: &str, prompt: &str) -> Result<String, TransportError> {
        let request = InferRequest {
            image: Self::image_payload(image),
            prompt,
        };
        let response = self
            .agent
            .post(&self.endpoint)
            .send_json(&request)
            .map_err(TransportError::from_ureq)?;
        let body: InferResponse = response
            .into_json()
            .map_err(|e| TransportError::Protocol(format!("bad inference response: {e}")))?;
        Ok(body.text)
    }
}

/// Where triad answers come from during evaluation.
#[derive(Debug, Clone)]
pub enum PredictionSource {
    /// Exact ground-truth triad text.
    GroundTruth,
    /// Ground truth plus i.i.d. Gaussian noise on every normalized coordinate.
    Perturbed { std: f64, seed: u64 },
    Remote(RemoteVlmClient),
}

impl PredictionSource {
    pub fn name(&self) -> String {
        match self {
            PredictionSource::GroundTruth => "ground_truth".into(),
            PredictionSource::Perturbed { std, .. } => format!("perturbed_{std}"),
            PredictionSource::Remote(client) => format!("remote:{}", client.endpoint),
        }
    }

    pub fn predict(&self, ctx: &PredictionContext<'_>) -> Result<String, TransportError> {
        match self {
            PredictionSource::GroundTruth => Ok(format_triad_answer(ctx.truth)),
            PredictionSource::Perturbed { std, seed } => Ok(format_triad_answer(&perturb_triad(ctx, *std, *seed))),
            PredictionSource::Remote(client) => client.infer(ctx.image, ctx.prompt),
        }
    }

    /// Predicts a batch in order. Remote sources keep at most
    /// `max_in_flight` requests open at once.
    pub fn predict_batch(&self, contexts: &[PredictionContext<'_>]) -> Vec<Result<String, TransportError>> {
        let workers = match self {
            PredictionSource::Remote(client) => client.max_in_flight.min(contexts.len()),
            _ => return contexts.iter().map(|c| self.predict(c)).collect(),
        };
        let next = AtomicUsize::new(0);
        let results: Mutex<Vec<Option<Result<String, TransportError>>>> = Mutex::new(vec![None; contexts.len()]);
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    let Some(ctx) = contexts.get(i) else { break };
                    let out = self.predict(ctx);
                    results.lock().expect("results lock")[i] = Some(out);
                });
            }
        });
        results
            .into_inner()
            .expect("results lock")
            .into_iter()
            .map(|r| r.expect("every index visited"))
            .collect()
    }
}

fn perturb_triad(ctx: &PredictionContext<'_>, std: f64, seed: u64) -> Triad {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed_str(seed, &format!("{}\n{}", ctx.image, ctx.prompt)));
    let mut triad = ctx.truth.clone();
    if std <= 0.0 {
        return triad;
    }
    let normal = Normal::new(0.0, std).expect("finite positive std");
    let mut jitter = |p: &mut NormalizedPoint3<f64>| {
        *p = NormalizedPoint3::new(
            p.u + normal.sample(&mut rng),
            p.v + normal.sample(&mut rng),
            p.z + normal.sample(&mut rng),
        )
        .clamped();
    };
    triad.box_norm.iter_mut().for_each(&mut jitter);
    triad.axis_norm.iter_mut().for_each(&mut jitter);
    triad
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::SemanticLabel;
    use crate::skills::Skill;
    use crate::urdf::Articulation;

    fn triad_at(value: f64) -> Triad {
        Triad {
            link: "door".into(),
            box_norm: [NormalizedPoint3::new(value, value, value); 8],
            axis_norm: [NormalizedPoint3::new(value, value, value); 2],
            label: SemanticLabel {
                joint_kind: Articulation::Revolute,
                link_name: "door".into(),
                actions: vec![Skill::FlapOpen],
            },
            visibility: 1.0,
        }
    }

    #[test]
    fn ground_truth_round_trips() {
        let truth = triad_at(0.37);
        let ctx = PredictionContext {
            image: "img.png",
            prompt: "p",
            truth: &truth,
        };
        let text = PredictionSource::GroundTruth.predict(&ctx).unwrap();
        let ParsedAnswer::Triad { link_name, joint, bbox, axis } =
            parse_triad_answer(&text, AnswerShape::Triad).unwrap()
        else {
            panic!("wrong shape");
        };
        assert_eq!(link_name.as_deref(), Some("door"));
        assert_eq!(joint, Articulation::Revolute);
        assert_eq!(bbox, truth.box_norm);
        assert_eq!(axis, truth.axis_norm);
    }

    #[test]
    fn perturbed_noise_has_requested_spread() {
        let truth = triad_at(0.5);
        let source = PredictionSource::Perturbed { std: 0.05, seed: 11 };
        let mut deviations = Vec::new();
        for i in 0..200 {
            let image = format!("view_{i}.png");
            let ctx = PredictionContext {
                image: &image,
                prompt: "p",
                truth: &truth,
            };
            let text = source.predict(&ctx).unwrap();
            let ParsedAnswer::Triad { bbox, .. } = parse_triad_answer(&text, AnswerShape::Triad).unwrap() else {
                panic!("wrong shape");
            };
            deviations.extend(bbox.iter().map(|p| p.u - 0.5));
        }
        let n = deviations.len() as f64;
        let mean = deviations.iter().sum::<f64>() / n;
        let var = deviations.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let std = var.sqrt();
        assert!((std - 0.05).abs() < 0.05 * 0.15, "empirical std {std}");
    }

    #[test]
    fn perturbed_is_deterministic_and_clamped() {
        let truth = triad_at(0.99);
        let source = PredictionSource::Perturbed { std: 0.2, seed: 3 };
        let ctx = PredictionContext {
            image: "a",
            prompt: "b",
            truth: &truth,
        };
        let a = source.predict(&ctx).unwrap();
        assert_eq!(a, source.predict(&ctx).unwrap());
        let ParsedAnswer::Triad { bbox, .. } = parse_triad_answer(&a, AnswerShape::Triad).unwrap() else {
            panic!("wrong shape");
        };
        assert!(bbox.iter().all(|p| (0.0..=1.0).contains(&p.u) && (0.0..=1.0).contains(&p.z)));
    }

    #[test]
    fn unreachable_remote_is_a_transport_error() {
        let client = RemoteVlmClient::new("http://127.0.0.1:9/infer", Duration::from_millis(300), 2);
        let truth = triad_at(0.5);
        let ctx = PredictionContext {
            image: "x",
            prompt: "y",
            truth: &truth,
        };
        let out = PredictionSource::Remote(client).predict_batch(&[ctx.clone(), ctx]);
        assert_eq!(out.len(), 2);
        assert!(out.iter().all(|r| r.is_err()));
    }
}
