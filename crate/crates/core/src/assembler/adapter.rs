use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::AssembledInput;
use crate::remote::{JsonClient, TransportError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Greedy,
    Sample,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecodeParams {
    pub max_new_tokens: u32,
    pub seed: u64,
    pub strategy: Strategy,
    pub top_p: f64,
}

impl Default for DecodeParams {
    fn default() -> Self {
        DecodeParams {
            max_new_tokens: 512,
            seed: 42,
            strategy: Strategy::Greedy,
            top_p: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationResult {
    pub doc_id: String,
    pub generated_pls: String,
    pub latency_ms: f64,
    pub model_tag: String,
    /// Set when the adapter reports that it cut the input at its own length limit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncated: Option<bool>,
}

pub trait Simplifier: Send + Sync {
    fn generate(&self, input: &AssembledInput, params: &DecodeParams) -> Result<GenerationResult, TransportError>;

    fn tag(&self) -> String;
}

/// Test double: returns the rendered input unchanged.
#[derive(Clone, Copy, Debug, Default)]
pub struct EchoAdapter;

impl Simplifier for EchoAdapter {
    fn generate(&self, input: &AssembledInput, _params: &DecodeParams) -> Result<GenerationResult, TransportError> {
        let start = Instant::now();
        if input.rendered.is_empty() {
            return Err(TransportError::protocol("empty output", ""));
        }
        Ok(GenerationResult {
            doc_id: input.doc_id.clone(),
            generated_pls: input.rendered.clone(),
            latency_ms: start.elapsed().as_secs_f64() * 1e3,
            model_tag: self.tag(),
            truncated: None,
        })
    }

    fn tag(&self) -> String {
        "echo".into()
    }
}

/// Client for `POST /generate`: `{"id", "input", "params"}` -> `{"id", "output"}`.
#[derive(Debug)]
pub struct RemoteSimplifier {
    client: JsonClient,
    run_id: String,
}

impl RemoteSimplifier {
    /// `run_id` scopes idempotency keys so retries within one run never count as
    /// new submissions.
    pub fn new(client: JsonClient, run_id: impl Into<String>) -> Self {
        RemoteSimplifier {
            client,
            run_id: run_id.into(),
        }
    }

    pub fn request_body(input: &AssembledInput, params: &DecodeParams) -> serde_json::Value {
        json!({
            "id": input.doc_id,
            "input": input.rendered,
            "params": params,
        })
    }
}

impl Simplifier for RemoteSimplifier {
    fn generate(&self, input: &AssembledInput, params: &DecodeParams) -> Result<GenerationResult, TransportError> {
        let request = Self::request_body(input, params);
        let key = format!("{}:{}", self.run_id, input.doc_id);
        let start = Instant::now();
        let reply = self.client.call("/generate", &request, &key)?;
        let latency_ms = start.elapsed().as_secs_f64() * 1e3;
        let payload = reply.to_string();
        match reply.get("id").and_then(|v| v.as_str()) {
            Some(id) if id == input.doc_id => {}
            Some(id) => {
                return Err(TransportError::protocol(
                    format!("response id {id:?} does not match request id {:?}", input.doc_id),
                    &payload,
                ))
            }
            None => return Err(TransportError::protocol("response has no id", &payload)),
        }
        let output = match reply.get("output") {
            Some(serde_json::Value::String(s)) if !s.is_empty() => s.clone(),
            Some(serde_json::Value::String(_)) => return Err(TransportError::protocol("empty output", &payload)),
            _ => return Err(TransportError::protocol("response has no output string", &payload)),
        };
        Ok(GenerationResult {
            doc_id: input.doc_id.clone(),
            generated_pls: output,
            latency_ms,
            model_tag: reply
                .get("model")
                .and_then(|v| v.as_str())
                .map(str::to_owned)
                .unwrap_or_else(|| self.tag()),
            truncated: reply.get("truncated").and_then(|v| v.as_bool()),
        })
    }

    fn tag(&self) -> String {
        self.client.endpoint().to_string()
    }
}

/// Generates for every input with at most `max_in_flight` concurrent requests.
/// Results keep input order; failures are returned per document.
pub fn generate_all(
    inputs: &[AssembledInput],
    simplifier: &dyn Simplifier,
    params: &DecodeParams,
    max_in_flight: usize,
) -> Vec<Result<GenerationResult, TransportError>> {
    let run = || {
        inputs
            .par_iter()
            .map(|input| simplifier.generate(input, params))
            .collect()
    };
    match rayon::ThreadPoolBuilder::new()
        .num_threads(max_in_flight.max(1))
        .build()
    {
        Ok(pool) => pool.install(run),
        Err(_) => inputs.iter().map(|i| simplifier.generate(i, params)).collect(),
    }
}
