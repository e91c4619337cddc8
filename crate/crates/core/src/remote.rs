//! JSON request/response transport shared by the external scorer, the semantic
//! scorer hook and the generation adapter.
//!
//! An endpoint is either an HTTP base URL (each call POSTs to `base + route`) or a
//! subprocess spoken to with one JSON object per line over stdin/stdout
//! (`exec:<program> [args...]`).

use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::str::FromStr;
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use serde_json::Value;
use thiserror::Error;

const EXCERPT_LEN: usize = 200;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransportError {
    #[error("request timed out after {0:?}")]
    Timeout(Duration),
    #[error("transport failure: {0}")]
    Io(String),
    #[error("protocol error: {message} (payload: {excerpt:?})")]
    Protocol { message: String, excerpt: String },
    #[error("invalid endpoint {0:?}")]
    InvalidEndpoint(String),
}

impl TransportError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, TransportError::Timeout(_) | TransportError::Io(_))
    }

    pub fn protocol(message: impl Into<String>, payload: &str) -> Self {
        TransportError::Protocol {
            message: message.into(),
            excerpt: excerpt(payload),
        }
    }
}

pub fn excerpt(payload: &str) -> String {
    match payload.char_indices().nth(EXCERPT_LEN) {
        Some((cut, _)) => format!("{}...", &payload[..cut]),
        None => payload.to_owned(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Endpoint {
    Http { base: String },
    Process { program: String, args: Vec<String> },
}

impl FromStr for Endpoint {
    type Err = TransportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.starts_with("http://") || s.starts_with("https://") {
            return Ok(Endpoint::Http {
                base: s.trim_end_matches('/').to_owned(),
            });
        }
        if let Some(cmd) = s.strip_prefix("exec:") {
            let mut parts = cmd.split_whitespace().map(str::to_owned);
            if let Some(program) = parts.next() {
                return Ok(Endpoint::Process {
                    program,
                    args: parts.collect(),
                });
            }
        }
        Err(TransportError::InvalidEndpoint(s.to_owned()))
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::Http { base } => f.write_str(base),
            Endpoint::Process { program, args } => {
                write!(f, "exec:{program}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TransportConfig {
    pub timeout: Duration,
    /// Additional attempts after the first one, for retryable failures only.
    pub retries: u32,
}

impl Default for TransportConfig {
    fn default() -> Self {
        TransportConfig {
            timeout: Duration::from_secs(60),
            retries: 2,
        }
    }
}

struct ProcessChannel {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
}

impl ProcessChannel {
    fn spawn(program: &str, args: &[String]) -> Result<Self, TransportError> {
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| TransportError::Io(format!("spawn {program}: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(ProcessChannel {
            child,
            stdin,
            lines: rx,
        })
    }

    fn exchange(&mut self, request: &str, timeout: Duration) -> Result<String, TransportError> {
        let io = |e: std::io::Error| TransportError::Io(e.to_string());
        self.stdin.write_all(request.as_bytes()).map_err(io)?;
        self.stdin.write_all(b"\n").map_err(io)?;
        self.stdin.flush().map_err(io)?;
        match self.lines.recv_timeout(timeout) {
            Ok(Ok(line)) => Ok(line),
            Ok(Err(e)) => Err(io(e)),
            Err(RecvTimeoutError::Timeout) => Err(TransportError::Timeout(timeout)),
            Err(RecvTimeoutError::Disconnected) => {
                Err(TransportError::Io("subprocess closed its output".into()))
            }
        }
    }
}

impl Drop for ProcessChannel {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

enum Backend {
    Http {
        agent: ureq::Agent,
        base: String,
    },
    Process {
        program: String,
        args: Vec<String>,
        // Dropped (and respawned) after any transport failure so a late reply
        // cannot be read as the answer to the next request.
        channel: Mutex<Option<ProcessChannel>>,
    },
}

pub struct JsonClient {
    endpoint: Endpoint,
    config: TransportConfig,
    backend: Backend,
}

impl fmt::Debug for JsonClient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JsonClient")
            .field("endpoint", &self.endpoint)
            .field("config", &self.config)
            .finish()
    }
}

impl JsonClient {
    pub fn new(endpoint: Endpoint, config: TransportConfig) -> Self {
        let backend = match &endpoint {
            Endpoint::Http { base } => {
                let agent: ureq::Agent = ureq::Agent::config_builder()
                    .timeout_global(Some(config.timeout))
                    .http_status_as_error(false)
                    .build()
                    .into();
                Backend::Http {
                    agent,
                    base: base.clone(),
                }
            }
            Endpoint::Process { program, args } => Backend::Process {
                program: program.clone(),
                args: args.clone(),
                channel: Mutex::new(None),
            },
        };
        JsonClient {
            endpoint,
            config,
            backend,
        }
    }

    pub fn endpoint(&self) -> &Endpoint {
        &self.endpoint
    }

    /// Sends `request` and parses the reply as a JSON object, retrying retryable
    /// failures up to `config.retries` more times with the same idempotency key.
    pub fn call(&self, route: &str, request: &Value, idempotency_key: &str) -> Result<Value, TransportError> {
        let mut attempt = 0;
        loop {
            match self.call_once(route, request, idempotency_key) {
                Err(e) if e.is_retryable() && attempt < self.config.retries => attempt += 1,
                other => return other,
            }
        }
    }

    fn call_once(&self, route: &str, request: &Value, idempotency_key: &str) -> Result<Value, TransportError> {
        let body = match &self.backend {
            Backend::Http { agent, base } => {
                let url = format!("{base}{route}");
                let mut resp = agent
                    .post(&url)
                    .header("Idempotency-Key", idempotency_key)
                    .send_json(request)
                    .map_err(|e| match e {
                        ureq::Error::Timeout(_) => TransportError::Timeout(self.config.timeout),
                        other => TransportError::Io(other.to_string()),
                    })?;
                let status = resp.status().as_u16();
                let text = resp
                    .body_mut()
                    .read_to_string()
                    .map_err(|e| TransportError::Io(e.to_string()))?;
                if status >= 500 {
                    return Err(TransportError::Io(format!("server returned {status}: {}", excerpt(&text))));
                }
                if status >= 400 {
                    return Err(TransportError::protocol(format!("server rejected request with {status}"), &text));
                }
                text
            }
            Backend::Process {
                program,
                args,
                channel,
            } => {
                let mut guard = channel.lock().unwrap_or_else(|p| p.into_inner());
                if guard.is_none() {
                    *guard = Some(ProcessChannel::spawn(program, args)?);
                }
                let line = request.to_string();
                match guard.as_mut().expect("spawned").exchange(&line, self.config.timeout) {
                    Ok(reply) => reply,
                    Err(e) => {
                        *guard = None;
                        return Err(e);
                    }
                }
            }
        };
        let value: Value = serde_json::from_str(&body)
            .map_err(|e| TransportError::protocol(format!("invalid JSON reply: {e}"), &body))?;
        if !value.is_object() {
            return Err(TransportError::protocol("reply is not a JSON object", &body));
        }
        Ok(value)
    }
}
