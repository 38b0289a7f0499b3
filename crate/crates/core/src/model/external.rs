//! External-model adapter: newline-delimited JSON over a child process's
//! standard streams.
//!
//! Handshake: `{"op":"schema"}` -> `{"n_features":m,"n_classes":K,"encoding":"onehot"|"ordinal"}`.
//! Predict:   `{"op":"predict","instances":[[...],...]}` -> `{"probs":[[...],...]}`
//! with row order preserved. One request in flight at a time.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{Receiver, RecvTimeoutError};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Encoding, ProbabilityVector};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

/// Tolerance for the response sum-to-one invariant.
pub const PROB_SUM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Serialize)]
struct SchemaRequest {
    op: &'static str,
}

#[derive(Debug, Serialize)]
struct PredictRequest<'a> {
    op: &'static str,
    instances: &'a [Vec<f64>],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchemaResponse {
    pub n_features: usize,
    pub n_classes: usize,
    pub encoding: Encoding,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PredictResponse {
    pub probs: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Sent,
    Received,
}

pub struct ExternalModel {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
    pub info: SchemaResponse,
    pub timeout: Duration,
    /// Raw protocol lines in order, for conformance checks and debugging.
    pub transcript: Vec<(Direction, String)>,
}

impl ExternalModel {
    /// Launches `command` and completes the schema handshake.
    pub fn spawn(command: &[String], timeout: Duration) -> Result<Self> {
        if command.is_empty() {
            return Err(Error::InvalidConfig("external command is empty".into()));
        }
        let mut child = Command::new(&command[0])
            .args(&command[1..])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| Error::Backend(format!("failed to launch {:?}: {e}", command[0])))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");

        let (tx, rx) = std::sync::mpsc::channel();
        std::thread::spawn(move || {
            let reader = BufReader::new(stdout);
            for line in reader.lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });

        let mut model = ExternalModel {
            child,
            stdin,
            lines: rx,
            info: SchemaResponse {
                n_features: 0,
                n_classes: 0,
                encoding: Encoding::Ordinal,
            },
            timeout,
            transcript: Vec::new(),
        };
        let request = serde_json::to_string(&SchemaRequest { op: "schema" })?;
        let line = model.round_trip(&request)?;
        model.info = serde_json::from_str(&line)
            .map_err(|e| Error::Protocol(format!("malformed schema response: {e}: {line}")))?;
        if model.info.n_classes < 2 {
            return Err(Error::Protocol(format!(
                "external model reports {} classes",
                model.info.n_classes
            )));
        }
        Ok(model)
    }

    fn round_trip(&mut self, request: &str) -> Result<String> {
        self.transcript.push((Direction::Sent, request.to_string()));
        writeln!(self.stdin, "{request}")
            .and_then(|_| self.stdin.flush())
            .map_err(|e| Error::Backend(format!("external process closed stdin: {e}")))?;
        let line = match self.lines.recv_timeout(self.timeout) {
            Ok(Ok(line)) => line,
            Ok(Err(e)) => return Err(Error::Backend(format!("read from external model: {e}"))),
            Err(RecvTimeoutError::Timeout) => return Err(Error::Timeout(self.timeout)),
            Err(RecvTimeoutError::Disconnected) => {
                return Err(Error::Backend("external process exited".into()))
            }
        };
        self.transcript.push((Direction::Received, line.clone()));
        Ok(line)
    }

    /// One batched predict exchange. Same contract as the builtin model:
    /// one probability vector per instance, row order preserved.
    pub fn predict(&mut self, instances: &[Vec<f64>]) -> Result<Vec<ProbabilityVector>> {
        let request = serde_json::to_string(&PredictRequest {
            op: "predict",
            instances,
        })?;
        let line = self.round_trip(&request)?;
        let response: PredictResponse = serde_json::from_str(&line)
            .map_err(|e| Error::Protocol(format!("malformed response line: {e}: {line}")))?;
        if response.probs.len() != instances.len() {
            return Err(Error::Protocol(format!(
                "expected {} probability rows, got {}",
                instances.len(),
                response.probs.len()
            )));
        }
        response
            .probs
            .into_iter()
            .map(|probs| {
                let pv = ProbabilityVector { probs };
                pv.validate(self.info.n_classes, PROB_SUM_TOLERANCE)
                    .map_err(|e| Error::Protocol(format!("invalid probability vector: {e}")))?;
                Ok(pv)
            })
            .collect()
    }
}

impl Drop for ExternalModel {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}
