//! Minimal external model speaking the line-oriented JSON protocol.
//!
//! Serves as the reference for wiring up real external backends and as the
//! counterparty in protocol conformance tests. Behaviour is selected by the
//! first argument:
//!
//!   fixed          every instance scores [0.3, 0.7] (default)
//!   constant-half  every instance scores [0.5, 0.5]
//!   threshold      p(class 1) = 0.8 if the first feature > 0.5 else 0.2
//!   badsum         probabilities that do not sum to one
//!   malformed      a non-JSON reply to predict requests
//!   slow           sleeps 2 s before answering predict requests
//!
//! Optional second argument sets `n_features` (default 2).

use std::io::{BufRead, Write};

use permute_attack::model::{PredictResponse, SchemaResponse};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let mode = args.get(1).map(String::as_str).unwrap_or("fixed").to_string();
    let n_features: usize = args.get(2).and_then(|v| v.parse().ok()).unwrap_or(2);

    let stdin = std::io::stdin();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();

    for line in stdin.lock().lines() {
        let line = match line {
            Ok(l) => l,
            Err(_) => break,
        };
        let request: serde_json::Value = match serde_json::from_str(&line) {
            Ok(v) => v,
            Err(_) => continue,
        };
        match request["op"].as_str() {
            Some("schema") => {
                let response = SchemaResponse {
                    n_features,
                    n_classes: 2,
                    encoding: permute_attack::model::Encoding::Ordinal,
                };
                writeln!(out, "{}", serde_json::to_string(&response).unwrap()).unwrap();
                out.flush().unwrap();
            }
            Some("predict") => {
                let instances = request["instances"].as_array().cloned().unwrap_or_default();
                if mode == "slow" {
                    std::thread::sleep(std::time::Duration::from_secs(2));
                }
                if mode == "malformed" {
                    writeln!(out, "this is not json").unwrap();
                    out.flush().unwrap();
                    continue;
                }
                let probs: Vec<Vec<f64>> = instances
                    .iter()
                    .map(|inst| match mode.as_str() {
                        "constant-half" => vec![0.5, 0.5],
                        "badsum" => vec![0.3, 0.5],
                        "threshold" => {
                            let x0 = inst
                                .as_array()
                                .and_then(|a| a.first())
                                .and_then(|v| v.as_f64())
                                .unwrap_or(0.0);
                            if x0 > 0.5 {
                                vec![0.2, 0.8]
                            } else {
                                vec![0.8, 0.2]
                            }
                        }
                        _ => vec![0.3, 0.7],
                    })
                    .collect();
                let response = PredictResponse { probs };
                writeln!(out, "{}", serde_json::to_string(&response).unwrap()).unwrap();
                out.flush().unwrap();
            }
            _ => {
                writeln!(out, "{{\"error\":\"unknown op\"}}").unwrap();
                out.flush().unwrap();
            }
        }
    }
}
