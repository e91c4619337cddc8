mod support;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use napss_core::assembler::{
    assemble_input, generate_all, AssembledInput, DecodeParams, RemoteSimplifier, Simplifier,
};
use napss_core::corpus::Sentence;
use napss_core::metrics::{evaluate_corpus, EvalInstance, ExternalSemanticScorer, MetricError};
use napss_core::narrative::{KeyPhrase, NarrativePrompt, PhraseToken};
use napss_core::remote::{Endpoint, JsonClient, TransportConfig, TransportError};
use napss_core::summarizer::{extract_summary, ExternalScorer, ExtractiveSummary, SummarizerError};
use serde_json::json;
use support::http::{Reply, TestServer};

fn input(id: &str, text: &str) -> AssembledInput {
    let prompt = NarrativePrompt::from_phrases(vec![KeyPhrase {
        sentence_index: 0,
        tokens: vec![PhraseToken {
            id: 1,
            form: "found".into(),
        }],
    }]);
    let summary = ExtractiveSummary {
        doc_id: id.into(),
        selected: vec![Sentence::new(0, text)],
        scores: vec![1.0],
    };
    assemble_input(&prompt, &summary, 1024).unwrap()
}

fn client(base: &str, timeout_ms: u64, retries: u32) -> JsonClient {
    JsonClient::new(
        base.parse::<Endpoint>().unwrap(),
        TransportConfig {
            timeout: Duration::from_millis(timeout_ms),
            retries,
        },
    )
}

fn echo_reply(req: &support::http::Recorded) -> Reply {
    Reply::json(json!({"id": req.body["id"], "output": req.body["input"]}))
}

#[test]
fn echo_server_round_trip() {
    let server = TestServer::start(|_, req| echo_reply(req));
    let sim = RemoteSimplifier::new(client(&server.base, 2000, 0), "run1");
    let i = input("d1", "Two trials were found.");
    let r = sim.generate(&i, &DecodeParams::default()).unwrap();
    assert_eq!(r.doc_id, "d1");
    assert_eq!(r.generated_pls, i.rendered);
    assert_eq!(r.truncated, None);
    let seen = server.requests();
    assert_eq!(seen.len(), 1);
    assert_eq!(seen[0].path, "/generate");
    assert_eq!(seen[0].idempotency_key.as_deref(), Some("run1:d1"));
    assert_eq!(seen[0].body, RemoteSimplifier::request_body(&i, &DecodeParams::default()));
}

#[test]
fn greedy_decode_is_repeatable() {
    let server = TestServer::start(|_, req| {
        let text = req.body["input"].as_str().unwrap_or("").to_uppercase();
        Reply::json(json!({"id": req.body["id"], "output": text}))
    });
    let sim = RemoteSimplifier::new(client(&server.base, 2000, 0), "r");
    let i = input("d", "Same input.");
    let a = sim.generate(&i, &DecodeParams::default()).unwrap();
    let b = sim.generate(&i, &DecodeParams::default()).unwrap();
    assert_eq!(a.generated_pls, b.generated_pls);
}

#[test]
fn truncation_flag_and_model_tag_are_read() {
    let server = TestServer::start(|_, req| {
        Reply::json(json!({"id": req.body["id"], "output": "short", "truncated": true, "model": "bart-tiny"}))
    });
    let sim = RemoteSimplifier::new(client(&server.base, 2000, 0), "r");
    let r = sim.generate(&input("d", "Long input."), &DecodeParams::default()).unwrap();
    assert_eq!(r.truncated, Some(true));
    assert_eq!(r.model_tag, "bart-tiny");
}

#[test]
fn empty_output_is_a_protocol_error_without_retry() {
    let server = TestServer::start(|_, req| Reply::json(json!({"id": req.body["id"], "output": ""})));
    let sim = RemoteSimplifier::new(client(&server.base, 2000, 3), "r");
    let err = sim.generate(&input("d", "x."), &DecodeParams::default()).unwrap_err();
    assert!(matches!(err, TransportError::Protocol { ref message, .. } if message.contains("empty")));
    assert_eq!(server.requests().len(), 1);
}

#[test]
fn malformed_reply_carries_payload_excerpt() {
    let server = TestServer::start(|_, _| Reply::raw(200, &format!("not json {}", "x".repeat(400))));
    let sim = RemoteSimplifier::new(client(&server.base, 2000, 2), "r");
    match sim.generate(&input("d", "x."), &DecodeParams::default()) {
        Err(TransportError::Protocol { excerpt, .. }) => {
            assert!(excerpt.starts_with("not json"));
            assert!(excerpt.len() < 300);
        }
        other => panic!("unexpected {other:?}"),
    }
    assert_eq!(server.requests().len(), 1);
}

#[test]
fn mismatched_id_is_rejected() {
    let server = TestServer::start(|_, _| Reply::json(json!({"id": "other", "output": "text"})));
    let sim = RemoteSimplifier::new(client(&server.base, 2000, 0), "r");
    let err = sim.generate(&input("d", "x."), &DecodeParams::default()).unwrap_err();
    assert!(matches!(err, TransportError::Protocol { ref message, .. } if message.contains("does not match")));
}

#[test]
fn server_error_is_retried_with_the_same_key() {
    let server = TestServer::start(|n, req| if n == 0 { Reply::raw(503, "busy") } else { echo_reply(req) });
    let sim = RemoteSimplifier::new(client(&server.base, 2000, 2), "run7");
    let i = input("d9", "Retry me.");
    let r = sim.generate(&i, &DecodeParams::default()).unwrap();
    assert_eq!(r.generated_pls, i.rendered);
    let seen = server.requests();
    assert_eq!(seen.len(), 2);
    assert!(seen.iter().all(|s| s.idempotency_key.as_deref() == Some("run7:d9")));
}

#[test]
fn client_error_is_not_retried() {
    let server = TestServer::start(|_, _| Reply::raw(400, r#"{"error": "bad params"}"#));
    let sim = RemoteSimplifier::new(client(&server.base, 2000, 2), "r");
    let err = sim.generate(&input("d", "x."), &DecodeParams::default()).unwrap_err();
    assert!(matches!(err, TransportError::Protocol { ref excerpt, .. } if excerpt.contains("bad params")));
    assert_eq!(server.requests().len(), 1);
}

#[test]
fn slow_server_times_out_after_retries() {
    let server = TestServer::start(|_, req| echo_reply(req).delayed(Duration::from_millis(1500)));
    let sim = RemoteSimplifier::new(client(&server.base, 200, 1), "r");
    let err = sim.generate(&input("d", "x."), &DecodeParams::default()).unwrap_err();
    assert!(matches!(err, TransportError::Timeout(_)), "{err:?}");
    assert_eq!(server.requests().len(), 2);
}

#[test]
fn generate_all_bounds_concurrency_and_keeps_order() {
    let active = Arc::new(AtomicUsize::new(0));
    let peak = Arc::new(AtomicUsize::new(0));
    let (a, p) = (Arc::clone(&active), Arc::clone(&peak));
    let server = TestServer::start(move |_, req| {
        let now = a.fetch_add(1, Ordering::SeqCst) + 1;
        p.fetch_max(now, Ordering::SeqCst);
        std::thread::sleep(Duration::from_millis(20));
        a.fetch_sub(1, Ordering::SeqCst);
        echo_reply(req)
    });
    let sim = RemoteSimplifier::new(client(&server.base, 5000, 0), "r");
    let inputs: Vec<_> = (0..12).map(|i| input(&format!("d{i}"), "Text here.")).collect();
    let out = generate_all(&inputs, &sim, &DecodeParams::default(), 3);
    let ids: Vec<String> = out.into_iter().map(|r| r.unwrap().doc_id).collect();
    assert_eq!(ids, (0..12).map(|i| format!("d{i}")).collect::<Vec<_>>());
    assert!(peak.load(Ordering::SeqCst) <= 3);
}

#[test]
fn external_sentence_scorer() {
    let server = TestServer::start(|_, req| {
        let n = req.body["sentences"].as_array().map_or(0, Vec::len);
        let scores: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 0.9 } else { 0.1 }).collect();
        Reply::json(json!({"doc_id": req.body["doc_id"], "scores": scores}))
    });
    let scorer = ExternalScorer::new(client(&server.base, 2000, 0));
    let doc: Vec<Sentence> = (0..3).map(|i| Sentence::new(i, format!("Sentence {i}."))).collect();
    let s = extract_summary("doc", &doc, &scorer, 0.5).unwrap();
    assert_eq!(s.indices(), [0, 2]);
    let seen = server.requests();
    assert_eq!(seen[0].path, "/score");
    assert_eq!(seen[0].body, json!({"doc_id": "doc", "sentences": ["Sentence 0.", "Sentence 1.", "Sentence 2."]}));
}

#[test]
fn external_sentence_scorer_with_wrong_count() {
    let server = TestServer::start(|_, req| Reply::json(json!({"doc_id": req.body["doc_id"], "scores": [0.5]})));
    let scorer = ExternalScorer::new(client(&server.base, 2000, 0));
    let doc: Vec<Sentence> = (0..3).map(|i| Sentence::new(i, "A b.")).collect();
    assert!(matches!(
        extract_summary("doc", &doc, &scorer, 0.5),
        Err(SummarizerError::ScoreCount { expected: 3, got: 1 })
    ));
}

#[test]
fn semantic_scorer_hook_reports_best_reference() {
    let server = TestServer::start(|_, req| {
        assert!(req.body["candidate"].is_string());
        Reply::json(json!({"doc_id": req.body["doc_id"], "scores": [0.25, 0.75]}))
    });
    let scorer = ExternalSemanticScorer::new(client(&server.base, 2000, 0));
    let item = EvalInstance {
        doc_id: "d".into(),
        source: "The source text.".into(),
        candidate: "The output text.".into(),
        references: vec!["One.".into(), "Two.".into()],
    };
    let report = evaluate_corpus(std::slice::from_ref(&item), Some(&scorer)).unwrap();
    assert_eq!(report.per_doc[0].semantic, Some(0.75));
    assert_eq!(report.mean.semantic, Some(0.75));
    assert_eq!(report.config.semantic_scorer.as_deref(), Some(server.base.as_str()));
    assert_eq!(server.requests()[0].path, "/semantic");

    let bad = TestServer::start(|_, req| Reply::json(json!({"doc_id": req.body["doc_id"], "scores": [0.5]})));
    let scorer = ExternalSemanticScorer::new(client(&bad.base, 2000, 0));
    assert!(matches!(
        evaluate_corpus(&[item], Some(&scorer)),
        Err(MetricError::Document { .. })
    ));
}

const PY_ADAPTER: &str = r#"
import json, sys
for line in sys.stdin:
    req = json.loads(line)
    out = req["input"].replace("</s>", " | ")
    sys.stdout.write(json.dumps({"id": req["id"], "output": out, "model": "py-echo"}) + "\n")
    sys.stdout.flush()
"#;

#[test]
fn subprocess_adapter_speaks_ndjson() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("adapter.py");
    std::fs::write(&script, PY_ADAPTER).unwrap();
    let endpoint = format!("exec:python3 {}", script.display());
    let sim = RemoteSimplifier::new(client(&endpoint, 10_000, 0), "r");
    let inputs: Vec<_> = (0..4).map(|i| input(&format!("d{i}"), "Two trials.")).collect();
    for i in &inputs {
        let r = sim.generate(i, &DecodeParams::default()).unwrap();
        assert_eq!(r.generated_pls, i.rendered.replace("</s>", " | "));
        assert_eq!(r.model_tag, "py-echo");
    }
    let all = generate_all(&inputs, &sim, &DecodeParams::default(), 2);
    assert!(all.iter().all(Result::is_ok));
}

#[test]
fn subprocess_silence_times_out_and_respawns() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("mute.py");
    std::fs::write(&script, "import sys, time\nfor line in sys.stdin:\n    time.sleep(30)\n").unwrap();
    let endpoint = format!("exec:python3 {}", script.display());
    let sim = RemoteSimplifier::new(client(&endpoint, 300, 1), "r");
    let err = sim.generate(&input("d", "x."), &DecodeParams::default()).unwrap_err();
    assert!(matches!(err, TransportError::Timeout(_)));
}
