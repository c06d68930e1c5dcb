//! The chat-completions client against an in-process HTTP stub.

use std::collections::VecDeque;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::thread;

use nutrient_eval::inference::{run_inference, Backend, BackendConfig, HttpChatBackend, InferenceError};
use nutrient_eval::prompt::{render_prompt, PromptTemplate};
use serde_json::{json, Value};

#[derive(Debug, Clone)]
struct Request {
    path: String,
    headers: Vec<(String, String)>,
    body: Value,
}

struct Stub {
    url: String,
    requests: Arc<Mutex<Vec<Request>>>,
}

/// Serves the queued `(status, body)` responses in order, one per request.
fn stub(responses: Vec<(u16, String)>) -> Stub {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1", listener.local_addr().unwrap());
    let queue = Arc::new(Mutex::new(VecDeque::from(responses)));
    let requests = Arc::new(Mutex::new(Vec::new()));
    let seen = requests.clone();
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            let queue = queue.clone();
            let seen = seen.clone();
            thread::spawn(move || {
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut line = String::new();
                if reader.read_line(&mut line).unwrap_or(0) == 0 {
                    return;
                }
                let path = line.split_whitespace().nth(1).unwrap_or("").to_owned();
                let mut headers = Vec::new();
                loop {
                    let mut h = String::new();
                    reader.read_line(&mut h).unwrap();
                    let h = h.trim_end();
                    if h.is_empty() {
                        break;
                    }
                    let (k, v) = h.split_once(':').unwrap();
                    headers.push((k.trim().to_ascii_lowercase(), v.trim().to_owned()));
                }
                let len: usize =
                    headers.iter().find(|(k, _)| k == "content-length").map_or(0, |(_, v)| v.parse().unwrap());
                let mut body = vec![0; len];
                reader.read_exact(&mut body).unwrap();
                let body = serde_json::from_slice(&body).unwrap_or(Value::Null);
                let (status, reply) = {
                    let mut seen = seen.lock().unwrap();
                    seen.push(Request { path, headers, body });
                    queue.lock().unwrap().pop_front().unwrap_or((500, "exhausted".into()))
                };
                let response = format!(
                    "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{reply}",
                    reply.len()
                );
                stream.write_all(response.as_bytes()).unwrap();
            });
        }
    });
    Stub { url, requests }
}

fn completion(content: &str) -> String {
    json!({"id": "x", "choices": [{"index": 0, "message": {"role": "assistant", "content": content}}]}).to_string()
}

fn config(url: &str, key_env: &str) -> BackendConfig {
    BackendConfig {
        endpoint_url: Some(url.to_owned()),
        api_key_env: key_env.to_owned(),
        retry_backoff_ms: 1,
        request_timeout_secs: 10,
        ..BackendConfig::default()
    }
}

fn bundle(id: &str) -> nutrient_eval::prompt::PromptBundle {
    render_prompt(&PromptTemplate::fixture(Default::default()), id, "TAFFY (15.6)").unwrap()
}

#[test]
fn wire_format_and_verbatim_reply() {
    let reply = "  1293; 48.28; 135.41; 29.22; 13.2; 62.15.\n";
    let s = stub(vec![(200, completion(reply))]);
    std::env::set_var("NUTRIENT_EVAL_TEST_KEY_A", "sk-test-123");
    let cfg = BackendConfig { temperature: 0.0, max_output_tokens: 64, ..config(&s.url, "NUTRIENT_EVAL_TEST_KEY_A") };
    let backend = HttpChatBackend::new(&cfg).unwrap();
    let b = bundle("P1");
    assert_eq!(backend.complete(&b).unwrap(), reply);

    let req = s.requests.lock().unwrap()[0].clone();
    assert_eq!(req.path, "/v1/chat/completions");
    assert!(req.headers.contains(&("authorization".into(), "Bearer sk-test-123".into())));
    assert_eq!(req.body["model"], cfg.model_name);
    assert_eq!(req.body["temperature"], 0.0);
    assert_eq!(req.body["max_tokens"], 64);
    let messages = req.body["messages"].as_array().unwrap();
    assert_eq!(messages.len(), 2);
    assert_eq!(messages[0]["role"], "system");
    assert_eq!(messages[0]["content"], b.system_message);
    assert_eq!(messages[1]["role"], "user");
    assert_eq!(messages[1]["content"], b.user_message);
}

#[test]
fn no_key_no_header() {
    let s = stub(vec![(200, completion("1; 2; 3; 4; 5; 6"))]);
    let backend = HttpChatBackend::new(&config(&s.url, "NUTRIENT_EVAL_TEST_KEY_UNSET")).unwrap();
    backend.complete(&bundle("P1")).unwrap();
    assert!(s.requests.lock().unwrap()[0].headers.iter().all(|(k, _)| k != "authorization"));
}

#[test]
fn status_handling() {
    let s = stub(vec![
        (503, "busy".into()),
        (429, "slow down".into()),
        (400, "{\"error\": \"bad\"}".into()),
        (200, "{\"choices\": []}".into()),
        (200, "not json".into()),
    ]);
    let backend = HttpChatBackend::new(&config(&s.url, "")).unwrap();
    let b = bundle("P1");
    assert!(backend.complete(&b).unwrap_err().retryable);
    assert!(backend.complete(&b).unwrap_err().retryable);
    let e = backend.complete(&b).unwrap_err();
    assert!(!e.retryable && e.message.contains("400"));
    assert!(!backend.complete(&b).unwrap_err().retryable);
    assert!(!backend.complete(&b).unwrap_err().retryable);
}

#[test]
fn retries_then_records_failures() {
    let s = stub(vec![
        (503, "busy".into()),
        (200, completion("1; 2; 3; 4; 5; 6")),
        (400, "nope".into()),
    ]);
    let cfg = BackendConfig { parallelism: 1, max_retries: 2, ..config(&s.url, "") };
    let backend = HttpChatBackend::new(&cfg).unwrap();
    let results = run_inference(&[bundle("A"), bundle("B")], &backend, &cfg, None).unwrap();
    assert_eq!(results[0].raw_text, "1; 2; 3; 4; 5; 6");
    assert_eq!(results[0].attempt_count, 2);
    assert!(results[1].failure.as_deref().unwrap().contains("400"));
    assert_eq!(results[1].attempt_count, 1);
    assert!(results.iter().all(|r| r.attempt_count <= cfg.max_retries + 1));
}

#[test]
fn unreachable_endpoint_fails_before_any_request() {
    let port = {
        let l = TcpListener::bind("127.0.0.1:0").unwrap();
        l.local_addr().unwrap().port()
    };
    let cfg = config(&format!("http://127.0.0.1:{port}/v1"), "");
    let backend = HttpChatBackend::new(&cfg).unwrap();
    let err = run_inference(&[bundle("A")], &backend, &cfg, None).unwrap_err();
    assert!(matches!(err, InferenceError::Unreachable(_)));
}
