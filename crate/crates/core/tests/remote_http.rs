//! Wire-format and retry behavior of the remote backend against a local
//! mock HTTP server.

use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use ragline_core::backend::{
    BackendError, BackoffConfig, ChatBackend, ChatMessage, CompletionRequest, RemoteBackend,
    RemoteConfig,
};

/// One planned server response.
#[derive(Clone)]
enum Reply {
    Json(u16, String),
    /// Sleep before answering, to trip client timeouts.
    Stall(Duration),
}

struct MockServer {
    addr: String,
    bodies: Arc<Mutex<Vec<String>>>,
    handle: Option<std::thread::JoinHandle<()>>,
}

impl MockServer {
    fn start(replies: Vec<Reply>) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = format!("http://{}", listener.local_addr().unwrap());
        let bodies = Arc::new(Mutex::new(Vec::new()));
        let bodies_in = bodies.clone();
        let handle = std::thread::spawn(move || {
            for reply in replies {
                let (mut stream, _) = match listener.accept() {
                    Ok(s) => s,
                    Err(_) => return,
                };
                let body = read_request_body(&mut stream);
                bodies_in.lock().unwrap().push(body);
                match reply {
                    Reply::Json(status, json) => {
                        let response = format!(
                            "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{json}",
                            json.len()
                        );
                        let _ = stream.write_all(response.as_bytes());
                    }
                    Reply::Stall(d) => {
                        std::thread::sleep(d);
                        let _ = stream.write_all(b"HTTP/1.1 200 OK\r\nContent-Length: 0\r\nConnection: close\r\n\r\n");
                    }
                }
            }
        });
        Self {
            addr,
            bodies,
            handle: Some(handle),
        }
    }

    fn finish(mut self) -> Vec<String> {
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
        Arc::try_unwrap(self.bodies).unwrap().into_inner().unwrap()
    }
}

fn read_request_body(stream: &mut TcpStream) -> String {
    stream
        .set_read_timeout(Some(Duration::from_secs(5)))
        .unwrap();
    let mut buf = Vec::new();
    let mut chunk = [0u8; 4096];
    let header_end;
    loop {
        let n = stream.read(&mut chunk).unwrap_or(0);
        if n == 0 {
            return String::new();
        }
        buf.extend_from_slice(&chunk[..n]);
        if let Some(pos) = find_subsequence(&buf, b"\r\n\r\n") {
            header_end = pos + 4;
            break;
        }
    }
    let headers = String::from_utf8_lossy(&buf[..header_end]).to_string();
    let content_length: usize = headers
        .lines()
        .find_map(|l| {
            let (name, value) = l.split_once(':')?;
            name.eq_ignore_ascii_case("content-length")
                .then(|| value.trim().parse().ok())?
        })
        .unwrap_or(0);
    while buf.len() < header_end + content_length {
        let n = stream.read(&mut chunk).unwrap_or(0);
        if n == 0 {
            break;
        }
        buf.extend_from_slice(&chunk[..n]);
    }
    String::from_utf8_lossy(&buf[header_end..]).to_string()
}

fn find_subsequence(haystack: &[u8], needle: &[u8]) -> Option<usize> {
    haystack.windows(needle.len()).position(|w| w == needle)
}

fn fast_backoff(max_attempts: u32) -> BackoffConfig {
    BackoffConfig {
        base_ms: 5,
        factor: 2.0,
        max_attempts,
        max_backoff_ms: 50,
    }
}

fn chat_json(content: &str) -> String {
    serde_json::json!({
        "choices": [{"message": {"role": "assistant", "content": content}}],
        "usage": {"prompt_tokens": 10, "completion_tokens": 3, "total_tokens": 13}
    })
    .to_string()
}

fn request() -> CompletionRequest {
    CompletionRequest {
        messages: vec![
            ChatMessage::system("be brief"),
            ChatMessage::user("hello there"),
        ],
        temperature: 0.0,
        max_tokens: 128,
        model_id: "default".to_string(),
    }
}

#[test]
fn sends_openai_compatible_body_and_parses_reply() {
    let server = MockServer::start(vec![Reply::Json(200, chat_json("hi!"))]);
    let mut cfg = RemoteConfig::new(&server.addr, "test-model");
    cfg.api_key = Some("sekret".to_string());
    cfg.backoff = fast_backoff(2);
    let backend = RemoteBackend::new(cfg).unwrap();

    let completion = backend.chat(&request()).unwrap();
    assert_eq!(completion.text, "hi!");
    assert_eq!(completion.usage.total_tokens, 13);

    let bodies = server.finish();
    let body: serde_json::Value = serde_json::from_str(&bodies[0]).unwrap();
    assert_eq!(body["model"], "test-model");
    assert_eq!(body["temperature"], 0.0);
    assert_eq!(body["max_tokens"], 128);
    assert_eq!(body["messages"][0]["role"], "system");
    assert_eq!(body["messages"][1]["content"], "hello there");
}

#[test]
fn rate_limit_is_retried_until_success() {
    let server = MockServer::start(vec![
        Reply::Json(429, r#"{"error": "slow down"}"#.to_string()),
        Reply::Json(429, r#"{"error": "slow down"}"#.to_string()),
        Reply::Json(200, chat_json("third time lucky")),
    ]);
    let mut cfg = RemoteConfig::new(&server.addr, "m");
    cfg.backoff = fast_backoff(5);
    let backend = RemoteBackend::new(cfg).unwrap();
    let completion = backend.chat(&request()).unwrap();
    assert_eq!(completion.text, "third time lucky");
    assert_eq!(server.finish().len(), 3);
}

#[test]
fn rate_limit_surfaces_after_max_attempts() {
    let server = MockServer::start(vec![
        Reply::Json(429, "{}".to_string()),
        Reply::Json(429, "{}".to_string()),
    ]);
    let mut cfg = RemoteConfig::new(&server.addr, "m");
    cfg.backoff = fast_backoff(2);
    let backend = RemoteBackend::new(cfg).unwrap();
    match backend.chat(&request()) {
        Err(BackendError::RateLimited(_)) => {}
        other => panic!("expected RateLimited, got {other:?}"),
    }
    assert_eq!(server.finish().len(), 2);
}

#[test]
fn client_timeout_becomes_a_timeout_error() {
    let server = MockServer::start(vec![Reply::Stall(Duration::from_millis(600))]);
    let mut cfg = RemoteConfig::new(&server.addr, "m");
    cfg.timeout_ms = 100;
    cfg.backoff = fast_backoff(1);
    let backend = RemoteBackend::new(cfg).unwrap();
    match backend.chat(&request()) {
        Err(BackendError::Timeout(_)) => {}
        other => panic!("expected Timeout, got {other:?}"),
    }
    drop(server);
}

#[test]
fn non_retryable_client_error_is_immediate() {
    let server = MockServer::start(vec![Reply::Json(400, r#"{"error":"bad"}"#.to_string())]);
    let mut cfg = RemoteConfig::new(&server.addr, "m");
    cfg.backoff = fast_backoff(5);
    let backend = RemoteBackend::new(cfg).unwrap();
    match backend.chat(&request()) {
        Err(BackendError::Http { status: 400, .. }) => {}
        other => panic!("expected Http 400, got {other:?}"),
    }
    assert_eq!(server.finish().len(), 1);
}

#[test]
fn remote_embedder_speaks_the_embeddings_wire_format() {
    let reply = serde_json::json!({
        "data": [
            {"embedding": [1.0, 0.0, 0.0, 0.0]},
            {"embedding": [0.0, 2.0, 0.0, 0.0]}
        ]
    })
    .to_string();
    let server = MockServer::start(vec![Reply::Json(200, reply)]);
    let embedder = ragline_core::retrieval::RemoteEmbedder::new(
        &server.addr,
        "embed-model",
        4,
        None,
        2_000,
    )
    .unwrap();
    let vs = ragline_core::retrieval::embed_normalized(
        &embedder,
        &["first".to_string(), "second".to_string()],
    )
    .unwrap();
    assert_eq!(vs.len(), 2);
    // Engine-side normalization rescaled the second vector to unit norm.
    assert!((vs[1].values[1] - 1.0).abs() < 1e-6);

    let bodies = server.finish();
    let body: serde_json::Value = serde_json::from_str(&bodies[0]).unwrap();
    assert_eq!(body["model"], "embed-model");
    assert_eq!(body["input"][0], "first");
    assert_eq!(body["input"][1], "second");
}
