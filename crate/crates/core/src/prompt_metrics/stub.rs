//! Local chat-completions server for tests and offline runs.
//!
//! Serves `POST .../chat/completions` on 127.0.0.1 and answers each request
//! through a caller-supplied responder. One thread per connection;
//! connections are closed after one response.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;

use serde_json::{json, Value};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct StubRequest {
    pub model: String,
    /// Content of the last message.
    pub prompt: String,
    pub body: Value,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StubReply {
    /// 200 with a chat-completions body carrying this content.
    Content(String),
    /// Raw status and body.
    Status(u16, String),
}

type Responder = dyn Fn(&StubRequest) -> StubReply + Send + Sync;

pub struct StubServer {
    addr: SocketAddr,
    requests: Arc<AtomicUsize>,
    stop: Arc<AtomicBool>,
    handle: Option<JoinHandle<()>>,
}

impl StubServer {
    /// Binds an ephemeral port.
    pub fn start(responder: impl Fn(&StubRequest) -> StubReply + Send + Sync + 'static) -> Result<Self> {
        Self::bind("127.0.0.1:0", responder)
    }

    pub fn bind(addr: &str, responder: impl Fn(&StubRequest) -> StubReply + Send + Sync + 'static) -> Result<Self> {
        let listener = TcpListener::bind(addr).map_err(|e| Error::Transport(format!("bind {addr}: {e}")))?;
        let addr = listener
            .local_addr()
            .map_err(|e| Error::Transport(e.to_string()))?;
        let requests = Arc::new(AtomicUsize::new(0));
        let stop = Arc::new(AtomicBool::new(false));
        let responder: Arc<Responder> = Arc::new(responder);
        let handle = {
            let requests = Arc::clone(&requests);
            let stop = Arc::clone(&stop);
            std::thread::spawn(move || {
                for stream in listener.incoming() {
                    if stop.load(Ordering::SeqCst) {
                        break;
                    }
                    let Ok(stream) = stream else { continue };
                    let requests = Arc::clone(&requests);
                    let responder = Arc::clone(&responder);
                    std::thread::spawn(move || {
                        let _ = serve(stream, &requests, responder.as_ref());
                    });
                }
            })
        };
        Ok(Self {
            addr,
            requests,
            stop,
            handle: Some(handle),
        })
    }

    /// Base URL to put in `LlmConfig::base_url`.
    pub fn base_url(&self) -> String {
        format!("http://{}/v1", self.addr)
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// Completed requests so far.
    pub fn request_count(&self) -> usize {
        self.requests.load(Ordering::SeqCst)
    }

    /// Blocks until the process exits.
    pub fn wait(mut self) {
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

impl Drop for StubServer {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        // wake the accept loop
        let _ = TcpStream::connect(self.addr);
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

fn read_body(reader: &mut BufReader<&TcpStream>) -> std::io::Result<Vec<u8>> {
    let mut content_length = None;
    let mut chunked = false;
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line)? == 0 {
            break;
        }
        let line = line.trim_end();
        if line.is_empty() {
            break;
        }
        if let Some((name, value)) = line.split_once(':') {
            let value = value.trim();
            if name.eq_ignore_ascii_case("content-length") {
                content_length = value.parse::<usize>().ok();
            } else if name.eq_ignore_ascii_case("transfer-encoding") && value.eq_ignore_ascii_case("chunked") {
                chunked = true;
            }
        }
    }
    let mut body = Vec::new();
    if chunked {
        loop {
            let mut size = String::new();
            reader.read_line(&mut size)?;
            let n = usize::from_str_radix(size.trim().split(';').next().unwrap_or("0"), 16).unwrap_or(0);
            if n == 0 {
                break;
            }
            let start = body.len();
            body.resize(start + n, 0);
            reader.read_exact(&mut body[start..])?;
            let mut crlf = [0u8; 2];
            reader.read_exact(&mut crlf)?;
        }
    } else if let Some(n) = content_length {
        body.resize(n, 0);
        reader.read_exact(&mut body)?;
    }
    Ok(body)
}

fn serve(stream: TcpStream, requests: &AtomicUsize, responder: &Responder) -> std::io::Result<()> {
    let mut reader = BufReader::new(&stream);
    let mut request_line = String::new();
    if reader.read_line(&mut request_line)? == 0 {
        return Ok(());
    }
    let body = read_body(&mut reader)?;
    let reply = match serde_json::from_slice::<Value>(&body) {
        Ok(body) if request_line.starts_with("POST") => {
            let prompt = body
                .pointer("/messages")
                .and_then(Value::as_array)
                .and_then(|m| m.last())
                .and_then(|m| m.get("content"))
                .and_then(Value::as_str)
                .unwrap_or_default()
                .to_string();
            let model = body.get("model").and_then(Value::as_str).unwrap_or_default().to_string();
            responder(&StubRequest { model, prompt, body })
        }
        _ => StubReply::Status(400, "expected a JSON POST".into()),
    };
    let (status, payload) = match reply {
        StubReply::Content(content) => (
            200,
            json!({
                "object": "chat.completion",
                "choices": [{"index": 0, "message": {"role": "assistant", "content": content}, "finish_reason": "stop"}],
            })
            .to_string(),
        ),
        StubReply::Status(code, body) => (code, body),
    };
    requests.fetch_add(1, Ordering::SeqCst);
    let mut out = &stream;
    write!(
        out,
        "HTTP/1.1 {status} STUB\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{payload}",
        payload.len()
    )?;
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prompt_metrics::client::{LlmClient, LlmConfig};

    fn config(server: &StubServer) -> LlmConfig {
        LlmConfig {
            base_url: server.base_url(),
            backoff_ms: 0,
            timeout_secs: 10,
            ..LlmConfig::default()
        }
    }

    #[test]
    fn echo_round_trip() {
        let server = StubServer::start(|r| StubReply::Content(format!("Yes. {}", r.prompt.len()))).unwrap();
        let client = LlmClient::new(config(&server)).unwrap();
        assert_eq!(client.complete("abc").unwrap(), "Yes. 3");
        assert_eq!(server.request_count(), 1);
    }

    #[test]
    fn persistent_500_surfaces_transport_error() {
        let server = StubServer::start(|_| StubReply::Status(500, "down".into())).unwrap();
        let client = LlmClient::new(config(&server)).unwrap();
        assert!(matches!(client.complete("x"), Err(Error::Transport(_))));
        assert_eq!(server.request_count(), 5);
    }
}
