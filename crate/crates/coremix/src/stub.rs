//! In-process protocol stubs for the generate/embed wire protocol.
//!
//! Tests run the remote clients against these stubs to prove the wire
//! path is byte-equivalent to the in-process mocks, and to exercise each
//! failure mode (error statuses, timeouts, contract violations). They
//! also serve as the reference implementation for real backend adapters:
//! `coremix stub` exposes one on a fixed address.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::Duration;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use coremix_core::{EncoderBackend, GenerationRequest, GeneratorBackend, MockEncoder, MockGenerator};
use tiny_http::{Header, Response, Server};

use crate::imageio;

#[derive(Debug, Clone, PartialEq)]
pub enum StubBehavior {
    /// Delegate to [`MockGenerator`]/[`MockEncoder`].
    EchoMock,
    /// Respond to every request with this status and message.
    FixedError { status: u16, message: String },
    /// Sleep before answering (then behave like `EchoMock`); lets clients
    /// exercise their timeout path.
    Delay(Duration),
    /// Violate the geometry contract: images come back at the wrong size
    /// and embedding dimensions change after the first response.
    WrongDimension,
    /// Return an all-zero embedding vector.
    ZeroEmbedding,
}

#[derive(Debug, thiserror::Error)]
pub enum StubError {
    #[error("failed to bind stub server: {0}")]
    Bind(String),
}

/// A running stub; shuts down when dropped.
pub struct StubHandle {
    base_url: String,
    server: Arc<Server>,
    workers: Vec<JoinHandle<()>>,
}

impl StubHandle {
    /// Base URL (`http://127.0.0.1:<port>`) to point clients at.
    pub fn url(&self) -> &str {
        &self.base_url
    }
}

impl Drop for StubHandle {
    fn drop(&mut self) {
        self.server.unblock();
        for worker in self.workers.drain(..) {
            let _ = worker.join();
        }
    }
}

/// Serves `/generate` and `/embed` on an ephemeral localhost port.
pub fn serve_stub(behavior: StubBehavior) -> Result<StubHandle, StubError> {
    serve_stub_on("127.0.0.1:0", behavior)
}

/// Serves on an explicit address (the `coremix stub` subcommand).
pub fn serve_stub_on(addr: &str, behavior: StubBehavior) -> Result<StubHandle, StubError> {
    let server = Arc::new(Server::http(addr).map_err(|e| StubError::Bind(e.to_string()))?);
    let base_url = format!("http://{}", server.server_addr());
    let state = Arc::new(StubState { behavior, embed_calls: AtomicUsize::new(0) });
    let workers = (0..4)
        .map(|_| {
            let server = server.clone();
            let state = state.clone();
            std::thread::spawn(move || {
                while let Ok(request) = server.recv() {
                    state.handle(request);
                }
            })
        })
        .collect();
    Ok(StubHandle { base_url, server, workers })
}

struct StubState {
    behavior: StubBehavior,
    embed_calls: AtomicUsize,
}

fn text_response(status: u16, body: impl Into<String>) -> Response<std::io::Cursor<Vec<u8>>> {
    Response::from_data(body.into().into_bytes()).with_status_code(status)
}

fn png_response(bytes: Vec<u8>) -> Response<std::io::Cursor<Vec<u8>>> {
    Response::from_data(bytes)
        .with_status_code(200)
        .with_header("Content-Type: image/png".parse::<Header>().expect("static header"))
}

fn json_response(body: String) -> Response<std::io::Cursor<Vec<u8>>> {
    Response::from_data(body.into_bytes())
        .with_status_code(200)
        .with_header("Content-Type: application/json".parse::<Header>().expect("static header"))
}

impl StubState {
    fn handle(&self, mut request: tiny_http::Request) {
        let mut body = Vec::new();
        if request.as_reader().read_to_end(&mut body).is_err() {
            let _ = request.respond(text_response(400, "unreadable body"));
            return;
        }
        match &self.behavior {
            StubBehavior::FixedError { status, message } => {
                let _ = request.respond(text_response(*status, message.clone()));
                return;
            }
            StubBehavior::Delay(duration) => std::thread::sleep(*duration),
            _ => {}
        }
        let response = match request.url() {
            "/generate" => self.generate(&body),
            "/embed" => self.embed(&body),
            other => text_response(404, format!("unknown endpoint {other}")),
        };
        let _ = request.respond(response);
    }

    fn generate(&self, body: &[u8]) -> Response<std::io::Cursor<Vec<u8>>> {
        let request: GenerationRequest = match serde_json::from_slice(body) {
            Ok(r) => r,
            Err(e) => return text_response(400, format!("bad request body: {e}")),
        };
        let request = match self.behavior {
            // Honor the protocol shape but return a different geometry.
            StubBehavior::WrongDimension => GenerationRequest {
                width: request.width + 8,
                height: request.height,
                ..request
            },
            _ => request,
        };
        match MockGenerator::new().generate(&request) {
            Ok(image) => match imageio::encode_png(&image) {
                Ok(bytes) => png_response(bytes),
                Err(e) => text_response(500, format!("encode failure: {e}")),
            },
            Err(e) => text_response(400, e.to_string()),
        }
    }

    fn embed(&self, body: &[u8]) -> Response<std::io::Cursor<Vec<u8>>> {
        #[derive(serde::Deserialize)]
        struct EmbedBody {
            image: String,
        }
        let parsed: EmbedBody = match serde_json::from_slice(body) {
            Ok(p) => p,
            Err(e) => return text_response(400, format!("bad request body: {e}")),
        };
        let png = match BASE64.decode(parsed.image.as_bytes()) {
            Ok(p) => p,
            Err(e) => return text_response(400, format!("bad base64 image: {e}")),
        };
        let image = match imageio::decode_png(&png) {
            Ok(i) => i,
            Err(e) => return text_response(400, format!("undecodable image: {e}")),
        };
        let call = self.embed_calls.fetch_add(1, Ordering::SeqCst);
        let vector: Vec<f64> = match self.behavior {
            StubBehavior::ZeroEmbedding => vec![0.0; 192],
            _ => match MockEncoder::new().embed(&image) {
                Ok(embedding) => {
                    let mut values = embedding.values().to_vec();
                    // After the first response, start truncating.
                    if self.behavior == StubBehavior::WrongDimension && call > 0 {
                        values.truncate(values.len() / 2);
                    }
                    values
                }
                Err(e) => return text_response(400, e.to_string()),
            },
        };
        json_response(
            serde_json::to_string(&serde_json::json!({ "vector": vector }))
                .expect("vector serialization is infallible"),
        )
    }
}
