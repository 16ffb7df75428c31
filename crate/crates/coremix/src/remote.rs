//! HTTP clients for remote generate/embed backends.
//!
//! Wire protocol:
//! - `POST {endpoint}/generate`, JSON body with keys `prompt`,
//!   `negative_prompt`, `guidance_scale`, `width`, `height`, `seed`;
//!   success is `200` with PNG bytes (`image/png`).
//! - `POST {endpoint}/embed`, JSON body `{"image": "<base64 PNG>"}`;
//!   success is `200` with `{"vector": [..]}`.
//!
//! `4xx` carries a text body explaining the rejection; `5xx` and timeouts
//! are retryable.

use std::sync::OnceLock;
use std::time::Duration;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use coremix_core::{
    BackendCapabilities, BackendError, Embedding, EncoderBackend, GenerationRequest,
    GeneratorBackend, ImageBuffer,
};

use crate::imageio;

/// Body size cap for responses (PNGs of a few thousand pixels square fit
/// comfortably).
const BODY_LIMIT: u64 = 256 * 1024 * 1024;

fn agent(timeout: Duration) -> ureq::Agent {
    ureq::Agent::config_builder()
        .timeout_global(Some(timeout))
        .http_status_as_error(false)
        .build()
        .into()
}

fn map_transport(err: ureq::Error) -> BackendError {
    match err {
        ureq::Error::Timeout(_) => BackendError::Timeout,
        other => BackendError::Transport(other.to_string()),
    }
}

/// Reads a response, mapping non-2xx statuses onto typed errors.
fn read_body(response: &mut ureq::http::Response<ureq::Body>) -> Result<Vec<u8>, BackendError> {
    let status = response.status().as_u16();
    let bytes = response
        .body_mut()
        .with_config()
        .limit(BODY_LIMIT)
        .read_to_vec()
        .map_err(map_transport)?;
    match status {
        200..=299 => Ok(bytes),
        400..=499 => Err(BackendError::Rejected {
            status,
            message: String::from_utf8_lossy(&bytes).into_owned(),
        }),
        _ => Err(BackendError::Server {
            status,
            message: String::from_utf8_lossy(&bytes).into_owned(),
        }),
    }
}

/// Client for a remote text-to-image service.
pub struct RemoteGenerator {
    endpoint: String,
    agent: ureq::Agent,
}

impl RemoteGenerator {
    pub fn new(endpoint: impl Into<String>, timeout: Duration) -> Self {
        Self {
            endpoint: endpoint.into().trim_end_matches('/').to_string(),
            agent: agent(timeout),
        }
    }
}

impl GeneratorBackend for RemoteGenerator {
    fn generate(&self, request: &GenerationRequest) -> Result<ImageBuffer, BackendError> {
        request.validate()?;
        let mut response = self
            .agent
            .post(format!("{}/generate", self.endpoint))
            .send_json(request)
            .map_err(map_transport)?;
        let bytes = read_body(&mut response)?;
        let image = imageio::decode_png(&bytes)
            .map_err(|e| BackendError::Protocol(format!("undecodable image payload: {e}")))?;
        if image.width() != request.width || image.height() != request.height {
            return Err(BackendError::Protocol(format!(
                "generator returned {}x{} for a {}x{} request",
                image.width(),
                image.height(),
                request.width,
                request.height
            )));
        }
        Ok(image)
    }

    fn capabilities(&self) -> BackendCapabilities {
        BackendCapabilities {
            max_width: 4096,
            max_height: 4096,
            supports_negative_prompt: true,
            // Remote samplers make no determinism promise by default.
            deterministic: false,
        }
    }
}

#[derive(serde::Serialize)]
struct EmbedRequestBody {
    image: String,
}

#[derive(serde::Deserialize)]
struct EmbedResponseBody {
    vector: Vec<f64>,
}

/// Client for a remote image-encoder service. The embedding dimension is
/// learned from the first response and enforced afterwards.
pub struct RemoteEncoder {
    endpoint: String,
    agent: ureq::Agent,
    dimension: OnceLock<usize>,
}

impl RemoteEncoder {
    pub fn new(endpoint: impl Into<String>, timeout: Duration) -> Self {
        Self {
            endpoint: endpoint.into().trim_end_matches('/').to_string(),
            agent: agent(timeout),
            dimension: OnceLock::new(),
        }
    }
}

impl EncoderBackend for RemoteEncoder {
    fn embed(&self, image: &ImageBuffer) -> Result<Embedding, BackendError> {
        let png = imageio::encode_png(image)
            .map_err(|e| BackendError::Protocol(format!("failed to encode request image: {e}")))?;
        let body = EmbedRequestBody { image: BASE64.encode(png) };
        let mut response = self
            .agent
            .post(format!("{}/embed", self.endpoint))
            .send_json(&body)
            .map_err(map_transport)?;
        let bytes = read_body(&mut response)?;
        let parsed: EmbedResponseBody = serde_json::from_slice(&bytes)
            .map_err(|e| BackendError::Protocol(format!("malformed embed response: {e}")))?;
        let got = parsed.vector.len();
        let known = *self.dimension.get_or_init(|| got);
        if got != known {
            return Err(BackendError::Protocol(format!(
                "embedding dimension changed across responses: {known} then {got}"
            )));
        }
        Ok(Embedding::new(parsed.vector, "remote")?)
    }

    fn dimension(&self) -> Option<usize> {
        self.dimension.get().copied()
    }
}
