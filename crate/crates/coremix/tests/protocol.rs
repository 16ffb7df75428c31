//! Wire-protocol conformance: the remote clients against in-process
//! stubs, including every failure mode.

use std::time::Duration;

use coremix::remote::{RemoteEncoder, RemoteGenerator};
use coremix::stub::{serve_stub, StubBehavior};
use coremix_core::mock::synthetic_original;
use coremix_core::{
    BackendError, EncoderBackend, GenerationRequest, GeneratorBackend, MockEncoder, MockGenerator,
};

const TIMEOUT: Duration = Duration::from_secs(5);

fn request(prompt: &str, width: u32, height: u32, seed: u64) -> GenerationRequest {
    GenerationRequest {
        prompt: prompt.into(),
        negative_prompt: "blurry, distorted".into(),
        guidance_scale: 7.0,
        width,
        height,
        seed,
    }
}

#[test]
fn generate_through_stub_equals_in_process_mock() {
    let stub = serve_stub(StubBehavior::EchoMock).unwrap();
    let remote = RemoteGenerator::new(stub.url(), TIMEOUT);
    let request = request("a cardinal, a bird", 512, 512, 7);
    let over_the_wire = remote.generate(&request).unwrap();
    let in_process = MockGenerator::new().generate(&request).unwrap();
    assert_eq!(over_the_wire, in_process);
    assert_eq!(over_the_wire.width(), 512);
}

#[test]
fn embed_through_stub_equals_in_process_mock() {
    let stub = serve_stub(StubBehavior::EchoMock).unwrap();
    let remote = RemoteEncoder::new(stub.url(), TIMEOUT);
    let image = synthetic_original("a jay, a bird", 4, 64, 64).unwrap();
    let over_the_wire = remote.embed(&image).unwrap();
    let in_process = MockEncoder::new().embed(&image).unwrap();
    assert_eq!(over_the_wire.values(), in_process.values());
    assert_eq!(remote.dimension(), Some(192));
}

#[test]
fn fixed_errors_surface_the_backend_message() {
    let stub = serve_stub(StubBehavior::FixedError { status: 400, message: "bad prompt".into() })
        .unwrap();
    let remote = RemoteGenerator::new(stub.url(), TIMEOUT);
    match remote.generate(&request("x", 64, 64, 0)).unwrap_err() {
        BackendError::Rejected { status, message } => {
            assert_eq!(status, 400);
            assert_eq!(message, "bad prompt");
        }
        other => panic!("expected Rejected, got {other:?}"),
    }
    let encoder = RemoteEncoder::new(stub.url(), TIMEOUT);
    let image = synthetic_original("x", 0, 64, 64).unwrap();
    assert!(matches!(
        encoder.embed(&image).unwrap_err(),
        BackendError::Rejected { status: 400, .. }
    ));
}

#[test]
fn server_errors_are_retryable() {
    let stub = serve_stub(StubBehavior::FixedError { status: 503, message: "overloaded".into() })
        .unwrap();
    let remote = RemoteGenerator::new(stub.url(), TIMEOUT);
    let error = remote.generate(&request("x", 64, 64, 0)).unwrap_err();
    assert!(matches!(error, BackendError::Server { status: 503, .. }));
    assert!(error.is_retryable());
}

#[test]
fn slow_backends_trip_the_client_timeout() {
    let stub = serve_stub(StubBehavior::Delay(Duration::from_millis(900))).unwrap();
    let remote = RemoteGenerator::new(stub.url(), Duration::from_millis(300));
    let error = remote.generate(&request("x", 64, 64, 0)).unwrap_err();
    assert_eq!(error, BackendError::Timeout);
    assert!(error.is_retryable());
}

#[test]
fn unreachable_endpoints_fail_within_the_timeout() {
    // Port 9 (discard) is reliably closed on localhost.
    let remote = RemoteGenerator::new("http://127.0.0.1:9", Duration::from_millis(500));
    let error = remote.generate(&request("x", 64, 64, 0)).unwrap_err();
    assert!(error.is_retryable(), "got {error:?}");
}

#[test]
fn wrong_image_dimensions_are_a_protocol_error() {
    let stub = serve_stub(StubBehavior::WrongDimension).unwrap();
    let remote = RemoteGenerator::new(stub.url(), TIMEOUT);
    match remote.generate(&request("x", 64, 64, 0)).unwrap_err() {
        BackendError::Protocol(message) => assert!(message.contains("72x64"), "{message}"),
        other => panic!("expected Protocol, got {other:?}"),
    }
}

#[test]
fn changing_embedding_dimension_is_a_protocol_error() {
    let stub = serve_stub(StubBehavior::WrongDimension).unwrap();
    let remote = RemoteEncoder::new(stub.url(), TIMEOUT);
    let image = synthetic_original("x", 1, 64, 64).unwrap();
    let first = remote.embed(&image).unwrap();
    assert_eq!(first.dimension(), 192);
    match remote.embed(&image).unwrap_err() {
        BackendError::Protocol(message) => assert!(message.contains("192"), "{message}"),
        other => panic!("expected Protocol, got {other:?}"),
    }
}

#[test]
fn zero_embeddings_fail_construction() {
    let stub = serve_stub(StubBehavior::ZeroEmbedding).unwrap();
    let remote = RemoteEncoder::new(stub.url(), TIMEOUT);
    let image = synthetic_original("x", 2, 64, 64).unwrap();
    assert!(matches!(
        remote.embed(&image).unwrap_err(),
        BackendError::Embedding(coremix_core::embedding::EmbeddingError::Zero { .. })
    ));
}

#[test]
fn invalid_requests_are_rejected_before_hitting_the_wire() {
    let stub = serve_stub(StubBehavior::EchoMock).unwrap();
    let remote = RemoteGenerator::new(stub.url(), TIMEOUT);
    let error = remote.generate(&request("x", 60, 64, 0)).unwrap_err();
    assert!(matches!(error, BackendError::InvalidRequest(_)));
}

#[test]
fn stub_handles_concurrent_requests() {
    let stub = serve_stub(StubBehavior::EchoMock).unwrap();
    let url = stub.url().to_string();
    let handles: Vec<_> = (0..8)
        .map(|seed| {
            let url = url.clone();
            std::thread::spawn(move || {
                let remote = RemoteGenerator::new(&url, TIMEOUT);
                remote.generate(&request("a wren, a bird", 64, 64, seed)).unwrap()
            })
        })
        .collect();
    let images: Vec<_> = handles.into_iter().map(|h| h.join().unwrap()).collect();
    for (seed, image) in images.iter().enumerate() {
        let expected = MockGenerator::new()
            .generate(&request("a wren, a bird", 64, 64, seed as u64))
            .unwrap();
        assert_eq!(*image, expected);
    }
}
