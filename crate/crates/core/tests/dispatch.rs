use probe_core::backend::{dispatch, CaseRef, CompletionBackend, CompletionRequest, StubBackend, StubConfig};
use probe_core::mutate::SchemeId;

fn requests(n: usize) -> Vec<CompletionRequest> {
    (0..n)
        .map(|i| CompletionRequest {
            prompt: format!("def f_{i}(a, b):\n    c = a + {i}\n"),
            max_new_tokens: 32,
            case_ref: CaseRef {
                seed_id: format!("s{i}"),
                scheme: SchemeId::ALL[i % SchemeId::ALL.len()],
            },
        })
        .collect()
}

#[test]
fn jittered_latency_never_crosses_wires() {
    let backend = StubBackend::new(StubConfig {
        max_latency_ms: 6,
        sleep: true,
        ..Default::default()
    });
    let reqs = requests(120);
    let sequential: Vec<_> = reqs.iter().map(|r| backend.complete(r)).collect();
    for concurrency in [1, 3, 8, 32] {
        let out = dispatch(&backend, &reqs, concurrency);
        assert_eq!(out.len(), reqs.len());
        for ((o, r), s) in out.iter().zip(&reqs).zip(&sequential) {
            assert_eq!(o.case_ref, r.case_ref);
            assert_eq!(o.status, s.status);
        }
    }
}

#[test]
fn empty_request_list() {
    assert!(dispatch(&StubBackend::default(), &[], 4).is_empty());
}
