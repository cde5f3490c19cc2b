use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use super::{CompletionBackend, CompletionOutcome, CompletionRequest};

/// Complete every request with at most `concurrency` calls in flight.
/// Outcomes come back in request order.
pub fn dispatch<B: CompletionBackend + ?Sized>(
    backend: &B,
    requests: &[CompletionRequest],
    concurrency: usize,
) -> Vec<CompletionOutcome> {
    let workers = concurrency.max(1).min(requests.len());
    if workers <= 1 {
        return requests.iter().map(|r| backend.complete(r)).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<CompletionOutcome>>> = Mutex::new(vec![None; requests.len()]);
    thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(request) = requests.get(i) else { break };
                let outcome = backend.complete(request);
                slots.lock().unwrap()[i] = Some(outcome);
            });
        }
    });
    slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|o| o.expect("every request dispatched"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::{CaseRef, CompletionStatus};
    use crate::mutate::SchemeId;
    use std::time::Duration;

    struct Gauge {
        in_flight: AtomicUsize,
        peak: AtomicUsize,
    }

    impl CompletionBackend for Gauge {
        fn id(&self) -> String {
            "gauge".into()
        }

        fn complete(&self, request: &CompletionRequest) -> CompletionOutcome {
            let now = self.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
            self.peak.fetch_max(now, Ordering::SeqCst);
            thread::sleep(Duration::from_millis(3));
            self.in_flight.fetch_sub(1, Ordering::SeqCst);
            CompletionOutcome {
                case_ref: request.case_ref.clone(),
                status: CompletionStatus::Completed {
                    text: request.prompt.clone(),
                },
                latency_ms: 3,
            }
        }
    }

    fn requests(n: usize) -> Vec<CompletionRequest> {
        (0..n)
            .map(|i| CompletionRequest {
                prompt: format!("p{i}"),
                max_new_tokens: 8,
                case_ref: CaseRef {
                    seed_id: format!("s{i}"),
                    scheme: SchemeId::ALL[i % SchemeId::ALL.len()],
                },
            })
            .collect()
    }

    #[test]
    fn respects_concurrency_bound() {
        for bound in [1, 2, 4] {
            let gauge = Gauge {
                in_flight: AtomicUsize::new(0),
                peak: AtomicUsize::new(0),
            };
            let reqs = requests(24);
            let out = dispatch(&gauge, &reqs, bound);
            assert_eq!(out.len(), 24);
            assert!(gauge.peak.load(Ordering::SeqCst) <= bound);
        }
    }

    #[test]
    fn preserves_order() {
        let gauge = Gauge {
            in_flight: AtomicUsize::new(0),
            peak: AtomicUsize::new(0),
        };
        let reqs = requests(17);
        let out = dispatch(&gauge, &reqs, 4);
        for (r, o) in reqs.iter().zip(&out) {
            assert_eq!(r.case_ref, o.case_ref);
            assert_eq!(o.completed_text(), Some(r.prompt.as_str()));
        }
        assert!(dispatch(&gauge, &[], 4).is_empty());
    }
}
