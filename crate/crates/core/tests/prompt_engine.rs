mod support;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use edudiff::dataset::{load_scienceqa, SplitDataset, SplitSpec};
use edudiff::prompt_metrics::stub::{StubReply, StubServer};
use edudiff::prompt_metrics::{builtin_templates, compute_prompt_vectors, ResponseCache, N_PROMPT};
use edudiff::{EduDocument, Error};

fn fixture_docs() -> Vec<EduDocument> {
    let items = load_scienceqa(&support::fixture("scienceqa_small.json")).unwrap();
    let spec = SplitSpec {
        per_class: 8,
        ..SplitSpec::default()
    };
    let data = SplitDataset::build(&items, &spec).unwrap();
    data.train.into_iter().chain(data.test).collect()
}

#[test]
fn cold_then_warm_request_counts() {
    let docs = fixture_docs();
    let server = StubServer::start(|req| {
        // Mix of parseable and unparseable answers.
        let reply = match req.prompt.len() % 3 {
            0 => "Yes, it is.",
            1 => "no",
            _ => "Hard to say.",
        };
        StubReply::Content(reply.into())
    })
    .unwrap();
    let client = support::stub_client(&server.base_url());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cache.jsonl");
    let templates = builtin_templates();

    let cache = ResponseCache::open(&path).unwrap();
    let (cold, stats) = compute_prompt_vectors(&docs, &templates, &client, &cache);
    assert_eq!(server.request_count(), N_PROMPT * docs.len());
    assert_eq!((stats.fetched, stats.cache_hits), (N_PROMPT * docs.len(), 0));
    drop(cache);

    let cache = ResponseCache::open(&path).unwrap();
    let (warm, stats) = compute_prompt_vectors(&docs, &templates, &client, &cache);
    assert_eq!(server.request_count(), N_PROMPT * docs.len(), "warm run is offline");
    assert_eq!((stats.fetched, stats.cache_hits), (0, N_PROMPT * docs.len()));

    for (c, w) in cold.iter().zip(&warm) {
        let (c, w) = (c.as_ref().unwrap(), w.as_ref().unwrap());
        assert_eq!(c, w);
        assert_eq!(c.values.len(), N_PROMPT);
        assert!(c.values.iter().all(|v| [0.0, 0.5, 1.0].contains(v)));
        assert_eq!(c.na_count, c.values.iter().filter(|&&v| v == 0.5).count());
    }
}

#[test]
fn request_body_carries_decoding_settings() {
    let seen = Arc::new(std::sync::Mutex::new(None));
    let s = seen.clone();
    let server = StubServer::start(move |req| {
        *s.lock().unwrap() = Some(req.body.clone());
        StubReply::Content("yes".into())
    })
    .unwrap();
    let client = support::stub_client(&server.base_url());
    let doc = EduDocument::new("1", "Which is a mammal?");
    let cache = ResponseCache::in_memory();
    compute_prompt_vectors(&[doc], &builtin_templates()[..1], &client, &cache);
    let body = seen.lock().unwrap().clone().unwrap();
    assert_eq!(body["temperature"], 0.0);
    assert_eq!(body["max_tokens"], 256);
    assert_eq!(body["model"], "llama-2-13b-chat");
}

#[test]
fn failing_document_keeps_fetched_answers() {
    let calls = Arc::new(AtomicUsize::new(0));
    let c = calls.clone();
    let server = StubServer::start(move |req| {
        c.fetch_add(1, Ordering::SeqCst);
        if req.prompt.contains("broken") {
            StubReply::Status(500, "down".into())
        } else {
            StubReply::Content("no".into())
        }
    })
    .unwrap();
    let client = support::stub_client(&server.base_url());
    let docs = vec![EduDocument::new("ok", "Fine question?"), EduDocument::new("bad", "A broken question?")];
    let cache = ResponseCache::in_memory();
    let templates = builtin_templates();
    let (results, stats) = compute_prompt_vectors(&docs, &templates, &client, &cache);
    assert!(results[0].is_ok());
    assert!(matches!(results[1], Err(Error::Transport(ref m)) if m.contains("bad")));
    assert_eq!(stats.fetched, N_PROMPT);
    assert_eq!(cache.len(), N_PROMPT);
}

#[test]
fn corrupted_cache_line_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cache.jsonl");
    let cache = ResponseCache::open(&path).unwrap();
    let server = support::constant_stub("yes");
    let client = support::stub_client(&server.base_url());
    let (r, _) = compute_prompt_vectors(&[EduDocument::new("1", "Q?")], &builtin_templates()[..2], &client, &cache);
    assert!(r[0].is_ok());
    drop(cache);
    let mut text = std::fs::read_to_string(&path).unwrap();
    text.push_str("{not json\n");
    std::fs::write(&path, text).unwrap();
    let Err(err) = ResponseCache::open(&path) else {
        panic!("corrupted cache must not open");
    };
    assert!(matches!(err, Error::Cache { line: 3, .. }), "{err}");
}

#[test]
fn prompt_count_arithmetic() {
    assert_eq!(N_PROMPT * 3 * 1516, 286_524);
}
