use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use qaxlate::backends::{
    BackendConfig, BackendError, CacheFile, CachedTranslator, CachedTransliterator, LanguageRegistry,
    RemoteEmbeddingSimilarity, RemoteTranslator, RemoteTransliterator, Similarity, Translator, Transliterator,
};
use serde_json::{json, Value};

type Handler = dyn Fn(usize, &Value) -> (u16, Vec<(&'static str, String)>, Value) + Send + Sync;

struct Server {
    url: String,
    requests: Arc<AtomicUsize>,
    bodies: Arc<Mutex<Vec<Value>>>,
}

fn serve(handler: Arc<Handler>) -> Server {
    let server = tiny_http::Server::http("127.0.0.1:0").unwrap();
    let url = format!("http://{}/", server.server_addr().to_ip().unwrap());
    let requests = Arc::new(AtomicUsize::new(0));
    let bodies = Arc::new(Mutex::new(Vec::new()));
    let (r, b) = (requests.clone(), bodies.clone());
    thread::spawn(move || {
        for mut req in server.incoming_requests() {
            let n = r.fetch_add(1, Ordering::SeqCst);
            let mut raw = String::new();
            req.as_reader().read_to_string(&mut raw).unwrap();
            let body: Value = serde_json::from_str(&raw).unwrap_or(Value::Null);
            b.lock().unwrap().push(body.clone());
            let (status, headers, payload) = handler(n, &body);
            let mut resp = tiny_http::Response::from_string(payload.to_string()).with_status_code(status);
            for (k, v) in headers {
                resp.add_header(tiny_http::Header::from_bytes(k.as_bytes(), v.as_bytes()).unwrap());
            }
            let _ = req.respond(resp);
        }
    });
    Server { url, requests, bodies }
}

fn echo_translations(body: &Value) -> Value {
    let texts: Vec<String> =
        body["texts"].as_array().unwrap().iter().map(|t| format!("<{}>", t.as_str().unwrap())).collect();
    json!({ "translations": texts })
}

fn cfg(url: &str) -> BackendConfig {
    BackendConfig { endpoint: url.to_string(), backoff_base_ms: 5, timeout_ms: 5_000, ..BackendConfig::default() }
}

fn strings(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

#[test]
fn wire_format_and_batching() {
    let srv = serve(Arc::new(|_, body| (200, vec![], echo_translations(body))));
    let reg = LanguageRegistry::default();
    let t = RemoteTranslator::new(BackendConfig { batch_size: 2, ..cfg(&srv.url) }).unwrap();
    let out = t.translate_batch(&strings(&["a", "b", "c"]), reg.get("en").unwrap(), reg.get("mr").unwrap()).unwrap();
    assert_eq!(out, strings(&["<a>", "<b>", "<c>"]));
    assert_eq!(srv.requests.load(Ordering::SeqCst), 2);
    let bodies = srv.bodies.lock().unwrap();
    assert_eq!(bodies[0], json!({"texts": ["a", "b"], "source": "en", "target": "mr"}));
    assert_eq!(bodies[1], json!({"texts": ["c"], "source": "en", "target": "mr"}));
}

#[test]
fn warm_cache_issues_no_requests() {
    let srv = serve(Arc::new(|_, body| (200, vec![], echo_translations(body))));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cache.jsonl");
    let reg = LanguageRegistry::default();
    let (en, ta) = (reg.get("en").unwrap(), reg.get("ta").unwrap());
    let calls = [strings(&["one", "two"]), strings(&["two", "three"]), strings(&["one"])];

    let first: Vec<Vec<String>> = {
        let t = CachedTranslator::new(
            RemoteTranslator::new(cfg(&srv.url)).unwrap(),
            Arc::new(CacheFile::open(&path).unwrap()),
        );
        calls.iter().map(|c| t.translate_batch(c, en, ta).unwrap()).collect()
    };
    let cold = srv.requests.load(Ordering::SeqCst);
    assert_eq!(cold, 2, "third call is already served from the cache");

    let t =
        CachedTranslator::new(RemoteTranslator::new(cfg(&srv.url)).unwrap(), Arc::new(CacheFile::open(&path).unwrap()));
    let second: Vec<Vec<String>> = calls.iter().map(|c| t.translate_batch(c, en, ta).unwrap()).collect();
    assert_eq!(first, second);
    assert_eq!(srv.requests.load(Ordering::SeqCst), cold);
}

#[test]
fn server_errors_are_retried() {
    let srv = serve(Arc::new(
        |n, body| if n < 2 { (503, vec![], json!({})) } else { (200, vec![], echo_translations(body)) },
    ));
    let reg = LanguageRegistry::default();
    let t = RemoteTranslator::new(cfg(&srv.url)).unwrap();
    let out = t.translate("x", reg.get("en").unwrap(), reg.get("hi").unwrap()).unwrap();
    assert_eq!(out, "<x>");
    assert_eq!(srv.requests.load(Ordering::SeqCst), 3);
}

#[test]
fn retries_are_bounded() {
    let srv = serve(Arc::new(|_, _| (500, vec![], json!({}))));
    let reg = LanguageRegistry::default();
    let t = RemoteTranslator::new(BackendConfig { max_retries: 2, ..cfg(&srv.url) }).unwrap();
    let err = t.translate("x", reg.get("en").unwrap(), reg.get("hi").unwrap()).unwrap_err();
    assert!(matches!(err, BackendError::Unavailable { attempts: 3, .. }), "{err:?}");
    assert_eq!(srv.requests.load(Ordering::SeqCst), 3);
}

#[test]
fn client_errors_are_not_retried() {
    let srv = serve(Arc::new(|_, _| (400, vec![], json!({"error": "bad"}))));
    let reg = LanguageRegistry::default();
    let t = RemoteTranslator::new(cfg(&srv.url)).unwrap();
    let err = t.translate("x", reg.get("en").unwrap(), reg.get("hi").unwrap()).unwrap_err();
    assert!(matches!(err, BackendError::Protocol(_)), "{err:?}");
    assert_eq!(srv.requests.load(Ordering::SeqCst), 1);
}

#[test]
fn rate_limit_honours_retry_after() {
    let srv = serve(Arc::new(|n, body| {
        if n == 0 {
            (429, vec![("Retry-After", "0.3".to_string())], json!({}))
        } else {
            (200, vec![], echo_translations(body))
        }
    }));
    let reg = LanguageRegistry::default();
    let t = RemoteTranslator::new(cfg(&srv.url)).unwrap();
    let started = Instant::now();
    t.translate("x", reg.get("en").unwrap(), reg.get("hi").unwrap()).unwrap();
    assert!(started.elapsed() >= Duration::from_millis(300));
}

#[test]
fn persistent_429_surfaces_as_rate_limited() {
    let srv = serve(Arc::new(|_, _| (429, vec![("Retry-After", "0.01".to_string())], json!({}))));
    let reg = LanguageRegistry::default();
    let t = RemoteTranslator::new(BackendConfig { max_retries: 1, ..cfg(&srv.url) }).unwrap();
    let err = t.translate("x", reg.get("en").unwrap(), reg.get("hi").unwrap()).unwrap_err();
    assert!(matches!(err, BackendError::RateLimited { retry_after: Some(_) }), "{err:?}");
}

#[test]
fn client_side_rate_limit_spaces_requests() {
    let srv = serve(Arc::new(|_, body| (200, vec![], echo_translations(body))));
    let reg = LanguageRegistry::default();
    let t = RemoteTranslator::new(BackendConfig { rate_limit: 20.0, batch_size: 1, ..cfg(&srv.url) }).unwrap();
    let started = Instant::now();
    t.translate_batch(&strings(&["a", "b", "c", "d", "e"]), reg.get("en").unwrap(), reg.get("hi").unwrap()).unwrap();
    // five requests at 20/s need at least four 50 ms gaps
    assert!(started.elapsed() >= Duration::from_millis(200));
}

#[test]
fn wrong_length_response_is_a_protocol_error() {
    let srv = serve(Arc::new(|_, _| (200, vec![], json!({"translations": ["only one"]}))));
    let reg = LanguageRegistry::default();
    let t = RemoteTranslator::new(cfg(&srv.url)).unwrap();
    let err = t.translate_batch(&strings(&["a", "b"]), reg.get("en").unwrap(), reg.get("hi").unwrap()).unwrap_err();
    assert!(matches!(err, BackendError::Protocol(_)));
}

#[test]
fn unreachable_endpoint_is_unavailable() {
    let reg = LanguageRegistry::default();
    let t = RemoteTranslator::new(BackendConfig { max_retries: 1, ..cfg("http://127.0.0.1:9/") }).unwrap();
    let err = t.translate("x", reg.get("en").unwrap(), reg.get("hi").unwrap()).unwrap_err();
    assert!(matches!(err, BackendError::Unavailable { attempts: 2, .. }), "{err:?}");
}

#[test]
fn transliteration_wire_format_and_cache() {
    let srv = serve(Arc::new(|_, body| {
        let out: Vec<String> =
            body["texts"].as_array().unwrap().iter().map(|t| t.as_str().unwrap().to_uppercase()).collect();
        (200, vec![], json!({ "transliterations": out }))
    }));
    let reg = LanguageRegistry::default();
    let t =
        CachedTransliterator::new(RemoteTransliterator::new(cfg(&srv.url)).unwrap(), Arc::new(CacheFile::in_memory()));
    assert_eq!(t.transliterate_batch(&strings(&["pune"]), reg.get("mr").unwrap()).unwrap(), strings(&["PUNE"]));
    assert_eq!(t.transliterate_batch(&strings(&["pune"]), reg.get("mr").unwrap()).unwrap(), strings(&["PUNE"]));
    assert_eq!(srv.requests.load(Ordering::SeqCst), 1);
    assert_eq!(srv.bodies.lock().unwrap()[0], json!({"texts": ["pune"], "target": "mr"}));
}

#[test]
fn embedding_similarity_matches_pointwise_and_caches() {
    // embedding: [count of 'a', count of 'b', 1]
    let srv = serve(Arc::new(|_, body| {
        let embs: Vec<Vec<f64>> = body["texts"]
            .as_array()
            .unwrap()
            .iter()
            .map(|t| {
                let s = t.as_str().unwrap();
                vec![s.matches('a').count() as f64, s.matches('b').count() as f64, 1.0]
            })
            .collect();
        (200, vec![], json!({ "embeddings": embs }))
    }));
    let sim = RemoteEmbeddingSimilarity::<f64>::new(cfg(&srv.url), Arc::new(CacheFile::in_memory())).unwrap();
    let cands = ["aa", "ab", "bbb"];
    let m = sim.score_matrix(&cands, "a").unwrap();
    let requests = srv.requests.load(Ordering::SeqCst);
    for (c, s) in cands.iter().zip(&m) {
        assert!((sim.similarity(c, "a").unwrap().value() - s.value()).abs() < 1e-12);
    }
    assert_eq!(srv.requests.load(Ordering::SeqCst), requests, "pointwise calls hit the cache");
    // [2,0,1]·[1,0,1] / (sqrt5 sqrt2)
    assert!((m[0].value() - 3.0 / (5f64.sqrt() * 2f64.sqrt())).abs() < 1e-12);
}

#[test]
fn remote_backends_need_an_endpoint() {
    assert!(matches!(RemoteTranslator::new(BackendConfig::default()), Err(BackendError::Config(_))));
    assert!(matches!(
        RemoteTranslator::new(BackendConfig { endpoint: "http://x".into(), batch_size: 0, ..BackendConfig::default() }),
        Err(BackendError::Config(_))
    ));
}
