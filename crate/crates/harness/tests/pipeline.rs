use chembench_harness::dataset::render_prompt;
use chembench_harness::mock::{MockBehavior, MockServer};
use chembench_harness::synthetic::{synthetic_dataset, to_jsonl};
use chembench_harness::{
    run_benchmark, verify_report, BenchmarkTask, ModelClient, ModelEndpointConfig, QueryError, ResponseCache, TaskKind,
};
use std::collections::HashMap;
use std::path::Path;

fn config(url: &str, parallelism: usize) -> ModelEndpointConfig {
    ModelEndpointConfig {
        base_url: url.to_string(),
        model_name: "mock".into(),
        backoff_ms: 1,
        timeout_secs: 10.0,
        parallelism,
        ..Default::default()
    }
}

fn write_task(dir: &Path, kind: &TaskKind, n: usize, sample: usize, seed: u64) -> (BenchmarkTask, HashMap<String, String>) {
    let data = synthetic_dataset(kind, n);
    let path = dir.join(format!("{}.jsonl", kind.to_string().replace(':', "_")));
    std::fs::write(&path, to_jsonl(&data)).unwrap();
    let mut task = BenchmarkTask::new(kind.clone(), path);
    task.sample_size = sample;
    task.seed = seed;
    let gold = data
        .iter()
        .map(|i| (render_prompt(kind, task.template(), i, &[]).unwrap(), i.reference.clone()))
        .collect();
    (task, gold)
}

#[test]
fn flaky_endpoint_is_retried() {
    let server = MockServer::start(MockBehavior::Flaky {
        failures: 2,
        then: Box::new(MockBehavior::Constant("CCO".into())),
    })
    .unwrap();
    let client = ModelClient::new(config(server.url(), 1), None).unwrap();
    let out = client.query("hello").unwrap();
    assert_eq!(out.content, "CCO");
    assert_eq!(out.attempts, 3);
    assert_eq!(client.stats().retries, 2);
    assert_eq!(server.request_count(), 3);
}

#[test]
fn retries_are_bounded() {
    let server = MockServer::start(MockBehavior::Flaky {
        failures: 10,
        then: Box::new(MockBehavior::garbage()),
    })
    .unwrap();
    let mut cfg = config(server.url(), 1);
    cfg.max_retries = 2;
    let client = ModelClient::new(cfg, None).unwrap();
    assert_eq!(client.query("x"), Err(QueryError::HttpError(500)));
    assert_eq!(server.request_count(), 3);
}

#[test]
fn malformed_body_is_reported() {
    let server = MockServer::start(MockBehavior::Malformed).unwrap();
    let client = ModelClient::new(config(server.url(), 1), None).unwrap();
    assert!(matches!(client.query("x"), Err(QueryError::MalformedResponse(_))));
    assert_eq!(server.request_count(), 1);
}

#[test]
fn cached_responses_skip_the_network() {
    let dir = tempfile::tempdir().unwrap();
    let server = MockServer::start(MockBehavior::Constant("C".into())).unwrap();
    let first = ModelClient::new(config(server.url(), 1), Some(ResponseCache::open(dir.path()).unwrap())).unwrap();
    first.query("p1").unwrap();
    first.query("p2").unwrap();
    let second = ModelClient::new(config(server.url(), 1), Some(ResponseCache::open(dir.path()).unwrap())).unwrap();
    assert_eq!(second.query("p1").unwrap().attempts, 0);
    assert_eq!(second.query("p2").unwrap().content, "C");
    assert_eq!(second.stats().network_calls, 0);
    assert_eq!(second.stats().cache_hits, 2);
    assert_eq!(server.request_count(), 2);
}

#[test]
fn parallelism_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let (task, gold) = write_task(dir.path(), &TaskKind::MoleculeDesign, 60, 40, 3);
    let server = MockServer::start(MockBehavior::EchoGold(gold)).unwrap();
    let serial = run_benchmark(&[task.clone()], &ModelClient::new(config(server.url(), 1), None).unwrap()).unwrap();
    let parallel = run_benchmark(&[task], &ModelClient::new(config(server.url(), 8), None).unwrap()).unwrap();
    assert_eq!(serial.records, parallel.records);
    assert_eq!(serial.report.to_json(), parallel.report.to_json());
    assert_eq!(serial.report.tasks[0].metrics["exact"], 100.0);
}

#[test]
fn failed_queries_become_error_records() {
    let dir = tempfile::tempdir().unwrap();
    let (task, _) = write_task(dir.path(), &TaskKind::S2MF, 10, 10, 0);
    let server = MockServer::start(MockBehavior::Malformed).unwrap();
    let out = run_benchmark(&[task], &ModelClient::new(config(server.url(), 2), None).unwrap()).unwrap();
    assert_eq!(out.records.len(), 10);
    assert!(out.records.iter().all(|r| r.error.is_some()));
    assert_eq!(out.report.tasks[0].metrics["accuracy"], 0.0);
    verify_report(&out.report, &out.records).unwrap();
}

#[test]
fn tampered_records_fail_verification() {
    let dir = tempfile::tempdir().unwrap();
    let (task, gold) = write_task(dir.path(), &TaskKind::S2MF, 10, 10, 0);
    let server = MockServer::start(MockBehavior::EchoGold(gold)).unwrap();
    let mut out = run_benchmark(&[task], &ModelClient::new(config(server.url(), 2), None).unwrap()).unwrap();
    out.records[0].scores.insert("accuracy".into(), 0.0);
    assert!(verify_report(&out.report, &out.records).is_err());
}
