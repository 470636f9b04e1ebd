//! The end-to-end benchmark pipeline.

use crate::client::{ClientStats, ModelClient};
use crate::dataset::{choose_exemplars, load_instances, render_prompt, sample_instances, BenchInstance, DatasetError};
use crate::report::{render_report, BenchReport, ReportFormat, TOOLKIT_VERSION};
use crate::score::{aggregate, score_output, EvalRecord, ScoreInput, TaskResult};
use crate::task::{BenchmarkTask, TaskError, TaskKind};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Task(#[from] TaskError),
    #[error("few-shot run of {0} needs a training split")]
    MissingTrainSplit(String),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("re-aggregation of {0} does not reproduce the report")]
    Inconsistent(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestTask {
    pub task: TaskKind,
    pub dataset: String,
    pub sample_size: usize,
    pub seed: u64,
    pub shots: usize,
    pub template: String,
    pub metrics: Vec<String>,
    pub sample_ids: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub toolkit_version: String,
    pub model: String,
    pub endpoint: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub parallelism: usize,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub client: ClientStats,
    pub tasks: Vec<ManifestTask>,
}

pub struct RunOutput {
    pub manifest: RunManifest,
    pub records: Vec<EvalRecord>,
    pub report: BenchReport,
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

struct Prepared {
    input: ScoreInput,
    prompt: String,
}

fn prepare(task: &BenchmarkTask) -> Result<(Vec<Prepared>, Vec<String>), RunError> {
    let data = load_instances(&task.dataset_path)?;
    let sample = sample_instances(&data, task.sample_size, task.seed)?;
    let exemplars: Vec<BenchInstance> = if task.shots > 0 {
        let path = task
            .train_path
            .as_ref()
            .ok_or_else(|| RunError::MissingTrainSplit(task.kind.to_string()))?;
        choose_exemplars(&load_instances(path)?, task.shots, task.seed)?
    } else {
        Vec::new()
    };
    let ids = sample.iter().map(|i| i.id.clone()).collect();
    let mut out = Vec::with_capacity(sample.len());
    for inst in sample {
        let prompt = render_prompt(&task.kind, task.template(), &inst, &exemplars)?;
        out.push(Prepared {
            input: ScoreInput {
                id: inst.id,
                task: task.kind.clone(),
                prediction: String::new(),
                reference: inst.reference,
                candidates: inst.candidates,
                subtask: inst.subtask,
            },
            prompt,
        });
    }
    Ok((out, ids))
}

/// Queries every prompt with at most `parallelism` requests in flight.
/// Results come back in input order whatever the completion order.
fn query_all(client: &ModelClient, items: &[Prepared], parallelism: usize) -> Vec<EvalRecord> {
    let slots: Mutex<Vec<Option<EvalRecord>>> = Mutex::new(vec![None; items.len()]);
    let next = AtomicUsize::new(0);
    let workers = parallelism.max(1).min(items.len().max(1));
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(item) = items.get(i) else { break };
                let record = match client.query(&item.prompt) {
                    Ok(outcome) => {
                        let input = ScoreInput {
                            prediction: outcome.content,
                            ..item.input.clone()
                        };
                        score_output(&input, None, outcome.attempts)
                    }
                    Err(e) => score_output(&item.input, Some(e.to_string()), client.config().max_retries + 1),
                };
                slots.lock().unwrap_or_else(|p| p.into_inner())[i] = Some(record);
            });
        }
    });
    slots
        .into_inner()
        .unwrap_or_else(|p| p.into_inner())
        .into_iter()
        .map(|r| r.expect("every slot filled"))
        .collect()
}

/// Runs every task against the client. Query failures become error records
/// rather than aborting the run.
pub fn run_benchmark(tasks: &[BenchmarkTask], client: &ModelClient) -> Result<RunOutput, RunError> {
    let started = unix_now();
    let cfg = client.config();
    let mut records = Vec::new();
    let mut results = Vec::new();
    let mut manifest_tasks = Vec::new();
    for task in tasks {
        let metrics = task.metrics()?;
        let (items, ids) = prepare(task)?;
        let mut recs = query_all(client, &items, cfg.parallelism);
        recs.sort_by(|a, b| a.id.cmp(&b.id));
        let mut result = aggregate(&task.kind, &metrics, &recs);
        let dataset = task.dataset_path.display().to_string();
        result.dataset = Some(dataset.clone());
        result.seed = Some(task.seed);
        result.shots = task.shots;
        result.sample_ids = ids.clone();
        manifest_tasks.push(ManifestTask {
            task: task.kind.clone(),
            dataset,
            sample_size: task.sample_size,
            seed: task.seed,
            shots: task.shots,
            template: task.template().to_string(),
            metrics,
            sample_ids: ids,
        });
        results.push(result);
        records.extend(recs);
    }
    let report = BenchReport::new(cfg.model_name.clone(), results);
    verify_report(&report, &records)?;
    let manifest = RunManifest {
        toolkit_version: TOOLKIT_VERSION.to_string(),
        model: cfg.model_name.clone(),
        endpoint: cfg.endpoint_url(),
        temperature: cfg.temperature,
        max_tokens: cfg.max_tokens,
        parallelism: cfg.parallelism,
        started_unix: started,
        finished_unix: unix_now(),
        client: client.stats(),
        tasks: manifest_tasks,
    };
    Ok(RunOutput {
        manifest,
        records,
        report,
    })
}

/// Recomputes every task aggregate from the records and compares exactly.
pub fn verify_report(report: &BenchReport, records: &[EvalRecord]) -> Result<(), RunError> {
    let mut by_task: BTreeMap<&TaskKind, Vec<EvalRecord>> = BTreeMap::new();
    for r in records {
        by_task.entry(&r.task).or_default().push(r.clone());
    }
    for t in &report.tasks {
        let recs = by_task.get(&t.task).map(Vec::as_slice).unwrap_or(&[]);
        let metrics: Vec<String> = t.metrics.keys().cloned().collect();
        let again = aggregate(&t.task, &metrics, recs);
        if again.metrics != t.metrics || again.n != t.n || again.errors != t.errors {
            return Err(RunError::Inconsistent(t.task.to_string()));
        }
    }
    Ok(())
}

/// Scores stand-alone predictions, one task result per task kind in kind order.
pub fn score_inputs(inputs: &[ScoreInput], model: &str) -> (Vec<EvalRecord>, BenchReport) {
    let mut by_task: BTreeMap<TaskKind, Vec<EvalRecord>> = BTreeMap::new();
    for i in inputs {
        by_task.entry(i.task.clone()).or_default().push(score_output(i, None, 0));
    }
    let mut records = Vec::new();
    let mut results: Vec<TaskResult> = Vec::new();
    for (kind, mut recs) in by_task {
        recs.sort_by(|a, b| a.id.cmp(&b.id));
        let metrics: Vec<String> = kind.metrics().iter().map(|m| m.to_string()).collect();
        results.push(aggregate(&kind, &metrics, &recs));
        records.extend(recs);
    }
    (records, BenchReport::new(model, results))
}

fn write_file(path: PathBuf, text: &str) -> Result<(), RunError> {
    std::fs::write(&path, text).map_err(|source| RunError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn records_to_jsonl(records: &[EvalRecord]) -> String {
    records
        .iter()
        .map(|r| serde_json::to_string(r).expect("record serialises") + "\n")
        .collect()
}

/// Writes manifest.json, records.jsonl, report.json and report.md.
pub fn write_run_dir(dir: &Path, out: &RunOutput) -> Result<(), RunError> {
    std::fs::create_dir_all(dir).map_err(|source| RunError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let manifest = serde_json::to_string_pretty(&out.manifest).expect("manifest serialises") + "\n";
    write_file(dir.join("manifest.json"), &manifest)?;
    write_file(dir.join("records.jsonl"), &records_to_jsonl(&out.records))?;
    write_file(dir.join("report.json"), &out.report.to_json())?;
    write_file(
        dir.join("report.md"),
        &render_report(std::slice::from_ref(&out.report), ReportFormat::Markdown),
    )
}
