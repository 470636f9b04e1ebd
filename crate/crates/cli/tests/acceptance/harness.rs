use crate::{check, fixture, Outcome};
use chembench_harness::dataset::render_prompt;
use chembench_harness::mock::{MockBehavior, MockServer};
use chembench_harness::report::{render_report, ReportFormat};
use chembench_harness::run::{run_benchmark, score_inputs, write_run_dir, RunOutput};
use chembench_harness::synthetic::{synthetic_dataset, to_jsonl};
use chembench_harness::task::metric;
use chembench_harness::{BenchmarkTask, ModelClient, ModelEndpointConfig, ReagentKind, ScoreInput, TaskKind};
use std::collections::HashMap;
use std::path::Path;
use std::time::Instant;

fn every_kind() -> Vec<TaskKind> {
    let mut kinds = TaskKind::all_fixed();
    kinds.push(TaskKind::Property("bace".into()));
    kinds.push(TaskKind::Yield("buchwald-hartwig".into()));
    kinds.sort();
    kinds
}

fn prepare(dir: &Path) -> Result<(Vec<BenchmarkTask>, HashMap<String, String>), String> {
    let mut tasks = Vec::new();
    let mut gold = HashMap::new();
    for kind in every_kind() {
        let data = synthetic_dataset(&kind, 150);
        let path = dir.join(format!("{}.jsonl", kind.to_string().replace(':', "_")));
        std::fs::write(&path, to_jsonl(&data)).map_err(|e| e.to_string())?;
        let mut task = BenchmarkTask::new(kind.clone(), path);
        task.sample_size = 100;
        task.seed = 11;
        for inst in &data {
            let prompt = render_prompt(&kind, task.template(), inst, &[]).map_err(|e| e.to_string())?;
            if gold.insert(prompt, inst.reference.clone()).is_some() {
                return Err(format!("{}: duplicate prompt", inst.id));
            }
        }
        tasks.push(task);
    }
    Ok((tasks, gold))
}

fn run(tasks: &[BenchmarkTask], url: &str) -> Result<RunOutput, String> {
    let cfg = ModelEndpointConfig {
        base_url: url.to_string(),
        model_name: "mock".into(),
        parallelism: 8,
        timeout_secs: 10.0,
        backoff_ms: 10,
        ..Default::default()
    };
    let client = ModelClient::new(cfg, None).map_err(|e| e.to_string())?;
    run_benchmark(tasks, &client).map_err(|e| e.to_string())
}

pub fn end_to_end() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (tasks, gold) = prepare(dir.path())?;
    let echo = MockServer::start(MockBehavior::EchoGold(gold)).map_err(|e| e.to_string())?;

    let start = Instant::now();
    let first = run(&tasks, echo.url())?;
    let secs = start.elapsed().as_secs_f64();
    check(secs < 60.0, || format!("run took {secs:.1} s"))?;
    check(first.records.len() == 100 * tasks.len(), || format!("{} records", first.records.len()))?;
    for t in &first.report.tasks {
        for (name, value) in &t.metrics {
            if metric::is_percentage(name) {
                check(*value == 100.0, || format!("{}: {name} = {value}", t.task))?;
            }
        }
        check(t.errors == 0, || format!("{}: {} errors", t.task, t.errors))?;
    }

    let second = run(&tasks, echo.url())?;
    let (a, b) = (dir.path().join("run-a"), dir.path().join("run-b"));
    write_run_dir(&a, &first).map_err(|e| e.to_string())?;
    write_run_dir(&b, &second).map_err(|e| e.to_string())?;
    let ja = std::fs::read(a.join("report.json")).map_err(|e| e.to_string())?;
    let jb = std::fs::read(b.join("report.json")).map_err(|e| e.to_string())?;
    check(ja == jb, || "seeded re-run produced a different report.json".into())?;

    let garbage = MockServer::start(MockBehavior::garbage()).map_err(|e| e.to_string())?;
    let bad = run(&tasks, garbage.url())?;
    check(bad.records.len() == 100 * tasks.len(), || format!("garbage run kept {} records", bad.records.len()))?;
    let design = bad
        .report
        .task(&TaskKind::MoleculeDesign)
        .ok_or("no molecule design result")?;
    check(design.metrics[metric::VALIDITY] == 0.0, || format!("validity {}", design.metrics[metric::VALIDITY]))?;
    check(design.n == 100, || format!("molecule design n = {}", design.n))?;
    let ligand = bad
        .report
        .task(&TaskKind::ReagentSelection(ReagentKind::Ligand))
        .ok_or("no ligand result")?;
    check(ligand.n == 100, || "ligand records dropped".into())?;

    Ok(format!(
        "{} task kinds x 100 instances at 100% in {secs:.2} s; report.json byte-identical across runs; garbage model: validity 0, {} records kept",
        tasks.len(),
        bad.records.len()
    ))
}

pub fn report_regression() -> Outcome {
    let text = std::fs::read_to_string(fixture("report/records.jsonl")).map_err(|e| e.to_string())?;
    let inputs: Vec<ScoreInput> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let (_, report) = score_inputs(&inputs, "gpt-4");
    let json = report.to_json();
    let stored_path = fixture("report/report.json");
    if std::env::var_os("CHEMBENCH_BLESS").is_some() {
        std::fs::write(&stored_path, &json).map_err(|e| e.to_string())?;
    }
    let stored = std::fs::read_to_string(&stored_path).map_err(|e| e.to_string())?;
    check(json == stored, || "scored fixture differs from stored report.json".into())?;

    for (kind, expected) in [
        (TaskKind::S2I, 0.0),
        (TaskKind::I2S, 1.2),
        (TaskKind::S2MF, 8.6),
        (TaskKind::I2MF, 8.4),
    ] {
        let got = report.task(&kind).ok_or_else(|| format!("{kind} missing"))?.metrics[metric::ACCURACY];
        check((got - expected).abs() < 1e-9, || format!("{kind}: {got}, expected {expected}"))?;
    }
    let md = render_report(std::slice::from_ref(&report), ReportFormat::Markdown);
    let table = "| Model | S2I | I2S | S2MF | I2MF |\n|---|---|---|---|---|\n| gpt-4 | 0.0 | 1.2 | 8.6 | 8.4 |\n";
    check(md.contains(table), || format!("markdown lacks the fixture row:\n{md}"))?;
    Ok("fixture scores to the stored report.json; markdown row gpt-4 | 0.0 | 1.2 | 8.6 | 8.4".into())
}
