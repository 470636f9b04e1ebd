//! Benchmark reports: the canonical JSON form and paper-style markdown tables.

use crate::score::TaskResult;
use crate::task::{metric, ReagentKind, ReportGroup, TaskKind};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt::Write;

pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Results of one model over a set of tasks. Holds no wall-clock data so
/// that a seeded rerun reproduces it byte for byte; timings live in the run
/// manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub toolkit_version: String,
    pub model: String,
    pub tasks: Vec<TaskResult>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub footnotes: Vec<String>,
}

impl BenchReport {
    pub fn new(model: impl Into<String>, tasks: Vec<TaskResult>) -> Self {
        let footnotes = footnotes_for(&tasks);
        BenchReport {
            toolkit_version: TOOLKIT_VERSION.to_string(),
            model: model.into(),
            tasks,
            footnotes,
        }
    }

    pub fn task(&self, kind: &TaskKind) -> Option<&TaskResult> {
        self.tasks.iter().find(|t| &t.task == kind)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }
}

fn footnotes_for(tasks: &[TaskResult]) -> Vec<String> {
    let groups: BTreeSet<ReportGroup> = tasks.iter().map(|t| t.task.group()).collect();
    let mut notes = Vec::new();
    if groups.contains(&ReportGroup::Captioning) {
        notes.push(
            "Captioning: BLEU is macro-averaged sentence BLEU with add-one smoothing of empty n-gram orders on \
             whitespace tokens. METEOR is not computed and its column is omitted."
                .to_string(),
        );
    }
    if groups.contains(&ReportGroup::MoleculeDesign) {
        notes.push(
            "Molecule design: BLEU is character-level; Dis is the mean Levenshtein distance over Unicode scalars; \
             MACCS/RDK/Morgan are this toolkit's structural-key, path and Morgan fingerprints, averaged over valid \
             predictions only, and are not comparable to RDKit values."
                .to_string(),
        );
    }
    if groups.contains(&ReportGroup::Property) {
        notes.push(
            "Property prediction: AUC-ROC uses the extracted yes/no answer as a 1/0 score; multi-task datasets \
             average over subtasks that contain both classes."
                .to_string(),
        );
    }
    if tasks.iter().any(|t| t.task == TaskKind::ReagentSelection(ReagentKind::Ligand)) {
        notes.push("Ligand selection: an answer counts when it is in the better-ranked half of the candidates.".into());
    }
    for t in tasks {
        for n in &t.notes {
            notes.push(format!("{}: {n}", t.task));
        }
    }
    notes
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Markdown,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            _ => Err(format!("unknown report format {s:?}")),
        }
    }
}

pub fn render_report(reports: &[BenchReport], format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(reports).expect("reports serialise");
            s.push('\n');
            s
        }
        ReportFormat::Markdown => render_markdown(reports),
    }
}

/// Stated precision of a metric in markdown.
pub fn format_metric(name: &str, value: f64) -> String {
    if metric::is_percentage(name) || name == metric::LEVENSHTEIN {
        format!("{value:.1}")
    } else {
        format!("{value:.3}")
    }
}

struct Column {
    header: String,
    task: TaskKind,
    metric: &'static str,
}

fn col(header: impl Into<String>, task: TaskKind, metric: &'static str) -> Column {
    Column {
        header: header.into(),
        task,
        metric,
    }
}

fn present(reports: &[BenchReport]) -> BTreeSet<TaskKind> {
    reports.iter().flat_map(|r| r.tasks.iter().map(|t| t.task.clone())).collect()
}

fn table(out: &mut String, title: &str, reports: &[BenchReport], cols: &[Column], average: bool) {
    let _ = writeln!(out, "## {title}\n");
    let mut header = String::from("| Model |");
    let mut rule = String::from("|---|");
    for c in cols {
        let _ = write!(header, " {} |", c.header);
        rule.push_str("---|");
    }
    if average {
        header.push_str(" Avg |");
        rule.push_str("---|");
    }
    let _ = writeln!(out, "{header}\n{rule}");
    for r in reports {
        let mut row = format!("| {} |", r.model);
        let mut values = Vec::new();
        for c in cols {
            let v = r.task(&c.task).and_then(|t| t.metrics.get(c.metric)).copied();
            values.push(v);
            match v {
                Some(v) => {
                    let _ = write!(row, " {} |", format_metric(c.metric, v));
                }
                None => row.push_str(" - |"),
            }
        }
        if average {
            let all: Option<Vec<f64>> = values.into_iter().collect();
            match all {
                Some(v) if !v.is_empty() => {
                    let mean = v.iter().sum::<f64>() / v.len() as f64;
                    let _ = write!(row, " {} |", format_metric(cols[0].metric, mean));
                }
                _ => row.push_str(" - |"),
            }
        }
        let _ = writeln!(out, "{row}");
    }
    out.push('\n');
}

/// One section per task group present, in the paper's column order.
fn render_markdown(reports: &[BenchReport]) -> String {
    let mut out = String::from("# Benchmark report\n\n");
    if reports.is_empty() {
        out.push_str("No runs.\n");
        return out;
    }
    out.push_str("## Runs\n\n| Model | Toolkit | Tasks | Instances | Errors |\n|---|---|---|---|---|\n");
    for r in reports {
        let n: usize = r.tasks.iter().map(|t| t.n).sum();
        let e: usize = r.tasks.iter().map(|t| t.errors).sum();
        let _ = writeln!(out, "| {} | {} | {} | {n} | {e} |", r.model, r.toolkit_version, r.tasks.len());
    }
    out.push('\n');

    let kinds = present(reports);
    let has = |g: ReportGroup| kinds.iter().any(|k| k.group() == g);

    if has(ReportGroup::NamePrediction) {
        let cols = [
            col("S2I", TaskKind::S2I, metric::ACCURACY),
            col("I2S", TaskKind::I2S, metric::ACCURACY),
            col("S2MF", TaskKind::S2MF, metric::ACCURACY),
            col("I2MF", TaskKind::I2MF, metric::ACCURACY),
        ];
        table(&mut out, "Name prediction", reports, &cols, false);
    }
    if has(ReportGroup::Captioning) {
        let k = TaskKind::Captioning;
        let cols = [
            col("BLEU-2", k.clone(), metric::BLEU2),
            col("BLEU-4", k.clone(), metric::BLEU4),
            col("ROUGE-1", k.clone(), metric::ROUGE1),
            col("ROUGE-2", k.clone(), metric::ROUGE2),
            col("ROUGE-L", k, metric::ROUGEL),
        ];
        table(&mut out, "Molecule captioning", reports, &cols, false);
    }
    if has(ReportGroup::MoleculeDesign) {
        let k = TaskKind::MoleculeDesign;
        let cols = [
            col("Exact", k.clone(), metric::EXACT),
            col("BLEU", k.clone(), metric::BLEU),
            col("Dis", k.clone(), metric::LEVENSHTEIN),
            col("Validity", k.clone(), metric::VALIDITY),
            col("MACCS", k.clone(), metric::FTS_MACCS),
            col("RDK", k.clone(), metric::FTS_RDK),
            col("Morgan", k, metric::FTS_MORGAN),
        ];
        table(&mut out, "Text-based molecule design", reports, &cols, false);
    }
    if has(ReportGroup::Property) {
        let mut datasets: Vec<&str> = kinds
            .iter()
            .filter_map(|k| match k {
                TaskKind::Property(ds) => Some(ds.as_str()),
                _ => None,
            })
            .collect();
        datasets.sort_by_key(|d| (d.to_lowercase(), d.to_string()));
        let cols: Vec<Column> = datasets
            .iter()
            .map(|d| col(*d, TaskKind::Property(d.to_string()), metric::AUC_ROC))
            .collect();
        let average = cols.len() > 1;
        table(&mut out, "Molecular property prediction (AUC-ROC)", reports, &cols, average);
    }
    if has(ReportGroup::Reaction) {
        let mut cols = Vec::new();
        for k in &kinds {
            if let TaskKind::Yield(ds) = k {
                cols.push(col(format!("YP ({ds})"), k.clone(), metric::ACCURACY));
            }
        }
        for (header, k, m) in [
            ("RP", TaskKind::ReactionPrediction, metric::ACCURACY),
            ("Retro", TaskKind::Retrosynthesis, metric::ACCURACY),
            ("RS (reactant)", TaskKind::ReagentSelection(ReagentKind::Reactant), metric::ACCURACY),
            ("RS (solvent)", TaskKind::ReagentSelection(ReagentKind::Solvent), metric::ACCURACY),
            ("RS (ligand)", TaskKind::ReagentSelection(ReagentKind::Ligand), metric::TOP50_ACCURACY),
        ] {
            if kinds.contains(&k) {
                cols.push(col(header, k, m));
            }
        }
        table(&mut out, "Reaction tasks", reports, &cols, false);
    }

    let notes: Vec<String> = reports
        .iter()
        .flat_map(|r| {
            r.footnotes.iter().map(move |n| {
                if reports.len() > 1 {
                    format!("{}: {n}", r.model)
                } else {
                    n.clone()
                }
            })
        })
        .collect();
    if !notes.is_empty() {
        out.push_str("## Notes\n\n");
        for n in notes {
            let _ = writeln!(out, "- {n}");
        }
    }
    out
}
