use crate::task::TaskKind;
use chembench_core::rng::SplitMix64;
use chembench_core::taskgen::render_template;
use regex::Regex;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};
use std::path::Path;
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error("duplicate instance id {0:?}")]
    DuplicateId(String),
    #[error("instance {id}: template placeholder {{{field}}} has no value")]
    MissingField { id: String, field: String },
    #[error("instance {0}: multiple-choice task without candidates")]
    MissingCandidates(String),
    #[error("requested {requested} instances but the dataset has {available}")]
    SampleTooLarge { requested: usize, available: usize },
}

/// One benchmark item. `candidates` holds the options of multiple-choice
/// tasks, best-ranked first. `subtask` names the label column of multi-task
/// property datasets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchInstance {
    pub id: String,
    pub prompt_fields: BTreeMap<String, String>,
    pub reference: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub candidates: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subtask: Option<String>,
}

pub fn parse_instances(text: &str) -> Result<Vec<BenchInstance>, DatasetError> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let inst: BenchInstance =
            serde_json::from_str(line).map_err(|source| DatasetError::Json { line: n + 1, source })?;
        if !seen.insert(inst.id.clone()) {
            return Err(DatasetError::DuplicateId(inst.id));
        }
        out.push(inst);
    }
    Ok(out)
}

pub fn load_instances(path: &Path) -> Result<Vec<BenchInstance>, DatasetError> {
    let text = std::fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_instances(&text)
}

/// The first `n` items of a partial Fisher-Yates shuffle driven by
/// `SplitMix64::new(seed)`.
pub fn sample_instances<T: Clone>(dataset: &[T], n: usize, seed: u64) -> Result<Vec<T>, DatasetError> {
    if n > dataset.len() {
        return Err(DatasetError::SampleTooLarge {
            requested: n,
            available: dataset.len(),
        });
    }
    let mut idx: Vec<usize> = (0..dataset.len()).collect();
    SplitMix64::new(seed).partial_shuffle(&mut idx, n);
    Ok(idx[..n].iter().map(|&i| dataset[i].clone()).collect())
}

/// Few-shot exemplars: `k` training items chosen from the seed's "shots" stream.
pub fn choose_exemplars(train: &[BenchInstance], k: usize, seed: u64) -> Result<Vec<BenchInstance>, DatasetError> {
    if k > train.len() {
        return Err(DatasetError::SampleTooLarge {
            requested: k,
            available: train.len(),
        });
    }
    let mut idx: Vec<usize> = (0..train.len()).collect();
    SplitMix64::derive(seed, "shots").partial_shuffle(&mut idx, k);
    Ok(idx[..k].iter().map(|&i| train[i].clone()).collect())
}

fn placeholder_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\{([A-Za-z_][A-Za-z0-9_]*)\}").expect("valid pattern"))
}

fn fill(kind: &TaskKind, template: &str, inst: &BenchInstance) -> Result<String, DatasetError> {
    let mut fields = inst.prompt_fields.clone();
    if !inst.candidates.is_empty() {
        fields
            .entry("candidates".into())
            .or_insert_with(|| inst.candidates.join("\n"));
    }
    if let TaskKind::ReagentSelection(k) = kind {
        if inst.candidates.is_empty() {
            return Err(DatasetError::MissingCandidates(inst.id.clone()));
        }
        fields.entry("role".into()).or_insert_with(|| k.as_str().into());
    }
    if let Some(sub) = &inst.subtask {
        fields.entry("property".into()).or_insert_with(|| sub.clone());
    }
    for cap in placeholder_pattern().captures_iter(template) {
        if !fields.contains_key(&cap[1]) {
            return Err(DatasetError::MissingField {
                id: inst.id.clone(),
                field: cap[1].to_string(),
            });
        }
    }
    let values: Vec<(&str, &str)> = fields.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
    Ok(render_template(template, &values))
}

/// Renders an instance's prompt, preceded by worked exemplars when given.
pub fn render_prompt(
    kind: &TaskKind,
    template: &str,
    inst: &BenchInstance,
    exemplars: &[BenchInstance],
) -> Result<String, DatasetError> {
    let mut out = String::new();
    for ex in exemplars {
        out.push_str(&fill(kind, template, ex)?);
        out.push_str("\nAnswer: ");
        out.push_str(&ex.reference);
        out.push_str("\n\n");
    }
    out.push_str(&fill(kind, template, inst)?);
    Ok(out)
}
