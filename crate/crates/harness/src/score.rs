//! Per-record scoring and per-task aggregation.

use crate::extract::extract_answer;
use crate::task::{metric, ReagentKind, TaskKind};
use chembench_core::chemgraph::{canonical_smiles, parse_smiles};
use chembench_core::fingerprint::{tanimoto, FingerprintKind};
use chembench_core::metrics::{
    exact_match_canonical, formula_exact, levenshtein, multi_task_auc, rouge, sentence_bleu, ExactMatch,
    MetricError, RankedLabels, RougeVariant, ScorePair, Tokenizer,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// A model answer to score: `prediction` is the raw output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreInput {
    pub id: String,
    pub task: TaskKind,
    #[serde(alias = "raw_output")]
    pub prediction: String,
    pub reference: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub candidates: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subtask: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub id: String,
    pub task: TaskKind,
    pub reference: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub candidates: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subtask: Option<String>,
    pub raw_output: String,
    pub extracted: String,
    pub scores: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default)]
    pub attempts: u32,
}

/// Lowercase, single spaces, no trailing period.
pub fn normalize_iupac(s: &str) -> String {
    let collapsed = s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
    collapsed.strip_suffix('.').unwrap_or(&collapsed).trim_end().to_string()
}

fn yes_no_value(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "yes" | "1" | "true" => Some(true),
        "no" | "0" | "false" => Some(false),
        _ => None,
    }
}

/// Canonical comparison when both sides parse, trimmed string equality otherwise.
fn same_choice(a: &str, b: &str) -> bool {
    match (parse_smiles(a.trim()), parse_smiles(b.trim())) {
        (Ok(x), Ok(y)) => canonical_smiles(&x) == canonical_smiles(&y),
        _ => a.trim() == b.trim(),
    }
}

fn bool_score(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

const FTS_KINDS: [(&str, FingerprintKind); 3] = [
    (metric::FTS_MACCS, FingerprintKind::Keys),
    (metric::FTS_RDK, FingerprintKind::Path),
    (metric::FTS_MORGAN, FingerprintKind::Morgan),
];

/// Scores one answer. `answer` is `None` when nothing could be extracted.
/// Unanswered records score as wrong: zero for accuracy-type metrics and
/// overlaps, reference length for edit distance, "no" for yes/no scores.
fn record_scores(
    kind: &TaskKind,
    answer: Option<&str>,
    reference: &str,
    candidates: &[String],
) -> (BTreeMap<String, f64>, Option<String>) {
    let mut s = BTreeMap::new();
    let mut err = None;
    let mut put = |k: &str, v: f64| {
        s.insert(k.to_string(), v);
    };
    match kind {
        TaskKind::S2I => put(
            metric::ACCURACY,
            bool_score(answer.is_some_and(|a| normalize_iupac(a) == normalize_iupac(reference))),
        ),
        TaskKind::S2MF | TaskKind::I2MF => {
            put(metric::ACCURACY, bool_score(answer.is_some_and(|a| formula_exact(a, reference))))
        }
        TaskKind::I2S | TaskKind::ReactionPrediction | TaskKind::Retrosynthesis => {
            let m = match answer.map(|a| exact_match_canonical(a, reference)) {
                Some(Ok(m)) => m == ExactMatch::Match,
                Some(Err(e)) => {
                    err = Some(e.to_string());
                    false
                }
                None => false,
            };
            put(metric::ACCURACY, bool_score(m));
        }
        TaskKind::Captioning => {
            let tok = Tokenizer::Word;
            let p = tok.tokenize(answer.unwrap_or(""));
            let r = tok.tokenize(reference);
            put(metric::BLEU2, sentence_bleu(&p, &r, 2));
            put(metric::BLEU4, sentence_bleu(&p, &r, 4));
            for (name, variant) in [
                (metric::ROUGE1, RougeVariant::Rouge1),
                (metric::ROUGE2, RougeVariant::Rouge2),
                (metric::ROUGEL, RougeVariant::RougeL),
            ] {
                let pair = [ScorePair::new(answer.unwrap_or(""), reference)];
                put(name, rouge(&pair, variant, tok).expect("one pair"));
            }
        }
        TaskKind::MoleculeDesign => {
            let pred = answer.unwrap_or("");
            let tok = Tokenizer::Char;
            put(metric::BLEU, sentence_bleu(&tok.tokenize(pred), &tok.tokenize(reference), 4));
            put(metric::LEVENSHTEIN, levenshtein(pred, reference) as f64);
            let reference_mol = parse_smiles(reference);
            let pred_mol = answer.and_then(|a| parse_smiles(a).ok());
            put(metric::VALIDITY, bool_score(pred_mol.is_some()));
            match (&reference_mol, &pred_mol) {
                (Err(_), _) => {
                    err = Some(MetricError::InvalidReference(reference.to_string()).to_string());
                    put(metric::EXACT, 0.0);
                }
                (Ok(r), Some(p)) => {
                    put(metric::EXACT, bool_score(canonical_smiles(p) == canonical_smiles(r)));
                    for (name, fk) in FTS_KINDS {
                        let v = tanimoto(&fk.compute(p), &fk.compute(r)).expect("same fingerprint layout");
                        put(name, v);
                    }
                }
                (Ok(_), None) => put(metric::EXACT, 0.0),
            }
        }
        TaskKind::Property(_) | TaskKind::Yield(_) => {
            let pred = answer.and_then(yes_no_value);
            match yes_no_value(reference) {
                Some(label) => {
                    put(metric::ACCURACY, bool_score(pred == Some(label)));
                    if matches!(kind, TaskKind::Property(_)) {
                        put("prediction", bool_score(pred == Some(true)));
                        put("label", bool_score(label));
                    }
                }
                None => {
                    err = Some(format!("reference {reference:?} is not a yes/no label"));
                    put(metric::ACCURACY, 0.0);
                }
            }
        }
        TaskKind::ReagentSelection(ReagentKind::Ligand) => {
            let half = candidates.len().div_ceil(2);
            if candidates.is_empty() {
                err = Some("ligand task without ranked candidates".to_string());
            }
            let hit = answer.is_some_and(|a| candidates[..half].iter().any(|c| same_choice(a, c)));
            put(metric::TOP50_ACCURACY, bool_score(hit));
        }
        TaskKind::ReagentSelection(_) => {
            put(metric::ACCURACY, bool_score(answer.is_some_and(|a| same_choice(a, reference))))
        }
    }
    (s, err)
}

/// Extracts and scores one raw output. `transport_error` marks a failed
/// query; its record is kept and scored as unanswered.
pub fn score_output(input: &ScoreInput, transport_error: Option<String>, attempts: u32) -> EvalRecord {
    let extracted = if transport_error.is_some() {
        None
    } else {
        extract_answer(&input.prediction, input.task.answer_kind(), &input.candidates).ok()
    };
    let (scores, score_error) = record_scores(&input.task, extracted.as_deref(), &input.reference, &input.candidates);
    let error = transport_error
        .or_else(|| extracted.is_none().then(|| "no answer found".to_string()))
        .or(score_error);
    EvalRecord {
        id: input.id.clone(),
        task: input.task.clone(),
        reference: input.reference.clone(),
        candidates: input.candidates.clone(),
        subtask: input.subtask.clone(),
        raw_output: input.prediction.clone(),
        extracted: extracted.unwrap_or_default(),
        scores,
        error,
        attempts,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskResult {
    pub task: TaskKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub shots: usize,
    pub n: usize,
    pub errors: usize,
    /// Percentages for accuracy-type metrics, raw values otherwise.
    pub metrics: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auc_subtasks_used: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auc_subtasks_skipped: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub sample_ids: Vec<String>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (mut sum, mut n) = (0.0, 0usize);
    for v in values {
        sum += v;
        n += 1;
    }
    (n > 0).then(|| sum / n as f64)
}

/// Aggregates records of one task. Only per-record scores are read, so a
/// report can always be recomputed from its records file.
pub fn aggregate(kind: &TaskKind, metrics: &[String], records: &[EvalRecord]) -> TaskResult {
    let mut order: Vec<&EvalRecord> = records.iter().collect();
    order.sort_by(|a, b| a.id.cmp(&b.id));
    let mut out = BTreeMap::new();
    let mut notes = Vec::new();
    let (mut used, mut skipped) = (None, None);
    for name in metrics {
        let name = name.as_str();
        if name == metric::AUC_ROC {
            let mut groups: BTreeMap<&str, RankedLabels> = BTreeMap::new();
            for r in &order {
                let (Some(&p), Some(&l)) = (r.scores.get("prediction"), r.scores.get("label")) else {
                    continue;
                };
                let g = groups
                    .entry(r.subtask.as_deref().unwrap_or(""))
                    .or_insert_with(|| RankedLabels::new(Vec::new(), Vec::new()));
                g.scores.push(p);
                g.labels.push(l > 0.5);
            }
            let tasks: Vec<RankedLabels> = groups.into_values().collect();
            match multi_task_auc(&tasks) {
                Ok(m) => {
                    out.insert(name.to_string(), m.mean * 100.0);
                    used = Some(m.used);
                    skipped = Some(m.skipped);
                    if m.skipped > 0 {
                        notes.push(format!("{} single-class subtask(s) excluded from AUC-ROC", m.skipped));
                    }
                }
                Err(_) => {
                    used = Some(0);
                    skipped = Some(tasks.len());
                    notes.push("AUC-ROC unavailable: no subtask has both classes".to_string());
                }
            }
            continue;
        }
        let is_fts = FTS_KINDS.iter().any(|(n, _)| *n == name);
        let value = if is_fts {
            let v = mean(order.iter().filter_map(|r| r.scores.get(name).copied()));
            if v.is_none() {
                notes.push(format!("{name}: no valid predictions; reported as 0"));
            }
            v.unwrap_or(0.0)
        } else {
            mean(order.iter().map(|r| r.scores.get(name).copied().unwrap_or(0.0))).unwrap_or(0.0)
        };
        let value = if metric::is_percentage(name) { value * 100.0 } else { value };
        out.insert(name.to_string(), value);
    }
    TaskResult {
        task: kind.clone(),
        dataset: None,
        seed: None,
        shots: 0,
        n: records.len(),
        errors: records.iter().filter(|r| r.error.is_some()).count(),
        metrics: out,
        auc_subtasks_used: used,
        auc_subtasks_skipped: skipped,
        notes,
        sample_ids: records.iter().map(|r| r.id.clone()).collect(),
    }
}
