//! Answer extraction from free-form model output.

use crate::task::AnswerKind;
use chembench_core::chemgraph::{parse_smiles, Element};
use chembench_core::metrics::levenshtein;
use regex::Regex;
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("no answer found in model output")]
pub struct NoAnswerFound;

fn answer_region() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?s)<ANSWER>(.*?)</ANSWER>").expect("valid pattern"))
}

fn smiles_token() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"[A-Za-z0-9@+\-\[\]()=#$:./\\%]{2,}").expect("valid pattern"))
}

fn formula_token() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^((?:[A-Z][a-z]?\d*)+)([+-]\d*)?$").expect("valid pattern"))
}

fn element_group() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"([A-Z][a-z]?)(\d*)").expect("valid pattern"))
}

fn yes_no() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)\b(yes|no)\b").expect("valid pattern"))
}

/// Applies the extraction rule for `kind`.
///
/// A trimmed `<ANSWER>...</ANSWER>` region (the last one) wins for every
/// kind. Otherwise:
/// - SMILES: the last maximal SMILES-alphabet token of length ≥ 2 that
///   parses, also trying it without trailing periods; then the longest
///   parsing piece of a token split at `:`; then the whole trimmed text.
/// - formula: the last whitespace token, stripped of surrounding
///   punctuation, made of known element symbols with counts and an optional
///   charge, with at least one digit or two symbols.
/// - yes/no: the first standalone "yes" or "no", lowercased.
/// - multiple choice: the candidate closest in edit distance to any output
///   line; ties go to the earlier candidate.
/// - free text: the trimmed output.
pub fn extract_answer(raw: &str, kind: AnswerKind, candidates: &[String]) -> Result<String, NoAnswerFound> {
    if let Some(region) = answer_region().captures_iter(raw).last() {
        let text = region[1].trim();
        return if text.is_empty() {
            Err(NoAnswerFound)
        } else {
            Ok(text.to_string())
        };
    }
    match kind {
        AnswerKind::Smiles => extract_smiles(raw),
        AnswerKind::Formula => extract_formula(raw),
        AnswerKind::YesNo => yes_no()
            .find(raw)
            .map(|m| m.as_str().to_ascii_lowercase())
            .ok_or(NoAnswerFound),
        AnswerKind::MultipleChoice => choose_candidate(raw, candidates),
        AnswerKind::FreeText => {
            let t = raw.trim();
            if t.is_empty() {
                Err(NoAnswerFound)
            } else {
                Ok(t.to_string())
            }
        }
    }
}

fn parses(s: &str) -> bool {
    !s.is_empty() && parse_smiles(s).is_ok()
}

fn extract_smiles(raw: &str) -> Result<String, NoAnswerFound> {
    let tokens: Vec<&str> = smiles_token().find_iter(raw).map(|m| m.as_str()).collect();
    for tok in tokens.iter().rev() {
        for form in [*tok, tok.trim_end_matches('.')] {
            if parses(form) {
                return Ok(form.to_string());
            }
        }
    }
    let longest = tokens
        .iter()
        .flat_map(|t| t.split(':'))
        .map(|p| p.trim_end_matches('.'))
        .filter(|p| parses(p))
        .max_by_key(|p| p.len());
    if let Some(p) = longest {
        return Ok(p.to_string());
    }
    let whole = raw.trim().trim_end_matches('.');
    if parses(whole) {
        return Ok(whole.to_string());
    }
    Err(NoAnswerFound)
}

fn is_formula(tok: &str) -> bool {
    let Some(caps) = formula_token().captures(tok) else {
        return false;
    };
    let body = &caps[1];
    let mut groups = 0;
    for g in element_group().captures_iter(body) {
        if Element::from_symbol(&g[1]).is_none() {
            return false;
        }
        groups += 1;
    }
    groups >= 2 || body.chars().any(|c| c.is_ascii_digit())
}

fn extract_formula(raw: &str) -> Result<String, NoAnswerFound> {
    raw.split_whitespace()
        .map(|t| t.trim_matches(|c: char| ".,;:!?()\"'`*".contains(c)))
        .filter(|t| is_formula(t))
        .last()
        .map(String::from)
        .ok_or(NoAnswerFound)
}

fn choose_candidate(raw: &str, candidates: &[String]) -> Result<String, NoAnswerFound> {
    let lines: Vec<&str> = raw.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
    if lines.is_empty() {
        return Err(NoAnswerFound);
    }
    candidates
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let d = lines.iter().map(|l| levenshtein(l, c)).min().expect("lines nonempty");
            (d, i)
        })
        .min()
        .map(|(_, i)| candidates[i].clone())
        .ok_or(NoAnswerFound)
}
