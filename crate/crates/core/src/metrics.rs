//! Scoring functions for benchmark tasks.

use crate::chemgraph::{canonical_smiles, parse_smiles};
use crate::fingerprint::{tanimoto, FingerprintKind};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum MetricError {
    #[error("reference {0:?} is not a valid SMILES")]
    InvalidReference(String),
    #[error("both classes are required for AUC-ROC")]
    SingleClass,
    #[error("every task has a single class")]
    AllTasksSingleClass,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("no pairs to score")]
    Empty,
    #[error("n-gram order must be between 1 and 4, got {0}")]
    BadOrder(usize),
    #[error("score {0} is not finite")]
    NonFiniteScore(f64),
    #[error("log-probability {0} is positive or NaN")]
    InvalidLogProb(f64),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScorePair {
    pub prediction: String,
    pub reference: String,
}

impl ScorePair {
    pub fn new(prediction: impl Into<String>, reference: impl Into<String>) -> Self {
        ScorePair {
            prediction: prediction.into(),
            reference: reference.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExactMatch {
    Match,
    NoMatch,
    InvalidPred,
}

/// Compares two SMILES by canonical form.
pub fn exact_match_canonical(pred: &str, reference: &str) -> Result<ExactMatch, MetricError> {
    let r = parse_smiles(reference).map_err(|_| MetricError::InvalidReference(reference.to_string()))?;
    let Ok(p) = parse_smiles(pred) else {
        return Ok(ExactMatch::InvalidPred);
    };
    Ok(if canonical_smiles(&p) == canonical_smiles(&r) {
        ExactMatch::Match
    } else {
        ExactMatch::NoMatch
    })
}

pub fn formula_exact(pred: &str, reference: &str) -> bool {
    pred.trim() == reference.trim()
}

/// Edit distance over Unicode scalar values, untrimmed.
pub fn levenshtein(a: &str, b: &str) -> usize {
    strsim::levenshtein(a, b)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tokenizer {
    /// Lowercased, split on whitespace, each punctuation character its own token.
    Word,
    /// One token per Unicode scalar value.
    Char,
}

impl Tokenizer {
    pub fn tokenize(self, text: &str) -> Vec<String> {
        match self {
            Tokenizer::Char => text.chars().map(String::from).collect(),
            Tokenizer::Word => {
                let mut out = Vec::new();
                for word in text.split_whitespace() {
                    let mut current = String::new();
                    for c in word.chars() {
                        if c.is_alphanumeric() {
                            current.extend(c.to_lowercase());
                        } else {
                            if !current.is_empty() {
                                out.push(std::mem::take(&mut current));
                            }
                            out.push(c.to_string());
                        }
                    }
                    if !current.is_empty() {
                        out.push(current);
                    }
                }
                out
            }
        }
    }
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}

fn clipped_overlap(pred: &HashMap<&[String], usize>, reference: &HashMap<&[String], usize>) -> usize {
    pred.iter()
        .map(|(g, &c)| c.min(reference.get(g).copied().unwrap_or(0)))
        .sum()
}

/// Sentence BLEU with uniform weights over orders 1..=`max_n`.
///
/// An order with zero clipped matches uses `(m + 1) / (c + 1)` in place of
/// `m / c`. The brevity penalty is `exp(1 - r/c)` when the candidate is
/// shorter than the reference. An empty candidate scores 0.
pub fn sentence_bleu(pred: &[String], reference: &[String], max_n: usize) -> f64 {
    if pred.is_empty() {
        return 0.0;
    }
    let mut log_sum = 0.0;
    for n in 1..=max_n {
        let p = ngram_counts(pred, n);
        let r = ngram_counts(reference, n);
        let matches = clipped_overlap(&p, &r);
        let candidates = pred.len().saturating_sub(n - 1);
        let precision = if matches == 0 {
            1.0 / (candidates as f64 + 1.0)
        } else {
            matches as f64 / candidates as f64
        };
        log_sum += precision.ln();
    }
    let (c, r) = (pred.len() as f64, reference.len() as f64);
    let bp = if c < r { (1.0 - r / c).exp() } else { 1.0 };
    bp * (log_sum / max_n as f64).exp()
}

/// Macro average of [`sentence_bleu`] over pairs.
pub fn bleu(pairs: &[ScorePair], max_n: usize, tokenizer: Tokenizer) -> Result<f64, MetricError> {
    if !(1..=4).contains(&max_n) {
        return Err(MetricError::BadOrder(max_n));
    }
    mean_over(pairs, |p| {
        sentence_bleu(&tokenizer.tokenize(&p.prediction), &tokenizer.tokenize(&p.reference), max_n)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RougeVariant {
    Rouge1,
    Rouge2,
    RougeL,
}

fn f1(overlap: usize, pred_len: usize, ref_len: usize) -> f64 {
    if overlap == 0 {
        return 0.0;
    }
    let p = overlap as f64 / pred_len as f64;
    let r = overlap as f64 / ref_len as f64;
    2.0 * p * r / (p + r)
}

pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut row = vec![0usize; b.len() + 1];
    for x in a {
        let mut diag = 0;
        for (j, y) in b.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if x == y { diag + 1 } else { up.max(row[j]) };
            diag = up;
        }
    }
    row[b.len()]
}

/// ROUGE F1 for one pair of token sequences. When either side has no
/// n-grams of the required order the score is 1 for identical sequences and
/// 0 otherwise.
pub fn sentence_rouge(pred: &[String], reference: &[String], variant: RougeVariant) -> f64 {
    let n = match variant {
        RougeVariant::Rouge1 | RougeVariant::RougeL => 1,
        RougeVariant::Rouge2 => 2,
    };
    if pred.len() < n || reference.len() < n {
        return if pred == reference { 1.0 } else { 0.0 };
    }
    match variant {
        RougeVariant::RougeL => f1(lcs_len(pred, reference), pred.len(), reference.len()),
        _ => {
            let p = ngram_counts(pred, n);
            let r = ngram_counts(reference, n);
            f1(clipped_overlap(&p, &r), pred.len() - n + 1, reference.len() - n + 1)
        }
    }
}

pub fn rouge(pairs: &[ScorePair], variant: RougeVariant, tokenizer: Tokenizer) -> Result<f64, MetricError> {
    mean_over(pairs, |p| {
        sentence_rouge(&tokenizer.tokenize(&p.prediction), &tokenizer.tokenize(&p.reference), variant)
    })
}

fn mean_over(pairs: &[ScorePair], f: impl Fn(&ScorePair) -> f64) -> Result<f64, MetricError> {
    if pairs.is_empty() {
        return Err(MetricError::Empty);
    }
    Ok(pairs.iter().map(f).sum::<f64>() / pairs.len() as f64)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RankedLabels {
    pub scores: Vec<f64>,
    pub labels: Vec<bool>,
}

impl RankedLabels {
    pub fn new(scores: Vec<f64>, labels: Vec<bool>) -> Self {
        RankedLabels { scores, labels }
    }
}

/// Area under the ROC curve as the Mann-Whitney statistic with average
/// ranks for ties. Computed in exact integer arithmetic up to the final
/// division.
pub fn auc_roc(data: &RankedLabels) -> Result<f64, MetricError> {
    if data.scores.len() != data.labels.len() {
        return Err(MetricError::LengthMismatch {
            left: data.scores.len(),
            right: data.labels.len(),
        });
    }
    if let Some(&bad) = data.scores.iter().find(|s| !s.is_finite()) {
        return Err(MetricError::NonFiniteScore(bad));
    }
    let pos = data.labels.iter().filter(|&&l| l).count() as u128;
    let neg = data.labels.len() as u128 - pos;
    if pos == 0 || neg == 0 {
        return Err(MetricError::SingleClass);
    }
    let mut idx: Vec<usize> = (0..data.scores.len()).collect();
    idx.sort_by(|&a, &b| data.scores[a].total_cmp(&data.scores[b]));
    // twice the sum of positive ranks, ranks starting at 1
    let mut twice_rank_sum: u128 = 0;
    let mut start = 0;
    while start < idx.len() {
        let mut end = start;
        while end + 1 < idx.len() && data.scores[idx[end + 1]] == data.scores[idx[start]] {
            end += 1;
        }
        let twice_avg = (start + end + 2) as u128;
        let positives = idx[start..=end].iter().filter(|&&i| data.labels[i]).count() as u128;
        twice_rank_sum += twice_avg * positives;
        start = end + 1;
    }
    let numerator = twice_rank_sum - pos * (pos + 1);
    Ok(numerator as f64 / (2 * pos * neg) as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiTaskAuc {
    pub mean: f64,
    pub used: usize,
    pub skipped: usize,
}

/// Unweighted mean AUC over tasks that have both classes.
pub fn multi_task_auc(per_task: &[RankedLabels]) -> Result<MultiTaskAuc, MetricError> {
    if per_task.is_empty() {
        return Err(MetricError::Empty);
    }
    let mut values = Vec::new();
    let mut skipped = 0;
    for task in per_task {
        match auc_roc(task) {
            Ok(v) => values.push(v),
            Err(MetricError::SingleClass) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    if values.is_empty() {
        return Err(MetricError::AllTasksSingleClass);
    }
    Ok(MultiTaskAuc {
        mean: values.iter().sum::<f64>() / values.len() as f64,
        used: values.len(),
        skipped,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FtsSummary {
    pub mean_fts: f64,
    pub validity: f64,
    pub exact: f64,
    /// No prediction parsed, so `mean_fts` is reported as 0.
    pub fts_undefined: bool,
}

/// Validity, exact match and mean Tanimoto over the valid predictions.
pub fn fts_aggregate(pairs: &[ScorePair], kind: FingerprintKind) -> Result<FtsSummary, MetricError> {
    if pairs.is_empty() {
        return Err(MetricError::Empty);
    }
    let mut valid = 0usize;
    let mut exact = 0usize;
    let mut fts_sum = 0.0;
    for pair in pairs {
        let r = parse_smiles(&pair.reference).map_err(|_| MetricError::InvalidReference(pair.reference.clone()))?;
        let Ok(p) = parse_smiles(&pair.prediction) else {
            continue;
        };
        valid += 1;
        if canonical_smiles(&p) == canonical_smiles(&r) {
            exact += 1;
        }
        fts_sum += tanimoto(&kind.compute(&p), &kind.compute(&r)).expect("same kind and width");
    }
    let n = pairs.len() as f64;
    Ok(FtsSummary {
        mean_fts: if valid == 0 { 0.0 } else { fts_sum / valid as f64 },
        validity: valid as f64 / n,
        exact: exact as f64 / n,
        fts_undefined: valid == 0,
    })
}

/// Negative log-likelihood of the masked (returns) tokens of one sample.
pub fn masked_nll(token_logprobs: &[f64], returns_mask: &[bool]) -> Result<f64, MetricError> {
    if token_logprobs.len() != returns_mask.len() {
        return Err(MetricError::LengthMismatch {
            left: token_logprobs.len(),
            right: returns_mask.len(),
        });
    }
    if let Some(&bad) = token_logprobs.iter().find(|&&lp| lp.is_nan() || lp > 0.0) {
        return Err(MetricError::InvalidLogProb(bad));
    }
    Ok(-token_logprobs
        .iter()
        .zip(returns_mask)
        .filter(|(_, &m)| m)
        .map(|(lp, _)| lp)
        .sum::<f64>())
}

/// Fraction of true values; 0 for an empty slice.
pub fn accuracy(correct: &[bool]) -> f64 {
    if correct.is_empty() {
        0.0
    } else {
        correct.iter().filter(|&&c| c).count() as f64 / correct.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        Tokenizer::Word.tokenize(s)
    }

    #[test]
    fn exact_match_cases() {
        assert_eq!(exact_match_canonical("OCC", "CCO").unwrap(), ExactMatch::Match);
        assert_eq!(exact_match_canonical("not a molecule", "CCO").unwrap(), ExactMatch::InvalidPred);
        assert_eq!(exact_match_canonical("CCC", "CCO").unwrap(), ExactMatch::NoMatch);
        assert!(matches!(exact_match_canonical("CCO", "(("), Err(MetricError::InvalidReference(_))));
    }

    #[test]
    fn formula_trim() {
        assert!(formula_exact(" C2H6O ", "C2H6O"));
        assert!(!formula_exact("C2H6O", "C2H5OH"));
    }

    #[test]
    fn levenshtein_cases() {
        assert_eq!(levenshtein("abc", "abc"), 0);
        assert_eq!(levenshtein("", "abc"), 3);
        assert_eq!(levenshtein("kitten", "sitting"), 3);
        assert_eq!(levenshtein("é", "e"), 1);
    }

    #[test]
    fn word_tokenizer() {
        assert_eq!(toks("The molecule, an Acid."), vec!["the", "molecule", ",", "an", "acid", "."]);
        assert_eq!(toks("   "), Vec::<String>::new());
    }

    #[test]
    fn bleu_char_example() {
        let v = bleu(&[ScorePair::new("CCO", "CCON")], 2, Tokenizer::Char).unwrap();
        assert!((v - (-1.0f64 / 3.0).exp()).abs() < 1e-12);
    }

    #[test]
    fn bleu_edges() {
        assert_eq!(bleu(&[ScorePair::new("a b c d", "a b c d")], 4, Tokenizer::Word).unwrap(), 1.0);
        assert_eq!(bleu(&[ScorePair::new("", "a b")], 2, Tokenizer::Word).unwrap(), 0.0);
        // smoothed: p1 = 1/(2+1), p2 = 1/(1+1)
        let v = bleu(&[ScorePair::new("x y", "a b")], 2, Tokenizer::Word).unwrap();
        assert!((v - (1.0f64 / 6.0).sqrt()).abs() < 1e-12);
        assert!(bleu(&[], 2, Tokenizer::Word).is_err());
        assert!(bleu(&[ScorePair::new("a", "a")], 5, Tokenizer::Word).is_err());
    }

    #[test]
    fn rouge_examples() {
        let pairs = [ScorePair::new("the cat sat", "the cat ate")];
        assert!((rouge(&pairs, RougeVariant::Rouge1, Tokenizer::Word).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!((rouge(&pairs, RougeVariant::Rouge2, Tokenizer::Word).unwrap() - 0.5).abs() < 1e-12);
        assert!((rouge(&pairs, RougeVariant::RougeL, Tokenizer::Word).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        let disjoint = [ScorePair::new("a b", "c d")];
        assert_eq!(rouge(&disjoint, RougeVariant::Rouge1, Tokenizer::Word).unwrap(), 0.0);
        let single = [ScorePair::new("a", "a")];
        assert_eq!(rouge(&single, RougeVariant::Rouge2, Tokenizer::Word).unwrap(), 1.0);
    }

    #[test]
    fn auc_cases() {
        let perfect = RankedLabels::new(vec![0.1, 0.2, 0.8, 0.9], vec![false, false, true, true]);
        assert_eq!(auc_roc(&perfect).unwrap(), 1.0);
        let inverted = RankedLabels::new(perfect.scores.clone(), perfect.labels.iter().map(|l| !l).collect());
        assert_eq!(auc_roc(&inverted).unwrap(), 0.0);
        let tied = RankedLabels::new(vec![0.5; 4], vec![true, false, true, false]);
        assert_eq!(auc_roc(&tied).unwrap(), 0.5);
        let one = RankedLabels::new(vec![0.1, 0.2], vec![true, true]);
        assert_eq!(auc_roc(&one), Err(MetricError::SingleClass));
    }

    #[test]
    fn multi_task_cases() {
        let a = RankedLabels::new(vec![0.0, 1.0], vec![false, true]);
        let b = RankedLabels::new(vec![1.0, 1.0], vec![false, true]);
        let c = RankedLabels::new(vec![1.0], vec![true]);
        let r = multi_task_auc(&[a.clone(), b, c.clone()]).unwrap();
        assert_eq!((r.mean, r.used, r.skipped), (0.75, 2, 1));
        assert_eq!(multi_task_auc(&[a]).unwrap().mean, 1.0);
        assert_eq!(multi_task_auc(&[c]), Err(MetricError::AllTasksSingleClass));
    }

    #[test]
    fn fts_cases() {
        let same = [ScorePair::new("OCC", "CCO"), ScorePair::new("c1ccccc1", "c1ccccc1")];
        let s = fts_aggregate(&same, FingerprintKind::Morgan).unwrap();
        assert_eq!((s.validity, s.exact, s.mean_fts, s.fts_undefined), (1.0, 1.0, 1.0, false));
        let none = [ScorePair::new("UNKNOWN", "CCO")];
        let s = fts_aggregate(&none, FingerprintKind::Keys).unwrap();
        assert_eq!((s.validity, s.exact, s.mean_fts, s.fts_undefined), (0.0, 0.0, 0.0, true));
        let half = [ScorePair::new("CCO", "CCO"), ScorePair::new("((", "CCN")];
        let s = fts_aggregate(&half, FingerprintKind::Path).unwrap();
        assert_eq!((s.validity, s.exact, s.mean_fts), (0.5, 0.5, 1.0));
    }

    #[test]
    fn masked_nll_cases() {
        let lp = vec![0.5f64.ln(); 3];
        assert!((masked_nll(&lp, &[true; 3]).unwrap() - 3.0 * 2f64.ln()).abs() < 1e-12);
        assert_eq!(masked_nll(&lp, &[false; 3]).unwrap(), 0.0);
        assert!(matches!(masked_nll(&lp, &[true]), Err(MetricError::LengthMismatch { .. })));
        assert!(masked_nll(&[0.1], &[true]).is_err());
    }
}
