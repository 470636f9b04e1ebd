use crate::{check, Outcome};
use chembench_core::metrics::{auc_roc, levenshtein, masked_nll, rouge, sentence_bleu, RankedLabels, RougeVariant, ScorePair, Tokenizer};
use chembench_core::rng::SplitMix64;

/// Probability that a random positive outscores a random negative, ties half.
fn pair_counting_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for (i, &si) in scores.iter().enumerate() {
        if !labels[i] {
            continue;
        }
        for (j, &sj) in scores.iter().enumerate() {
            if labels[j] {
                continue;
            }
            pairs += 1.0;
            if si > sj {
                wins += 1.0;
            } else if si == sj {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

pub fn auc_oracle() -> Outcome {
    let mut rng = SplitMix64::new(1000);
    let mut worst = 0.0f64;
    for case in 0..1000 {
        let n = 2 + rng.index(199);
        let levels = 1 + rng.index(12) as u64;
        let mut labels: Vec<bool> = (0..n).map(|_| rng.below(2) == 1).collect();
        labels[0] = true;
        labels[1] = false;
        let scores: Vec<f64> = (0..n).map(|_| rng.below(levels) as f64 / 4.0 - 1.0).collect();
        let got = auc_roc(&RankedLabels::new(scores.clone(), labels.clone())).map_err(|e| format!("case {case}: {e}"))?;
        let expected = pair_counting_auc(&scores, &labels);
        worst = worst.max((got - expected).abs());
        check((got - expected).abs() <= 1e-12, || format!("case {case}: {got} vs {expected}"))?;
        let transformed: Vec<f64> = scores.iter().map(|&s| (s / 3.0).exp() + 2.0 * s * s * s).collect();
        let again = auc_roc(&RankedLabels::new(transformed, labels)).map_err(|e| e.to_string())?;
        check((again - got).abs() <= 1e-12, || format!("case {case}: monotone transform moved {got} to {again}"))?;
    }
    Ok(format!("1000 tied instances match pair counting (max error {worst:e}); monotone invariance holds"))
}

pub fn metric_spot_values() -> Outcome {
    let c = Tokenizer::Char;
    let bleu = sentence_bleu(&c.tokenize("CCO"), &c.tokenize("CCON"), 2);
    let hand = (1.0f64 - 4.0 / 3.0).exp();
    check((bleu - 0.7165).abs() <= 1e-4 && (bleu - hand).abs() <= 1e-12, || format!("BLEU {bleu}"))?;

    let lev = levenshtein("kitten", "sitting");
    check(lev == 3, || format!("levenshtein {lev}"))?;

    let r1 = rouge(&[ScorePair::new("the cat sat", "the cat ate")], RougeVariant::Rouge1, Tokenizer::Word)
        .map_err(|e| e.to_string())?;
    check((r1 - 2.0 / 3.0).abs() <= 1e-12, || format!("rouge1 {r1}"))?;
    Ok(format!("BLEU {bleu:.6}, levenshtein 3, rouge1 {r1:.12}"))
}

pub fn masked_nll_criterion() -> Outcome {
    let half = 0.5f64.ln();
    let v = masked_nll(&[half, half, half, -1.0], &[true, true, true, false]).map_err(|e| e.to_string())?;
    check((v - 2.0794).abs() <= 1e-4, || format!("three tokens at ln 0.5 gave {v}"))?;

    let mut rng = SplitMix64::new(5);
    for case in 0..1000 {
        let n = 1 + rng.index(64);
        let lp: Vec<f64> = (0..n).map(|_| -((rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64) * 10.0).collect();
        let part: Vec<u64> = (0..n).map(|_| rng.below(3)).collect();
        let a: Vec<bool> = part.iter().map(|&p| p == 1).collect();
        let b: Vec<bool> = part.iter().map(|&p| p == 2).collect();
        let both: Vec<bool> = part.iter().map(|&p| p != 0).collect();
        let (na, nb, nab) = (
            masked_nll(&lp, &a).map_err(|e| e.to_string())?,
            masked_nll(&lp, &b).map_err(|e| e.to_string())?,
            masked_nll(&lp, &both).map_err(|e| e.to_string())?,
        );
        check((na + nb - nab).abs() <= 1e-9 * nab.max(1.0), || format!("case {case}: {na} + {nb} != {nab}"))?;
    }
    Ok(format!("ln 0.5 x 3 = {v:.6}; additive over 1000 random disjoint mask pairs"))
}
