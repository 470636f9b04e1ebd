use chembench_core::fingerprint::{tanimoto, BitFingerprint, FingerprintKind};
use chembench_core::metrics::{
    auc_roc, levenshtein, masked_nll, rouge, sentence_bleu, RankedLabels, RougeVariant, ScorePair, Tokenizer,
};
use chembench_core::scaffold::split_by_keys;
use chembench_core::{canonical_smiles, parse_smiles, write_smiles, Molecule};
use proptest::prelude::*;
use std::collections::HashSet;
use std::sync::OnceLock;

fn fixture() -> &'static [Molecule] {
    static MOLS: OnceLock<Vec<Molecule>> = OnceLock::new();
    MOLS.get_or_init(|| {
        include_str!("fixtures/molecules.smi")
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| parse_smiles(l.trim()).expect("fixture parses"))
            .collect()
    })
}

fn molecule() -> impl Strategy<Value = Molecule> {
    (0..fixture().len()).prop_map(|i| fixture()[i].clone())
}

fn permuted_molecule() -> impl Strategy<Value = (Molecule, Molecule)> {
    molecule().prop_flat_map(|m| {
        let n = m.atom_count();
        Just((0..n).collect::<Vec<usize>>())
            .prop_shuffle()
            .prop_map(move |p| (m.clone(), m.permuted(&p)))
    })
}

fn words() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(vec!["the", "a", "cat", "sat", "mat", "on", "acid", "ring"]), 0..12)
        .prop_map(|w| w.join(" "))
}

fn scored_labels() -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
    (2usize..60).prop_flat_map(|n| {
        (
            prop::collection::vec((0u8..8).prop_map(|v| v as f64), n),
            prop::collection::vec(any::<bool>(), n - 2),
        )
            .prop_map(|(s, mut l)| {
                l.push(true);
                l.push(false);
                (s, l)
            })
    })
}

proptest! {
    #[test]
    fn canonical_form_ignores_atom_order((m, p) in permuted_molecule()) {
        prop_assert_eq!(canonical_smiles(&m), canonical_smiles(&p));
    }

    #[test]
    fn written_smiles_reparse_to_same_molecule((_, p) in permuted_molecule()) {
        let text = write_smiles(&p);
        let back = parse_smiles(&text).unwrap();
        prop_assert_eq!(canonical_smiles(&back), canonical_smiles(&p));
    }

    #[test]
    fn canonical_smiles_is_a_fixed_point(m in molecule()) {
        let c = canonical_smiles(&m);
        prop_assert_eq!(canonical_smiles(&parse_smiles(&c).unwrap()), c);
    }

    #[test]
    fn parser_never_panics(bytes in prop::collection::vec(any::<u8>(), 0..64)) {
        let _ = parse_smiles(&String::from_utf8_lossy(&bytes));
    }

    #[test]
    fn tanimoto_is_symmetric_and_bounded(a in molecule(), b in molecule()) {
        for kind in FingerprintKind::ALL {
            let (fa, fb) = (kind.compute(&a), kind.compute(&b));
            let t = tanimoto(&fa, &fb).unwrap();
            prop_assert!((0.0..=1.0).contains(&t));
            prop_assert_eq!(t, tanimoto(&fb, &fa).unwrap());
            prop_assert_eq!(tanimoto(&fa, &fa).unwrap(), 1.0);
        }
    }

    #[test]
    fn fingerprint_hex_round_trips(m in molecule()) {
        for kind in FingerprintKind::ALL {
            let fp = kind.compute(&m);
            prop_assert_eq!(BitFingerprint::from_hex(kind, fp.width(), &fp.to_hex()).unwrap(), fp);
        }
    }

    #[test]
    fn levenshtein_is_a_metric(a in "[a-d]{0,8}", b in "[a-d]{0,8}", c in "[a-d]{0,8}") {
        prop_assert_eq!(levenshtein(&a, &b), levenshtein(&b, &a));
        prop_assert!(levenshtein(&a, &c) <= levenshtein(&a, &b) + levenshtein(&b, &c));
        prop_assert_eq!(levenshtein(&a, &b) == 0, a == b);
        prop_assert!(levenshtein(&a, &b) <= a.chars().count().max(b.chars().count()));
    }

    #[test]
    fn bleu_is_bounded_and_one_on_identity(p in words(), r in words()) {
        let t = Tokenizer::Word;
        for n in 1..=4 {
            let v = sentence_bleu(&t.tokenize(&p), &t.tokenize(&r), n);
            prop_assert!((0.0..=1.0).contains(&v));
        }
        if t.tokenize(&r).len() >= 4 {
            let v = sentence_bleu(&t.tokenize(&r), &t.tokenize(&r), 4);
            prop_assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rouge_is_bounded_and_one_on_identity(p in words(), r in words()) {
        for variant in [RougeVariant::Rouge1, RougeVariant::Rouge2, RougeVariant::RougeL] {
            let v = rouge(&[ScorePair::new(&p, &r)], variant, Tokenizer::Word).unwrap();
            prop_assert!((0.0..=1.0).contains(&v));
            if Tokenizer::Word.tokenize(&r).len() >= 2 {
                let same = rouge(&[ScorePair::new(&r, &r)], variant, Tokenizer::Word).unwrap();
                prop_assert_eq!(same, 1.0);
            }
        }
    }

    #[test]
    fn auc_is_rank_based((scores, labels) in scored_labels()) {
        let auc = auc_roc(&RankedLabels::new(scores.clone(), labels.clone())).unwrap();
        prop_assert!((0.0..=1.0).contains(&auc));
        let shifted: Vec<f64> = scores.iter().map(|s| 3.0 * s + s.powi(3) - 7.0).collect();
        prop_assert_eq!(auc_roc(&RankedLabels::new(shifted, labels.clone())).unwrap(), auc);
        let flipped: Vec<bool> = labels.iter().map(|l| !l).collect();
        let complement = auc_roc(&RankedLabels::new(scores, flipped)).unwrap();
        prop_assert!((auc + complement - 1.0).abs() < 1e-12);
    }

    #[test]
    fn masked_nll_is_additive(parts in prop::collection::vec((-20.0f64..=0.0, 0u8..3), 1..50)) {
        let lp: Vec<f64> = parts.iter().map(|p| p.0).collect();
        let mask = |k: u8| parts.iter().map(|p| p.1 == k).collect::<Vec<_>>();
        let union: Vec<bool> = parts.iter().map(|p| p.1 != 0).collect();
        let (a, b, ab) = (masked_nll(&lp, &mask(1)).unwrap(), masked_nll(&lp, &mask(2)).unwrap(), masked_nll(&lp, &union).unwrap());
        prop_assert!(a >= 0.0 && b >= 0.0);
        prop_assert!((a + b - ab).abs() <= 1e-9 * ab.max(1.0));
    }

    #[test]
    fn scaffold_split_never_leaks(keys in prop::collection::vec(0u8..12, 2..80), seed in any::<u64>()) {
        let ids: Vec<String> = (0..keys.len()).map(|i| format!("r{i}")).collect();
        let keys: Vec<String> = keys.iter().map(|k| format!("k{k}")).collect();
        if let Ok(split) = split_by_keys(&ids, &keys, 0.8, seed) {
            let key_of = |id: &String| keys[id[1..].parse::<usize>().unwrap()].clone();
            let train: HashSet<String> = split.train.iter().map(key_of).collect();
            prop_assert!(split.test.iter().all(|id| !train.contains(&key_of(id))));
            let mut all: Vec<&String> = split.train.iter().chain(&split.test).collect();
            all.sort();
            all.dedup();
            prop_assert_eq!(all.len(), ids.len());
            prop_assert_eq!(split_by_keys(&ids, &keys, 0.8, seed).unwrap(), split);
        }
    }
}
