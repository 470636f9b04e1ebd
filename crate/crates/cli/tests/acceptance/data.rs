use crate::{check, fixture, Outcome};
use chembench_core::scaffold::{scaffold_key, scaffold_split};
use chembench_core::taskgen::{
    build_md, build_mna, build_mpp, build_rc, build_tbmd, read_pairs_csv, read_reactions, unmask_reaction, write_jsonl,
    LabeledTable, MnaDirection, ReactionRecord, TaskFamily, TaskInstance, TemplatePool,
};
use chembench_core::{canonical_smiles, parse_smiles, Molecule};
use std::collections::{HashMap, HashSet};

const RINGS: [&str; 10] = [
    "c1ccccc1",
    "C1CCCCC1",
    "c1ccncc1",
    "C1CCNCC1",
    "c1ccoc1",
    "c1ccsc1",
    "C1CC1",
    "C1CCC1",
    "c1ccc2ccccc2c1",
    "C1CCOC1",
];

/// Tail chain, first ring, linker, optional second ring. The scaffold is
/// fixed by the rings and linker; the tail only varies the molecule.
fn synthetic_molecule(i: usize) -> String {
    let r1 = RINGS[i % 10];
    let linker = "C".repeat((i / 10) % 4);
    let r2 = match (i / 40) % 11 {
        10 => String::new(),
        k => format!("{linker}{}", RINGS[k]),
    };
    let tail = "C".repeat(i / 440);
    format!("{tail}{r1}{r2}")
}

pub fn scaffold_split_criterion() -> Outcome {
    let records: Vec<(String, Molecule)> = (0..10_000)
        .map(|i| {
            let s = synthetic_molecule(i);
            parse_smiles(&s).map(|m| (format!("mol{i:05}"), m)).map_err(|e| format!("{s}: {e}"))
        })
        .collect::<Result<_, _>>()?;
    let keys: HashMap<&str, String> = records.iter().map(|(id, m)| (id.as_str(), scaffold_key(m))).collect();
    let mut group_sizes: HashMap<&str, usize> = HashMap::new();
    for k in keys.values() {
        *group_sizes.entry(k.as_str()).or_default() += 1;
    }
    let largest = *group_sizes.values().max().expect("nonempty");
    let tolerance = largest as f64 / records.len() as f64;
    let mut worst = 0.0f64;
    for seed in 0..20u64 {
        let a = scaffold_split(&records, 0.8, seed).map_err(|e| e.to_string())?;
        let b = scaffold_split(&records, 0.8, seed).map_err(|e| e.to_string())?;
        let (ja, jb) = (serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        check(ja == jb, || format!("seed {seed}: re-run differs"))?;
        check(a.train.len() + a.test.len() == records.len(), || format!("seed {seed}: records lost"))?;
        let train_keys: HashSet<&str> = a.train.iter().map(|id| keys[id.as_str()].as_str()).collect();
        let leaked = a.test.iter().filter(|id| train_keys.contains(keys[id.as_str()].as_str())).count();
        check(leaked == 0, || format!("seed {seed}: {leaked} test molecules share a train scaffold"))?;
        let achieved = a.train.len() as f64 / records.len() as f64;
        worst = worst.max((achieved - 0.8).abs());
        check((achieved - 0.8).abs() <= tolerance, || {
            format!("seed {seed}: achieved {achieved} outside 0.8 +/- {tolerance}")
        })?;
    }
    Ok(format!(
        "10000 molecules, {} scaffolds, 20 seeds: no leakage, max |achieved - 0.8| = {worst:.4} <= {tolerance:.4}, re-runs identical",
        group_sizes.len()
    ))
}

fn pool(family: TaskFamily, file: &str) -> TemplatePool {
    let text = std::fs::read_to_string(fixture(&format!("taskgen/{file}"))).expect("template fixture");
    TemplatePool::load(family, &text).expect("valid templates")
}

fn pairs(file: &str, a: &str, b: &str) -> Vec<(String, String)> {
    let text = std::fs::read(fixture(&format!("taskgen/{file}"))).expect("record fixture");
    read_pairs_csv(text.as_slice(), a, b).expect("valid csv")
}

fn build_all() -> Result<Vec<(&'static str, Vec<TaskInstance>)>, String> {
    const SEED: u64 = 2024;
    let descriptions = pairs("descriptions.csv", "smiles", "description");
    let names = pairs("names.csv", "smiles", "iupac");
    let labels = LabeledTable::from_csv(
        "toy",
        std::fs::read(fixture("taskgen/labels.csv")).map_err(|e| e.to_string())?.as_slice(),
    )
    .map_err(|e| e.to_string())?;
    let reactions = read_reactions(&std::fs::read_to_string(fixture("taskgen/reactions.txt")).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let e = |e: chembench_core::taskgen::TaskgenError| e.to_string();
    Ok(vec![
        ("md", build_md(&descriptions, &pool(TaskFamily::Md, "md.txt"), SEED).map_err(e)?),
        ("tbmd", build_tbmd(&descriptions, &pool(TaskFamily::Tbmd, "tbmd.txt"), SEED).map_err(e)?),
        ("mpp", build_mpp(&labels, &pool(TaskFamily::Mpp, "mpp.txt"), SEED).map_err(e)?),
        ("rc", build_rc(&reactions, &pool(TaskFamily::Rc, "rc.txt"), SEED).map_err(e)?),
        (
            "mna_s2i",
            build_mna(&names, &pool(TaskFamily::MnaS2i, "mna_s2i.txt"), SEED, MnaDirection::S2i).map_err(e)?,
        ),
        (
            "mna_i2s",
            build_mna(&names, &pool(TaskFamily::MnaI2s, "mna_i2s.txt"), SEED, MnaDirection::I2s).map_err(e)?,
        ),
        (
            "mna_s2mf",
            build_mna(&names, &pool(TaskFamily::MnaS2mf, "mna_s2mf.txt"), SEED, MnaDirection::S2mf).map_err(e)?,
        ),
        (
            "mna_i2mf",
            build_mna(&names, &pool(TaskFamily::MnaI2mf, "mna_i2mf.txt"), SEED, MnaDirection::I2mf).map_err(e)?,
        ),
    ])
}

fn canonical_components(r: &ReactionRecord) -> Option<(Vec<String>, Vec<String>, Vec<String>)> {
    let canon = |side: &[String]| -> Option<Vec<String>> {
        side.iter().map(|s| parse_smiles(s).ok().map(|m| canonical_smiles(&m))).collect()
    };
    Some((canon(&r.reactants)?, canon(&r.reagents)?, canon(&r.products)?))
}

pub fn taskgen_goldens() -> Outcome {
    let bless = std::env::var_os("CHEMBENCH_BLESS").is_some();
    let first = build_all()?;
    let second = build_all()?;
    let mut total = 0;
    for ((name, a), (_, b)) in first.iter().zip(&second) {
        let (ja, jb) = (write_jsonl(a), write_jsonl(b));
        check(ja == jb, || format!("{name}: two runs differ"))?;
        let golden = fixture(&format!("golden/{name}.jsonl"));
        if bless {
            std::fs::create_dir_all(golden.parent().unwrap()).map_err(|e| e.to_string())?;
            std::fs::write(&golden, &ja).map_err(|e| e.to_string())?;
        }
        let stored = std::fs::read_to_string(&golden).map_err(|e| format!("{}: {e}", golden.display()))?;
        check(stored == ja, || format!("{name}: output differs from {}", golden.display()))?;
        total += a.len();
    }

    // reaction completion: filling the masks restores the source reaction
    let reactions = read_reactions(&std::fs::read_to_string(fixture("taskgen/reactions.txt")).unwrap()).unwrap();
    let rc = &first.iter().find(|(n, _)| *n == "rc").unwrap().1;
    check(rc.len() == reactions.len(), || "rc instance count".into())?;
    for inst in rc {
        let src: usize = inst.meta["source_index"].parse().unwrap();
        let filled = unmask_reaction(&inst.meta["reaction"], &inst.returns)
            .ok_or_else(|| format!("{}: mask count does not match answers", inst.id))?;
        let restored = ReactionRecord::parse(&filled).map_err(|e| format!("{}: {e}", inst.id))?;
        check(
            canonical_components(&restored) == canonical_components(&reactions[src]),
            || format!("{}: {filled} does not restore {}", inst.id, reactions[src].render()),
        )?;
        check(inst.prompt.contains(&inst.meta["reaction"]), || format!("{}: prompt lacks reaction", inst.id))?;
    }

    // molecule description: hand-counted sentences decide duplication
    let counted = pairs("descriptions.csv", "description", "sentences");
    let expected_dups = counted.iter().filter(|(_, n)| n.parse::<usize>().unwrap() >= 3).count();
    check(expected_dups == 8, || format!("fixture annotates {expected_dups} long descriptions"))?;
    for name in ["md", "tbmd"] {
        let insts = &first.iter().find(|(n, _)| *n == name).unwrap().1;
        let dups = insts.iter().filter(|i| i.id.ends_with("-dup")).count();
        check(dups == expected_dups, || format!("{name}: {dups} duplicates, expected {expected_dups}"))?;
        check(insts.len() == 20 + expected_dups, || format!("{name}: {} instances", insts.len()))?;
    }
    Ok(format!(
        "8 builders, {total} instances match stored goldens on two runs; 20 RC reconstructions; {expected_dups} MD/TBMD duplicates"
    ))
}
