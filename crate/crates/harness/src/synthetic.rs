//! Synthetic benchmark datasets for smoke tests and demos.
//!
//! Molecules are small acyclic or single-ring structures built from a chain
//! and a terminal group; every generated SMILES is distinct. Names and
//! captions are placeholders, so these datasets only make sense against a
//! model that echoes references.

use crate::dataset::BenchInstance;
use crate::task::{ReagentKind, TaskKind};
use chembench_core::{molecular_formula, parse_smiles};
use std::collections::BTreeMap;

const GROUPS: [&str; 10] = ["O", "N", "Cl", "C(=O)O", "c1ccccc1", "C#N", "F", "S", "OC", "C1CC1"];

/// The `i`-th synthetic SMILES. Distinct for distinct `i`.
pub fn synthetic_smiles(i: usize) -> String {
    let chain = 1 + i % 10 + 10 * (i / 100);
    format!("{}{}", "C".repeat(chain), GROUPS[(i / 10) % 10])
}

fn fields(pairs: &[(&str, String)]) -> BTreeMap<String, String> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

/// `n` instances of `kind` with ids `"{prefix}-{i:05}"`.
pub fn synthetic_dataset(kind: &TaskKind, n: usize) -> Vec<BenchInstance> {
    (0..n).map(|i| synthetic_instance(kind, i)).collect()
}

fn synthetic_instance(kind: &TaskKind, i: usize) -> BenchInstance {
    let smiles = synthetic_smiles(i);
    let partner = synthetic_smiles(i + 1000);
    let name = format!("synthetic compound {i}");
    let formula = || molecular_formula(&parse_smiles(&smiles).expect("synthetic SMILES parse"));
    let yes_no = if i % 2 == 0 { "Yes" } else { "No" };
    let reaction = format!("{smiles}.{partner}>>");
    let mut candidates = Vec::new();
    let mut subtask = None;
    let (prompt_fields, reference) = match kind {
        TaskKind::S2I => (fields(&[("smiles", smiles.clone())]), name),
        TaskKind::I2S => (fields(&[("iupac", name)]), smiles.clone()),
        TaskKind::S2MF => (fields(&[("smiles", smiles.clone())]), formula()),
        TaskKind::I2MF => (fields(&[("iupac", name)]), formula()),
        TaskKind::Captioning => (
            fields(&[("smiles", smiles.clone())]),
            format!("The molecule is a synthetic compound with index {i} and formula {}.", formula()),
        ),
        TaskKind::MoleculeDesign => (
            fields(&[("description", format!("The molecule is {name}."))]),
            smiles.clone(),
        ),
        TaskKind::Property(_) => {
            subtask = Some(if (i / 2) % 2 == 0 { "task_a" } else { "task_b" }.to_string());
            (fields(&[("smiles", smiles.clone())]), yes_no.to_string())
        }
        TaskKind::Yield(_) => (fields(&[("reaction", format!("{reaction}{smiles}{partner}"))]), yes_no.to_string()),
        TaskKind::ReactionPrediction => (fields(&[("reaction", reaction)]), format!("{smiles}.{partner}")),
        TaskKind::Retrosynthesis => (fields(&[("product", smiles.clone())]), format!("{smiles}.{partner}")),
        TaskKind::ReagentSelection(role) => {
            candidates = (0..4).map(|k| synthetic_smiles(2000 + 4 * i + k)).collect();
            let reference = match role {
                ReagentKind::Ligand => candidates[0].clone(),
                _ => candidates[i % 4].clone(),
            };
            (fields(&[("reaction", format!("{reaction}{smiles}"))]), reference)
        }
    };
    BenchInstance {
        id: format!("{}-{i:05}", kind.to_string().replace([':', '_'], "-")),
        prompt_fields,
        reference,
        candidates,
        subtask,
    }
}

pub fn to_jsonl(instances: &[BenchInstance]) -> String {
    instances
        .iter()
        .map(|i| serde_json::to_string(i).expect("instance serialises") + "\n")
        .collect()
}
