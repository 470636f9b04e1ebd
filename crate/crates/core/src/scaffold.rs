//! Murcko scaffolds and scaffold-grouped train/test splitting.

use crate::chemgraph::{canonical_smiles, BondOrder, Element, Molecule};
use crate::rng::SplitMix64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SplitError {
    #[error("all {0} records share one scaffold; train and test cannot both be nonempty")]
    DegenerateSplit(usize),
    #[error("no records to split")]
    Empty,
    #[error("train fraction {0} must lie strictly between 0 and 1")]
    BadFraction(f64),
}

/// Ring systems, the linkers between them, and atoms double- or
/// triple-bonded to either. Acyclic input yields the empty molecule.
///
/// Kept atoms that lose a single-bonded neighbour gain one hydrogen per lost
/// bond where their hydrogen count is pinned (bracket atoms, aromatic N/P).
pub fn murcko_scaffold(mol: &Molecule) -> Molecule {
    let n = mol.atom_count();
    let mut core: Vec<bool> = vec![true; n];
    let mut degree: Vec<usize> = (0..n).map(|a| mol.degree(a)).collect();
    let mut queue: Vec<usize> = (0..n).filter(|&a| !mol.atom_in_ring(a) && degree[a] <= 1).collect();
    while let Some(a) = queue.pop() {
        if !core[a] {
            continue;
        }
        core[a] = false;
        for &(nbr, _) in mol.neighbors(a) {
            if core[nbr] {
                degree[nbr] -= 1;
                if !mol.atom_in_ring(nbr) && degree[nbr] <= 1 {
                    queue.push(nbr);
                }
            }
        }
    }
    if !core.iter().any(|&k| k) {
        return Molecule::empty();
    }

    let mut keep = core.clone();
    for a in 0..n {
        if core[a] {
            continue;
        }
        let exo = mol.neighbors(a).iter().any(|&(nbr, b)| {
            core[nbr] && matches!(mol.bond(b).order, BondOrder::Double | BondOrder::Triple)
        });
        if exo {
            keep[a] = true;
        }
    }

    let pinned = |a: usize| -> Option<u8> {
        let atom = mol.atom(a);
        let lost = mol.neighbors(a).iter().filter(|&&(nbr, _)| !keep[nbr]).count() as u8;
        if lost == 0 {
            return None;
        }
        let aromatic_np = atom.aromatic && matches!(atom.element, Element::N | Element::P);
        if atom.explicit_h.is_some() || aromatic_np {
            Some(mol.hydrogen_count(a).saturating_add(lost))
        } else {
            None
        }
    };
    mol.induced(&keep, pinned)
        .expect("removing side chains keeps a valid structure")
}

/// Canonical SMILES of the Murcko scaffold; "" for acyclic molecules.
pub fn scaffold_key(mol: &Molecule) -> String {
    let scaffold = murcko_scaffold(mol);
    if scaffold.is_empty() {
        String::new()
    } else {
        canonical_smiles(&scaffold)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitAssignment {
    pub train: Vec<String>,
    pub test: Vec<String>,
    pub seed: u64,
    pub requested_train_fraction: f64,
    pub achieved_train_fraction: f64,
    pub group_count: usize,
    pub largest_group: usize,
}

/// Splits records so that no scaffold key occurs on both sides.
///
/// Groups are sorted by key, shuffled with the seed, then stably sorted by
/// size (largest first), so the seed only reorders groups of equal size.
/// Groups join train while the train count stays within `fraction × total`;
/// the first group that would overflow, and all groups after it, go to test.
/// If even the first group overflows it still goes to train.
pub fn scaffold_split(
    records: &[(String, Molecule)],
    train_fraction: f64,
    seed: u64,
) -> Result<SplitAssignment, SplitError> {
    let keys: Vec<String> = records.iter().map(|(_, m)| scaffold_key(m)).collect();
    let ids: Vec<String> = records.iter().map(|(id, _)| id.clone()).collect();
    split_by_keys(&ids, &keys, train_fraction, seed)
}

/// [`scaffold_split`] over precomputed scaffold keys.
pub fn split_by_keys(
    ids: &[String],
    keys: &[String],
    train_fraction: f64,
    seed: u64,
) -> Result<SplitAssignment, SplitError> {
    assert_eq!(ids.len(), keys.len(), "one key per record");
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(SplitError::BadFraction(train_fraction));
    }
    if ids.is_empty() {
        return Err(SplitError::Empty);
    }
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, key) in keys.iter().enumerate() {
        groups.entry(key.as_str()).or_default().push(i);
    }
    if groups.len() == 1 {
        return Err(SplitError::DegenerateSplit(ids.len()));
    }
    let mut groups: Vec<Vec<usize>> = groups.into_values().collect();
    SplitMix64::derive(seed, "scaffold-split").shuffle(&mut groups);
    groups.sort_by_key(|g| std::cmp::Reverse(g.len()));

    let total = ids.len();
    let target = train_fraction * total as f64;
    let mut train_members: Vec<usize> = Vec::new();
    let mut test_members: Vec<usize> = Vec::new();
    let mut filling = true;
    for (gi, g) in groups.iter().enumerate() {
        let fits = (train_members.len() + g.len()) as f64 <= target + 1e-9;
        if filling && (fits || gi == 0) {
            train_members.extend(g);
        } else {
            filling = false;
            test_members.extend(g);
        }
    }
    train_members.sort_unstable();
    test_members.sort_unstable();
    Ok(SplitAssignment {
        achieved_train_fraction: train_members.len() as f64 / total as f64,
        train: train_members.into_iter().map(|i| ids[i].clone()).collect(),
        test: test_members.into_iter().map(|i| ids[i].clone()).collect(),
        seed,
        requested_train_fraction: train_fraction,
        group_count: groups.len(),
        largest_group: groups[0].len(),
    })
}
