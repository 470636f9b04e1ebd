//! Canonical SMILES.
//!
//! Each fragment is ranked by iterative refinement of atom invariants. Ties
//! left after refinement are broken by individualising one atom of the first
//! tied class and refining again; every candidate of that class is tried and
//! the lexicographically smallest serialisation wins. Automorphisms found
//! along the way (two leaves writing the same string) prune candidates that
//! are equivalent under them.

use super::molecule::Molecule;
use super::write::write_fragment;

/// Upper bound on explored leaves per fragment. Only highly symmetric cages
/// get anywhere near it.
const LEAF_BUDGET: usize = 20_000;

pub fn canonical_smiles(mol: &Molecule) -> String {
    let mut parts: Vec<String> = mol
        .fragments()
        .iter()
        .map(|f| canonical_fragment(mol, f).0)
        .collect();
    parts.sort();
    parts.join(".")
}

/// Canonical ranks for every atom (per fragment, 0-based within it).
pub fn canonical_ranks(mol: &Molecule) -> Vec<usize> {
    let mut ranks = vec![0; mol.atom_count()];
    for f in mol.fragments() {
        let (_, order) = canonical_fragment(mol, f);
        for (rank, atom) in order.into_iter().enumerate() {
            ranks[atom] = rank;
        }
    }
    ranks
}

#[derive(PartialEq, Eq, PartialOrd, Ord)]
struct Seed {
    atomic_number: u8,
    degree: usize,
    charge: i8,
    hydrogens: u8,
    in_ring: bool,
    aromatic: bool,
    isotope: u16,
}

struct Search<'m> {
    mol: &'m Molecule,
    local: Vec<usize>,
    /// neighbours in local indices with bond code
    adj: Vec<Vec<(usize, u8)>>,
    best: Option<(String, Vec<usize>)>,
    automorphisms: Vec<Vec<usize>>,
    leaves: usize,
}

fn canonical_fragment(mol: &Molecule, fragment: &[usize]) -> (String, Vec<usize>) {
    let mut index_of = vec![usize::MAX; mol.atom_count()];
    for (i, &a) in fragment.iter().enumerate() {
        index_of[a] = i;
    }
    let adj: Vec<Vec<(usize, u8)>> = fragment
        .iter()
        .map(|&a| {
            mol.neighbors(a)
                .iter()
                .map(|&(nbr, b)| (index_of[nbr], mol.bond(b).order.code()))
                .collect()
        })
        .collect();
    let seeds: Vec<Seed> = fragment
        .iter()
        .map(|&a| {
            let atom = mol.atom(a);
            Seed {
                atomic_number: atom.element.atomic_number(),
                degree: mol.degree(a),
                charge: atom.formal_charge,
                hydrogens: mol.hydrogen_count(a),
                in_ring: mol.atom_in_ring(a),
                aromatic: atom.aromatic,
                isotope: atom.isotope.unwrap_or(0),
            }
        })
        .collect();
    let ranks = dense_ranks(&seeds);

    let mut search = Search {
        mol,
        local: fragment.to_vec(),
        adj,
        best: None,
        automorphisms: Vec::new(),
        leaves: 0,
    };
    search.explore(ranks, &mut Vec::new());
    search.best.expect("fragment has at least one atom")
}

fn dense_ranks<T: Ord>(keys: &[T]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..keys.len()).collect();
    idx.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    let mut ranks = vec![0; keys.len()];
    let mut rank = 0;
    for w in 0..idx.len() {
        if w > 0 && keys[idx[w]] != keys[idx[w - 1]] {
            rank += 1;
        }
        ranks[idx[w]] = rank;
    }
    ranks
}

fn class_count(ranks: &[usize]) -> usize {
    ranks.iter().max().map_or(0, |m| m + 1)
}

impl<'m> Search<'m> {
    fn refine(&self, mut ranks: Vec<usize>) -> Vec<usize> {
        let mut classes = class_count(&ranks);
        loop {
            let keys: Vec<(usize, Vec<(usize, u8)>)> = (0..ranks.len())
                .map(|i| {
                    let mut nb: Vec<(usize, u8)> = self.adj[i].iter().map(|&(j, code)| (ranks[j], code)).collect();
                    nb.sort_unstable();
                    (ranks[i], nb)
                })
                .collect();
            let next = dense_ranks(&keys);
            let next_classes = class_count(&next);
            if next_classes == classes {
                return ranks;
            }
            classes = next_classes;
            ranks = next;
        }
    }

    fn explore(&mut self, ranks: Vec<usize>, path: &mut Vec<usize>) {
        let ranks = self.refine(ranks);
        let n = ranks.len();
        if class_count(&ranks) == n {
            self.leaf(&ranks);
            return;
        }
        // first (lowest-ranked) class with more than one member
        let mut sizes = vec![0usize; n];
        for &r in &ranks {
            sizes[r] += 1;
        }
        let target = (0..n).find(|&r| sizes[r] > 1).expect("non-discrete partition");
        let cell: Vec<usize> = (0..n).filter(|&i| ranks[i] == target).collect();

        let mut explored: Vec<usize> = Vec::new();
        for &v in &cell {
            if self.leaves >= LEAF_BUDGET && self.best.is_some() {
                break;
            }
            if !explored.is_empty() && self.equivalent_to_explored(v, &explored, path) {
                continue;
            }
            let keys: Vec<(usize, bool)> = (0..n).map(|i| (ranks[i], i != v)).collect();
            path.push(v);
            self.explore(dense_ranks(&keys), path);
            path.pop();
            explored.push(v);
        }
    }

    fn leaf(&mut self, ranks: &[usize]) {
        self.leaves += 1;
        let mut priority = vec![usize::MAX; self.mol.atom_count()];
        for (i, &a) in self.local.iter().enumerate() {
            priority[a] = ranks[i];
        }
        let (text, order) = write_fragment(self.mol, &self.local, &priority);
        match &self.best {
            None => self.best = Some((text, order)),
            Some((best, best_order)) => {
                if text == *best {
                    // same string: position-wise emission orders define an automorphism
                    let mut local_of = vec![usize::MAX; self.mol.atom_count()];
                    for (i, &a) in self.local.iter().enumerate() {
                        local_of[a] = i;
                    }
                    let mut perm = vec![0usize; self.local.len()];
                    for (&a, &b) in best_order.iter().zip(&order) {
                        perm[local_of[a]] = local_of[b];
                    }
                    if perm.iter().enumerate().any(|(i, &p)| i != p) {
                        self.automorphisms.push(perm);
                    }
                } else if text < *best {
                    self.best = Some((text, order));
                }
            }
        }
    }

    /// Whether `v` lies in the orbit of an explored atom under the found
    /// automorphisms that fix the current path pointwise.
    fn equivalent_to_explored(&self, v: usize, explored: &[usize], path: &[usize]) -> bool {
        let n = self.local.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let mut any = false;
        for g in &self.automorphisms {
            if path.iter().any(|&p| g[p] != p) {
                continue;
            }
            any = true;
            for (i, &j) in g.iter().enumerate() {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
        if !any {
            return false;
        }
        let root = find(&mut parent, v);
        explored.iter().any(|&w| find(&mut parent, w) == root)
    }
}
