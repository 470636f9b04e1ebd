//! Ring perception: bridge detection for ring membership and a minimum
//! cycle basis (SSSR) from Horton candidate cycles reduced over GF(2).

use super::molecule::{Bond, Molecule};
use std::collections::VecDeque;

/// Marks every bond that lies on at least one cycle (i.e. is not a bridge).
pub(crate) fn ring_bonds(n: usize, bonds: &[Bond], adjacency: &[Vec<(usize, usize)>]) -> Vec<bool> {
    let mut in_ring = vec![true; bonds.len()];
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut time = 0;
    // (atom, bond used to enter it, next neighbor slot)
    let mut stack: Vec<(usize, usize, usize)> = Vec::new();
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        disc[root] = time;
        low[root] = time;
        time += 1;
        stack.push((root, usize::MAX, 0));
        while let Some(top) = stack.last_mut() {
            let (atom, via, slot) = *top;
            if slot < adjacency[atom].len() {
                top.2 += 1;
                let (nbr, bond) = adjacency[atom][slot];
                if bond == via {
                    continue;
                }
                if disc[nbr] == usize::MAX {
                    disc[nbr] = time;
                    low[nbr] = time;
                    time += 1;
                    stack.push((nbr, bond, 0));
                } else {
                    low[atom] = low[atom].min(disc[nbr]);
                }
            } else {
                stack.pop();
                if let Some(&(parent, _, _)) = stack.last() {
                    low[parent] = low[parent].min(low[atom]);
                    if low[atom] > disc[parent] {
                        in_ring[via] = false;
                    }
                }
            }
        }
    }
    in_ring
}

/// Connected components, each sorted, ordered by their smallest atom.
pub(crate) fn components(n: usize, adjacency: &[Vec<(usize, usize)>]) -> (Vec<Vec<usize>>, Vec<usize>) {
    let mut fragment_of = vec![usize::MAX; n];
    let mut fragments = Vec::new();
    for start in 0..n {
        if fragment_of[start] != usize::MAX {
            continue;
        }
        let id = fragments.len();
        let mut members = vec![start];
        fragment_of[start] = id;
        let mut queue = VecDeque::from([start]);
        while let Some(atom) = queue.pop_front() {
            for &(nbr, _) in &adjacency[atom] {
                if fragment_of[nbr] == usize::MAX {
                    fragment_of[nbr] = id;
                    members.push(nbr);
                    queue.push_back(nbr);
                }
            }
        }
        members.sort_unstable();
        fragments.push(members);
    }
    (fragments, fragment_of)
}

#[derive(Clone)]
struct Candidate {
    len: usize,
    edges: Vec<u64>,
    atoms: Vec<usize>,
}

fn set_bit(bits: &mut [u64], i: usize) {
    bits[i / 64] |= 1 << (i % 64);
}

/// Minimum cycle basis; ring count equals the cyclomatic number.
pub(crate) fn sssr(mol: &Molecule) -> Vec<Vec<usize>> {
    let target = mol.ring_count();
    if target == 0 {
        return Vec::new();
    }
    let n = mol.atom_count();
    let words = mol.bonds().len().div_ceil(64);
    let ring_adj: Vec<Vec<(usize, usize)>> = (0..n)
        .map(|a| {
            let mut v: Vec<(usize, usize)> = mol
                .neighbors(a)
                .iter()
                .copied()
                .filter(|&(_, b)| mol.bond_in_ring(b))
                .collect();
            v.sort_unstable();
            v
        })
        .collect();

    let mut candidates: Vec<Candidate> = Vec::new();
    let mut dist = vec![usize::MAX; n];
    let mut parent = vec![(usize::MAX, usize::MAX); n];
    for root in (0..n).filter(|&a| mol.atom_in_ring(a)) {
        dist.iter_mut().for_each(|d| *d = usize::MAX);
        dist[root] = 0;
        let mut queue = VecDeque::from([root]);
        while let Some(a) = queue.pop_front() {
            for &(nbr, bond) in &ring_adj[a] {
                if dist[nbr] == usize::MAX {
                    dist[nbr] = dist[a] + 1;
                    parent[nbr] = (a, bond);
                    queue.push_back(nbr);
                }
            }
        }
        let path_to_root = |mut a: usize| {
            let mut atoms = vec![a];
            let mut bonds = Vec::new();
            while a != root {
                let (p, b) = parent[a];
                bonds.push(b);
                atoms.push(p);
                a = p;
            }
            (atoms, bonds)
        };
        for (bond_idx, bond) in mol.bonds().iter().enumerate() {
            if !mol.bond_in_ring(bond_idx) {
                continue;
            }
            let (x, y) = (bond.a, bond.b);
            if dist[x] == usize::MAX || dist[y] == usize::MAX {
                continue;
            }
            // tree edges give degenerate cycles
            if parent[x].1 == bond_idx || parent[y].1 == bond_idx {
                continue;
            }
            let (px, bx) = path_to_root(x);
            let (py, by) = path_to_root(y);
            let shared = px.iter().filter(|a| py.contains(a)).count();
            if shared != 1 {
                continue;
            }
            let mut edges = vec![0u64; words];
            for &b in bx.iter().chain(by.iter()) {
                set_bit(&mut edges, b);
            }
            set_bit(&mut edges, bond_idx);
            // root ... x, then y ... (stopping before root)
            let mut atoms: Vec<usize> = px.iter().rev().copied().collect();
            atoms.extend(py[..py.len() - 1].iter().copied());
            candidates.push(Candidate {
                len: bx.len() + by.len() + 1,
                edges,
                atoms,
            });
        }
    }
    candidates.sort_by(|a, b| a.len.cmp(&b.len).then_with(|| a.edges.cmp(&b.edges)));
    candidates.dedup_by(|a, b| a.edges == b.edges);

    // Gaussian elimination keyed by pivot bit.
    let mut basis: Vec<(usize, Vec<u64>)> = Vec::new();
    let mut rings = Vec::new();
    for cand in candidates {
        let mut row = cand.edges.clone();
        for (pivot, b) in &basis {
            if row[pivot / 64] >> (pivot % 64) & 1 == 1 {
                for (r, x) in row.iter_mut().zip(b) {
                    *r ^= x;
                }
            }
        }
        if let Some(pivot) = first_bit(&row) {
            // keep rows reduced against the new pivot
            for (_, b) in basis.iter_mut() {
                if b[pivot / 64] >> (pivot % 64) & 1 == 1 {
                    for (x, r) in b.iter_mut().zip(&row) {
                        *x ^= r;
                    }
                }
            }
            basis.push((pivot, row));
            rings.push(cand.atoms);
            if rings.len() == target {
                break;
            }
        }
    }
    rings
}

fn first_bit(bits: &[u64]) -> Option<usize> {
    bits.iter()
        .enumerate()
        .find(|(_, w)| **w != 0)
        .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
}
