//! Graph oracles that share no code with the canonicaliser.

use chembench_core::Molecule;

/// Element, aromatic flag, charge, isotope, total hydrogens.
pub type AtomLabel = (u8, bool, i8, u16, u32);

pub struct Graph {
    pub labels: Vec<AtomLabel>,
    /// Bond code between every atom pair, 0 when unbonded.
    pub adj: Vec<Vec<u8>>,
}

pub fn graph(mol: &Molecule) -> Graph {
    let n = mol.atom_count();
    let labels = mol
        .atoms()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            (
                a.element.atomic_number(),
                a.aromatic,
                a.formal_charge,
                a.isotope.unwrap_or(0),
                mol.hydrogen_count(i) as u32,
            )
        })
        .collect();
    let mut adj = vec![vec![0u8; n]; n];
    for b in mol.bonds() {
        adj[b.a][b.b] = b.order.code();
        adj[b.b][b.a] = b.order.code();
    }
    Graph { labels, adj }
}

fn degree(g: &Graph, i: usize) -> usize {
    g.adj[i].iter().filter(|&&c| c != 0).count()
}

/// Backtracking isomorphism test over labelled atoms and bond codes.
pub fn isomorphic(a: &Molecule, b: &Molecule) -> bool {
    let (ga, gb) = (graph(a), graph(b));
    let n = ga.labels.len();
    if n != gb.labels.len() {
        return false;
    }
    let mut la = ga.labels.clone();
    let mut lb = gb.labels.clone();
    la.sort();
    lb.sort();
    if la != lb {
        return false;
    }
    // visit atoms of `a` so that each one after the first of its component
    // has an already mapped neighbour
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for w in 0..n {
                if ga.adj[v][w] != 0 && !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    extend(&ga, &gb, &order, 0, &mut map, &mut used)
}

fn extend(ga: &Graph, gb: &Graph, order: &[usize], depth: usize, map: &mut [usize], used: &mut [bool]) -> bool {
    let Some(&v) = order.get(depth) else {
        return true;
    };
    for w in 0..gb.labels.len() {
        if used[w] || ga.labels[v] != gb.labels[w] || degree(ga, v) != degree(gb, w) {
            continue;
        }
        let consistent = order[..depth].iter().all(|&u| ga.adj[v][u] == gb.adj[w][map[u]]);
        if !consistent {
            continue;
        }
        map[v] = w;
        used[w] = true;
        if extend(ga, gb, order, depth + 1, map, used) {
            return true;
        }
        used[w] = false;
        map[v] = usize::MAX;
    }
    false
}

/// Lexicographically smallest serialisation of the labelled graph over every
/// atom numbering. Numberings are restricted to those listing labels in
/// sorted order, since the labels lead the serialisation.
pub fn minimal_serialization(mol: &Molecule) -> Vec<u64> {
    let g = graph(mol);
    let n = g.labels.len();
    let mut atoms: Vec<usize> = (0..n).collect();
    atoms.sort_by_key(|&i| g.labels[i]);
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for &a in &atoms {
        match classes.last_mut() {
            Some(c) if g.labels[c[0]] == g.labels[a] => c.push(a),
            _ => classes.push(vec![a]),
        }
    }
    let mut head: Vec<u64> = Vec::new();
    for &a in &atoms {
        let (z, ar, q, iso, h) = g.labels[a];
        head.push(((z as u64) << 40) | ((ar as u64) << 32) | (((q as i64 + 128) as u64) << 24) | ((iso as u64) << 8) | h as u64);
    }
    let mut best: Option<Vec<u64>> = None;
    let mut current: Vec<Vec<usize>> = classes.clone();
    permute_classes(&g, &mut current, 0, &head, &mut best);
    best.unwrap_or(head)
}

fn permute_classes(g: &Graph, classes: &mut Vec<Vec<usize>>, k: usize, head: &[u64], best: &mut Option<Vec<u64>>) {
    if k == classes.len() {
        let order: Vec<usize> = classes.iter().flatten().copied().collect();
        let mut s = head.to_vec();
        for i in 0..order.len() {
            for j in i + 1..order.len() {
                s.push(g.adj[order[i]][order[j]] as u64);
            }
        }
        if best.as_ref().is_none_or(|b| s < *b) {
            *best = Some(s);
        }
        return;
    }
    let len = classes[k].len();
    heap_permute(g, classes, k, len, head, best);
}

// Heap's algorithm over class `k`, recursing into the next class at each leaf.
fn heap_permute(g: &Graph, classes: &mut Vec<Vec<usize>>, k: usize, m: usize, head: &[u64], best: &mut Option<Vec<u64>>) {
    if m <= 1 {
        permute_classes(g, classes, k + 1, head, best);
        return;
    }
    for i in 0..m - 1 {
        heap_permute(g, classes, k, m - 1, head, best);
        if m % 2 == 0 {
            classes[k].swap(i, m - 1);
        } else {
            classes[k].swap(0, m - 1);
        }
    }
    heap_permute(g, classes, k, m - 1, head, best);
}
