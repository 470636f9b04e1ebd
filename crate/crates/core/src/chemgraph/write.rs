use super::element::Element;
use super::molecule::{implicit_from_half_units, BondOrder, Molecule};

/// Serialises a fragment by depth-first search, preferring atoms with lower
/// `priority` at every choice. Returns the text and the atoms in the order
/// they were written.
///
/// The start atom is the lowest-priority atom of the fragment. Branches are
/// taken in priority order with the last neighbour continuing the chain;
/// ring closures use the smallest free digit.
pub(crate) fn write_fragment(mol: &Molecule, fragment: &[usize], priority: &[usize]) -> (String, Vec<usize>) {
    let Some(&start) = fragment.iter().min_by_key(|&&a| priority[a]) else {
        return (String::new(), Vec::new());
    };

    let n = mol.atom_count();
    let mut visited = vec![false; n];
    let mut bond_used = vec![false; mol.bonds().len()];
    let mut children: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    // ring bonds seen from the ancestor (opening) and descendant (closing) side
    let mut openings: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    let mut closings: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];

    let sorted_neighbors = |a: usize| {
        let mut v: Vec<(usize, usize)> = mol.neighbors(a).to_vec();
        v.sort_by_key(|&(nbr, _)| priority[nbr]);
        v
    };

    let mut stack: Vec<(usize, Vec<(usize, usize)>, usize)> = vec![(start, sorted_neighbors(start), 0)];
    visited[start] = true;
    while let Some(top) = stack.last_mut() {
        let (atom, ref nbrs, slot) = *top;
        if slot >= nbrs.len() {
            stack.pop();
            continue;
        }
        top.2 += 1;
        let (nbr, bond) = nbrs[slot];
        if bond_used[bond] {
            continue;
        }
        bond_used[bond] = true;
        if visited[nbr] {
            openings[nbr].push((atom, bond));
            closings[atom].push((nbr, bond));
        } else {
            visited[nbr] = true;
            children[atom].push((nbr, bond));
            let next = sorted_neighbors(nbr);
            stack.push((nbr, next, 0));
        }
    }
    for list in openings.iter_mut().chain(closings.iter_mut()) {
        list.sort_by_key(|&(other, _)| priority[other]);
    }

    enum Task {
        Atom(usize, Option<usize>),
        Text(&'static str),
    }
    let mut out = String::new();
    let mut order = Vec::with_capacity(fragment.len());
    let mut digit_of_bond = vec![0u32; mol.bonds().len()];
    let mut digit_in_use: Vec<bool> = Vec::new();
    let mut tasks = vec![Task::Atom(start, None)];
    while let Some(task) = tasks.pop() {
        let (atom, via) = match task {
            Task::Text(t) => {
                out.push_str(t);
                continue;
            }
            Task::Atom(a, via) => (a, via),
        };
        if let Some(bond) = via {
            out.push_str(bond_text(mol, bond));
        }
        out.push_str(&atom_text(mol, atom));
        order.push(atom);

        let mut freed = Vec::new();
        for &(_, bond) in &closings[atom] {
            let d = digit_of_bond[bond];
            push_digit(&mut out, d);
            freed.push(d);
        }
        for &(_, bond) in &openings[atom] {
            let d = (1..)
                .find(|&d: &u32| !digit_in_use.get(d as usize).copied().unwrap_or(false))
                .unwrap();
            if digit_in_use.len() <= d as usize {
                digit_in_use.resize(d as usize + 1, false);
            }
            digit_in_use[d as usize] = true;
            digit_of_bond[bond] = d;
            out.push_str(bond_text(mol, bond));
            push_digit(&mut out, d);
        }
        for d in freed {
            digit_in_use[d as usize] = false;
        }

        let kids = &children[atom];
        if let Some((&(last, last_bond), rest)) = kids.split_last() {
            tasks.push(Task::Atom(last, Some(last_bond)));
            for &(child, bond) in rest.iter().rev() {
                tasks.push(Task::Text(")"));
                tasks.push(Task::Atom(child, Some(bond)));
                tasks.push(Task::Text("("));
            }
        }
    }
    (out, order)
}

fn push_digit(out: &mut String, d: u32) {
    match d {
        0..=9 => out.push(char::from(b'0' + d as u8)),
        10..=99 => {
            out.push('%');
            out.push_str(&d.to_string());
        }
        _ => {
            out.push_str("%(");
            out.push_str(&d.to_string());
            out.push(')');
        }
    }
}

fn bond_text(mol: &Molecule, bond: usize) -> &'static str {
    let b = mol.bond(bond);
    match b.order {
        BondOrder::Single => {
            if mol.atom(b.a).aromatic && mol.atom(b.b).aromatic {
                "-"
            } else {
                ""
            }
        }
        BondOrder::Double => "=",
        BondOrder::Triple => "#",
        BondOrder::Aromatic => {
            if mol.bond_in_ring(bond) {
                ""
            } else {
                ":"
            }
        }
    }
}

/// Atom text without stereo marks or atom classes.
pub(crate) fn atom_text(mol: &Molecule, index: usize) -> String {
    let atom = mol.atom(index);
    let h = mol.hydrogen_count(index);
    let symbol = if atom.aromatic {
        atom.element.symbol().to_ascii_lowercase()
    } else {
        atom.element.symbol().to_string()
    };
    let bare_ok = atom.element.in_organic_subset()
        && atom.formal_charge == 0
        && atom.isotope.is_none()
        && (!atom.aromatic || atom.element != Element::SE && atom.element != Element::AS)
        && implicit_from_half_units(atom.element, 0, mol.bond_order_half_units(index)) == h;
    if bare_ok {
        return symbol;
    }
    let mut s = String::from("[");
    if let Some(iso) = atom.isotope {
        s.push_str(&iso.to_string());
    }
    s.push_str(&symbol);
    match h {
        0 => {}
        1 => s.push('H'),
        n => {
            s.push('H');
            s.push_str(&n.to_string());
        }
    }
    match atom.formal_charge {
        0 => {}
        1 => s.push('+'),
        -1 => s.push('-'),
        q if q > 0 => s.push_str(&format!("+{q}")),
        q => s.push_str(&format!("-{}", -q)),
    }
    s.push(']');
    s
}

/// Writes a valid (not canonical) SMILES following input atom order.
pub fn write_smiles(mol: &Molecule) -> String {
    let priority: Vec<usize> = (0..mol.atom_count()).collect();
    mol.fragments()
        .iter()
        .map(|f| write_fragment(mol, f, &priority).0)
        .collect::<Vec<_>>()
        .join(".")
}
