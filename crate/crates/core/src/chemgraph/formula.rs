use super::element::Element;
use super::molecule::Molecule;
use std::collections::BTreeMap;
use std::fmt::Write;

/// Hill-system formula over all fragments with a net-charge suffix.
///
/// Carbon first, then hydrogen, then the rest alphabetically; without carbon
/// everything (hydrogen included) is alphabetical. Isotopes count as their
/// element. Charge renders as `+`, `-`, `+2`, `-3`, ...
pub fn molecular_formula(mol: &Molecule) -> String {
    let mut counts: BTreeMap<&'static str, u32> = BTreeMap::new();
    let mut hydrogens = 0u32;
    for (i, atom) in mol.atoms().iter().enumerate() {
        if atom.element == Element::H {
            hydrogens += 1;
        } else {
            *counts.entry(atom.element.symbol()).or_default() += 1;
        }
        hydrogens += mol.hydrogen_count(i) as u32;
    }
    let mut out = String::new();
    let mut emit = |symbol: &str, n: u32| {
        if n == 0 {
            return;
        }
        out.push_str(symbol);
        if n > 1 {
            write!(out, "{n}").unwrap();
        }
    };
    if let Some(c) = counts.remove("C") {
        emit("C", c);
        emit("H", hydrogens);
        for (symbol, n) in &counts {
            emit(symbol, *n);
        }
    } else {
        if hydrogens > 0 {
            counts.insert("H", hydrogens);
        }
        for (symbol, n) in &counts {
            emit(symbol, *n);
        }
    }
    match mol.net_charge() {
        0 => {}
        1 => out.push('+'),
        -1 => out.push('-'),
        q if q > 0 => write!(out, "+{q}").unwrap(),
        q => write!(out, "-{}", -q).unwrap(),
    }
    out
}
