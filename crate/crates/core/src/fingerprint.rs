//! Bit fingerprints for fingerprint Tanimoto similarity (FTS).
//!
//! Three families fill the MACCS / RDK / Morgan slots of molecule-design
//! reports. None of them is bit-compatible with other toolkits; all are
//! bit-exact across platforms.

use crate::chemgraph::{BondOrder, Element, Molecule};
use crate::rng::fnv1a64;
use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Fingerprint layout version, written into batch headers.
pub const FINGERPRINT_VERSION: &str = "fp-v1";
pub const DEFAULT_WIDTH: usize = 2048;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FingerprintKind {
    Morgan,
    Path,
    Keys,
}

impl FingerprintKind {
    pub const ALL: [FingerprintKind; 3] = [FingerprintKind::Keys, FingerprintKind::Path, FingerprintKind::Morgan];

    pub fn as_str(self) -> &'static str {
        match self {
            FingerprintKind::Morgan => "morgan",
            FingerprintKind::Path => "path",
            FingerprintKind::Keys => "keys",
        }
    }

    /// Default fingerprint of this kind.
    pub fn compute(self, mol: &Molecule) -> BitFingerprint {
        match self {
            FingerprintKind::Morgan => morgan_fingerprint(mol, 2, DEFAULT_WIDTH),
            FingerprintKind::Path => path_fingerprint(mol, 7, DEFAULT_WIDTH),
            FingerprintKind::Keys => key_fingerprint(mol),
        }
    }
}

impl fmt::Display for FingerprintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FingerprintKind {
    type Err = FingerprintError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "morgan" => Ok(FingerprintKind::Morgan),
            "path" => Ok(FingerprintKind::Path),
            "keys" => Ok(FingerprintKind::Keys),
            other => Err(FingerprintError::UnknownKind(other.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum FingerprintError {
    #[error("cannot compare {a} ({a_width} bits) with {b} ({b_width} bits)")]
    KindMismatch {
        a: FingerprintKind,
        a_width: usize,
        b: FingerprintKind,
        b_width: usize,
    },
    #[error("unknown fingerprint kind {0:?}")]
    UnknownKind(String),
    #[error("width {0} must be a positive power of two")]
    BadWidth(usize),
    #[error("malformed hex fingerprint: {0}")]
    BadHex(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitFingerprint {
    kind: FingerprintKind,
    width: usize,
    words: Vec<u64>,
}

impl BitFingerprint {
    pub fn new(kind: FingerprintKind, width: usize) -> Self {
        BitFingerprint {
            kind,
            width,
            words: vec![0; width.div_ceil(64)],
        }
    }

    pub fn kind(&self) -> FingerprintKind {
        self.kind
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn set(&mut self, bit: usize) {
        assert!(bit < self.width, "bit {bit} out of range");
        self.words[bit / 64] |= 1 << (bit % 64);
    }

    pub fn get(&self, bit: usize) -> bool {
        bit < self.width && self.words[bit / 64] >> (bit % 64) & 1 == 1
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.width).filter(|&i| self.get(i))
    }

    /// Lowercase hex of the bit vector, bit `i` in byte `i / 8` at weight `1 << (i % 8)`.
    pub fn to_hex(&self) -> String {
        let mut out = String::with_capacity(self.width.div_ceil(8) * 2);
        for byte in 0..self.width.div_ceil(8) {
            let b = (self.words[byte / 8] >> ((byte % 8) * 8)) as u8;
            out.push_str(&format!("{b:02x}"));
        }
        out
    }

    pub fn from_hex(kind: FingerprintKind, width: usize, hex: &str) -> Result<Self, FingerprintError> {
        let nbytes = width.div_ceil(8);
        if hex.len() != nbytes * 2 || !hex.is_ascii() {
            return Err(FingerprintError::BadHex(format!(
                "expected {} hex digits, got {}",
                nbytes * 2,
                hex.len()
            )));
        }
        let mut fp = BitFingerprint::new(kind, width);
        for byte in 0..nbytes {
            let b = u8::from_str_radix(&hex[byte * 2..byte * 2 + 2], 16)
                .map_err(|e| FingerprintError::BadHex(e.to_string()))?;
            for bit in 0..8 {
                if b >> bit & 1 == 1 {
                    let i = byte * 8 + bit;
                    if i >= width {
                        return Err(FingerprintError::BadHex("bits set past width".into()));
                    }
                    fp.set(i);
                }
            }
        }
        Ok(fp)
    }
}

/// Tanimoto similarity |a ∧ b| / |a ∨ b|; 1.0 when both are empty.
pub fn tanimoto(a: &BitFingerprint, b: &BitFingerprint) -> Result<f64, FingerprintError> {
    if a.kind != b.kind || a.width != b.width {
        return Err(FingerprintError::KindMismatch {
            a: a.kind,
            a_width: a.width,
            b: b.kind,
            b_width: b.width,
        });
    }
    let (mut inter, mut union) = (0u32, 0u32);
    for (x, y) in a.words.iter().zip(&b.words) {
        inter += (x & y).count_ones();
        union += (x | y).count_ones();
    }
    Ok(if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    })
}

fn check_width(nbits: usize) -> Result<(), FingerprintError> {
    if nbits == 0 || !nbits.is_power_of_two() {
        return Err(FingerprintError::BadWidth(nbits));
    }
    Ok(())
}

/// Circular identifiers before folding.
///
/// Radius-0 identifiers hash `(atomic number, heavy degree, total H,
/// charge + 128, in ring, aromatic)` as six bytes. Each later radius hashes
/// the previous identifier (8 bytes, big-endian) followed by the sorted
/// `(bond code, neighbour identifier)` pairs. An atom stops contributing once
/// its bond environment stops growing; identifiers are deduplicated by value
/// across all radii. Hydrogen atoms are not centres or neighbours.
pub fn morgan_identifiers(mol: &Molecule, radius: u32) -> BTreeSet<u64> {
    let heavy: Vec<usize> = (0..mol.atom_count())
        .filter(|&a| mol.atom(a).element != Element::H)
        .collect();
    let words = mol.bonds().len().div_ceil(64).max(1);
    let mut ids = vec![0u64; mol.atom_count()];
    let mut env = vec![vec![0u64; words]; mol.atom_count()];
    let mut growing = vec![true; mol.atom_count()];
    let mut features = BTreeSet::new();

    for &a in &heavy {
        let atom = mol.atom(a);
        let bytes = [
            atom.element.atomic_number(),
            mol.heavy_degree(a).min(255) as u8,
            mol.total_hydrogens(a).min(255) as u8,
            (atom.formal_charge as i16 + 128).clamp(0, 255) as u8,
            mol.atom_in_ring(a) as u8,
            atom.aromatic as u8,
        ];
        ids[a] = fnv1a64(&bytes);
        features.insert(ids[a]);
    }

    for _ in 0..radius {
        let mut next_ids = ids.clone();
        let mut next_env = env.clone();
        for &a in &heavy {
            let mut pairs: Vec<(u8, u64)> = Vec::new();
            for &(nbr, bond) in mol.neighbors(a) {
                if mol.atom(nbr).element == Element::H {
                    continue;
                }
                pairs.push((mol.bond(bond).order.code(), ids[nbr]));
                next_env[a][bond / 64] |= 1 << (bond % 64);
                for (w, x) in next_env[a].iter_mut().zip(&env[nbr]) {
                    *w |= x;
                }
            }
            pairs.sort_unstable();
            let mut bytes = Vec::with_capacity(8 + pairs.len() * 9);
            bytes.extend_from_slice(&ids[a].to_be_bytes());
            for (code, id) in &pairs {
                bytes.push(*code);
                bytes.extend_from_slice(&id.to_be_bytes());
            }
            next_ids[a] = fnv1a64(&bytes);
            if growing[a] {
                if next_env[a] == env[a] {
                    growing[a] = false;
                } else {
                    features.insert(next_ids[a]);
                }
            }
        }
        ids = next_ids;
        env = next_env;
    }
    features
}

pub fn morgan_fingerprint(mol: &Molecule, radius: u32, nbits: usize) -> BitFingerprint {
    check_width(nbits).expect("morgan width must be a power of two");
    let mut fp = BitFingerprint::new(FingerprintKind::Morgan, nbits);
    for id in morgan_identifiers(mol, radius) {
        fp.set((id % nbits as u64) as usize);
    }
    fp
}

fn atom_path_symbol(mol: &Molecule, a: usize) -> String {
    let atom = mol.atom(a);
    if atom.aromatic {
        atom.element.symbol().to_ascii_lowercase()
    } else {
        atom.element.symbol().to_string()
    }
}

/// Distinct linear-path strings with 1..=`max_len` bonds, each in the
/// lexicographically smaller direction, e.g. `C-C-O`.
pub fn path_strings(mol: &Molecule, max_len: usize) -> BTreeSet<String> {
    let symbols: Vec<String> = (0..mol.atom_count()).map(|a| atom_path_symbol(mol, a)).collect();
    let mut out = BTreeSet::new();
    let mut on_path = vec![false; mol.atom_count()];
    let mut atoms: Vec<usize> = Vec::new();
    let mut bonds: Vec<char> = Vec::new();

    fn render(symbols: &[String], atoms: &[usize], bonds: &[char], reverse: bool) -> String {
        let mut s = String::new();
        let n = atoms.len();
        for i in 0..n {
            let (ai, bi) = if reverse { (n - 1 - i, n - 1 - i) } else { (i, i) };
            if i > 0 {
                let b = if reverse { bonds[bi] } else { bonds[i - 1] };
                s.push(b);
            }
            s.push_str(&symbols[atoms[ai]]);
        }
        s
    }

    fn extend(
        mol: &Molecule,
        symbols: &[String],
        max_len: usize,
        on_path: &mut [bool],
        atoms: &mut Vec<usize>,
        bonds: &mut Vec<char>,
        out: &mut BTreeSet<String>,
    ) {
        let last = *atoms.last().unwrap();
        for &(nbr, bond) in mol.neighbors(last) {
            if on_path[nbr] {
                continue;
            }
            on_path[nbr] = true;
            atoms.push(nbr);
            bonds.push(mol.bond(bond).order.symbol());
            let fwd = render(symbols, atoms, bonds, false);
            let rev = render(symbols, atoms, bonds, true);
            out.insert(fwd.min(rev));
            if bonds.len() < max_len {
                extend(mol, symbols, max_len, on_path, atoms, bonds, out);
            }
            bonds.pop();
            atoms.pop();
            on_path[nbr] = false;
        }
    }

    for start in 0..mol.atom_count() {
        on_path[start] = true;
        atoms.push(start);
        extend(mol, &symbols, max_len, &mut on_path, &mut atoms, &mut bonds, &mut out);
        atoms.pop();
        on_path[start] = false;
    }
    out
}

pub fn path_fingerprint(mol: &Molecule, max_len: usize, nbits: usize) -> BitFingerprint {
    check_width(nbits).expect("path width must be a power of two");
    assert!(max_len >= 1, "max_len must be at least 1");
    let mut fp = BitFingerprint::new(FingerprintKind::Path, nbits);
    for p in path_strings(mol, max_len) {
        fp.set((fnv1a64(p.as_bytes()) % nbits as u64) as usize);
    }
    fp
}

struct KeyContext<'m> {
    mol: &'m Molecule,
    ring_sizes: Vec<usize>,
    fused: bool,
}

impl KeyContext<'_> {
    fn any_atom(&self, f: impl Fn(usize) -> bool) -> bool {
        (0..self.mol.atom_count()).any(f)
    }

    fn el(&self, a: usize) -> Element {
        self.mol.atom(a).element
    }

    fn has_element(&self, e: Element) -> bool {
        self.any_atom(|a| self.el(a) == e)
    }

    fn neighbor_via(&self, a: usize, order: BondOrder, e: Element) -> bool {
        self.mol
            .neighbors(a)
            .iter()
            .any(|&(n, b)| self.mol.bond(b).order == order && self.el(n) == e)
    }

    fn double_bonded_o_count(&self, a: usize) -> usize {
        self.mol
            .neighbors(a)
            .iter()
            .filter(|&&(n, b)| self.mol.bond(b).order == BondOrder::Double && self.el(n) == Element::O)
            .count()
    }

    fn is_carbonyl_carbon(&self, a: usize) -> bool {
        self.el(a) == Element::C && self.neighbor_via(a, BondOrder::Double, Element::O)
    }

    fn heavy_neighbors(&self, a: usize) -> Vec<(usize, BondOrder)> {
        self.mol
            .neighbors(a)
            .iter()
            .filter(|&&(n, _)| self.el(n) != Element::H)
            .map(|&(n, b)| (n, self.mol.bond(b).order))
            .collect()
    }

    fn amine_class(&self, a: usize) -> Option<usize> {
        let atom = self.mol.atom(a);
        if atom.element != Element::N || atom.aromatic || atom.formal_charge != 0 {
            return None;
        }
        let nbrs = self.heavy_neighbors(a);
        if nbrs.is_empty()
            || nbrs
                .iter()
                .any(|&(n, o)| o != BondOrder::Single || self.el(n) != Element::C || self.is_carbonyl_carbon(n))
        {
            return None;
        }
        let h = self.mol.total_hydrogens(a) as usize;
        (nbrs.len() + h == 3).then_some(nbrs.len())
    }
}

type KeyPredicate = fn(&KeyContext) -> bool;

/// Versioned structural-key table: `(name, predicate)`, one bit each in order.
const KEYS: &[(&str, KeyPredicate)] = &[
    ("nitrogen", |c| c.has_element(Element::N)),
    ("oxygen", |c| c.has_element(Element::O)),
    ("sulfur", |c| c.has_element(Element::S)),
    ("phosphorus", |c| c.has_element(Element::P)),
    ("halogen", |c| c.any_atom(|a| c.el(a).is_halogen())),
    ("fluorine", |c| c.has_element(Element::F)),
    ("chlorine", |c| c.has_element(Element::CL)),
    ("bromine", |c| c.has_element(Element::BR)),
    ("iodine", |c| c.has_element(Element::I)),
    ("other_element", |c| {
        c.any_atom(|a| {
            let e = c.el(a);
            !matches!(e, Element::C | Element::H | Element::N | Element::O | Element::S | Element::P) && !e.is_halogen()
        })
    }),
    ("charged_atom", |c| c.any_atom(|a| c.mol.atom(a).formal_charge != 0)),
    ("isotope_label", |c| c.any_atom(|a| c.mol.atom(a).isotope.is_some())),
    ("ring_count_ge1", |c| c.mol.ring_count() >= 1),
    ("ring_count_ge2", |c| c.mol.ring_count() >= 2),
    ("ring_count_ge3", |c| c.mol.ring_count() >= 3),
    ("aromatic_ring", |c| {
        (0..c.mol.bonds().len()).any(|b| c.mol.bond_in_ring(b) && c.mol.bond(b).order == BondOrder::Aromatic)
    }),
    ("ring_size_3", |c| c.ring_sizes.contains(&3)),
    ("ring_size_4", |c| c.ring_sizes.contains(&4)),
    ("ring_size_5", |c| c.ring_sizes.contains(&5)),
    ("ring_size_6", |c| c.ring_sizes.contains(&6)),
    ("ring_size_7", |c| c.ring_sizes.contains(&7)),
    ("ring_size_ge8", |c| c.ring_sizes.iter().any(|&s| s >= 8)),
    ("fused_rings", |c| c.fused),
    ("aromatic_nitrogen", |c| c.any_atom(|a| c.el(a) == Element::N && c.mol.atom(a).aromatic)),
    ("aromatic_o_or_s", |c| {
        c.any_atom(|a| matches!(c.el(a), Element::O | Element::S) && c.mol.atom(a).aromatic)
    }),
    ("carbonyl", |c| c.any_atom(|a| c.is_carbonyl_carbon(a))),
    ("hydroxyl", |c| {
        c.any_atom(|a| {
            c.el(a) == Element::O
                && !c.mol.atom(a).aromatic
                && c.mol.total_hydrogens(a) >= 1
                && c.neighbor_via(a, BondOrder::Single, Element::C)
        })
    }),
    ("carboxylic_acid", |c| {
        c.any_atom(|a| {
            c.is_carbonyl_carbon(a)
                && c.mol.neighbors(a).iter().any(|&(n, b)| {
                    c.mol.bond(b).order == BondOrder::Single && c.el(n) == Element::O && c.mol.total_hydrogens(n) >= 1
                })
        })
    }),
    ("ester", |c| {
        c.any_atom(|a| {
            c.is_carbonyl_carbon(a)
                && c.mol.neighbors(a).iter().any(|&(o, b)| {
                    c.mol.bond(b).order == BondOrder::Single
                        && c.el(o) == Element::O
                        && c.heavy_neighbors(o).iter().filter(|&&(x, _)| c.el(x) == Element::C).count() == 2
                })
        })
    }),
    ("amide", |c| {
        c.any_atom(|a| c.is_carbonyl_carbon(a) && c.neighbor_via(a, BondOrder::Single, Element::N))
    }),
    ("primary_amine", |c| c.any_atom(|a| c.amine_class(a) == Some(1))),
    ("secondary_amine", |c| c.any_atom(|a| c.amine_class(a) == Some(2))),
    ("tertiary_amine", |c| c.any_atom(|a| c.amine_class(a) == Some(3))),
    ("nitrile", |c| {
        c.any_atom(|a| c.el(a) == Element::N && c.mol.degree(a) == 1 && c.neighbor_via(a, BondOrder::Triple, Element::C))
    }),
    ("nitro", |c| {
        c.any_atom(|a| {
            c.el(a) == Element::N
                && c.double_bonded_o_count(a) >= 1
                && c.mol.neighbors(a).iter().filter(|&&(n, _)| c.el(n) == Element::O).count() >= 2
        })
    }),
    ("ether", |c| {
        c.any_atom(|a| {
            let nbrs = c.heavy_neighbors(a);
            c.el(a) == Element::O
                && !c.mol.atom(a).aromatic
                && c.mol.total_hydrogens(a) == 0
                && nbrs.len() == 2
                && nbrs
                    .iter()
                    .all(|&(n, o)| o == BondOrder::Single && c.el(n) == Element::C && !c.is_carbonyl_carbon(n))
        })
    }),
    ("thiol", |c| {
        c.any_atom(|a| {
            c.el(a) == Element::S
                && !c.mol.atom(a).aromatic
                && c.mol.total_hydrogens(a) >= 1
                && c.neighbor_via(a, BondOrder::Single, Element::C)
        })
    }),
    ("sulfonyl", |c| c.any_atom(|a| c.el(a) == Element::S && c.double_bonded_o_count(a) >= 2)),
    ("alkene", |c| {
        c.mol.bonds().iter().any(|b| {
            b.order == BondOrder::Double && c.el(b.a) == Element::C && c.el(b.b) == Element::C
        })
    }),
    ("alkyne", |c| {
        c.mol.bonds().iter().any(|b| {
            b.order == BondOrder::Triple && c.el(b.a) == Element::C && c.el(b.b) == Element::C
        })
    }),
    ("multiple_fragments", |c| c.mol.fragments().len() > 1),
    ("heavy_atoms_ge10", |c| c.mol.heavy_atom_count() >= 10),
    ("heavy_atoms_ge20", |c| c.mol.heavy_atom_count() >= 20),
    ("heavy_atoms_ge30", |c| c.mol.heavy_atom_count() >= 30),
];

/// Names of the structural keys, in bit order.
pub fn key_names() -> impl Iterator<Item = &'static str> {
    KEYS.iter().map(|(name, _)| *name)
}

pub fn key_count() -> usize {
    KEYS.len()
}

pub fn key_index(name: &str) -> Option<usize> {
    KEYS.iter().position(|(n, _)| *n == name)
}

pub fn key_fingerprint(mol: &Molecule) -> BitFingerprint {
    let rings = mol.sssr();
    let mut fused = false;
    'outer: for (i, r) in rings.iter().enumerate() {
        let edges_r: HashSet<(usize, usize)> = ring_edges(r).collect();
        for s in &rings[i + 1..] {
            if ring_edges(s).any(|e| edges_r.contains(&e)) {
                fused = true;
                break 'outer;
            }
        }
    }
    let ctx = KeyContext {
        mol,
        ring_sizes: rings.iter().map(|r| r.len()).collect(),
        fused,
    };
    let mut fp = BitFingerprint::new(FingerprintKind::Keys, KEYS.len());
    for (i, (_, pred)) in KEYS.iter().enumerate() {
        if pred(&ctx) {
            fp.set(i);
        }
    }
    fp
}

fn ring_edges(ring: &[usize]) -> impl Iterator<Item = (usize, usize)> + '_ {
    (0..ring.len()).map(move |i| {
        let (a, b) = (ring[i], ring[(i + 1) % ring.len()]);
        (a.min(b), a.max(b))
    })
}
