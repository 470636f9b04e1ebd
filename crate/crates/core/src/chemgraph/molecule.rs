use super::element::{default_valence, max_valence, Element};
use super::rings;
use thiserror::Error;

/// Tetrahedral or extended chirality marker as written in the input.
///
/// Recorded for reference only; graph identity ignores it.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Chirality {
    Anticlockwise,
    Clockwise,
    /// `@TH1`, `@SP2`, `@OH12` and friends, stored verbatim without the `@`.
    Extended(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BondDirection {
    Up,
    Down,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Bond order in half units (aromatic = 3, i.e. 1.5).
    pub fn half_units(self) -> u32 {
        match self {
            BondOrder::Single => 2,
            BondOrder::Double => 4,
            BondOrder::Triple => 6,
            BondOrder::Aromatic => 3,
        }
    }

    /// Numeric code shared by the fingerprint byte layouts: 1..=4.
    pub fn code(self) -> u8 {
        match self {
            BondOrder::Single => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Aromatic => 4,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            BondOrder::Single => '-',
            BondOrder::Double => '=',
            BondOrder::Triple => '#',
            BondOrder::Aromatic => ':',
        }
    }

    fn kekule_lower_bound(self) -> u32 {
        match self {
            BondOrder::Single | BondOrder::Aromatic => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Atom {
    pub element: Element,
    pub aromatic: bool,
    pub formal_charge: i8,
    pub isotope: Option<u16>,
    /// Hydrogen count written in a bracket atom; `None` for organic-subset atoms.
    pub explicit_h: Option<u8>,
    pub chirality: Option<Chirality>,
    pub atom_class: Option<u32>,
}

impl Atom {
    pub fn new(element: Element) -> Atom {
        Atom {
            element,
            aromatic: false,
            formal_charge: 0,
            isotope: None,
            explicit_h: None,
            chirality: None,
            atom_class: None,
        }
    }

    pub fn aromatic(mut self, aromatic: bool) -> Atom {
        self.aromatic = aromatic;
        self
    }

    pub fn with_charge(mut self, charge: i8) -> Atom {
        self.formal_charge = charge;
        self
    }

    pub fn with_explicit_h(mut self, h: u8) -> Atom {
        self.explicit_h = Some(h);
        self
    }

    pub fn with_isotope(mut self, isotope: u16) -> Atom {
        self.isotope = Some(isotope);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub order: BondOrder,
    pub direction: Option<BondDirection>,
}

impl Bond {
    pub fn new(a: usize, b: usize, order: BondOrder) -> Bond {
        Bond {
            a,
            b,
            order,
            direction: None,
        }
    }

    pub fn other(&self, atom: usize) -> usize {
        if self.a == atom {
            self.b
        } else {
            self.a
        }
    }
}

/// Structural problems found while assembling a molecule from atoms and bonds.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("bond {bond} references atom {atom}, which does not exist")]
    MissingAtom { bond: usize, atom: usize },
    #[error("bond {bond} connects atom {atom} to itself")]
    SelfBond { bond: usize, atom: usize },
    #[error("atoms {a} and {b} are bonded more than once")]
    DuplicateBond { bond: usize, a: usize, b: usize },
    #[error("element {element} cannot be aromatic (atom {atom})")]
    InvalidAromaticElement { atom: usize, element: Element },
    #[error("aromatic bond {bond} joins a non-aromatic atom")]
    InvalidAromaticBond { bond: usize, atom: usize },
    #[error("aromatic atom {atom} is not in a ring")]
    AromaticOutsideRing { atom: usize },
    #[error("atom {atom} ({element}) has valence {valence}, above the allowed {max}")]
    ValenceViolation {
        atom: usize,
        element: Element,
        valence: u32,
        max: u8,
    },
}

impl StructureError {
    /// Atom the error is attributed to, for mapping back to input offsets.
    pub fn atom(&self) -> usize {
        match *self {
            StructureError::MissingAtom { atom, .. } => atom,
            StructureError::SelfBond { atom, .. }
            | StructureError::InvalidAromaticElement { atom, .. }
            | StructureError::InvalidAromaticBond { atom, .. }
            | StructureError::AromaticOutsideRing { atom }
            | StructureError::ValenceViolation { atom, .. } => atom,
            StructureError::DuplicateBond { b, .. } => b,
        }
    }
}

/// An immutable molecular graph.
///
/// Ring membership, fragments and hydrogen counts are derived once at
/// construction and stay consistent with the bond list.
#[derive(Clone, Debug)]
pub struct Molecule {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    adjacency: Vec<Vec<(usize, usize)>>,
    hydrogens: Vec<u8>,
    atom_in_ring: Vec<bool>,
    bond_in_ring: Vec<bool>,
    fragments: Vec<Vec<usize>>,
    fragment_of: Vec<usize>,
}

impl Molecule {
    pub fn empty() -> Molecule {
        Molecule {
            atoms: Vec::new(),
            bonds: Vec::new(),
            adjacency: Vec::new(),
            hydrogens: Vec::new(),
            atom_in_ring: Vec::new(),
            bond_in_ring: Vec::new(),
            fragments: Vec::new(),
            fragment_of: Vec::new(),
        }
    }

    pub fn from_parts(atoms: Vec<Atom>, bonds: Vec<Bond>) -> Result<Molecule, StructureError> {
        let n = atoms.len();
        let mut adjacency = vec![Vec::new(); n];
        for (i, bond) in bonds.iter().enumerate() {
            for atom in [bond.a, bond.b] {
                if atom >= n {
                    return Err(StructureError::MissingAtom { bond: i, atom });
                }
            }
            if bond.a == bond.b {
                return Err(StructureError::SelfBond {
                    bond: i,
                    atom: bond.a,
                });
            }
            if adjacency[bond.a].iter().any(|&(nbr, _)| nbr == bond.b) {
                return Err(StructureError::DuplicateBond {
                    bond: i,
                    a: bond.a.min(bond.b),
                    b: bond.a.max(bond.b),
                });
            }
            adjacency[bond.a].push((bond.b, i));
            adjacency[bond.b].push((bond.a, i));
        }

        for (i, atom) in atoms.iter().enumerate() {
            if atom.aromatic && !atom.element.can_be_aromatic() {
                return Err(StructureError::InvalidAromaticElement {
                    atom: i,
                    element: atom.element,
                });
            }
        }
        for (i, bond) in bonds.iter().enumerate() {
            if bond.order == BondOrder::Aromatic {
                for atom in [bond.a, bond.b] {
                    if !atoms[atom].aromatic {
                        return Err(StructureError::InvalidAromaticBond { bond: i, atom });
                    }
                }
            }
        }

        let bond_in_ring = rings::ring_bonds(n, &bonds, &adjacency);
        let mut atom_in_ring = vec![false; n];
        for (bond, &in_ring) in bonds.iter().zip(&bond_in_ring) {
            if in_ring {
                atom_in_ring[bond.a] = true;
                atom_in_ring[bond.b] = true;
            }
        }
        if let Some(atom) = (0..n).find(|&i| atoms[i].aromatic && !atom_in_ring[i]) {
            return Err(StructureError::AromaticOutsideRing { atom });
        }

        let mut hydrogens = Vec::with_capacity(n);
        for (i, atom) in atoms.iter().enumerate() {
            let mut half = 0;
            let mut kekule = 0;
            for &(_, b) in &adjacency[i] {
                half += bonds[b].order.half_units();
                kekule += bonds[b].order.kekule_lower_bound();
            }
            let h = match atom.explicit_h {
                Some(h) => h,
                None => implicit_from_half_units(atom.element, atom.formal_charge, half),
            };
            if let Some(max) = max_valence(atom.element, atom.formal_charge) {
                let valence = kekule + h as u32;
                if valence > max as u32 {
                    return Err(StructureError::ValenceViolation {
                        atom: i,
                        element: atom.element,
                        valence,
                        max,
                    });
                }
            }
            hydrogens.push(h);
        }

        let (fragments, fragment_of) = rings::components(n, &adjacency);
        Ok(Molecule {
            atoms,
            bonds,
            adjacency,
            hydrogens,
            atom_in_ring,
            bond_in_ring,
            fragments,
            fragment_of,
        })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn atom(&self, index: usize) -> &Atom {
        &self.atoms[index]
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn bond(&self, index: usize) -> &Bond {
        &self.bonds[index]
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Number of atoms that are not hydrogen.
    pub fn heavy_atom_count(&self) -> usize {
        self.atoms.iter().filter(|a| a.element != Element::H).count()
    }

    /// `(neighbor, bond index)` pairs in bond insertion order.
    pub fn neighbors(&self, atom: usize) -> &[(usize, usize)] {
        &self.adjacency[atom]
    }

    pub fn degree(&self, atom: usize) -> usize {
        self.adjacency[atom].len()
    }

    pub fn heavy_degree(&self, atom: usize) -> usize {
        self.adjacency[atom]
            .iter()
            .filter(|&&(nbr, _)| self.atoms[nbr].element != Element::H)
            .count()
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<&Bond> {
        self.adjacency[a]
            .iter()
            .find(|&&(nbr, _)| nbr == b)
            .map(|&(_, bond)| &self.bonds[bond])
    }

    /// Hydrogens carried by the atom itself: the bracket count if one was
    /// written, otherwise the implicit count.
    pub fn hydrogen_count(&self, atom: usize) -> u8 {
        self.hydrogens[atom]
    }

    /// Own hydrogens plus neighbouring explicit hydrogen atoms.
    pub fn total_hydrogens(&self, atom: usize) -> u32 {
        let attached = self.adjacency[atom]
            .iter()
            .filter(|&&(nbr, _)| self.atoms[nbr].element == Element::H)
            .count() as u32;
        self.hydrogens[atom] as u32 + attached
    }

    /// Sum of bond orders in half units (aromatic bonds contribute 3).
    pub fn bond_order_half_units(&self, atom: usize) -> u32 {
        self.adjacency[atom]
            .iter()
            .map(|&(_, b)| self.bonds[b].order.half_units())
            .sum()
    }

    pub fn atom_in_ring(&self, atom: usize) -> bool {
        self.atom_in_ring[atom]
    }

    pub fn bond_in_ring(&self, bond: usize) -> bool {
        self.bond_in_ring[bond]
    }

    pub fn fragments(&self) -> &[Vec<usize>] {
        &self.fragments
    }

    pub fn fragment_of(&self, atom: usize) -> usize {
        self.fragment_of[atom]
    }

    pub fn net_charge(&self) -> i32 {
        self.atoms.iter().map(|a| a.formal_charge as i32).sum()
    }

    /// Cyclomatic number: the size of every minimum cycle basis.
    pub fn ring_count(&self) -> usize {
        (self.bonds.len() + self.fragments.len()).saturating_sub(self.atoms.len())
    }

    /// Smallest set of smallest rings, each ring as atom indices in cycle order.
    pub fn sssr(&self) -> Vec<Vec<usize>> {
        rings::sssr(self)
    }

    /// Builds a molecule with the atoms renumbered: atom `i` moves to
    /// position `order[i]`. Bonds are reordered by their new endpoints.
    pub fn permuted(&self, order: &[usize]) -> Molecule {
        assert_eq!(order.len(), self.atoms.len(), "permutation length");
        let mut atoms = vec![None; self.atoms.len()];
        for (old, &new) in order.iter().enumerate() {
            atoms[new] = Some(self.atoms[old].clone());
        }
        let atoms: Vec<Atom> = atoms
            .into_iter()
            .map(|a| a.expect("order is a permutation"))
            .collect();
        let mut bonds: Vec<Bond> = self
            .bonds
            .iter()
            .map(|b| Bond {
                a: order[b.a],
                b: order[b.b],
                order: b.order,
                direction: b.direction,
            })
            .collect();
        bonds.sort_by_key(|b| (b.a.min(b.b), b.a.max(b.b)));
        Molecule::from_parts(atoms, bonds).expect("permutation preserves validity")
    }

    /// Sub-molecule induced by `keep`; `explicit_h` may pin hydrogen counts of kept atoms.
    pub(crate) fn induced(
        &self,
        keep: &[bool],
        explicit_h: impl Fn(usize) -> Option<u8>,
    ) -> Result<Molecule, StructureError> {
        let mut map = vec![usize::MAX; self.atoms.len()];
        let mut atoms = Vec::new();
        for (i, atom) in self.atoms.iter().enumerate() {
            if keep[i] {
                map[i] = atoms.len();
                let mut atom = atom.clone();
                if let Some(h) = explicit_h(i) {
                    atom.explicit_h = Some(h);
                }
                atoms.push(atom);
            }
        }
        let bonds = self
            .bonds
            .iter()
            .filter(|b| keep[b.a] && keep[b.b])
            .map(|b| Bond {
                a: map[b.a],
                b: map[b.b],
                order: b.order,
                direction: b.direction,
            })
            .collect();
        Molecule::from_parts(atoms, bonds)
    }
}

/// Implicit hydrogen count from the default valence and a bond-order sum in
/// half units, rounding the sum up to a whole number first.
pub fn implicit_from_half_units(element: Element, charge: i8, half_units: u32) -> u8 {
    match default_valence(element, charge) {
        Some(v) => {
            let used = half_units.div_ceil(2);
            (v as u32).saturating_sub(used) as u8
        }
        None => 0,
    }
}

/// Implicit hydrogens for one atom of a molecule.
pub fn implicit_hydrogens(mol: &Molecule, atom: usize) -> u8 {
    mol.hydrogen_count(atom)
}
