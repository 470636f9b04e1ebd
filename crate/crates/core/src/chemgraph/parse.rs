use super::element::Element;
use super::molecule::{Atom, Bond, BondDirection, BondOrder, Chirality, Molecule, StructureError};
use super::rings;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ParseErrorKind {
    EmptyInput,
    UnclosedRing,
    UnclosedBranch,
    UnmatchedBranchClose,
    EmptyBranch,
    UnknownElement,
    ValenceViolation,
    BadBracket,
    UnexpectedCharacter,
    MisplacedBond,
    MisplacedDot,
    RingBondMismatch,
    DuplicateBond,
    SelfBond,
    InvalidAromaticElement,
    InvalidAromaticBond,
    AromaticOutsideRing,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Why a SMILES string was rejected, and where.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{kind} at offset {position}: {message}")]
pub struct ParseDiagnostic {
    /// Byte offset into the input, never past its end.
    pub position: usize,
    pub kind: ParseErrorKind,
    pub message: String,
}

impl ParseDiagnostic {
    fn new(position: usize, kind: ParseErrorKind, message: impl Into<String>) -> Self {
        ParseDiagnostic {
            position,
            kind,
            message: message.into(),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum BondSym {
    Single,
    Up,
    Down,
    Double,
    Triple,
    Aromatic,
}

impl BondSym {
    fn from_byte(c: u8) -> Option<BondSym> {
        Some(match c {
            b'-' => BondSym::Single,
            b'/' => BondSym::Up,
            b'\\' => BondSym::Down,
            b'=' => BondSym::Double,
            b'#' => BondSym::Triple,
            b':' => BondSym::Aromatic,
            _ => return None,
        })
    }

    fn order(self) -> BondOrder {
        match self {
            BondSym::Single | BondSym::Up | BondSym::Down => BondOrder::Single,
            BondSym::Double => BondOrder::Double,
            BondSym::Triple => BondOrder::Triple,
            BondSym::Aromatic => BondOrder::Aromatic,
        }
    }

    fn direction(self) -> Option<BondDirection> {
        match self {
            BondSym::Up => Some(BondDirection::Up),
            BondSym::Down => Some(BondDirection::Down),
            _ => None,
        }
    }
}

struct RawBond {
    bond: Bond,
    implicit: bool,
}

struct RingOpen {
    atom: usize,
    bond: Option<BondSym>,
    position: usize,
}

struct Parser<'a> {
    text: &'a [u8],
    pos: usize,
    atoms: Vec<Atom>,
    atom_pos: Vec<usize>,
    bonds: Vec<RawBond>,
    prev: Option<usize>,
    pending: Option<(BondSym, usize)>,
    branches: Vec<(Option<usize>, usize, usize)>,
    rings: BTreeMap<u32, RingOpen>,
}

/// Parses a SMILES string into a validated molecule.
///
/// Stereo marks (`/`, `\`, `@`, `@@`) and atom classes are kept on the atoms
/// and bonds but play no part in graph identity.
pub fn parse_smiles(text: &str) -> Result<Molecule, ParseDiagnostic> {
    if text.is_empty() {
        return Err(ParseDiagnostic::new(0, ParseErrorKind::EmptyInput, "empty SMILES"));
    }
    let mut parser = Parser {
        text: text.as_bytes(),
        pos: 0,
        atoms: Vec::new(),
        atom_pos: Vec::new(),
        bonds: Vec::new(),
        prev: None,
        pending: None,
        branches: Vec::new(),
        rings: BTreeMap::new(),
    };
    parser.run()?;
    parser.finish()
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<u8> {
        self.text.get(self.pos).copied()
    }

    fn err(&self, position: usize, kind: ParseErrorKind, message: impl Into<String>) -> ParseDiagnostic {
        ParseDiagnostic::new(position.min(self.text.len()), kind, message)
    }

    fn run(&mut self) -> Result<(), ParseDiagnostic> {
        while let Some(c) = self.peek() {
            let start = self.pos;
            match c {
                b'[' => {
                    let atom = self.bracket_atom()?;
                    self.add_atom(atom, start)?;
                }
                b'A'..=b'Z' | b'a'..=b'z' | b'*' => {
                    let atom = self.organic_atom()?;
                    self.add_atom(atom, start)?;
                }
                b'(' => {
                    if self.prev.is_none() {
                        return Err(self.err(start, ParseErrorKind::UnexpectedCharacter, "branch without a preceding atom"));
                    }
                    if self.pending.is_some() {
                        return Err(self.err(start, ParseErrorKind::MisplacedBond, "bond symbol before '('"));
                    }
                    self.branches.push((self.prev, start, self.atoms.len()));
                    self.pos += 1;
                }
                b')' => {
                    let Some((prev, _, atoms_before)) = self.branches.pop() else {
                        return Err(self.err(start, ParseErrorKind::UnmatchedBranchClose, "')' without matching '('"));
                    };
                    if let Some((_, p)) = self.pending {
                        return Err(self.err(p, ParseErrorKind::MisplacedBond, "bond symbol at end of branch"));
                    }
                    if self.atoms.len() == atoms_before {
                        return Err(self.err(start, ParseErrorKind::EmptyBranch, "branch contains no atoms"));
                    }
                    self.prev = prev;
                    self.pos += 1;
                }
                b'0'..=b'9' | b'%' => {
                    let number = self.ring_number()?;
                    self.ring_bond(number, start)?;
                }
                b'.' => {
                    if self.prev.is_none() {
                        return Err(self.err(start, ParseErrorKind::MisplacedDot, "'.' without a preceding atom"));
                    }
                    if let Some((_, p)) = self.pending {
                        return Err(self.err(p, ParseErrorKind::MisplacedBond, "bond symbol before '.'"));
                    }
                    self.prev = None;
                    self.pos += 1;
                }
                _ => {
                    if let Some(sym) = BondSym::from_byte(c) {
                        if self.prev.is_none() {
                            return Err(self.err(start, ParseErrorKind::MisplacedBond, "bond symbol without a preceding atom"));
                        }
                        if self.pending.is_some() {
                            return Err(self.err(start, ParseErrorKind::MisplacedBond, "two consecutive bond symbols"));
                        }
                        self.pending = Some((sym, start));
                        self.pos += 1;
                    } else {
                        let shown = String::from_utf8_lossy(&self.text[start..(start + 1).min(self.text.len())]).into_owned();
                        return Err(self.err(start, ParseErrorKind::UnexpectedCharacter, format!("unexpected character {shown:?}")));
                    }
                }
            }
        }
        if let Some((_, p)) = self.pending {
            return Err(self.err(p, ParseErrorKind::MisplacedBond, "bond symbol at end of input"));
        }
        if self.prev.is_none() {
            return Err(self.err(self.text.len() - 1, ParseErrorKind::MisplacedDot, "input ends with '.'"));
        }
        if let Some(&(_, p, _)) = self.branches.first() {
            return Err(self.err(p, ParseErrorKind::UnclosedBranch, "'(' is never closed"));
        }
        if let Some(open) = self.rings.values().min_by_key(|r| r.position) {
            return Err(self.err(open.position, ParseErrorKind::UnclosedRing, "ring-closure digit is never closed"));
        }
        Ok(())
    }

    fn add_atom(&mut self, atom: Atom, start: usize) -> Result<(), ParseDiagnostic> {
        let index = self.atoms.len();
        self.atoms.push(atom);
        self.atom_pos.push(start);
        if let Some(prev) = self.prev {
            let sym = self.pending.take().map(|(s, _)| s);
            self.push_bond(prev, index, sym, start)?;
        }
        self.prev = Some(index);
        Ok(())
    }

    fn push_bond(&mut self, a: usize, b: usize, sym: Option<BondSym>, position: usize) -> Result<(), ParseDiagnostic> {
        if a == b {
            return Err(self.err(position, ParseErrorKind::SelfBond, "ring closure bonds an atom to itself"));
        }
        if self
            .bonds
            .iter()
            .any(|r| (r.bond.a == a && r.bond.b == b) || (r.bond.a == b && r.bond.b == a))
        {
            return Err(self.err(position, ParseErrorKind::DuplicateBond, "atoms are already bonded"));
        }
        let (order, direction, implicit) = match sym {
            Some(s) => (s.order(), s.direction(), false),
            None if self.atoms[a].aromatic && self.atoms[b].aromatic => (BondOrder::Aromatic, None, true),
            None => (BondOrder::Single, None, true),
        };
        self.bonds.push(RawBond {
            bond: Bond {
                a,
                b,
                order,
                direction,
            },
            implicit,
        });
        Ok(())
    }

    fn ring_number(&mut self) -> Result<u32, ParseDiagnostic> {
        let start = self.pos;
        let c = self.text[self.pos];
        if c.is_ascii_digit() {
            self.pos += 1;
            return Ok((c - b'0') as u32);
        }
        // '%'
        self.pos += 1;
        if self.peek() == Some(b'(') {
            self.pos += 1;
            let digits_start = self.pos;
            while matches!(self.peek(), Some(b'0'..=b'9')) {
                self.pos += 1;
            }
            let digits = &self.text[digits_start..self.pos];
            if digits.is_empty() || digits.len() > 5 || self.peek() != Some(b')') {
                return Err(self.err(start, ParseErrorKind::UnexpectedCharacter, "malformed '%(n)' ring number"));
            }
            self.pos += 1;
            return Ok(std::str::from_utf8(digits).unwrap().parse().unwrap());
        }
        match (self.text.get(self.pos), self.text.get(self.pos + 1)) {
            (Some(a @ b'0'..=b'9'), Some(b @ b'0'..=b'9')) => {
                self.pos += 2;
                Ok(((a - b'0') * 10 + (b - b'0')) as u32)
            }
            _ => Err(self.err(start, ParseErrorKind::UnexpectedCharacter, "'%' must be followed by two digits")),
        }
    }

    fn ring_bond(&mut self, number: u32, start: usize) -> Result<(), ParseDiagnostic> {
        let Some(current) = self.prev else {
            return Err(self.err(start, ParseErrorKind::UnexpectedCharacter, "ring-closure digit without a preceding atom"));
        };
        let sym = self.pending.take();
        match self.rings.remove(&number) {
            Some(open) => {
                let bond = match (open.bond, sym) {
                    (Some(a), Some((b, p))) => {
                        if a.order() != b.order() {
                            return Err(self.err(p, ParseErrorKind::RingBondMismatch, "ring-closure bond symbols disagree"));
                        }
                        Some(b)
                    }
                    (a, b) => a.or(b.map(|(s, _)| s)),
                };
                self.push_bond(open.atom, current, bond, start)
            }
            None => {
                self.rings.insert(
                    number,
                    RingOpen {
                        atom: current,
                        bond: sym.map(|(s, _)| s),
                        position: start,
                    },
                );
                Ok(())
            }
        }
    }

    fn organic_atom(&mut self) -> Result<Atom, ParseDiagnostic> {
        let start = self.pos;
        let c = self.text[self.pos];
        let next = self.text.get(self.pos + 1).copied();
        let (element, aromatic, len) = match (c, next) {
            (b'C', Some(b'l')) => (Element::CL, false, 2),
            (b'B', Some(b'r')) => (Element::BR, false, 2),
            (b'B', _) => (Element::B, false, 1),
            (b'C', _) => (Element::C, false, 1),
            (b'N', _) => (Element::N, false, 1),
            (b'O', _) => (Element::O, false, 1),
            (b'P', _) => (Element::P, false, 1),
            (b'S', _) => (Element::S, false, 1),
            (b'F', _) => (Element::F, false, 1),
            (b'I', _) => (Element::I, false, 1),
            (b'b', _) => (Element::B, true, 1),
            (b'c', _) => (Element::C, true, 1),
            (b'n', _) => (Element::N, true, 1),
            (b'o', _) => (Element::O, true, 1),
            (b'p', _) => (Element::P, true, 1),
            (b's', _) => (Element::S, true, 1),
            _ => {
                return Err(self.err(
                    start,
                    ParseErrorKind::UnknownElement,
                    format!("'{}' is not an organic-subset element", c as char),
                ))
            }
        };
        self.pos += len;
        Ok(Atom::new(element).aromatic(aromatic))
    }

    fn digits(&mut self, max_len: usize) -> Option<u32> {
        let start = self.pos;
        while self.pos - start < max_len && matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        (self.pos > start).then(|| std::str::from_utf8(&self.text[start..self.pos]).unwrap().parse().unwrap())
    }

    fn bracket_atom(&mut self) -> Result<Atom, ParseDiagnostic> {
        let open = self.pos;
        self.pos += 1;
        let bad = |p: &Parser, msg: &str| p.err(open, ParseErrorKind::BadBracket, msg);

        let isotope = match self.digits(4) {
            Some(0) => return Err(bad(self, "isotope must be positive")),
            Some(v) => Some(v as u16),
            None => None,
        };

        let sym_start = self.pos;
        let (element, aromatic) = match self.peek() {
            Some(c @ b'A'..=b'Z') => {
                let two = self.text.get(self.pos + 1).filter(|n| n.is_ascii_lowercase()).and_then(|&n| {
                    let s = [c, n];
                    Element::from_symbol(std::str::from_utf8(&s).unwrap())
                });
                match two {
                    Some(e) => {
                        self.pos += 2;
                        (e, false)
                    }
                    None => {
                        let s = [c];
                        let e = Element::from_symbol(std::str::from_utf8(&s).unwrap()).ok_or_else(|| {
                            self.err(sym_start, ParseErrorKind::UnknownElement, format!("unknown element '{}'", c as char))
                        })?;
                        self.pos += 1;
                        (e, false)
                    }
                }
            }
            Some(b'a'..=b'z') => {
                let rest = &self.text[self.pos..];
                let (e, len) = if rest.starts_with(b"se") {
                    (Element::SE, 2)
                } else if rest.starts_with(b"as") {
                    (Element::AS, 2)
                } else {
                    match rest[0] {
                        b'b' => (Element::B, 1),
                        b'c' => (Element::C, 1),
                        b'n' => (Element::N, 1),
                        b'o' => (Element::O, 1),
                        b'p' => (Element::P, 1),
                        b's' => (Element::S, 1),
                        other => {
                            return Err(self.err(
                                sym_start,
                                ParseErrorKind::UnknownElement,
                                format!("'{}' is not an aromatic element", other as char),
                            ))
                        }
                    }
                };
                self.pos += len;
                (e, true)
            }
            Some(b'*') => {
                return Err(self.err(sym_start, ParseErrorKind::UnknownElement, "wildcard atoms are not supported"))
            }
            _ => return Err(bad(self, "bracket atom needs an element symbol")),
        };

        let mut chirality = None;
        if self.peek() == Some(b'@') {
            self.pos += 1;
            if self.peek() == Some(b'@') {
                self.pos += 1;
                chirality = Some(Chirality::Clockwise);
            } else {
                let rest = &self.text[self.pos..];
                let class = [b"TH", b"AL", b"SP", b"TB", b"OH"].into_iter().find(|p| rest.starts_with(*p));
                match class {
                    Some(p) => {
                        self.pos += 2;
                        let n = self.digits(2).ok_or_else(|| bad(self, "chirality class needs a number"))?;
                        chirality = Some(Chirality::Extended(format!("{}{}", std::str::from_utf8(p).unwrap(), n)));
                    }
                    None => chirality = Some(Chirality::Anticlockwise),
                }
            }
        }

        let mut hydrogens = 0u8;
        if self.peek() == Some(b'H') {
            self.pos += 1;
            hydrogens = match self.digits(2) {
                Some(n) => n as u8,
                None => 1,
            };
        }

        let mut charge: i32 = 0;
        if let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let sign = if c == b'+' { 1 } else { -1 };
            if let Some(n) = self.digits(2) {
                charge = sign * n as i32;
            } else {
                let mut count = 1;
                while self.peek() == Some(c) {
                    self.pos += 1;
                    count += 1;
                }
                charge = sign * count;
            }
            if charge.abs() > 15 {
                return Err(bad(self, "charge magnitude above 15"));
            }
        }

        let mut atom_class = None;
        if self.peek() == Some(b':') {
            self.pos += 1;
            atom_class = Some(self.digits(8).ok_or_else(|| bad(self, "atom class needs a number"))?);
        }

        if self.peek() != Some(b']') {
            return Err(bad(self, "malformed bracket atom"));
        }
        self.pos += 1;

        Ok(Atom {
            element,
            aromatic,
            formal_charge: charge as i8,
            isotope,
            explicit_h: Some(hydrogens),
            chirality,
            atom_class,
        })
    }

    fn finish(self) -> Result<Molecule, ParseDiagnostic> {
        let n = self.atoms.len();
        let mut adjacency = vec![Vec::new(); n];
        for (i, raw) in self.bonds.iter().enumerate() {
            adjacency[raw.bond.a].push((raw.bond.b, i));
            adjacency[raw.bond.b].push((raw.bond.a, i));
        }
        let plain: Vec<Bond> = self.bonds.iter().map(|r| r.bond.clone()).collect();
        let in_ring = rings::ring_bonds(n, &plain, &adjacency);
        // an unmarked bond between aromatic atoms outside any ring is single
        let bonds: Vec<Bond> = self
            .bonds
            .into_iter()
            .zip(in_ring)
            .map(|(raw, ring)| {
                let mut bond = raw.bond;
                if raw.implicit && !ring && bond.order == BondOrder::Aromatic {
                    bond.order = BondOrder::Single;
                }
                bond
            })
            .collect();
        let atom_pos = self.atom_pos;
        Molecule::from_parts(self.atoms, bonds).map_err(|e| {
            let kind = match e {
                StructureError::ValenceViolation { .. } => ParseErrorKind::ValenceViolation,
                StructureError::InvalidAromaticElement { .. } => ParseErrorKind::InvalidAromaticElement,
                StructureError::InvalidAromaticBond { .. } => ParseErrorKind::InvalidAromaticBond,
                StructureError::AromaticOutsideRing { .. } => ParseErrorKind::AromaticOutsideRing,
                StructureError::DuplicateBond { .. } => ParseErrorKind::DuplicateBond,
                StructureError::SelfBond { .. } => ParseErrorKind::SelfBond,
                StructureError::MissingAtom { .. } => ParseErrorKind::UnexpectedCharacter,
            };
            let position = atom_pos.get(e.atom()).copied().unwrap_or(0);
            ParseDiagnostic::new(position, kind, e.to_string())
        })
    }
}
