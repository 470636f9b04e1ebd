use std::fmt;

const SYMBOLS: [&str; 118] = [
    "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne", "Na", "Mg", "Al", "Si", "P", "S", "Cl",
    "Ar", "K", "Ca", "Sc", "Ti", "V", "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As",
    "Se", "Br", "Kr", "Rb", "Sr", "Y", "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd", "In",
    "Sn", "Sb", "Te", "I", "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd", "Pm", "Sm", "Eu", "Gd", "Tb",
    "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W", "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl",
    "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U", "Np", "Pu", "Am", "Cm", "Bk",
    "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh", "Hs", "Mt", "Ds", "Rg", "Cn", "Nh",
    "Fl", "Mc", "Lv", "Ts", "Og",
];

/// A chemical element, stored as its atomic number (1..=118).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Element(u8);

impl Element {
    pub const H: Element = Element(1);
    pub const B: Element = Element(5);
    pub const C: Element = Element(6);
    pub const N: Element = Element(7);
    pub const O: Element = Element(8);
    pub const F: Element = Element(9);
    pub const SI: Element = Element(14);
    pub const P: Element = Element(15);
    pub const S: Element = Element(16);
    pub const CL: Element = Element(17);
    pub const AS: Element = Element(33);
    pub const SE: Element = Element(34);
    pub const BR: Element = Element(35);
    pub const TE: Element = Element(52);
    pub const I: Element = Element(53);

    pub fn from_atomic_number(z: u8) -> Option<Element> {
        (1..=118).contains(&z).then_some(Element(z))
    }

    /// Looks up a symbol with standard capitalisation ("Cl", not "CL").
    pub fn from_symbol(symbol: &str) -> Option<Element> {
        SYMBOLS
            .iter()
            .position(|s| *s == symbol)
            .map(|i| Element(i as u8 + 1))
    }

    pub fn atomic_number(self) -> u8 {
        self.0
    }

    pub fn symbol(self) -> &'static str {
        SYMBOLS[self.0 as usize - 1]
    }

    /// Elements that may be written in lowercase (aromatic) form.
    pub fn can_be_aromatic(self) -> bool {
        matches!(
            self,
            Element::B
                | Element::C
                | Element::N
                | Element::O
                | Element::P
                | Element::S
                | Element::SE
                | Element::AS
        )
    }

    /// Elements that may appear outside brackets.
    pub fn in_organic_subset(self) -> bool {
        matches!(
            self,
            Element::B
                | Element::C
                | Element::N
                | Element::O
                | Element::P
                | Element::S
                | Element::F
                | Element::CL
                | Element::BR
                | Element::I
        )
    }

    pub fn is_halogen(self) -> bool {
        matches!(self, Element::F | Element::CL | Element::BR | Element::I) || self.0 == 85
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Nominal valence used for implicit hydrogen counting, adjusted for charge.
///
/// | element | neutral | charge rule |
/// |---------|---------|-------------|
/// | B       | 3       | 3 - q (B- has 4) |
/// | C       | 4       | 4 - abs(q) |
/// | N, P    | 3       | 3 + q (N+ has 4, N- has 2) |
/// | O, S    | 2       | 2 + q (O+ has 3, O- has 1) |
/// | F, Cl, Br, I | 1  | 1 + q |
///
/// Results are clamped at zero. Elements outside the organic subset have
/// no default and never receive implicit hydrogens.
pub fn default_valence(element: Element, charge: i8) -> Option<u8> {
    let q = charge as i32;
    let v = match element {
        Element::B => 3 - q,
        Element::C => 4 - q.abs(),
        Element::N | Element::P => 3 + q,
        Element::O | Element::S => 2 + q,
        Element::F | Element::CL | Element::BR | Element::I => 1 + q,
        _ => return None,
    };
    Some(v.max(0) as u8)
}

/// Largest bond-order sum (aromatic bonds counted as 1) plus attached
/// hydrogens accepted for an atom. `None` means the element is not checked.
pub fn max_valence(element: Element, charge: i8) -> Option<u8> {
    let q = charge as i32;
    let v = match element {
        Element::H => 1 - q.abs(),
        Element::B => 3 - q,
        Element::C | Element::SI => 4 - q.abs(),
        Element::N => {
            if q > 0 {
                4
            } else {
                5 + q
            }
        }
        Element::P | Element::AS => {
            if q == 0 {
                5
            } else {
                6
            }
        }
        Element::O => 2 + q,
        Element::S | Element::SE | Element::TE => 6,
        Element::F => 1 + q,
        Element::CL | Element::BR | Element::I => 7,
        _ => return None,
    };
    Some(v.max(0) as u8)
}
