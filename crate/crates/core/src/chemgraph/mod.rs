//! Molecular graphs parsed from SMILES, with canonical serialisation and
//! Hill formulas.

mod canon;
mod element;
mod formula;
mod molecule;
mod parse;
mod rings;
mod write;

pub use canon::{canonical_ranks, canonical_smiles};
pub use element::{default_valence, max_valence, Element};
pub use formula::molecular_formula;
pub use molecule::{
    implicit_from_half_units, implicit_hydrogens, Atom, Bond, BondDirection, BondOrder, Chirality, Molecule,
    StructureError,
};
pub use parse::{parse_smiles, ParseDiagnostic, ParseErrorKind};
pub use write::write_smiles;

/// Parses and canonicalises in one step.
pub fn canonicalize(smiles: &str) -> Result<String, ParseDiagnostic> {
    parse_smiles(smiles).map(|m| canonical_smiles(&m))
}
