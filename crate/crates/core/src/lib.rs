//! Chemistry and scoring primitives for benchmarking chemistry language models.
//!
//! - [`chemgraph`]: SMILES parsing, canonical SMILES, Hill formulas
//! - [`fingerprint`]: Morgan, path and structural-key fingerprints; Tanimoto
//! - [`scaffold`]: Bemis-Murcko scaffolds and scaffold-grouped splits
//! - [`metrics`]: exact match, BLEU, ROUGE, Levenshtein, AUC-ROC, masked NLL
//! - [`taskgen`]: instruction-tuning `(prompt, returns)` builders and mixing

pub mod chemgraph;
pub mod fingerprint;
pub mod metrics;
pub mod rng;
pub mod scaffold;
pub mod taskgen;

pub use chemgraph::{canonical_smiles, molecular_formula, parse_smiles, write_smiles, Molecule, ParseDiagnostic};
