use crate::oracle::{isomorphic, minimal_serialization};
use crate::{check, fixture_molecules, Outcome};
use chembench_core::chemgraph::write_smiles;
use chembench_core::rng::SplitMix64;
use chembench_core::{canonical_smiles, molecular_formula, parse_smiles, Molecule};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

fn random_permutation(n: usize, rng: &mut SplitMix64) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut p);
    p
}

pub fn canonical_invariance() -> Outcome {
    let mols: Vec<Molecule> = fixture_molecules()
        .iter()
        .take(500)
        .map(|s| parse_smiles(s).map_err(|e| format!("fixture {s:?}: {e}")))
        .collect::<Result<_, _>>()?;
    check(mols.len() == 500, || format!("only {} fixture molecules", mols.len()))?;
    let mut rng = SplitMix64::new(20240611);
    let start = Instant::now();
    for (i, m) in mols.iter().enumerate() {
        let reference = canonical_smiles(m);
        for _ in 0..20 {
            let p = m.permuted(&random_permutation(m.atom_count(), &mut rng));
            let c = canonical_smiles(&p);
            check(c == reference, || format!("molecule {i}: {reference} vs {c}"))?;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(secs < 10.0, || format!("took {secs:.2} s"))?;
    Ok(format!("500 molecules x 20 permutations identical in {secs:.2} s"))
}

pub fn canonical_soundness() -> Outcome {
    let mut rng = SplitMix64::new(7);
    let mut pool: Vec<(String, Molecule)> = Vec::new();
    for s in fixture_molecules() {
        let m = parse_smiles(&s).map_err(|e| format!("{s}: {e}"))?;
        if m.heavy_atom_count() > 8 || m.atom_count() > 10 {
            continue;
        }
        // the same molecule under other numberings and spellings
        for _ in 0..2 {
            let p = m.permuted(&random_permutation(m.atom_count(), &mut rng));
            let text = write_smiles(&p);
            let reparsed = parse_smiles(&text).map_err(|e| format!("{text}: {e}"))?;
            pool.push((text, reparsed));
        }
        pool.push((s, m));
    }
    let keyed: Vec<(String, Vec<u64>)> = pool
        .iter()
        .map(|(_, m)| (canonical_smiles(m), minimal_serialization(m)))
        .collect();
    let mut pairs = 0u64;
    let mut same = 0u64;
    for i in 0..keyed.len() {
        for j in i + 1..keyed.len() {
            pairs += 1;
            let by_canon = keyed[i].0 == keyed[j].0;
            let by_oracle = keyed[i].1 == keyed[j].1;
            same += by_oracle as u64;
            check(by_canon == by_oracle, || {
                format!(
                    "{} vs {}: canonical says {by_canon}, oracle says {by_oracle}",
                    pool[i].0, pool[j].0
                )
            })?;
        }
    }
    Ok(format!(
        "{} graphs ({} fixture molecules), {pairs} pairs agree ({same} equivalent)",
        pool.len(),
        pool.len() / 3
    ))
}

const FUZZ_ALPHABET: &[u8] = b"CNOSPFIBrclnosp()[]=#@+-0123456789%/\\.:H*";

pub fn parser_totality() -> Outcome {
    let fixtures = fixture_molecules();
    let mut rng = SplitMix64::new(99);
    let mut ok = 0usize;
    let mut roundtrips = 0usize;
    for i in 0..100_000 {
        let len = rng.index(40);
        let bytes: Vec<u8> = match i % 3 {
            0 => (0..len).map(|_| rng.next_u64() as u8).collect(),
            1 => (0..len).map(|_| FUZZ_ALPHABET[rng.index(FUZZ_ALPHABET.len())]).collect(),
            // a fixture molecule with a few random edits
            _ => {
                let mut b = fixtures[rng.index(fixtures.len())].as_bytes().to_vec();
                for _ in 0..1 + rng.index(3) {
                    let c = FUZZ_ALPHABET[rng.index(FUZZ_ALPHABET.len())];
                    let at = rng.index(b.len() + 1);
                    match rng.below(3) {
                        0 => b.insert(at, c),
                        1 if at < b.len() => b[at] = c,
                        _ if at < b.len() => {
                            b.remove(at);
                        }
                        _ => b.push(c),
                    }
                }
                b
            }
        };
        let text = String::from_utf8_lossy(&bytes).into_owned();
        let result = catch_unwind(AssertUnwindSafe(|| parse_smiles(&text)))
            .map_err(|_| format!("parser panicked on {text:?}"))?;
        if let Ok(m) = result {
            ok += 1;
            let written = catch_unwind(AssertUnwindSafe(|| write_smiles(&m)))
                .map_err(|_| format!("writer panicked on {text:?}"))?;
            let back = parse_smiles(&written).map_err(|e| format!("{text:?} wrote {written:?}: {e}"))?;
            check(isomorphic(&m, &back), || format!("{text:?} -> {written:?} changed the graph"))?;
            roundtrips += 1;
        }
    }
    for s in &fixtures {
        let m = parse_smiles(s).map_err(|e| format!("{s}: {e}"))?;
        let written = write_smiles(&m);
        let back = parse_smiles(&written).map_err(|e| format!("{s} wrote {written}: {e}"))?;
        check(isomorphic(&m, &back), || format!("{s} -> {written} is not isomorphic"))?;
    }
    Ok(format!(
        "100000 fuzz inputs without a crash ({ok} parsed, {roundtrips} round-tripped); {} fixture round trips isomorphic",
        fixtures.len()
    ))
}

/// Hand-counted Hill formulas.
const FORMULAS: [(&str, &str); 50] = [
    ("CCO", "C2H6O"),
    ("c1ccccc1", "C6H6"),
    ("[NH4+]", "H4N+"),
    ("C", "CH4"),
    ("O", "H2O"),
    ("N", "H3N"),
    ("CC", "C2H6"),
    ("C=C", "C2H4"),
    ("C#C", "C2H2"),
    ("CC(=O)O", "C2H4O2"),
    ("c1ccncc1", "C5H5N"),
    ("[Na+].[Cl-]", "ClNa"),
    ("O=C=O", "CO2"),
    ("ClC(Cl)(Cl)Cl", "CCl4"),
    ("ClC(Cl)Cl", "CHCl3"),
    ("CS(=O)C", "C2H6OS"),
    ("c1ccc2ccccc2c1", "C10H8"),
    ("C1CCCCC1", "C6H12"),
    ("CC(C)C", "C4H10"),
    ("OC(=O)c1ccccc1", "C7H6O2"),
    ("CC(=O)Oc1ccccc1C(=O)O", "C9H8O4"),
    ("CN1C=NC2=C1C(=O)N(C(=O)N2C)C", "C8H10N4O2"),
    ("[OH-]", "HO-"),
    ("[H][H]", "H2"),
    ("OS(=O)(=O)O", "H2O4S"),
    ("OP(=O)(O)O", "H3O4P"),
    ("c1ccsc1", "C4H4S"),
    ("c1cc[nH]c1", "C4H5N"),
    ("C1CC1", "C3H6"),
    ("[13CH4]", "CH4"),
    ("N#N", "N2"),
    ("[Cu+2]", "Cu+2"),
    ("BrCBr", "CH2Br2"),
    ("FC(F)(F)F", "CF4"),
    ("CCN(CC)CC", "C6H15N"),
    ("OCC(O)CO", "C3H8O3"),
    ("OCC1OC(O)C(O)C(O)C1O", "C6H12O6"),
    ("CC(=O)C", "C3H6O"),
    ("Oc1ccccc1", "C6H6O"),
    ("NC(=O)N", "CH4N2O"),
    ("[O-][N+](=O)c1ccccc1", "C6H5NO2"),
    ("CC#N", "C2H3N"),
    ("C[N+](C)(C)C", "C4H12N+"),
    ("[Fe]", "Fe"),
    ("OO", "H2O2"),
    ("Cl[Si](Cl)(Cl)Cl", "Cl4Si"),
    ("CCCCCCCCCCCCCCCC", "C16H34"),
    ("c1ccc2c(c1)ccc1ccccc12", "C14H10"),
    ("OB(O)O", "BH3O3"),
    ("[NH3+]CC(=O)[O-]", "C2H5NO2"),
];

pub fn formula_correctness() -> Outcome {
    let mut wrong = Vec::new();
    for (smiles, expected) in FORMULAS {
        let got = parse_smiles(smiles).map(|m| molecular_formula(&m)).map_err(|e| e.to_string());
        if got.as_deref() != Ok(expected) {
            wrong.push(format!("{smiles}: expected {expected}, got {got:?}"));
        }
    }
    check(wrong.is_empty(), || wrong.join("; "))?;
    Ok(format!("{} hand-derived formulas exact", FORMULAS.len()))
}
