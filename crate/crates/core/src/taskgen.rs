//! Instruction-tuning record builders.
//!
//! Every builder turns source records into `(prompt, returns)` instances by
//! filling a randomly drawn template. Randomness is drawn from a stream
//! derived from the seed and the record index, so output is a pure function
//! of the inputs and the seed.

use crate::chemgraph::{canonical_smiles, molecular_formula, parse_smiles, Molecule};
use crate::rng::SplitMix64;
use regex::Regex;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;
use std::str::FromStr;
use std::sync::OnceLock;
use thiserror::Error;

pub const MASK_TOKEN: &str = "[MASK]";
pub const DEFAULT_MAX_MASKED: usize = 2;

#[derive(Debug, Error)]
pub enum TaskgenError {
    #[error("record {record}: cannot parse SMILES {smiles:?}")]
    UnparsableSmiles { record: String, smiles: String },
    #[error("record {record} rejected: {reason}")]
    RecordRejected { record: String, reason: String },
    #[error("record {0}: a reaction with a single molecule has nothing to mask")]
    NothingToMask(String),
    #[error("record {0}: IUPAC name is empty")]
    MissingIupac(String),
    #[error("template pool is for {found}, builder needs {expected}")]
    WrongPool { expected: TaskFamily, found: TaskFamily },
    #[error("template pool is empty")]
    EmptyPool,
    #[error("template {template_id} lacks placeholder {{{placeholder}}}")]
    MissingPlaceholder { template_id: String, placeholder: &'static str },
    #[error("ratio needs {needed} general instances, only {available} available")]
    InsufficientGeneralData { needed: usize, available: usize },
    #[error("invalid ratio {0:?}")]
    BadRatio(String),
    #[error("invalid reaction {0:?}: expected reactants>reagents>products")]
    BadReaction(String),
    #[error("unknown task family {0:?}")]
    UnknownFamily(String),
    #[error("bad input: {0}")]
    BadInput(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TaskFamily {
    #[serde(rename = "MD")]
    Md,
    #[serde(rename = "TBMD")]
    Tbmd,
    #[serde(rename = "MPP")]
    Mpp,
    #[serde(rename = "RC")]
    Rc,
    #[serde(rename = "MNA_s2i")]
    MnaS2i,
    #[serde(rename = "MNA_i2s")]
    MnaI2s,
    #[serde(rename = "MNA_s2mf")]
    MnaS2mf,
    #[serde(rename = "MNA_i2mf")]
    MnaI2mf,
}

impl TaskFamily {
    pub const ALL: [TaskFamily; 8] = [
        TaskFamily::Md,
        TaskFamily::Tbmd,
        TaskFamily::Mpp,
        TaskFamily::Rc,
        TaskFamily::MnaS2i,
        TaskFamily::MnaI2s,
        TaskFamily::MnaS2mf,
        TaskFamily::MnaI2mf,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskFamily::Md => "MD",
            TaskFamily::Tbmd => "TBMD",
            TaskFamily::Mpp => "MPP",
            TaskFamily::Rc => "RC",
            TaskFamily::MnaS2i => "MNA_s2i",
            TaskFamily::MnaI2s => "MNA_i2s",
            TaskFamily::MnaS2mf => "MNA_s2mf",
            TaskFamily::MnaI2mf => "MNA_i2mf",
        }
    }

    /// Placeholder every template of this family must contain.
    pub fn required_placeholder(self) -> &'static str {
        match self {
            TaskFamily::Md | TaskFamily::Mpp | TaskFamily::MnaS2i | TaskFamily::MnaS2mf => "smiles",
            TaskFamily::Tbmd => "description",
            TaskFamily::Rc => "reaction",
            TaskFamily::MnaI2s | TaskFamily::MnaI2mf => "iupac",
        }
    }

    fn id_prefix(self) -> String {
        self.as_str().to_ascii_lowercase().replace('_', "-")
    }
}

impl fmt::Display for TaskFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaskFamily {
    type Err = TaskgenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TaskFamily::ALL
            .into_iter()
            .find(|f| f.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| TaskgenError::UnknownFamily(s.to_string()))
    }
}

/// One `(prompt, returns)` instance. Field order is the JSONL field order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskInstance {
    pub id: String,
    pub task: String,
    pub prompt: String,
    pub returns: String,
    pub template_id: String,
    pub meta: BTreeMap<String, String>,
}

impl TaskInstance {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("instances always serialise")
    }
}

pub fn write_jsonl(instances: &[TaskInstance]) -> String {
    let mut out = String::new();
    for inst in instances {
        out.push_str(&inst.to_json_line());
        out.push('\n');
    }
    out
}

pub fn read_jsonl(text: &str) -> Result<Vec<TaskInstance>, TaskgenError> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(TaskgenError::from))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Template {
    pub id: String,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TemplatePool {
    pub task: TaskFamily,
    pub templates: Vec<Template>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum TemplateEntry {
    Bare(String),
    Named { id: String, text: String },
}

#[derive(Deserialize)]
struct PoolFile {
    task: TaskFamily,
    templates: Vec<TemplateEntry>,
}

impl TemplatePool {
    pub fn new(task: TaskFamily, texts: impl IntoIterator<Item = impl Into<String>>) -> Result<Self, TaskgenError> {
        let templates = texts
            .into_iter()
            .enumerate()
            .map(|(i, t)| Template {
                id: format!("{}-{:03}", task.id_prefix(), i),
                text: t.into(),
            })
            .collect();
        Self::validated(task, templates)
    }

    fn validated(task: TaskFamily, templates: Vec<Template>) -> Result<Self, TaskgenError> {
        if templates.is_empty() {
            return Err(TaskgenError::EmptyPool);
        }
        let placeholder = task.required_placeholder();
        let needle = format!("{{{placeholder}}}");
        if let Some(t) = templates.iter().find(|t| !t.text.contains(&needle)) {
            return Err(TaskgenError::MissingPlaceholder {
                template_id: t.id.clone(),
                placeholder,
            });
        }
        Ok(TemplatePool { task, templates })
    }

    /// JSON `{"task": "MD", "templates": [...]}`; entries are strings or
    /// `{"id", "text"}` objects.
    pub fn from_json(text: &str) -> Result<Self, TaskgenError> {
        let file: PoolFile = serde_json::from_str(text)?;
        let templates = file
            .templates
            .into_iter()
            .enumerate()
            .map(|(i, e)| match e {
                TemplateEntry::Bare(text) => Template {
                    id: format!("{}-{:03}", file.task.id_prefix(), i),
                    text,
                },
                TemplateEntry::Named { id, text } => Template { id, text },
            })
            .collect();
        Self::validated(file.task, templates)
    }

    /// One template per non-blank line.
    pub fn from_lines(task: TaskFamily, text: &str) -> Result<Self, TaskgenError> {
        Self::new(task, text.lines().map(str::trim).filter(|l| !l.is_empty()))
    }

    /// JSON when the text starts with `{`, otherwise lines.
    pub fn load(task: TaskFamily, text: &str) -> Result<Self, TaskgenError> {
        if text.trim_start().starts_with('{') {
            let pool = Self::from_json(text)?;
            if pool.task != task {
                return Err(TaskgenError::WrongPool {
                    expected: task,
                    found: pool.task,
                });
            }
            Ok(pool)
        } else {
            Self::from_lines(task, text)
        }
    }

    fn expect(&self, family: TaskFamily) -> Result<(), TaskgenError> {
        if self.task != family {
            return Err(TaskgenError::WrongPool {
                expected: family,
                found: self.task,
            });
        }
        Ok(())
    }

    fn draw(&self, rng: &mut SplitMix64) -> &Template {
        &self.templates[rng.index(self.templates.len())]
    }
}

/// Substitutes `{name}` placeholders; unknown names are left as written.
pub fn render_template(template: &str, values: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        match after.find('}') {
            Some(close) => {
                let name = &after[..close];
                match values.iter().find(|(k, _)| *k == name) {
                    Some((_, v)) => out.push_str(v),
                    None => {
                        out.push('{');
                        out.push_str(name);
                        out.push('}');
                    }
                }
                rest = &after[close + 1..];
            }
            None => {
                out.push_str(&rest[open..]);
                rest = "";
            }
        }
    }
    out.push_str(rest);
    out
}

fn sentence_splitter() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"[.!?]\s+").expect("valid pattern"))
}

/// Sentences as separated by terminal punctuation followed by whitespace.
pub fn sentence_count(text: &str) -> usize {
    sentence_splitter()
        .split(text.trim())
        .filter(|s| !s.trim().is_empty())
        .count()
}

fn record_rng(seed: u64, family: TaskFamily, index: usize) -> SplitMix64 {
    SplitMix64::derive(seed, &format!("{}:{}", family.as_str(), index))
}

fn record_id(family: TaskFamily, index: usize) -> String {
    format!("{}-{:06}", family.id_prefix(), index)
}

fn parse_record(record: &str, smiles: &str) -> Result<Molecule, TaskgenError> {
    parse_smiles(smiles).map_err(|_| TaskgenError::UnparsableSmiles {
        record: record.to_string(),
        smiles: smiles.to_string(),
    })
}

fn meta(pairs: &[(&str, String)]) -> BTreeMap<String, String> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn push_with_duplicate(out: &mut Vec<TaskInstance>, inst: TaskInstance, description: &str) {
    let dup = sentence_count(description) >= 3;
    if dup {
        let mut copy = inst.clone();
        copy.id.push_str("-dup");
        out.push(inst);
        out.push(copy);
    } else {
        out.push(inst);
    }
}

fn description_builder(
    family: TaskFamily,
    records: &[(String, String)],
    pool: &TemplatePool,
    seed: u64,
) -> Result<Vec<TaskInstance>, TaskgenError> {
    pool.expect(family)?;
    let mut out = Vec::with_capacity(records.len());
    for (i, (smiles, description)) in records.iter().enumerate() {
        let id = record_id(family, i);
        let mol = parse_record(&id, smiles)?;
        let description = description.trim();
        if description.is_empty() {
            return Err(TaskgenError::RecordRejected {
                record: id,
                reason: "empty description".into(),
            });
        }
        let canonical = canonical_smiles(&mol);
        let template = pool.draw(&mut record_rng(seed, family, i));
        let values = [("smiles", canonical.as_str()), ("description", description)];
        let (prompt, returns) = match family {
            TaskFamily::Md => (render_template(&template.text, &values), description.to_string()),
            _ => (render_template(&template.text, &values), canonical.clone()),
        };
        let inst = TaskInstance {
            id,
            task: family.as_str().into(),
            prompt,
            returns,
            template_id: template.id.clone(),
            meta: meta(&[("source_index", i.to_string())]),
        };
        push_with_duplicate(&mut out, inst, description);
    }
    Ok(out)
}

/// Molecule description: SMILES in the prompt, description returned.
/// Records whose description has three or more sentences appear twice.
pub fn build_md(records: &[(String, String)], pool: &TemplatePool, seed: u64) -> Result<Vec<TaskInstance>, TaskgenError> {
    description_builder(TaskFamily::Md, records, pool, seed)
}

/// Text-based molecule design: description in the prompt, canonical SMILES returned.
pub fn build_tbmd(records: &[(String, String)], pool: &TemplatePool, seed: u64) -> Result<Vec<TaskInstance>, TaskgenError> {
    description_builder(TaskFamily::Tbmd, records, pool, seed)
}

/// Binary-labelled molecule table; `None` marks a missing label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledTable {
    pub dataset: String,
    pub tasks: Vec<String>,
    pub rows: Vec<(String, Vec<Option<bool>>)>,
}

impl LabeledTable {
    /// CSV with a `smiles` column; every other column except `id` is a task.
    /// Cells `1`/`0` (or `1.0`/`0.0`) are labels, empty cells are missing.
    pub fn from_csv<R: Read>(dataset: &str, reader: R) -> Result<Self, TaskgenError> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers = rdr.headers()?.clone();
        let smiles_col = headers
            .iter()
            .position(|h| h.trim().eq_ignore_ascii_case("smiles"))
            .ok_or_else(|| TaskgenError::BadInput("table has no smiles column".into()))?;
        let task_cols: Vec<usize> = (0..headers.len())
            .filter(|&c| c != smiles_col && !headers[c].trim().eq_ignore_ascii_case("id"))
            .collect();
        let tasks = task_cols.iter().map(|&c| headers[c].trim().to_string()).collect();
        let mut rows = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let mut labels = Vec::with_capacity(task_cols.len());
            for &c in &task_cols {
                let cell = rec.get(c).unwrap_or("").trim();
                labels.push(match cell {
                    "" => None,
                    "1" | "1.0" => Some(true),
                    "0" | "0.0" => Some(false),
                    other => {
                        return Err(TaskgenError::BadInput(format!(
                            "row {}: label {other:?} is not 0, 1 or empty",
                            line + 1
                        )))
                    }
                });
            }
            rows.push((rec.get(smiles_col).unwrap_or("").trim().to_string(), labels));
        }
        Ok(LabeledTable {
            dataset: dataset.to_string(),
            tasks,
            rows,
        })
    }
}

/// One Yes/No instance per labelled (molecule, task) cell.
pub fn build_mpp(table: &LabeledTable, pool: &TemplatePool, seed: u64) -> Result<Vec<TaskInstance>, TaskgenError> {
    pool.expect(TaskFamily::Mpp)?;
    let mut out = Vec::new();
    for (i, (smiles, labels)) in table.rows.iter().enumerate() {
        let row_id = record_id(TaskFamily::Mpp, i);
        let mol = parse_record(&row_id, smiles)?;
        let canonical = canonical_smiles(&mol);
        let mut rng = record_rng(seed, TaskFamily::Mpp, i);
        for (task, label) in table.tasks.iter().zip(labels) {
            let Some(label) = label else { continue };
            let template = pool.draw(&mut rng);
            let prompt = render_template(
                &template.text,
                &[("smiles", canonical.as_str()), ("property", task.as_str())],
            );
            out.push(TaskInstance {
                id: format!("{row_id}-{task}"),
                task: TaskFamily::Mpp.as_str().into(),
                prompt,
                returns: if *label { "Yes" } else { "No" }.into(),
                template_id: template.id.clone(),
                meta: meta(&[
                    ("dataset", table.dataset.clone()),
                    ("property", task.clone()),
                    ("source_index", i.to_string()),
                ]),
            });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReactionRecord {
    pub reactants: Vec<String>,
    pub reagents: Vec<String>,
    pub products: Vec<String>,
}

impl ReactionRecord {
    /// Parses `reactants>reagents>products`, each side `.`-separated.
    pub fn parse(text: &str) -> Result<Self, TaskgenError> {
        let parts: Vec<&str> = text.trim().split('>').collect();
        if parts.len() != 3 {
            return Err(TaskgenError::BadReaction(text.to_string()));
        }
        let side = |s: &str| -> Vec<String> { s.split('.').filter(|m| !m.is_empty()).map(String::from).collect() };
        let record = ReactionRecord {
            reactants: side(parts[0]),
            reagents: side(parts[1]),
            products: side(parts[2]),
        };
        if record.reactants.is_empty() || record.products.is_empty() {
            return Err(TaskgenError::BadReaction(text.to_string()));
        }
        Ok(record)
    }

    pub fn render(&self) -> String {
        format!(
            "{}>{}>{}",
            self.reactants.join("."),
            self.reagents.join("."),
            self.products.join(".")
        )
    }
}

/// Reaction completion: one or more reactant/product slots are replaced by
/// [`MASK_TOKEN`]; reagents are never masked.
pub fn build_rc(reactions: &[ReactionRecord], pool: &TemplatePool, seed: u64) -> Result<Vec<TaskInstance>, TaskgenError> {
    build_rc_with(reactions, pool, seed, DEFAULT_MAX_MASKED)
}

/// [`build_rc`] with an explicit upper bound on masked slots.
pub fn build_rc_with(
    reactions: &[ReactionRecord],
    pool: &TemplatePool,
    seed: u64,
    max_masked: usize,
) -> Result<Vec<TaskInstance>, TaskgenError> {
    pool.expect(TaskFamily::Rc)?;
    let mut out = Vec::with_capacity(reactions.len());
    for (i, reaction) in reactions.iter().enumerate() {
        let id = record_id(TaskFamily::Rc, i);
        for s in reaction.reactants.iter().chain(&reaction.reagents).chain(&reaction.products) {
            parse_record(&id, s)?;
        }
        let r = reaction.reactants.len();
        let total = r + reaction.products.len();
        if total < 2 {
            return Err(TaskgenError::NothingToMask(id));
        }
        let mut rng = record_rng(seed, TaskFamily::Rc, i);
        let k_max = max_masked.clamp(1, total - 1);
        let k = 1 + rng.index(k_max);
        let mut slots: Vec<usize> = (0..total).collect();
        rng.partial_shuffle(&mut slots, k);
        let mut masked: Vec<usize> = slots[..k].to_vec();
        masked.sort_unstable();

        let mut shown = reaction.clone();
        let mut answers = Vec::with_capacity(k);
        let mut names = Vec::with_capacity(k);
        for &slot in &masked {
            let (name, cell) = if slot < r {
                (format!("reactant:{slot}"), &mut shown.reactants[slot])
            } else {
                (format!("product:{}", slot - r), &mut shown.products[slot - r])
            };
            let mol = parse_record(&id, cell)?;
            answers.push(canonical_smiles(&mol));
            *cell = MASK_TOKEN.to_string();
            names.push(name);
        }
        let template = pool.draw(&mut rng);
        let rendered = shown.render();
        out.push(TaskInstance {
            id,
            task: TaskFamily::Rc.as_str().into(),
            prompt: render_template(&template.text, &[("reaction", rendered.as_str())]),
            returns: answers.join("."),
            template_id: template.id.clone(),
            meta: meta(&[
                ("masked_slots", names.join(",")),
                ("reaction", rendered),
                ("source_index", i.to_string()),
            ]),
        });
    }
    Ok(out)
}

/// Fills the masked slots of a rendered reaction with `returns`.
pub fn unmask_reaction(masked: &str, returns: &str) -> Option<String> {
    let mut answers = returns.split('.');
    let mut out = String::new();
    let mut rest = masked;
    while let Some(pos) = rest.find(MASK_TOKEN) {
        out.push_str(&rest[..pos]);
        out.push_str(answers.next()?);
        rest = &rest[pos + MASK_TOKEN.len()..];
    }
    out.push_str(rest);
    answers.next().is_none().then_some(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MnaDirection {
    S2i,
    I2s,
    S2mf,
    I2mf,
}

impl MnaDirection {
    pub fn family(self) -> TaskFamily {
        match self {
            MnaDirection::S2i => TaskFamily::MnaS2i,
            MnaDirection::I2s => TaskFamily::MnaI2s,
            MnaDirection::S2mf => TaskFamily::MnaS2mf,
            MnaDirection::I2mf => TaskFamily::MnaI2mf,
        }
    }
}

impl FromStr for MnaDirection {
    type Err = TaskgenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "s2i" => Ok(MnaDirection::S2i),
            "i2s" => Ok(MnaDirection::I2s),
            "s2mf" => Ok(MnaDirection::S2mf),
            "i2mf" => Ok(MnaDirection::I2mf),
            _ => Err(TaskgenError::UnknownFamily(s.to_string())),
        }
    }
}

/// Notation alignment between SMILES, IUPAC names and formulas. Formulas
/// always come from the SMILES of the pair.
pub fn build_mna(
    records: &[(String, String)],
    pool: &TemplatePool,
    seed: u64,
    direction: MnaDirection,
) -> Result<Vec<TaskInstance>, TaskgenError> {
    let family = direction.family();
    pool.expect(family)?;
    let mut out = Vec::with_capacity(records.len());
    for (i, (smiles, iupac)) in records.iter().enumerate() {
        let id = record_id(family, i);
        let mol = parse_record(&id, smiles)?;
        let iupac = iupac.trim();
        if iupac.is_empty() && direction != MnaDirection::S2mf {
            return Err(TaskgenError::MissingIupac(id));
        }
        let canonical = canonical_smiles(&mol);
        let template = pool.draw(&mut record_rng(seed, family, i));
        let prompt = render_template(&template.text, &[("smiles", canonical.as_str()), ("iupac", iupac)]);
        let returns = match direction {
            MnaDirection::S2i => iupac.to_string(),
            MnaDirection::I2s => canonical.clone(),
            MnaDirection::S2mf | MnaDirection::I2mf => molecular_formula(&mol),
        };
        out.push(TaskInstance {
            id,
            task: family.as_str().into(),
            prompt,
            returns,
            template_id: template.id.clone(),
            meta: meta(&[("source_index", i.to_string())]),
        });
    }
    Ok(out)
}

/// Chem-to-general count ratio such as `1:2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MixRatio {
    pub chem: u64,
    pub general: u64,
}

impl Default for MixRatio {
    fn default() -> Self {
        MixRatio { chem: 1, general: 2 }
    }
}

impl FromStr for MixRatio {
    type Err = TaskgenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || TaskgenError::BadRatio(s.to_string());
        let (a, b) = s.split_once(':').ok_or_else(bad)?;
        let chem: u64 = a.trim().parse().map_err(|_| bad())?;
        let general: u64 = b.trim().parse().map_err(|_| bad())?;
        if chem == 0 {
            return Err(bad());
        }
        Ok(MixRatio { chem, general })
    }
}

/// Mixes chemistry and general instances at `ratio`.
///
/// All chemistry instances are kept and the general pool is down-sampled to
/// `round(|chem| × general / chem)`. When the general pool is too small this
/// fails unless `allow_upsample` is set, in which case every general
/// instance is used once and the shortfall is drawn with replacement (ids
/// get a `-rep<n>` suffix). The result is a seeded permutation.
pub fn mix_datasets(
    chem: &[TaskInstance],
    general: &[TaskInstance],
    ratio: MixRatio,
    seed: u64,
    allow_upsample: bool,
) -> Result<Vec<TaskInstance>, TaskgenError> {
    let chem_n = chem.len() as u128;
    let needed = ((chem_n * ratio.general as u128 * 2 + ratio.chem as u128) / (2 * ratio.chem as u128)) as usize;
    let mut rng = SplitMix64::derive(seed, "mix");
    let mut selected: Vec<TaskInstance> = chem.to_vec();
    if needed <= general.len() {
        let mut idx: Vec<usize> = (0..general.len()).collect();
        rng.partial_shuffle(&mut idx, needed);
        let mut take = idx[..needed].to_vec();
        take.sort_unstable();
        selected.extend(take.into_iter().map(|i| general[i].clone()));
    } else if allow_upsample && !general.is_empty() {
        selected.extend(general.iter().cloned());
        for rep in 0..needed - general.len() {
            let mut inst = general[rng.index(general.len())].clone();
            inst.id = format!("{}-rep{rep}", inst.id);
            selected.push(inst);
        }
    } else {
        return Err(TaskgenError::InsufficientGeneralData {
            needed,
            available: general.len(),
        });
    }
    rng.shuffle(&mut selected);
    Ok(selected)
}

/// Two-column records from CSV, selected by header name.
pub fn read_pairs_csv<R: Read>(reader: R, first: &str, second: &str) -> Result<Vec<(String, String)>, TaskgenError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim().eq_ignore_ascii_case(name))
            .ok_or_else(|| TaskgenError::BadInput(format!("missing column {name:?}")))
    };
    let (a, b) = (col(first)?, col(second)?);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        out.push((
            rec.get(a).unwrap_or("").to_string(),
            rec.get(b).unwrap_or("").to_string(),
        ));
    }
    Ok(out)
}

/// Two-field records from JSON lines, selected by key.
pub fn read_pairs_jsonl(text: &str, first: &str, second: &str) -> Result<Vec<(String, String)>, TaskgenError> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let v: serde_json::Value = serde_json::from_str(line)?;
        let field = |k: &str| {
            v.get(k)
                .and_then(|x| x.as_str())
                .map(String::from)
                .ok_or_else(|| TaskgenError::BadInput(format!("line {}: missing string field {k:?}", n + 1)))
        };
        out.push((field(first)?, field(second)?));
    }
    Ok(out)
}

/// One reaction per non-blank line.
pub fn read_reactions(text: &str) -> Result<Vec<ReactionRecord>, TaskgenError> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(ReactionRecord::parse)
        .collect()
}
