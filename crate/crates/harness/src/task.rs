use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TaskError {
    #[error("unknown task kind {0:?}")]
    UnknownKind(String),
    #[error("metric {metric:?} is not available for {kind}")]
    InvalidMetric { kind: String, metric: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ReagentKind {
    Reactant,
    Solvent,
    Ligand,
}

impl ReagentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ReagentKind::Reactant => "reactant",
            ReagentKind::Solvent => "solvent",
            ReagentKind::Ligand => "ligand",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TaskKind {
    S2I,
    I2S,
    S2MF,
    I2MF,
    Captioning,
    MoleculeDesign,
    Property(String),
    Yield(String),
    ReactionPrediction,
    Retrosynthesis,
    ReagentSelection(ReagentKind),
}

/// How a raw model output is turned into an answer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AnswerKind {
    Smiles,
    Formula,
    YesNo,
    MultipleChoice,
    FreeText,
}

/// Report table a task belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ReportGroup {
    NamePrediction,
    Captioning,
    MoleculeDesign,
    Property,
    Reaction,
}

pub mod metric {
    pub const ACCURACY: &str = "accuracy";
    pub const TOP50_ACCURACY: &str = "top50_accuracy";
    pub const AUC_ROC: &str = "auc_roc";
    pub const BLEU: &str = "bleu";
    pub const BLEU2: &str = "bleu2";
    pub const BLEU4: &str = "bleu4";
    pub const ROUGE1: &str = "rouge1";
    pub const ROUGE2: &str = "rouge2";
    pub const ROUGEL: &str = "rougeL";
    pub const EXACT: &str = "exact";
    pub const LEVENSHTEIN: &str = "levenshtein";
    pub const VALIDITY: &str = "validity";
    pub const FTS_MACCS: &str = "fts_maccs";
    pub const FTS_RDK: &str = "fts_rdk";
    pub const FTS_MORGAN: &str = "fts_morgan";

    /// Reported as percentages with one decimal.
    pub fn is_percentage(name: &str) -> bool {
        matches!(name, ACCURACY | TOP50_ACCURACY | AUC_ROC | EXACT | VALIDITY)
    }
}

impl TaskKind {
    pub fn all_fixed() -> Vec<TaskKind> {
        vec![
            TaskKind::S2I,
            TaskKind::I2S,
            TaskKind::S2MF,
            TaskKind::I2MF,
            TaskKind::Captioning,
            TaskKind::MoleculeDesign,
            TaskKind::ReactionPrediction,
            TaskKind::Retrosynthesis,
            TaskKind::ReagentSelection(ReagentKind::Reactant),
            TaskKind::ReagentSelection(ReagentKind::Solvent),
            TaskKind::ReagentSelection(ReagentKind::Ligand),
        ]
    }

    pub fn answer_kind(&self) -> AnswerKind {
        match self {
            TaskKind::S2I | TaskKind::Captioning => AnswerKind::FreeText,
            TaskKind::I2S | TaskKind::MoleculeDesign | TaskKind::ReactionPrediction | TaskKind::Retrosynthesis => {
                AnswerKind::Smiles
            }
            TaskKind::S2MF | TaskKind::I2MF => AnswerKind::Formula,
            TaskKind::Property(_) | TaskKind::Yield(_) => AnswerKind::YesNo,
            TaskKind::ReagentSelection(_) => AnswerKind::MultipleChoice,
        }
    }

    pub fn group(&self) -> ReportGroup {
        match self {
            TaskKind::S2I | TaskKind::I2S | TaskKind::S2MF | TaskKind::I2MF => ReportGroup::NamePrediction,
            TaskKind::Captioning => ReportGroup::Captioning,
            TaskKind::MoleculeDesign => ReportGroup::MoleculeDesign,
            TaskKind::Property(_) => ReportGroup::Property,
            _ => ReportGroup::Reaction,
        }
    }

    /// Every metric this kind can report, in report order.
    pub fn metrics(&self) -> &'static [&'static str] {
        use metric::*;
        match self {
            TaskKind::S2I
            | TaskKind::I2S
            | TaskKind::S2MF
            | TaskKind::I2MF
            | TaskKind::Yield(_)
            | TaskKind::ReactionPrediction
            | TaskKind::Retrosynthesis
            | TaskKind::ReagentSelection(ReagentKind::Reactant | ReagentKind::Solvent) => &[ACCURACY],
            TaskKind::ReagentSelection(ReagentKind::Ligand) => &[TOP50_ACCURACY],
            TaskKind::Captioning => &[BLEU2, BLEU4, ROUGE1, ROUGE2, ROUGEL],
            TaskKind::MoleculeDesign => &[EXACT, BLEU, LEVENSHTEIN, VALIDITY, FTS_MACCS, FTS_RDK, FTS_MORGAN],
            TaskKind::Property(_) => &[AUC_ROC, ACCURACY],
        }
    }

    /// Prompt used when a task supplies no template.
    pub fn default_template(&self) -> &'static str {
        match self {
            TaskKind::S2I => "Translate the following SMILES into its IUPAC name.\nSMILES: {smiles}",
            TaskKind::I2S => "Translate the following IUPAC name into SMILES.\nIUPAC name: {iupac}",
            TaskKind::S2MF => "What is the molecular formula of the molecule with SMILES {smiles}?",
            TaskKind::I2MF => "What is the molecular formula of the molecule named {iupac}?",
            TaskKind::Captioning => "Describe the following molecule.\nSMILES: {smiles}",
            TaskKind::MoleculeDesign => "Give the SMILES of a molecule that fits this description.\n{description}",
            TaskKind::Property(_) => "Does the molecule {smiles} have the property \"{property}\"? Answer Yes or No.",
            TaskKind::Yield(_) => "Is the following reaction high-yielding? Answer Yes or No.\nReaction: {reaction}",
            TaskKind::ReactionPrediction => "Predict the product of the following reaction.\nReaction: {reaction}",
            TaskKind::Retrosynthesis => "Suggest reactants that produce the following product.\nProduct: {product}",
            TaskKind::ReagentSelection(_) => {
                "Reaction: {reaction}\nChoose the most suitable {role} from the candidates below and reply with it.\n{candidates}"
            }
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TaskKind::S2I => f.write_str("s2i"),
            TaskKind::I2S => f.write_str("i2s"),
            TaskKind::S2MF => f.write_str("s2mf"),
            TaskKind::I2MF => f.write_str("i2mf"),
            TaskKind::Captioning => f.write_str("captioning"),
            TaskKind::MoleculeDesign => f.write_str("molecule_design"),
            TaskKind::Property(ds) => write!(f, "property:{ds}"),
            TaskKind::Yield(ds) => write!(f, "yield:{ds}"),
            TaskKind::ReactionPrediction => f.write_str("reaction_prediction"),
            TaskKind::Retrosynthesis => f.write_str("retrosynthesis"),
            TaskKind::ReagentSelection(k) => write!(f, "reagent_selection:{}", k.as_str()),
        }
    }
}

impl FromStr for TaskKind {
    type Err = TaskError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unknown = || TaskError::UnknownKind(s.to_string());
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) if !a.is_empty() => (h, Some(a)),
            Some(_) => return Err(unknown()),
            None => (s, None),
        };
        Ok(match (head.to_ascii_lowercase().as_str(), arg) {
            ("s2i", None) => TaskKind::S2I,
            ("i2s", None) => TaskKind::I2S,
            ("s2mf", None) => TaskKind::S2MF,
            ("i2mf", None) => TaskKind::I2MF,
            ("captioning", None) => TaskKind::Captioning,
            ("molecule_design", None) => TaskKind::MoleculeDesign,
            ("property", Some(ds)) => TaskKind::Property(ds.to_string()),
            ("yield", Some(ds)) => TaskKind::Yield(ds.to_string()),
            ("reaction_prediction", None) => TaskKind::ReactionPrediction,
            ("retrosynthesis", None) => TaskKind::Retrosynthesis,
            ("reagent_selection", Some(k)) => TaskKind::ReagentSelection(match k {
                "reactant" => ReagentKind::Reactant,
                "solvent" => ReagentKind::Solvent,
                "ligand" => ReagentKind::Ligand,
                _ => return Err(unknown()),
            }),
            _ => return Err(unknown()),
        })
    }
}

impl Serialize for TaskKind {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TaskKind {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub const DEFAULT_SAMPLE_SIZE: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkTask {
    pub kind: TaskKind,
    pub dataset_path: PathBuf,
    #[serde(default = "default_sample_size")]
    pub sample_size: usize,
    #[serde(default)]
    pub seed: u64,
    /// Falls back to [`TaskKind::default_template`].
    #[serde(default)]
    pub prompt_template: Option<String>,
    /// Falls back to every metric of the kind.
    #[serde(default)]
    pub metric_set: Vec<String>,
    /// Exemplars prepended to each prompt, drawn from `train_path`.
    #[serde(default)]
    pub shots: usize,
    #[serde(default)]
    pub train_path: Option<PathBuf>,
}

fn default_sample_size() -> usize {
    DEFAULT_SAMPLE_SIZE
}

impl BenchmarkTask {
    pub fn new(kind: TaskKind, dataset_path: impl Into<PathBuf>) -> Self {
        BenchmarkTask {
            kind,
            dataset_path: dataset_path.into(),
            sample_size: DEFAULT_SAMPLE_SIZE,
            seed: 0,
            prompt_template: None,
            metric_set: Vec::new(),
            shots: 0,
            train_path: None,
        }
    }

    pub fn template(&self) -> &str {
        self.prompt_template.as_deref().unwrap_or_else(|| self.kind.default_template())
    }

    /// Requested metrics, validated against the kind.
    pub fn metrics(&self) -> Result<Vec<String>, TaskError> {
        let all = self.kind.metrics();
        if self.metric_set.is_empty() {
            return Ok(all.iter().map(|m| m.to_string()).collect());
        }
        for m in &self.metric_set {
            if !all.contains(&m.as_str()) {
                return Err(TaskError::InvalidMetric {
                    kind: self.kind.to_string(),
                    metric: m.clone(),
                });
            }
        }
        Ok(self.metric_set.clone())
    }
}
