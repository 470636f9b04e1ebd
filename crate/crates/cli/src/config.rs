use crate::{CliError, LogLevel};
use chembench_harness::{BenchmarkTask, ModelEndpointConfig};
use serde::Deserialize;
use std::path::{Path, PathBuf};

pub const CONFIG_ENV: &str = "CHEMBENCH_CONFIG";

/// Contents of the TOML configuration file. Every key is optional; a flag
/// given on the command line wins over the file.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub log_level: Option<LogLevel>,
    pub endpoint: Option<ModelEndpointConfig>,
    pub bench: BenchSection,
    pub split: SplitSection,
    pub build: BuildSection,
    pub mix: MixSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchSection {
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub shots: Option<usize>,
    pub out: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub tasks: Vec<BenchmarkTask>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSection {
    pub fraction: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BuildSection {
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MixSection {
    pub ratio: Option<String>,
    pub seed: Option<u64>,
    pub allow_upsample: Option<bool>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    /// Loads `--config`, else `CHEMBENCH_CONFIG`, else nothing.
    pub fn resolve(flag: Option<&Path>) -> Result<Self, CliError> {
        let path = match flag {
            Some(p) => p.to_path_buf(),
            None => match std::env::var_os(CONFIG_ENV) {
                Some(p) if !p.is_empty() => PathBuf::from(p),
                _ => return Ok(FileConfig::default()),
            },
        };
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections() {
        let c = FileConfig::parse(
            r#"
log_level = "info"
[endpoint]
base_url = "http://localhost:9000/v1"
model_name = "m"
[bench]
n = 50
[[bench.tasks]]
kind = "s2mf"
dataset_path = "d.jsonl"
[split]
fraction = 0.9
"#,
        )
        .unwrap();
        assert_eq!(c.log_level, Some(LogLevel::Info));
        let e = c.endpoint.unwrap();
        assert_eq!(e.model_name, "m");
        assert_eq!(e.max_tokens, 512);
        assert_eq!(c.bench.n, Some(50));
        assert_eq!(c.bench.tasks[0].sample_size, 100);
        assert_eq!(c.split.fraction, Some(0.9));
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(matches!(FileConfig::parse("[split]\nfractoin = 0.5\n"), Err(CliError::Config(_))));
    }
}
