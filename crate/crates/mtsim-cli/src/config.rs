//! TOML experiment configuration: one optional section per subcommand,
//! mirroring the flags. Command-line flags override file values.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub cutoffs: Option<CutoffsSection>,
    pub decide: Option<DecideSection>,
    pub estimate: Option<EstimateSection>,
    pub sweep: Option<SweepSection>,
    pub limit: Option<LimitSection>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutoffsSection {
    pub family: Option<String>,
    pub n: Option<usize>,
    pub alpha: Option<f64>,
    pub check_validity: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecideSection {
    pub procedure: Option<String>,
    pub alpha: Option<f64>,
    pub pvalues: Option<PathBuf>,
    pub cutoffs: Option<PathBuf>,
    pub kind: Option<String>,
    pub check_validity: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateSection {
    pub procedure: Option<String>,
    pub metric: Option<String>,
    pub n: Option<usize>,
    pub rho: Option<f64>,
    pub matrix: Option<PathBuf>,
    pub alpha: Option<f64>,
    pub n_false: Option<usize>,
    pub mu: Option<f64>,
    pub replicates: Option<u64>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub procedures: Option<Vec<String>>,
    pub metric: Option<String>,
    pub n: Option<Vec<usize>>,
    pub rho: Option<Vec<f64>>,
    pub alpha: Option<Vec<f64>>,
    pub n_false: Option<usize>,
    pub fraction: Option<f64>,
    pub mu: Option<f64>,
    pub replicates: Option<u64>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitSection {
    pub alpha: Option<f64>,
    pub rho: Option<f64>,
    pub grid_points: Option<usize>,
    pub tolerance: Option<f64>,
}

/// Loads the config file, or an empty default when no path was given.
pub fn load(path: Option<&Path>) -> CliResult<ConfigFile> {
    let Some(path) = path else {
        return Ok(ConfigFile::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text)
        .map_err(|e| CliError::usage(format!("cannot parse {}: {e}", path.display())))
}

/// `flag.or(file)`, then a usage error naming the missing flag.
pub fn require<T>(flag: Option<T>, file: Option<T>, name: &str) -> CliResult<T> {
    flag.or(file)
        .ok_or_else(|| CliError::usage(format!("missing required value for --{name}")))
}

/// Parses a comma-separated list flag into typed values.
pub fn parse_list<T: std::str::FromStr>(raw: &str, name: &str) -> CliResult<Vec<T>> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|_| CliError::usage(format!("--{name}: cannot parse `{s}`")))
        })
        .collect()
}
