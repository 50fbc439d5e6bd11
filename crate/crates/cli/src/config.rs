//! Run configuration: a flat `key = value` file overlaid by command-line flags.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use vpm_core::experiments::{ExperimentConfig, KMaxRule, QuadOrder, Thresholds};
use vpm_core::function_space::{default_corpus_ids, PNorm};
use vpm_core::special_fn::Dimension;

pub const OUT_DIR_ENV: &str = "VPM_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "vpm-out";

const KEYS: [&str; 11] = [
    "d",
    "n_list",
    "p_list",
    "corpus",
    "quadrature_order",
    "theta_grid_size",
    "seed",
    "out_dir",
    "n_max",
    "k_cap",
    "k_max",
];

/// A configuration problem; always reported with exit code 2.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<vpm_core::error::VpmError> for ConfigError {
    fn from(e: vpm_core::error::VpmError) -> Self {
        ConfigError(e.to_string())
    }
}

type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub experiment: ExperimentConfig,
    pub out_dir: PathBuf,
}

/// Parse a flat config file. `#` and `;` start comments, `[section]` lines are
/// ignored, later assignments win.
pub fn parse_file_text(text: &str, origin: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if line.starts_with('[') && line.ends_with(']') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError(format!("{origin}:{}: expected `key = value`, got `{line}`", i + 1)));
        };
        let key = key.trim().replace('-', "_");
        if !is_known_key(&key) {
            return Err(ConfigError(format!("{origin}:{}: unknown config key `{key}`", i + 1)));
        }
        out.insert(key, value.trim().trim_matches('"').to_string());
    }
    Ok(out)
}

pub fn is_known_key(key: &str) -> bool {
    KEYS.contains(&key) || Thresholds::KEYS.contains(&key)
}

pub fn read_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read config file {}: {e}", path.display())))?;
    parse_file_text(&text, &path.display().to_string())
}

fn list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| ConfigError(format!("`{key}`: cannot parse `{value}`")))
}

/// Build a validated configuration from key/value pairs (file values already
/// overlaid by flags). `env_out` is the value of `VPM_OUT_DIR`, if set.
pub fn resolve(values: &BTreeMap<String, String>, env_out: Option<String>) -> Result<RunConfig> {
    let mut cfg = ExperimentConfig::default();
    let mut corpus_given = false;
    let mut out_dir = None;
    for (key, value) in values {
        match key.as_str() {
            "d" => cfg.d = Dimension::new(number(key, value)?)?,
            "n_list" => cfg.n_list = list(value).map(|s| number(key, s)).collect::<Result<_>>()?,
            "p_list" => {
                cfg.p_list = list(value)
                    .map(|s| {
                        let p: PNorm = s.parse()?;
                        match p {
                            PNorm::Inf => Ok(p),
                            PNorm::Finite(x) if x == 1.0 || x == 2.0 => Ok(p),
                            _ => Err(ConfigError(format!("`p_list`: p must be one of 1, 2, inf, got `{s}`"))),
                        }
                    })
                    .collect::<Result<_>>()?
            }
            "corpus" => {
                cfg.corpus = list(value).map(String::from).collect();
                corpus_given = true;
            }
            "quadrature_order" => cfg.quadrature_order = QuadOrder::parse(value)?,
            "theta_grid_size" => cfg.theta_grid_size = number(key, value)?,
            "seed" => cfg.seed = number(key, value)?,
            "out_dir" => out_dir = Some(PathBuf::from(value)),
            "n_max" => cfg.n_max = number(key, value)?,
            "k_cap" => cfg.k_cap = Some(number(key, value)?),
            "k_max" => {
                cfg.k_max_rule = match value.as_str() {
                    "sqrt" => KMaxRule::Sqrt,
                    v => KMaxRule::Fixed(number(key, v)?),
                }
            }
            other => {
                if !cfg.thresholds.set(other, number(other, value)?) {
                    return Err(ConfigError(format!("unknown config key `{other}`")));
                }
            }
        }
    }
    if !corpus_given {
        cfg.corpus = default_corpus_ids(cfg.seed);
    }
    cfg.validate()?;
    let out_dir = out_dir
        .or_else(|| env_out.filter(|s| !s.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    Ok(RunConfig { experiment: cfg, out_dir })
}

/// Create the output directory and confirm a file can be written in it.
pub fn ensure_writable(dir: &Path) -> Result<()> {
    let fail = |e: std::io::Error| ConfigError(format!("output directory {} is not writable: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(fail)?;
    let probe = dir.join(format!(".vpm-probe-{}", std::process::id()));
    fs::write(&probe, b"").map_err(fail)?;
    let _ = fs::remove_file(probe);
    Ok(())
}
