//! Configuration loading, experiment dispatch and CSV/JSON output for the
//! `aerocell` command-line tool.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use aerocell_core::experiments::ecdf_per_sample;
use aerocell_core::{
    run_cnc, run_shared, ArrayMode, CncResult, ExperimentConfig, Scenario, SharedResult,
};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

pub const ASSOCIATION_CSV: &str = "association.csv";
pub const SNR_CDF_CSV: &str = "snr_cdf.csv";
pub const SUMRATE_CDF_CSV: &str = "sumrate_cdf.csv";
pub const MANIFEST_JSON: &str = "manifest.json";

pub const ASSOCIATION_HEADER: &str = "altitude_m,cell_id,probability";
pub const SNR_CDF_HEADER: &str = "mode,altitude_m,snr_db,cdf";
pub const SUMRATE_CDF_HEADER: &str = "mode,n_uav,sum_rate_mbps,cdf";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] aerocell_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    /// Process exit status: 2 for bad input, 3 for I/O, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(aerocell_core::Error::Validation { .. })
            | CliError::Core(aerocell_core::Error::InvalidArgument(_)) => 2,
            CliError::Io { .. } => 3,
            _ => 1,
        }
    }

    fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Values given on the command line; each one overrides the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub drops: Option<usize>,
    pub mode: Option<ArrayMode>,
}

/// Parses a JSON or TOML document (chosen by extension, `.toml` for TOML)
/// and merges it over the defaults of `scenario`.
pub fn load_config(
    scenario: Scenario,
    path: Option<&Path>,
    overrides: &Overrides,
) -> Result<ExperimentConfig> {
    let doc = match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            let is_toml = p
                .extension()
                .is_some_and(|e| e.eq_ignore_ascii_case("toml"));
            Some((text, is_toml))
        }
        None => None,
    };
    let (text, is_toml) = doc.unwrap_or_default();
    parse_config(scenario, &text, is_toml, overrides)
}

/// Parses configuration text. Empty text yields the scenario defaults.
pub fn parse_config(
    scenario: Scenario,
    text: &str,
    is_toml: bool,
    overrides: &Overrides,
) -> Result<ExperimentConfig> {
    let file: Map<String, Value> = if text.trim().is_empty() {
        Map::new()
    } else if is_toml {
        let table: toml::Table =
            toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        serde_json::to_value(table)
            .map_err(|e| CliError::Config(e.to_string()))?
            .as_object()
            .cloned()
            .unwrap_or_default()
    } else {
        match serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))? {
            Value::Object(m) => m,
            _ => return Err(CliError::Config("top level must be an object".into())),
        }
    };

    let defaults = ExperimentConfig::defaults(scenario);
    let Value::Object(mut merged) =
        serde_json::to_value(&defaults).map_err(|e| CliError::Runtime(e.to_string()))?
    else {
        unreachable!("config serializes to an object");
    };

    let unknown: Vec<&str> = file
        .keys()
        .filter(|k| !merged.contains_key(*k))
        .map(String::as_str)
        .collect();
    if !unknown.is_empty() {
        return Err(CliError::Config(format!(
            "unknown keys: {}",
            unknown.join(", ")
        )));
    }
    merged.extend(file);

    let mut config: ExperimentConfig = serde_json::from_value(Value::Object(merged))
        .map_err(|e| CliError::Config(e.to_string()))?;
    if config.scenario != scenario {
        return Err(CliError::Config(format!(
            "file declares scenario `{}` but the `{scenario}` command was run",
            config.scenario
        )));
    }
    if let Some(seed) = overrides.seed {
        config.master_seed = seed;
    }
    if let Some(drops) = overrides.drops {
        config.drops = drops;
    }
    if let Some(mode) = overrides.mode {
        config.mode = mode;
    }
    config.validate()?;
    if !config.rician_k_db.is_finite() {
        return Err(aerocell_core::Error::Validation {
            field: "rician_k_db",
            reason: "must be finite to be recorded in the manifest".into(),
        }
        .into());
    }
    Ok(config)
}

/// Pretty JSON form of a config, accepted back by [`parse_config`].
pub fn serialize_config(config: &ExperimentConfig) -> Result<String> {
    serde_json::to_string_pretty(config).map_err(|e| CliError::Runtime(e.to_string()))
}

/// Record of a completed run; written as `manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    #[serde(flatten)]
    pub config: ExperimentConfig,
    pub version: String,
    pub outputs: Vec<String>,
    pub duration_seconds: f64,
}

/// Round-trip decimal form (17 significant digits).
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    let file = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(contents.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| CliError::io(&path, e))
}

pub fn association_csv(result: &CncResult) -> String {
    let mut out = String::from(ASSOCIATION_HEADER);
    out.push('\n');
    for alt in &result.per_altitude {
        for (i, p) in alt.association.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{}\n",
                fmt_f64(alt.altitude_m),
                i + 1,
                fmt_f64(*p)
            ));
        }
    }
    out
}

pub fn snr_cdf_csv(result: &CncResult) -> Result<String> {
    let mut out = String::from(SNR_CDF_HEADER);
    out.push('\n');
    for alt in &result.per_altitude {
        for (x, p) in ecdf_per_sample(&alt.snr_db)? {
            out.push_str(&format!(
                "{},{},{},{}\n",
                result.mode,
                fmt_f64(alt.altitude_m),
                fmt_f64(x),
                fmt_f64(p)
            ));
        }
    }
    Ok(out)
}

pub fn sumrate_cdf_csv(result: &SharedResult) -> Result<String> {
    let mut out = String::from(SUMRATE_CDF_HEADER);
    out.push('\n');
    for group in &result.per_n_uav {
        let mbps: Vec<f64> = group.sum_rate_bps.iter().map(|r| r / 1e6).collect();
        for (x, p) in ecdf_per_sample(&mbps)? {
            out.push_str(&format!(
                "{},{},{},{}\n",
                result.mode,
                group.n_uav,
                fmt_f64(x),
                fmt_f64(p)
            ));
        }
    }
    Ok(out)
}

/// Runs the experiment selected by `config.scenario` and writes its CSVs and
/// then the manifest into `out_dir`.
pub fn run(config: &ExperimentConfig, out_dir: &Path) -> Result<RunManifest> {
    let start = Instant::now();
    fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;

    let files: Vec<(&str, String)> = match config.scenario {
        Scenario::Cnc => {
            let result = run_cnc(config)?;
            vec![
                (ASSOCIATION_CSV, association_csv(&result)),
                (SNR_CDF_CSV, snr_cdf_csv(&result)?),
            ]
        }
        Scenario::Shared => {
            let result = run_shared(config)?;
            vec![(SUMRATE_CDF_CSV, sumrate_cdf_csv(&result)?)]
        }
    };
    for (name, contents) in &files {
        write_file(out_dir, name, contents)?;
    }

    let manifest = RunManifest {
        config: config.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        outputs: files.iter().map(|(name, _)| name.to_string()).collect(),
        duration_seconds: start.elapsed().as_secs_f64(),
    };
    let json =
        serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Runtime(e.to_string()))?;
    write_file(out_dir, MANIFEST_JSON, &(json + "\n"))?;
    Ok(manifest)
}

/// Like [`run`], on a dedicated pool of `threads` workers (0 = all cores).
pub fn run_with_threads(
    config: &ExperimentConfig,
    out_dir: &Path,
    threads: usize,
) -> Result<RunManifest> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    pool.install(|| run(config, out_dir))
}
