//! Config file, flag merging and the error type that fixes exit codes.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use tsi_core::eval::EvalConfig;
use tsi_core::interp::Grammar;
use tsi_core::metrics::{SlotRules, TokenizerMode};
use tsi_core::synth::{GeneratorConfig, NoiseProfile, Vocab};
use tsi_core::{Error, Exec};

/// Operational failure, classified by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or malformed input: exit 2.
    Usage(String),
    /// Unreadable or unwritable file: exit 3.
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    /// Inputs that do not describe the same images: exit 4.
    Mismatch(String),
    /// Anything else, such as a corpus where no scene could be read: exit 1.
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Mismatch(_) => 4,
            CliError::Failed(_) => 1,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> CliError {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Core error read from `path`; parse errors get the file name.
    pub fn at(path: &Path, e: Error) -> CliError {
        match e {
            Error::Io(source) => CliError::io(path, source),
            Error::Parse { .. } | Error::Validation { .. } => {
                CliError::Usage(format!("{}: {e}", path.display()))
            }
            other => other.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(source) => CliError::Io {
                path: PathBuf::new(),
                source,
            },
            Error::ImageSetMismatch { .. } | Error::LengthMismatch { .. } => {
                CliError::Mismatch(e.to_string())
            }
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Mismatch(m) | CliError::Failed(m) => f.write_str(m),
            CliError::Io { path, source } if path.as_os_str().is_empty() => {
                write!(f, "I/O error: {source}")
            }
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Optional JSON config; flags given on the command line win.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub tokenizer: Option<TokenizerMode>,
    pub iou_thresh: Option<f64>,
    pub eval: Option<EvalConfig>,
    pub language: Option<String>,
    pub grammar: Option<PathBuf>,
    pub slot_rules: Option<PathBuf>,
    pub generator: Option<GeneratorConfig>,
    pub noise: Option<NoiseProfile>,
}

impl FileConfig {
    pub fn load(path: &Path) -> CliResult<FileConfig> {
        let text = read_text(path)?;
        let cfg: FileConfig = serde_json::from_str(&text).map_err(|e| {
            CliError::Usage(format!(
                "{}: line {}, column {}: {e}",
                path.display(),
                e.line(),
                e.column()
            ))
        })?;
        // Relative paths inside the file are relative to the file.
        let base = path.parent().unwrap_or(Path::new("."));
        Ok(FileConfig {
            grammar: cfg.grammar.map(|p| base.join(p)),
            slot_rules: cfg.slot_rules.map(|p| base.join(p)),
            ..cfg
        })
    }
}

/// Global flags as parsed.
#[derive(Debug, Clone, Default)]
pub struct GlobalFlags {
    pub seed: Option<u64>,
    pub config: Option<PathBuf>,
    pub workers: Option<usize>,
    pub tokenizer: Option<TokenizerMode>,
    pub iou_thresh: Option<f64>,
    pub stamp: bool,
}

/// Flags merged over the config file.
#[derive(Debug, Clone)]
pub struct Settings {
    pub file: FileConfig,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub tokenizer: TokenizerMode,
    pub eval: EvalConfig,
    pub stamp: bool,
}

impl Settings {
    pub fn resolve(flags: &GlobalFlags) -> CliResult<Settings> {
        let file = match &flags.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let mut eval = file.eval.unwrap_or_default();
        if let Some(t) = flags.iou_thresh.or(file.iou_thresh) {
            eval = EvalConfig::uniform(t);
        }
        eval.validate()?;
        let workers = flags.workers.or(file.workers);
        if workers == Some(0) {
            return Err(CliError::Usage("--workers must be at least 1".into()));
        }
        Ok(Settings {
            seed: flags.seed.or(file.seed),
            workers,
            tokenizer: flags.tokenizer.or(file.tokenizer).unwrap_or_default(),
            eval,
            stamp: flags.stamp,
            file,
        })
    }

    /// One worker runs the sequential path; otherwise rayon's global pool,
    /// sized by `--workers` when given.
    pub fn exec(&self) -> CliResult<Exec> {
        match self.workers {
            Some(1) => Ok(Exec::Sequential),
            #[cfg(feature = "parallel")]
            Some(n) => {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .map_err(|e| CliError::Failed(format!("thread pool: {e}")))?;
                Ok(Exec::Parallel)
            }
            #[cfg(not(feature = "parallel"))]
            Some(_) => Ok(Exec::Sequential),
            None => Ok(Exec::Parallel),
        }
    }

    pub fn require_seed(&self, command: &str) -> CliResult<u64> {
        self.seed.ok_or_else(|| {
            CliError::Usage(format!(
                "{command} needs a seed: pass --seed or set `seed` in the config"
            ))
        })
    }

    pub fn language<'a>(&'a self, flag: Option<&'a str>) -> &'a str {
        flag.or(self.file.language.as_deref()).unwrap_or("en")
    }

    /// `--grammar` file, else the config's, else the bundled one.
    pub fn grammar(&self, flag: Option<&Path>, language: &str) -> CliResult<Grammar> {
        match flag.or(self.file.grammar.as_deref()) {
            Some(p) => Grammar::from_json(&read_text(p)?).map_err(|e| CliError::at(p, e)),
            None => Ok(Grammar::bundled(language)?),
        }
    }

    /// `--slot-rules` file, else the config's, else rules for the bundled
    /// vocabulary of `grammar`.
    pub fn slot_rules(&self, flag: Option<&Path>, grammar: &Grammar) -> CliResult<SlotRules> {
        match flag.or(self.file.slot_rules.as_deref()) {
            Some(p) => SlotRules::from_json(&read_text(p)?).map_err(|e| CliError::at(p, e)),
            None => Ok(Vocab::bundled(grammar).slot_rules(grammar)?),
        }
    }
}

pub fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn ensure_dir(path: &Path) -> CliResult<()> {
    std::fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}
