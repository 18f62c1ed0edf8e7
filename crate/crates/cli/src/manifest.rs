use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use critnls_core::spectral::BUMP_PROFILE_ID;

use crate::config::{experiment_of, Experiment, ExperimentConfig};
use crate::error::{io, CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Solve,
    Check,
    Stability,
    Scatter,
    Report,
}

impl Command {
    fn accepts(self, e: Experiment) -> bool {
        match self {
            Command::Solve => e == Experiment::Solve,
            Command::Check => e != Experiment::Solve,
            Command::Stability => matches!(e, Experiment::Stability | Experiment::Lipschitz),
            Command::Scatter => e == Experiment::Scattering,
            Command::Report => false,
        }
    }

    fn default_experiment(self) -> Option<Experiment> {
        match self {
            Command::Solve => Some(Experiment::Solve),
            Command::Stability => Some(Experiment::Stability),
            Command::Scatter => Some(Experiment::Scattering),
            Command::Check | Command::Report => None,
        }
    }
}

/// Code version and the Littlewood-Paley profile id.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VersionStamp {
    pub package: String,
    pub bump: String,
}

impl VersionStamp {
    pub fn current() -> VersionStamp {
        VersionStamp { package: env!("CARGO_PKG_VERSION").into(), bump: BUMP_PROFILE_ID.into() }
    }
}

/// Everything that determines a run's artifacts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub command: Command,
    pub experiment: Experiment,
    pub config: Option<PathBuf>,
    /// SHA-256 of the config file's bytes.
    pub config_sha256: Option<String>,
    pub out: PathBuf,
    /// Added to every random seed of the config.
    pub seed: u64,
    /// Restrict the run to this dimension.
    pub dim: Option<usize>,
    /// Replace the seed list by `1..=seeds`.
    pub seeds: Option<usize>,
    pub version: VersionStamp,
}

/// What the user asked for; [`RunManifest::resolve`] fills in the rest.
#[derive(Clone, Debug, Default)]
pub struct Request {
    pub experiment: Option<Experiment>,
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub dim: Option<usize>,
    pub seeds: Option<usize>,
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(io(path))
}

fn digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn utf8(path: &Path, bytes: Vec<u8>) -> Result<String> {
    String::from_utf8(bytes).map_err(|_| CliError::Config { origin: path.display().to_string(), message: "not UTF-8".into() })
}

impl RunManifest {
    /// Pin down the experiment and output directory. Without `--out` the
    /// directory is `out_root/<name>`, named after the request, so that
    /// repeating a request lands on the same directory.
    pub fn resolve(command: Command, req: Request, out_root: &Path) -> Result<RunManifest> {
        let (from_file, sha) = match &req.config {
            Some(p) => {
                let bytes = read(p)?;
                let sha = digest(&bytes);
                (Some(experiment_of(&utf8(p, bytes)?, &p.display().to_string())?), Some(sha))
            }
            None => (None, None),
        };
        let experiment = match (from_file, req.experiment) {
            (Some(a), Some(b)) if a != b => {
                return Err(CliError::Usage(format!("--experiment {b} disagrees with the config's experiment {a}")))
            }
            (Some(e), _) | (None, Some(e)) => e,
            (None, None) => {
                command.default_experiment().ok_or_else(|| CliError::Usage("name an experiment with --experiment or --config".into()))?
            }
        };
        if !command.accepts(experiment) {
            return Err(CliError::Usage(format!("experiment {experiment} does not belong to this command")));
        }
        let out = match req.out {
            Some(o) => o,
            None => {
                let mut name = match &req.config {
                    Some(p) => p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| experiment.to_string()),
                    None => experiment.to_string(),
                };
                if let Some(n) = req.dim {
                    name += &format!("-n{n}");
                }
                if let Some(k) = req.seeds {
                    name += &format!("-k{k}");
                }
                if req.seed != 0 {
                    name += &format!("-seed{}", req.seed);
                }
                out_root.join(name)
            }
        };
        Ok(RunManifest {
            command,
            experiment,
            config: req.config,
            config_sha256: sha,
            out,
            seed: req.seed,
            dim: req.dim,
            seeds: req.seeds,
            version: VersionStamp::current(),
        })
    }

    /// The effective config: file or defaults, then the overrides.
    pub fn load_config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => {
                let bytes = read(p)?;
                if self.config_sha256.as_deref() != Some(digest(&bytes).as_str()) {
                    return Err(CliError::Usage(format!("{} changed since the manifest was made", p.display())));
                }
                ExperimentConfig::parse(&utf8(p, bytes)?, &p.display().to_string())?
            }
            None => ExperimentConfig::default_for(self.experiment),
        };
        if cfg.experiment() != self.experiment {
            return Err(CliError::Usage(format!("config holds {} but the manifest names {}", cfg.experiment(), self.experiment)));
        }
        if let Some(n) = self.dim {
            cfg.restrict_dim(n)?;
        }
        if let Some(k) = self.seeds {
            cfg.set_seed_count(k)?;
        }
        cfg.offset_seeds(self.seed);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}
