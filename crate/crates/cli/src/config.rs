//! Declarative experiment configs. A config is a TOML table whose
//! `experiment` key picks the experiment; every other key overrides that
//! experiment's defaults, and unknown keys are rejected.

use std::collections::BTreeSet;
use std::fmt;

use clap::ValueEnum;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use critnls_core::dynamics::{Sign, SolverConfig};
use critnls_core::verify::data::DataSpec;
use critnls_core::verify::{
    default_exotic, AgreementConfig, DispersiveConfig, LittlewoodPaleyConfig, NonlinearConfig, PerturbationConfig, PropagatorConfig,
    ScatteringConfig, SmallDataConfig, StrichartzConfig,
};
use critnls_core::{GridMode, GridSpec};

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Solve,
    Propagator,
    Dispersive,
    LittlewoodPaley,
    Strichartz,
    ExoticStrichartz,
    NonlinearEstimate,
    SolverAgreement,
    SmallData,
    Lipschitz,
    Stability,
    Scattering,
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.to_possible_value().expect("no skipped variants").get_name())
    }
}

impl Experiment {
    fn parse(name: &str) -> Option<Experiment> {
        <Experiment as ValueEnum>::from_str(name, false).ok()
    }

    pub fn names() -> Vec<String> {
        Experiment::value_variants().iter().map(|e| e.to_string()).collect()
    }
}

/// A single Picard solve of one datum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    pub grid: GridSpec,
    pub data: DataSpec,
    pub sign: Sign,
    /// The datum is rescaled so that its free evolution has this `W` norm on `[0, horizon]`.
    pub w: f64,
    pub horizon: f64,
    pub solver: SolverConfig,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            grid: GridSpec { dim: 3, mode: GridMode::Radial, extent: 24.0, points: 256 },
            data: DataSpec::Gaussian { width: 1.0 },
            sign: Sign::Defocusing,
            w: 0.05,
            horizon: 0.5,
            solver: SolverConfig::default(),
        }
    }
}

macro_rules! configs {
    ($($variant:ident($ty:ty)),* $(,)?) => {
        /// A fully resolved experiment configuration.
        #[derive(Clone, Debug, PartialEq)]
        pub enum ExperimentConfig {
            $($variant($ty)),*
        }

        impl ExperimentConfig {
            pub fn experiment(&self) -> Experiment {
                match self {
                    $(Self::$variant(_) => Experiment::$variant),*
                }
            }

            fn body(&self) -> Result<Table> {
                match self {
                    $(Self::$variant(c) => to_table(c)),*
                }
            }

            fn from_table(e: Experiment, t: Table, origin: &str) -> Result<Self> {
                match e {
                    $(Experiment::$variant => Ok(Self::$variant(typed(t, origin)?))),*
                }
            }
        }
    };
}

configs! {
    Solve(SolveConfig),
    Propagator(PropagatorConfig),
    Dispersive(DispersiveConfig),
    LittlewoodPaley(LittlewoodPaleyConfig),
    Strichartz(StrichartzConfig),
    ExoticStrichartz(StrichartzConfig),
    NonlinearEstimate(NonlinearConfig),
    SolverAgreement(AgreementConfig),
    SmallData(SmallDataConfig),
    Lipschitz(PerturbationConfig),
    Stability(PerturbationConfig),
    Scattering(ScatteringConfig),
}

fn config_error(origin: &str, message: impl Into<String>) -> CliError {
    CliError::Config { origin: origin.into(), message: message.into() }
}

fn to_table<T: Serialize>(c: &T) -> Result<Table> {
    match Value::try_from(c) {
        Ok(Value::Table(t)) => Ok(t),
        Ok(_) => Err(config_error("defaults", "config did not serialize to a table")),
        Err(e) => Err(config_error("defaults", e.to_string())),
    }
}

fn typed<T: DeserializeOwned>(t: Table, origin: &str) -> Result<T> {
    serde_path_to_error::deserialize(Value::Table(t)).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            config_error(origin, inner.to_string())
        } else {
            config_error(origin, format!("key `{path}`: {inner}"))
        }
    })
}

/// Overlay `over` on `base`. Tables merge key by key, except tagged ones
/// (with a `kind` key), which replace the default wholesale like arrays do.
fn merge(base: &mut Table, over: Table) {
    for (k, v) in over {
        if let (Some(Value::Table(b)), Value::Table(o)) = (base.get_mut(&k), &v) {
            if !o.contains_key("kind") {
                merge(b, o.clone());
                continue;
            }
        }
        base.insert(k, v);
    }
}

/// The experiment named by a config's `experiment` key.
pub fn experiment_of(text: &str, origin: &str) -> Result<Experiment> {
    let table: Table = toml::from_str(text).map_err(|e| config_error(origin, e.to_string()))?;
    experiment_key(&table, origin)
}

fn experiment_key(table: &Table, origin: &str) -> Result<Experiment> {
    match table.get("experiment") {
        Some(Value::String(s)) => Experiment::parse(s).ok_or_else(|| {
            config_error(origin, format!("key `experiment`: unknown experiment `{s}`, expected one of {}", Experiment::names().join(", ")))
        }),
        Some(_) => Err(config_error(origin, "key `experiment` must be a string")),
        None => Err(config_error(origin, "missing key `experiment`")),
    }
}

fn seeds_upto(k: usize) -> Vec<u64> {
    (1..=k as u64).collect()
}

fn offset_data(d: &mut DataSpec, off: u64) {
    if let DataSpec::Random { seed, .. } = d {
        *seed = seed.wrapping_add(off);
    }
}

/// Keep the items on an `n`-dimensional grid; an empty result is an error
/// listing the dimensions that were on offer.
fn keep_dim<T>(items: &mut Vec<T>, dim: impl Fn(&T) -> usize, n: usize, e: Experiment) -> Result<()> {
    let offered: BTreeSet<usize> = items.iter().map(&dim).collect();
    items.retain(|x| dim(x) == n);
    if items.is_empty() {
        let offered: Vec<String> = offered.iter().map(|d| d.to_string()).collect();
        return Err(CliError::Usage(format!(
            "{e} has no grid with n = {n} (configured: {}); describe one in a config file",
            offered.join(", ")
        )));
    }
    Ok(())
}

fn radial(dim: usize, extent: f64, points: usize) -> GridSpec {
    GridSpec { dim, mode: GridMode::Radial, extent, points }
}

impl ExperimentConfig {
    pub fn default_for(e: Experiment) -> ExperimentConfig {
        match e {
            Experiment::Solve => Self::Solve(SolveConfig::default()),
            Experiment::Propagator => Self::Propagator(PropagatorConfig::default()),
            Experiment::Dispersive => Self::Dispersive(DispersiveConfig::default()),
            Experiment::LittlewoodPaley => Self::LittlewoodPaley(LittlewoodPaleyConfig::default()),
            Experiment::Strichartz => Self::Strichartz(StrichartzConfig::default()),
            Experiment::ExoticStrichartz => Self::ExoticStrichartz(default_exotic()),
            Experiment::NonlinearEstimate => Self::NonlinearEstimate(NonlinearConfig::default()),
            Experiment::SolverAgreement => Self::SolverAgreement(AgreementConfig::default()),
            Experiment::SmallData => Self::SmallData(SmallDataConfig::default()),
            Experiment::Lipschitz => Self::Lipschitz(PerturbationConfig::lipschitz_only()),
            Experiment::Stability => Self::Stability(PerturbationConfig::default()),
            Experiment::Scattering => Self::Scattering(ScatteringConfig::default()),
        }
    }

    /// Parse a config file's text; `origin` names it in diagnostics.
    pub fn parse(text: &str, origin: &str) -> Result<ExperimentConfig> {
        let mut table: Table = toml::from_str(text).map_err(|e| config_error(origin, e.to_string()))?;
        let e = experiment_key(&table, origin)?;
        table.remove("experiment");
        let mut base = Self::default_for(e).body()?;
        merge(&mut base, table);
        Self::from_table(e, base, origin)
    }

    /// The effective config, in the same format `parse` reads.
    pub fn to_toml(&self) -> Result<String> {
        let body = toml::to_string(&self.body()?).map_err(|e| config_error("config", e.to_string()))?;
        Ok(format!("experiment = \"{}\"\n{body}", self.experiment()))
    }

    /// Every grid the run will build.
    pub fn grids(&self) -> Vec<GridSpec> {
        match self {
            Self::Solve(c) => vec![c.grid],
            Self::Propagator(c) => c.grids.clone(),
            Self::Dispersive(c) => c.dims.iter().map(|&n| radial(n, c.radius, c.points)).collect(),
            Self::LittlewoodPaley(c) => c.dims.iter().map(|&n| radial(n, c.radius, c.points)).collect(),
            Self::Strichartz(c) | Self::ExoticStrichartz(c) => c.grids.clone(),
            Self::NonlinearEstimate(c) => {
                c.dims.iter().flat_map(|&n| [radial(n, c.radius, c.points), radial(n, c.para.radius, c.para.points)]).collect()
            }
            Self::SolverAgreement(c) => c.cases.iter().map(|k| k.grid).collect(),
            Self::SmallData(c) => c.cases.iter().map(|k| k.grid).collect(),
            Self::Lipschitz(c) | Self::Stability(c) => c.cases.iter().map(|k| k.grid).collect(),
            Self::Scattering(c) => vec![c.grid],
        }
    }

    pub fn validate(&self) -> Result<()> {
        for g in self.grids() {
            g.validate()?;
        }
        Ok(())
    }

    /// Replace the seed list by `1..=k`.
    pub fn set_seed_count(&mut self, k: usize) -> Result<()> {
        if k == 0 {
            return Err(CliError::Usage("--seeds must be at least 1".into()));
        }
        match self {
            Self::LittlewoodPaley(c) => c.seeds = seeds_upto(k),
            Self::Strichartz(c) | Self::ExoticStrichartz(c) => c.seeds = seeds_upto(k),
            Self::NonlinearEstimate(c) => c.seeds = seeds_upto(k),
            other => return Err(CliError::Usage(format!("{} has no seed list; --seeds does not apply", other.experiment()))),
        }
        Ok(())
    }

    /// Shift every random seed by `off`.
    pub fn offset_seeds(&mut self, off: u64) {
        let shift = |s: &mut Vec<u64>| s.iter_mut().for_each(|x| *x = x.wrapping_add(off));
        match self {
            Self::Solve(c) => offset_data(&mut c.data, off),
            Self::Propagator(_) | Self::Dispersive(_) => {}
            Self::LittlewoodPaley(c) => shift(&mut c.seeds),
            Self::Strichartz(c) | Self::ExoticStrichartz(c) => shift(&mut c.seeds),
            Self::NonlinearEstimate(c) => {
                shift(&mut c.seeds);
                shift(&mut c.para.seeds);
            }
            Self::SolverAgreement(c) => c.cases.iter_mut().for_each(|k| offset_data(&mut k.data, off)),
            Self::SmallData(c) => c.cases.iter_mut().for_each(|k| offset_data(&mut k.data, off)),
            Self::Lipschitz(c) | Self::Stability(c) => c.cases.iter_mut().for_each(|k| {
                offset_data(&mut k.base, off);
                offset_data(&mut k.direction, off);
            }),
            Self::Scattering(c) => {
                c.data.iter_mut().for_each(|d| offset_data(d, off));
                offset_data(&mut c.direction, off);
            }
        }
    }

    /// Restrict the run to dimension `n`.
    pub fn restrict_dim(&mut self, n: usize) -> Result<()> {
        radial(n, 16.0, 64).validate()?;
        let e = self.experiment();
        match self {
            Self::Solve(c) => c.grid.dim = n,
            Self::Scattering(c) => c.grid.dim = n,
            Self::Propagator(c) => {
                let mut pairs: Vec<(GridSpec, f64)> = c.grids.iter().copied().zip(c.widths.iter().copied()).collect();
                keep_dim(&mut pairs, |p| p.0.dim, n, e)?;
                (c.grids, c.widths) = pairs.into_iter().unzip();
            }
            Self::Dispersive(c) => c.dims = vec![n],
            Self::LittlewoodPaley(c) => c.dims = vec![n],
            Self::NonlinearEstimate(c) => c.dims = vec![n],
            Self::Strichartz(c) | Self::ExoticStrichartz(c) => keep_dim(&mut c.grids, |g| g.dim, n, e)?,
            Self::SolverAgreement(c) => keep_dim(&mut c.cases, |k| k.grid.dim, n, e)?,
            Self::SmallData(c) => keep_dim(&mut c.cases, |k| k.grid.dim, n, e)?,
            Self::Lipschitz(c) | Self::Stability(c) => keep_dim(&mut c.cases, |k| k.grid.dim, n, e)?,
        }
        Ok(())
    }
}
