//! Settings shared by the subcommands: command-line flags, then an optional
//! TOML file, then built-in defaults.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Deserialize;

use nisb::instance::WeightSpec;
use nisb::pareto::ReferenceMode;
use nisb::pipeline::{InstanceSpec, WeightSelection};
use nisb::solver::{SolverConfig, Variant};

#[derive(Debug, Default, Clone, Args, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Settings {
    /// Read the instance from this file instead of generating one.
    #[arg(long)]
    pub instance: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub density: Option<f64>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Generate a correlated three-objective instance with this target correlation.
    #[arg(long, allow_hyphen_values = true)]
    pub target_rho: Option<f64>,
    /// Edge weight distribution of uniform instances, `int:LO:HI` or `real:LO:HI`.
    #[arg(long)]
    pub edge_weights: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub variant: Option<String>,
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub batch: Option<usize>,
    #[arg(long)]
    pub init_scale: Option<f64>,
    /// Interior weight vectors: a count, or `res:H` for a lattice resolution.
    #[arg(long)]
    pub weights: Option<String>,
    #[arg(long)]
    pub runs: Option<usize>,
    /// Reference point: `exact` or `sampled:COUNT`.
    #[arg(long = "ref")]
    #[serde(rename = "ref")]
    pub reference: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub checkpoints: Option<usize>,
    /// Worker threads; defaults to NISB_THREADS, then to the number of cores.
    #[arg(long, env = "NISB_THREADS")]
    pub threads: Option<usize>,
    /// TOML file with defaults for any of these flags.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident; $($field:ident),*) => {
        $( if $dst.$field.is_none() { $dst.$field = $src.$field.clone(); } )*
    };
}

impl Settings {
    /// Fills every flag left unset from the config file, if one was given.
    pub fn resolve(mut self) -> Result<Self> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let file = read_file(&path)?;
        overlay!(self, file; instance, n, density, k, target_rho, edge_weights, seed, variant, iters, dt,
            alpha, batch, init_scale, weights, runs, reference, out, checkpoints, threads);
        Ok(self)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn instance_spec(&self) -> Result<InstanceSpec> {
        if let Some(path) = &self.instance {
            if self.n.is_some() || self.target_rho.is_some() {
                bail!("--instance cannot be combined with generation flags");
            }
            return Ok(InstanceSpec::File { path: path.clone() });
        }
        let n = self.n.unwrap_or(10);
        let density = self
            .density
            .unwrap_or(if self.target_rho.is_some() { 1.0 } else { 0.5 });
        if let Some(target_rho) = self.target_rho {
            if self.k.is_some_and(|k| k != 3) {
                bail!("correlated instances have K = 3");
            }
            return Ok(InstanceSpec::Correlated {
                n,
                density,
                target_rho,
                seed: self.seed(),
            });
        }
        let weights = match &self.edge_weights {
            Some(s) => s.parse::<WeightSpec>()?,
            None => WeightSpec::default(),
        };
        Ok(InstanceSpec::Uniform {
            n,
            density,
            k: self.k.unwrap_or(3),
            weights,
            seed: self.seed(),
        })
    }

    pub fn solver(&self) -> Result<SolverConfig> {
        let d = SolverConfig::default();
        let variant = match &self.variant {
            Some(v) => v.parse::<Variant>()?,
            None => d.variant,
        };
        let config = SolverConfig {
            variant,
            n_iterations: self.iters.unwrap_or(d.n_iterations),
            dt: self.dt.unwrap_or(d.dt),
            a0: d.a0,
            alpha: self.alpha.unwrap_or(d.alpha),
            batch_size: self.batch.unwrap_or(d.batch_size),
            init_scale: self.init_scale.unwrap_or(d.init_scale),
            seed: self.seed(),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn weight_selection(&self) -> Result<WeightSelection> {
        Ok(match &self.weights {
            Some(s) => s.parse()?,
            None => WeightSelection::default(),
        })
    }

    pub fn reference(&self) -> Result<Option<ReferenceMode>> {
        Ok(match &self.reference {
            Some(s) => Some(s.parse()?),
            None => None,
        })
    }

    pub fn runs(&self) -> usize {
        self.runs.unwrap_or(1)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }
}

fn read_file(path: &Path) -> Result<Settings> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
}
