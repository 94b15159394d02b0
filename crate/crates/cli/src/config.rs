//! On-disk experiment configuration.
//!
//! A config is a single JSON document with a `schema` version, a `scenario`
//! tag and the sections that scenario needs. Sections a scenario does not use
//! may be omitted; a missing required section is a hard error raised by the
//! scenario driver, not by deserialization, so the message can say which
//! scenario wanted it.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use sdsim_core::debye::DebyeParams;
use sdsim_core::initial_data::{
    gaussian, load_custom_csv, negative_energy_bump, InitialData, V0Mode,
};
use sdsim_core::stepper::SimConfig;
use sdsim_core::theory::TheoryConstants;
use sdsim_core::GridSpec;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Run,
    Sweep,
    VirialCheck,
    RescaleCheck,
    #[serde(rename = "gwp-trap-3d")]
    GwpTrap3d,
    #[serde(rename = "gwp-trap-4d")]
    GwpTrap4d,
    BlowupWindow,
    Regions,
    Negdata,
}

impl Scenario {
    /// The subcommand this scenario belongs to.
    pub fn subcommand(self) -> &'static str {
        match self {
            Scenario::Run => "run",
            Scenario::Sweep => "sweep",
            Scenario::VirialCheck => "virial-check",
            Scenario::RescaleCheck => "rescale-check",
            Scenario::GwpTrap3d | Scenario::GwpTrap4d => "gwp-trap",
            Scenario::BlowupWindow => "blowup-window",
            Scenario::Regions => "regions",
            Scenario::Negdata => "negdata",
        }
    }
}

/// Grid, physics and step control. Control fields are optional and fall back
/// to [`SimConfig::with_default_controls`] once the initial data is known.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub grid: GridSpec,
    pub debye: DebyeParams,
    pub dt_init: f64,
    pub t_end: f64,
    #[serde(default)]
    pub dt_min: Option<f64>,
    #[serde(default)]
    pub blowup_grad_threshold: Option<f64>,
    #[serde(default)]
    pub blowup_sup_threshold: Option<f64>,
    #[serde(default)]
    pub diag_every: Option<usize>,
    #[serde(default)]
    pub boundary_leak_tol: Option<f64>,
    #[serde(default)]
    pub hs_tracked: Option<Vec<u32>>,
}

impl SimSection {
    pub fn to_sim_config(&self, data: &InitialData) -> Result<SimConfig> {
        let mut cfg =
            SimConfig::with_default_controls(self.grid, self.debye, self.dt_init, self.t_end, data);
        if let Some(x) = self.dt_min {
            cfg.dt_min = x;
        }
        if let Some(x) = self.blowup_grad_threshold {
            cfg.blowup_grad_threshold = x;
        }
        if let Some(x) = self.blowup_sup_threshold {
            cfg.blowup_sup_threshold = x;
        }
        if let Some(x) = self.diag_every {
            cfg.diag_every = x;
        }
        if let Some(x) = self.boundary_leak_tol {
            cfg.boundary_leak_tol = x;
        }
        if let Some(x) = &self.hs_tracked {
            cfg.hs_tracked = x.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn default_v0() -> V0Mode {
    V0Mode::MinusUSquared
}

/// How to build the initial data pair on the configured grid.
#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSpec {
    Gaussian {
        amplitude: f64,
        width: f64,
        #[serde(default = "default_v0")]
        v0: V0Mode,
    },
    NegativeEnergyBump {
        n_param: f64,
    },
    /// `coord,re_u,im_u,v` rows; the path is resolved relative to the config
    /// file so a config and its data travel together.
    CustomCsv {
        path: PathBuf,
    },
}

impl DataSpec {
    pub fn build(&self, grid: GridSpec, config_dir: &Path) -> Result<InitialData> {
        let data = match self {
            DataSpec::Gaussian {
                amplitude,
                width,
                v0,
            } => gaussian(grid, *amplitude, *width, *v0)?,
            DataSpec::NegativeEnergyBump { n_param } => negative_energy_bump(grid, *n_param)?,
            DataSpec::CustomCsv { path } => {
                let resolved = if path.is_absolute() {
                    path.clone()
                } else {
                    config_dir.join(path)
                };
                load_custom_csv(&resolved, grid)
                    .with_context(|| format!("reading {}", resolved.display()))?
            }
        };
        Ok(data)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Relaxation times to run, in report order. `0` selects the
    /// instantaneous (cubic Schrodinger) limit.
    pub mus: Vec<f64>,
}

/// Rectangular (s, kappa) scan of the well-posedness region.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionsSection {
    pub n: u32,
    pub s_min: f64,
    pub s_max: f64,
    pub s_step: f64,
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub kappa_step: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub scenario: Scenario,
    #[serde(default)]
    pub sim: Option<SimSection>,
    #[serde(default)]
    pub data: Option<DataSpec>,
    /// Standalone grid for scenarios that build data without integrating
    /// (currently `negdata`); simulating scenarios take theirs from `sim`.
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub theory: Option<TheoryConstants>,
    #[serde(default)]
    pub regions: Option<RegionsSection>,
}

/// A parsed config plus the raw bytes (echoed into provenance.txt) and the
/// directory it was loaded from (anchor for relative data paths).
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub text: String,
    pub dir: PathBuf,
}

pub fn load_config(path: &Path) -> Result<LoadedConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let config: ExperimentConfig = serde_json::from_str(&text)
        .with_context(|| format!("parsing config {}", path.display()))?;
    if config.schema != SCHEMA_VERSION {
        bail!(
            "config schema {} unsupported (this build reads schema {})",
            config.schema,
            SCHEMA_VERSION
        );
    }
    let dir = path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    Ok(LoadedConfig { config, text, dir })
}

impl ExperimentConfig {
    pub fn sim(&self) -> Result<&SimSection> {
        self.sim
            .as_ref()
            .with_context(|| format!("scenario {:?} needs a `sim` section", self.scenario))
    }

    pub fn data(&self) -> Result<&DataSpec> {
        self.data
            .as_ref()
            .with_context(|| format!("scenario {:?} needs a `data` section", self.scenario))
    }

    pub fn grid(&self) -> Result<GridSpec> {
        self.grid
            .with_context(|| format!("scenario {:?} needs a top-level `grid`", self.scenario))
    }

    pub fn theory_constants(&self) -> TheoryConstants {
        self.theory.unwrap_or_default()
    }
}
