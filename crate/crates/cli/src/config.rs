//! Run configuration: the JSON file format and its merge with command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use susy_ep::ep::ControlAxis;
use susy_ep::fit::{linear_grid, log_grid};
use susy_ep::perturbation::PerturbationKind;
use susy_ep::{ChainSpec, Precision};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Synthesize,
    SpectrumSweep,
    RigiditySweep,
    PerturbationSweep,
    JordanCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Synthesize => "synthesize",
            Command::SpectrumSweep => "spectrum-sweep",
            Command::RigiditySweep => "rigidity-sweep",
            Command::PerturbationSweep => "perturbation-sweep",
            Command::JordanCheck => "jordan-check",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

/// Grid of control values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl Sweep {
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |reason: String| Err(CliError::InvalidGrid { reason });
        if !self.min.is_finite() || !self.max.is_finite() {
            return bad(format!("bounds must be finite, got [{}, {}]", self.min, self.max));
        }
        if self.count < 2 {
            return bad(format!("count must be at least 2, got {}", self.count));
        }
        if self.min >= self.max {
            return bad(format!("min {} must be below max {}", self.min, self.max));
        }
        if self.spacing == Spacing::Log && self.min <= 0.0 {
            return bad(format!("log spacing needs min > 0, got {}", self.min));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        match self.spacing {
            Spacing::Linear => linear_grid(self.min, self.max, self.count),
            Spacing::Log => log_grid(self.min, self.max, self.count),
        }
    }
}

/// Perturbation plan and the branch pair to report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationConfig {
    pub kind: PerturbationKind,
    /// 1-based bond, single-bond plans only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bond_index: Option<usize>,
    /// Defaults to the extremal pair `(0, N−1)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair: Option<(usize, usize)>,
}

impl Default for PerturbationConfig {
    fn default() -> Self {
        Self {
            kind: PerturbationKind::AllBonds,
            bond_index: None,
            pair: None,
        }
    }
}

/// Everything a run needs. Optional fields fall back to per-command defaults
/// when the run is resolved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub chain: ChainSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    /// Reserved; every pipeline is deterministic.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub precision: Precision,
    /// Nilpotency tolerance for `jordan-check`, pass threshold for the
    /// `synthesize` verification block.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    /// Control axis of `rigidity-sweep`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<ControlAxis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<PerturbationConfig>,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

impl RunConfig {
    pub fn new(command: Command, chain: ChainSpec) -> Self {
        Self {
            command,
            chain,
            sweep: None,
            output: default_output(),
            seed: 0,
            format: Format::default(),
            precision: Precision::default(),
            tolerance: None,
            threads: None,
            axis: None,
            perturbation: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::ConfigRead {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::ConfigParse { reason: e.to_string() })
    }

    /// Fill every optional field with its default for the command.
    pub fn resolved(mut self) -> Self {
        if self.sweep.is_none() {
            self.sweep = default_sweep(self.command, &self.chain);
        }
        match self.command {
            Command::Synthesize | Command::JordanCheck => {
                self.tolerance.get_or_insert(susy_ep::ep::JORDAN_DEFAULT_TOL);
            }
            Command::RigiditySweep => {
                self.axis.get_or_insert(ControlAxis::Gamma);
            }
            Command::PerturbationSweep => {
                let n = self.chain.n;
                let p = self.perturbation.get_or_insert_with(PerturbationConfig::default);
                if p.kind == PerturbationKind::SingleBond && p.bond_index.is_none() {
                    p.bond_index = Some(1);
                }
                p.pair.get_or_insert((0, n.saturating_sub(1)));
            }
            Command::SpectrumSweep => {}
        }
        self
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.chain.n < 2 {
            return Err(CliError::InvalidSize { n: self.chain.n });
        }
        self.chain.validate().map_err(|e| CliError::InvalidChain { reason: e.to_string() })?;
        if let Some(s) = &self.sweep {
            s.validate()?;
        }
        if let Some(t) = self.tolerance {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::Usage {
                    reason: format!("tolerance must be positive, got {t}"),
                });
            }
        }
        if self.threads == Some(0) {
            return Err(CliError::Usage {
                reason: "threads must be at least 1".into(),
            });
        }
        Ok(())
    }
}

fn default_sweep(command: Command, chain: &ChainSpec) -> Option<Sweep> {
    let j = chain.coupling;
    match command {
        Command::SpectrumSweep => Some(Sweep {
            min: 0.0,
            max: 2.0 * j,
            count: 201,
            spacing: Spacing::Linear,
        }),
        Command::RigiditySweep => Some(Sweep {
            min: 1e-6 * j,
            max: 1e-3 * j,
            count: 16,
            spacing: Spacing::Log,
        }),
        Command::PerturbationSweep => Some(Sweep {
            min: 1e-12 * j,
            max: 1e-4 * j,
            count: 25,
            spacing: Spacing::Log,
        }),
        Command::Synthesize | Command::JordanCheck => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sweep(min: f64, max: f64, count: usize, spacing: Spacing) -> Sweep {
        Sweep { min, max, count, spacing }
    }

    #[test]
    fn grid_invariants() {
        assert!(sweep(0.0, 2.0, 3, Spacing::Linear).validate().is_ok());
        assert!(sweep(1e-6, 1e-3, 2, Spacing::Log).validate().is_ok());
        assert!(sweep(0.0, 1.0, 1, Spacing::Linear).validate().is_err());
        assert!(sweep(1.0, 1.0, 4, Spacing::Linear).validate().is_err());
        assert!(sweep(0.0, 1.0, 4, Spacing::Log).validate().is_err());
        assert!(sweep(f64::NAN, 1.0, 4, Spacing::Linear).validate().is_err());
        assert_eq!(sweep(1e-6, 1e-3, 4, Spacing::Log).points(), vec![1e-6, 1e-5, 1e-4, 1e-3]);
    }

    #[test]
    fn command_names_match_serde() {
        for c in [
            Command::Synthesize,
            Command::SpectrumSweep,
            Command::RigiditySweep,
            Command::PerturbationSweep,
            Command::JordanCheck,
        ] {
            assert_eq!(serde_json::to_value(c).unwrap(), c.name());
        }
    }
}
