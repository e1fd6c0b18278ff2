//! Command-line flags and their merge over a config file.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use susy_ep::ep::ControlAxis;
use susy_ep::perturbation::PerturbationKind;
use susy_ep::{ChainSpec, Precision};

use crate::config::{Command, Format, RunConfig, Spacing, Sweep};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "susy-ep", version, about = "Sweeps and checks for supersymmetric exceptional-point arrays")]
pub struct Cli {
    /// JSON run configuration; flags given here override it
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Worker threads for sweeps
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Nilpotency tolerance (jordan-check) or verification threshold (synthesize)
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    #[command(subcommand)]
    pub command: Option<Sub>,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Build the chain by SUSY steps and emit every representation with checks
    Synthesize(ChainArgs),
    /// Eigenvalues against the gain/loss gradient
    SpectrumSweep(SweepCmd),
    /// Phase rigidity approaching the exceptional point, with scaling fits
    RigiditySweep(RigidityCmd),
    /// Splittings under a coupling perturbation, with Puiseux fits
    PerturbationSweep(PerturbationCmd),
    /// Test for a single Jordan block
    JordanCheck(ChainArgs),
}

#[derive(Debug, Args, Default)]
pub struct ChainArgs {
    /// Number of sites
    #[arg(long)]
    pub n: Option<usize>,
    /// Coupling J [default: 1]
    #[arg(long, allow_hyphen_values = true)]
    pub coupling: Option<f64>,
    /// Gain/loss gradient [default: J]
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    /// Detuning gradient [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<f64>,
    /// Resonance frequency [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    pub omega0: Option<f64>,
    /// Arithmetic for eigenvalue problems [default: extended]
    #[arg(long, value_enum)]
    pub precision: Option<PrecisionArg>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum PrecisionArg {
    Double,
    Extended,
}

#[derive(Debug, Args, Default)]
pub struct SweepArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub max: Option<f64>,
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long, value_enum)]
    pub spacing: Option<Spacing>,
}

#[derive(Debug, Args)]
pub struct SweepCmd {
    #[command(flatten)]
    pub chain: ChainArgs,
    #[command(flatten)]
    pub sweep: SweepArgs,
}

#[derive(Debug, Args)]
pub struct RigidityCmd {
    #[command(flatten)]
    pub chain: ChainArgs,
    #[command(flatten)]
    pub sweep: SweepArgs,
    /// Approach the EP along γ (control = J − γ) or Δ (control = Δ, γ = J)
    #[arg(long, value_enum)]
    pub axis: Option<AxisArg>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum AxisArg {
    Gamma,
    Delta,
}

#[derive(Debug, Args)]
pub struct PerturbationCmd {
    #[command(flatten)]
    pub chain: ChainArgs,
    #[command(flatten)]
    pub sweep: SweepArgs,
    #[arg(long, value_enum)]
    pub kind: Option<KindArg>,
    /// 1-based bond for single-bond plans [default: 1]
    #[arg(long)]
    pub bond: Option<usize>,
    /// Branch pair as `a,b` [default: 0,N-1]
    #[arg(long, value_parser = parse_pair)]
    pub pair: Option<(usize, usize)>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum KindArg {
    AllBonds,
    SingleBond,
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected `a,b`, got `{s}`"))?;
    let a = a.trim().parse().map_err(|e| format!("{e}"))?;
    let b = b.trim().parse().map_err(|e| format!("{e}"))?;
    Ok((a, b))
}

impl Sub {
    fn command(&self) -> Command {
        match self {
            Sub::Synthesize(_) => Command::Synthesize,
            Sub::SpectrumSweep(_) => Command::SpectrumSweep,
            Sub::RigiditySweep(_) => Command::RigiditySweep,
            Sub::PerturbationSweep(_) => Command::PerturbationSweep,
            Sub::JordanCheck(_) => Command::JordanCheck,
        }
    }

    fn chain(&self) -> &ChainArgs {
        match self {
            Sub::Synthesize(c) | Sub::JordanCheck(c) => c,
            Sub::SpectrumSweep(s) => &s.chain,
            Sub::RigiditySweep(r) => &r.chain,
            Sub::PerturbationSweep(p) => &p.chain,
        }
    }

    fn sweep(&self) -> Option<&SweepArgs> {
        match self {
            Sub::SpectrumSweep(s) => Some(&s.sweep),
            Sub::RigiditySweep(r) => Some(&r.sweep),
            Sub::PerturbationSweep(p) => Some(&p.sweep),
            Sub::Synthesize(_) | Sub::JordanCheck(_) => None,
        }
    }
}

fn chain_from_flags(args: &ChainArgs, base: Option<ChainSpec>) -> Result<ChainSpec, CliError> {
    let n = match (args.n, base) {
        (Some(n), _) => n,
        (None, Some(b)) => b.n,
        (None, None) => {
            return Err(CliError::Usage {
                reason: "chain size is required: pass --n or a config".into(),
            })
        }
    };
    let coupling = args.coupling.or(base.map(|b| b.coupling)).unwrap_or(1.0);
    let gamma = args.gamma.or(base.map(|b| b.gamma)).unwrap_or(coupling);
    let delta = args.delta.or(base.map(|b| b.delta)).unwrap_or(0.0);
    let omega0 = args.omega0.or(base.map(|b| b.omega0)).unwrap_or(0.0);
    Ok(ChainSpec::new(n, coupling, gamma).with_delta(delta).with_omega0(omega0))
}

fn merge_sweep(args: &SweepArgs, base: Option<Sweep>, command: Command, chain: &ChainSpec) -> Option<Sweep> {
    let any = args.min.is_some() || args.max.is_some() || args.count.is_some() || args.spacing.is_some();
    if !any {
        return base;
    }
    let fallback = base.or_else(|| RunConfig::new(command, *chain).resolved().sweep)?;
    Some(Sweep {
        min: args.min.unwrap_or(fallback.min),
        max: args.max.unwrap_or(fallback.max),
        count: args.count.unwrap_or(fallback.count),
        spacing: args.spacing.unwrap_or(fallback.spacing),
    })
}

impl Cli {
    /// Merge the config file (if any) with the flags; flags win. The result
    /// is resolved and validated.
    pub fn into_config(self) -> Result<RunConfig, CliError> {
        let file = self.config.as_deref().map(RunConfig::load).transpose()?;
        let mut cfg = match (&self.command, file) {
            (None, None) => {
                return Err(CliError::Usage {
                    reason: "a subcommand or --config is required".into(),
                })
            }
            (None, Some(f)) => f,
            (Some(sub), file) => {
                if let Some(f) = &file {
                    if f.command != sub.command() {
                        return Err(CliError::Usage {
                            reason: format!(
                                "config is for `{}` but `{}` was requested",
                                f.command.name(),
                                sub.command().name()
                            ),
                        });
                    }
                }
                let base_chain = file.as_ref().map(|f| f.chain);
                let chain = chain_from_flags(sub.chain(), base_chain)?;
                let mut cfg = file.unwrap_or_else(|| RunConfig::new(sub.command(), chain));
                cfg.chain = chain;
                if let Some(p) = sub.chain().precision {
                    cfg.precision = match p {
                        PrecisionArg::Double => Precision::Double,
                        PrecisionArg::Extended => Precision::Extended,
                    };
                }
                if let Some(s) = sub.sweep() {
                    cfg.sweep = merge_sweep(s, cfg.sweep, cfg.command, &chain);
                }
                match sub {
                    Sub::RigiditySweep(r) => {
                        if let Some(a) = r.axis {
                            cfg.axis = Some(match a {
                                AxisArg::Gamma => ControlAxis::Gamma,
                                AxisArg::Delta => ControlAxis::Delta,
                            });
                        }
                    }
                    Sub::PerturbationSweep(p) => {
                        let mut pc = cfg.perturbation.unwrap_or_default();
                        if let Some(k) = p.kind {
                            pc.kind = match k {
                                KindArg::AllBonds => PerturbationKind::AllBonds,
                                KindArg::SingleBond => PerturbationKind::SingleBond,
                            };
                        }
                        if p.bond.is_some() {
                            pc.bond_index = p.bond;
                        }
                        if p.pair.is_some() {
                            pc.pair = p.pair;
                        }
                        cfg.perturbation = Some(pc);
                    }
                    _ => {}
                }
                cfg
            }
        };
        if let Some(out) = self.out {
            cfg.output = out;
        }
        if let Some(f) = self.format {
            cfg.format = f;
        }
        if self.threads.is_some() {
            cfg.threads = self.threads;
        }
        if self.tolerance.is_some() {
            cfg.tolerance = self.tolerance;
        }
        let cfg = cfg.resolved();
        cfg.validate()?;
        Ok(cfg)
    }
}
