//! Command-line front end: code description, sequences, average Hamiltonians and fidelity sweeps.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use toric_pulse::analysis::{
    c_av, c_err, error_sweep_sigma, error_sweep_time, fidelity_curve, fidelity_model, prep_fidelity_sweep,
    scaling_report, t_opt, validate_constraints, write_csv, DeviceScales, ModelParams, SweepRecord, System,
};
use toric_pulse::dynamics::TraceMethod;
use toric_pulse::lattice::describe;
use toric_pulse::sequences::{build_full_symmetric_sequence, build_prep_sequence, build_quarter_sequence};

#[derive(Parser)]
#[command(name = "toric-pulse", version, about = "Pulse-generated planar code simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand)]
enum Command {
    /// Lattice coordinates, stabilizers, quarters and logical operators (JSON).
    DescribeCode,
    /// Compiled pulse schedule (JSON).
    EmitSequence {
        #[arg(long, value_enum, default_value_t = SequenceKind::Symmetric)]
        kind: SequenceKind,
        /// Quarter index for `--kind quarter`.
        #[arg(long, default_value_t = 0)]
        quarter: usize,
    },
    /// Zeroth- and second-order average Hamiltonians as term lists (JSON).
    EmitHamiltonian,
    /// Pulsed gate fidelity against both average Hamiltonians (CSV).
    FidelityCurve,
    /// Monte Carlo gate fidelity under pulse-angle errors (CSV).
    ErrorSweep {
        #[arg(long, value_enum)]
        vary: Option<Vary>,
        /// Comma-separated σ_θ grid for `--vary sigma`.
        #[arg(long, value_delimiter = ',')]
        sigmas: Option<Vec<f64>>,
    },
    /// Codeword preparation fidelity versus σ_θ (CSV).
    PrepFidelity {
        #[arg(long, value_delimiter = ',')]
        sigmas: Option<Vec<f64>>,
    },
    /// Optimal period and model fidelity (JSON).
    TOpt,
    /// Deviation at the optimal period across lattice sizes (JSON).
    ScalingReport {
        #[arg(long)]
        l_min: Option<usize>,
        #[arg(long)]
        l_max: Option<usize>,
    },
    /// Operating-regime checks (JSON).
    CheckConstraints {
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        t1: Option<f64>,
        #[arg(long)]
        t2: Option<f64>,
        /// Thermal energy 1/β.
        #[arg(long)]
        thermal_energy: Option<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SequenceKind {
    Symmetric,
    Quarter,
    Prep,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Vary {
    Time,
    Sigma,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Method {
    ExactDense,
    StochasticTrace,
}

impl From<Method> for TraceMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::ExactDense => TraceMethod::ExactDense,
            Method::StochasticTrace => TraceMethod::StochasticTrace,
        }
    }
}

#[derive(Args)]
struct Common {
    #[arg(long = "L", global = true)]
    l: Option<usize>,
    /// Stabilizer energy Δ.
    #[arg(long, global = true)]
    delta_gap: Option<f64>,
    #[arg(long, global = true)]
    delta: Option<f64>,
    #[arg(long, global = true)]
    omega0: Option<f64>,
    #[arg(long = "T", global = true)]
    period: Option<f64>,
    #[arg(long, global = true)]
    sigma_theta: Option<f64>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Evolution time used by the closed-form model.
    #[arg(long, global = true)]
    t: Option<f64>,
    #[arg(long, global = true)]
    t_max: Option<f64>,
    #[arg(long, global = true)]
    points: Option<usize>,
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Random probe vectors per trace estimate.
    #[arg(long, global = true)]
    probes: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    fock: Option<usize>,
    #[arg(long, value_enum, global = true)]
    method: Option<Method>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

/// Experiment settings of a config file.
#[derive(Debug, Default, Deserialize)]
#[serde(default)]
struct Experiment {
    t_max: Option<f64>,
    points: Option<usize>,
    samples: Option<usize>,
    probes: Option<usize>,
    seed: Option<u64>,
    method: Option<Method>,
    vary: Option<Vary>,
    sigmas: Option<Vec<f64>>,
    out: Option<PathBuf>,
    l_min: Option<usize>,
    l_max: Option<usize>,
    threshold: Option<f64>,
    t1: Option<f64>,
    t2: Option<f64>,
    thermal_energy: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
struct ConfigFile {
    #[serde(flatten)]
    model: ModelParams,
    experiment: Experiment,
}

enum Failure {
    Validation(String),
    Io(String),
}

impl From<toric_pulse::Error> for Failure {
    fn from(e: toric_pulse::Error) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

struct Resolved {
    p: ModelParams,
    exp: Experiment,
    t_max: f64,
    points: usize,
    samples: usize,
    probes: usize,
    seed: u64,
    method: TraceMethod,
    out: Option<PathBuf>,
}

fn resolve(c: Common) -> Result<Resolved, Failure> {
    let file = match &c.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str::<ConfigFile>(&text).map_err(|e| Failure::Validation(format!("config: {e}")))?
        }
        None => ConfigFile::default(),
    };
    let mut p = file.model;
    let exp = file.experiment;
    macro_rules! set {
        ($($flag:ident => $field:ident),*) => { $(if let Some(v) = c.$flag { p.$field = v; })* };
    }
    set!(l => l, delta_gap => delta_gap, delta => delta, omega0 => omega0, period => period,
         sigma_theta => sigma_theta, alpha => alpha, t => t, fock => n_fock);
    p.validate()?;
    let method = c.method.or(exp.method).map(TraceMethod::from).unwrap_or(TraceMethod::StochasticTrace);
    let r = Resolved {
        t_max: c.t_max.or(exp.t_max).unwrap_or(p.t),
        points: c.points.or(exp.points).unwrap_or(20),
        samples: c.samples.or(exp.samples).unwrap_or(20),
        probes: c.probes.or(exp.probes).unwrap_or(2),
        seed: c.seed.or(exp.seed).unwrap_or(1),
        out: c.out.or(exp.out.clone()),
        method,
        p,
        exp,
    };
    if !(r.t_max > 0.0) {
        return Err(Failure::Validation("t-max must be positive".into()));
    }
    if r.samples == 0 || r.probes == 0 || r.points == 0 {
        return Err(Failure::Validation("samples, probes and points must be positive".into()));
    }
    Ok(r)
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match out {
        Some(path) => Box::new(File::create(path)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit_json<T: Serialize>(out: &Option<PathBuf>, value: &T) -> Result<(), Failure> {
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Failure::Io(e.to_string()))?;
    writeln!(w)?;
    Ok(())
}

fn emit_csv(out: &Option<PathBuf>, records: &[SweepRecord]) -> Result<(), Failure> {
    write_csv(sink(out)?, records)?;
    Ok(())
}

fn default_sigmas() -> Vec<f64> {
    vec![1e-4, 3e-4, 1e-3, 3e-3, 1e-2]
}

fn run(cli: Cli) -> Result<(), Failure> {
    let r = resolve(cli.common)?;
    let p = &r.p;
    match cli.command {
        Command::DescribeCode => {
            let sys = System::new(p.l, p.delta_gap)?;
            emit_json(&r.out, &describe(&sys.geom, &sys.stabs))
        }
        Command::EmitSequence { kind, quarter } => {
            let sys = System::new(p.l, p.delta_gap)?;
            match kind {
                SequenceKind::Symmetric => emit_json(&r.out, &build_full_symmetric_sequence(&sys.geom, p.period)?),
                SequenceKind::Quarter => {
                    if quarter > 3 {
                        return Err(Failure::Validation("quarter must be 0..=3".into()));
                    }
                    emit_json(&r.out, &build_quarter_sequence(&sys.geom, quarter, p.period)?)
                }
                SequenceKind::Prep => emit_json(&r.out, &build_prep_sequence(&sys.geom, &sys.stabs, p.delta_gap)?),
            }
        }
        Command::EmitHamiltonian => {
            let sys = System::new(p.l, p.delta_gap)?;
            let h0 = sys.zeroth_order(p);
            let h2 = sys.second_order(p)?.sub(&h0).prune(0.0);
            #[derive(Serialize)]
            struct Out {
                zeroth_order: Vec<toric_pulse::hamiltonian::TermRecord>,
                second_order: Vec<toric_pulse::hamiltonian::TermRecord>,
            }
            emit_json(&r.out, &Out { zeroth_order: h0.records(), second_order: h2.records() })
        }
        Command::FidelityCurve => {
            emit_csv(&r.out, &fidelity_curve(p, r.t_max, r.points, r.method, r.probes, r.seed)?)
        }
        Command::ErrorSweep { vary, sigmas } => {
            let records = match vary.or(r.exp.vary).unwrap_or(Vary::Time) {
                Vary::Time => error_sweep_time(p, r.t_max, r.points, r.samples, r.method, r.probes, r.seed)?,
                Vary::Sigma => {
                    let grid = sigmas.or(r.exp.sigmas.clone()).unwrap_or_else(default_sigmas);
                    if grid.iter().any(|s| !(*s >= 0.0)) {
                        return Err(Failure::Validation("σ_θ grid must be non-negative".into()));
                    }
                    error_sweep_sigma(p, &grid, r.t_max, r.samples, r.method, r.probes, r.seed)?
                }
            };
            emit_csv(&r.out, &records)
        }
        Command::PrepFidelity { sigmas } => {
            let grid = sigmas.or(r.exp.sigmas.clone()).unwrap_or_else(|| vec![1e-3, 3e-3, 1e-2, 3e-2]);
            let (records, k) = prep_fidelity_sweep(p.l, p.delta_gap, &grid, r.samples, r.seed)?;
            eprintln!("fitted k = {k:.6}");
            emit_csv(&r.out, &records)
        }
        Command::TOpt => {
            let period = t_opt(p)?;
            let q = ModelParams { period, ..p.clone() };
            let f = fidelity_model(&q, q.t);
            #[derive(Serialize)]
            struct Out {
                t_opt: f64,
                fidelity: f64,
                small_error_regime: bool,
                c_err: f64,
                c_av: f64,
            }
            emit_json(
                &r.out,
                &Out { t_opt: period, fidelity: f.value, small_error_regime: f.small_error_regime, c_err: c_err(&q), c_av: c_av(&q) },
            )
        }
        Command::ScalingReport { l_min, l_max } => {
            let lo = l_min.or(r.exp.l_min).unwrap_or(3);
            let hi = l_max.or(r.exp.l_max).unwrap_or(50);
            if lo > hi {
                return Err(Failure::Validation("l-min exceeds l-max".into()));
            }
            emit_json(&r.out, &scaling_report(p, &(lo..=hi).collect::<Vec<_>>())?)
        }
        Command::CheckConstraints { threshold, t1, t2, thermal_energy } => {
            let scales = DeviceScales {
                t1: t1.or(r.exp.t1),
                t2: t2.or(r.exp.t2),
                thermal_energy: thermal_energy.or(r.exp.thermal_energy),
            };
            let threshold = threshold.or(r.exp.threshold).unwrap_or(0.1);
            if !(threshold > 0.0) {
                return Err(Failure::Validation("threshold must be positive".into()));
            }
            emit_json(&r.out, &validate_constraints(p, scales, threshold))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
