//! Command-line front end: `simulate`, `sweep`, `susceptibility` and `grover`.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis::{
    self, ete, ete_quadrature, grover_check, pathway_map, susceptibility, write_curve_csv,
    write_pathway_csv, EfficiencyReport, Grid,
};
use crate::dynamics::{propagate, QuadratureOptions};
use crate::error::{Error, Result};
use crate::lindblad::ChannelSet;
use crate::liouville::{builders, Supermatrix};
use crate::model::{fmo, initial_state, DensityState, InitialState, SystemSpec};
use crate::spectral::{ExcitonBasis, DEFAULT_SECULAR_TOL_CM1};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NETWORK_NOT_FOUND: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_INVALID_NETWORK: i32 = 65;
pub const EXIT_INVALID_PARAMETER: i32 = 66;
pub const EXIT_SOLVER: i32 = 70;
pub const EXIT_IO: i32 = 74;

const EXIT_HELP: &str = "\
Exit codes:
  0   success
  2   network file not found
  64  usage error (unknown flag, malformed value or unit)
  65  invalid network file (parse error, asymmetric couplings, negative rate)
  66  invalid parameter (site index, temperature, grid, unknown strategy name)
  70  solver failure (no decay channel, singular supermatrix, efficiency out of range)
  74  I/O error while writing outputs

Quantities take explicit units: 295K, 35cm1, 1ps1, 1ns1, 10ps, 1fs.
Bare numbers are read in K, cm^-1, ps^-1 and ps. Sites are 1-based.";

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NetworkNotFound(_) => EXIT_NETWORK_NOT_FOUND,
        Error::Parse(_) | Error::AsymmetricCouplings(..) | Error::NegativeRate(_) => {
            EXIT_INVALID_NETWORK
        }
        Error::DimensionMismatch(_)
        | Error::InvalidParameter(_)
        | Error::InvalidSite { .. }
        | Error::EmptySiteSet
        | Error::ZeroSeparation
        | Error::ZeroFrequency
        | Error::NonAscendingTimes
        | Error::UnknownStrategy { .. } => EXIT_INVALID_PARAMETER,
        Error::NonHurwitz(_) | Error::Singular | Error::EfficiencyOutOfRange(_) => EXIT_SOLVER,
        Error::Io(_) => EXIT_IO,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "exciton-walk",
    version,
    about = "Efficiency, transfer time and robustness of exciton transport in pigment networks",
    after_help = EXIT_HELP
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Propagate an initial state and report efficiency and transfer time.
    Simulate(SimulateArgs),
    /// Efficiency curve over a temperature, reorganization-energy or trap-rate grid.
    Sweep(SweepArgs),
    /// Channel susceptibilities, optional Hessian and the site-pair pathway map.
    Susceptibility(SusceptibilityArgs),
    /// Check the unitary dynamics against the conditions for a quantum search.
    Grover(GroverArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct SystemArgs {
    /// Network file (JSON). The built-in 7-site FMO complex when omitted.
    #[arg(long)]
    pub network: Option<PathBuf>,
    /// Initial state: site:K, mixture:K,L,... or superposition.
    #[arg(long, default_value = "site:1")]
    pub init: InitialState,
    /// Bath temperature.
    #[arg(long, value_parser = parse_temperature)]
    pub temperature: Option<f64>,
    /// Reorganization energy E_R.
    #[arg(long, value_parser = parse_energy)]
    pub reorg: Option<f64>,
    /// Bath cutoff frequency.
    #[arg(long, value_parser = parse_energy)]
    pub cutoff: Option<f64>,
    /// Trap rate applied to every trap site (or to --trap-site).
    #[arg(long, value_parser = parse_rate)]
    pub trap: Option<f64>,
    /// Move the trap to this single site.
    #[arg(long)]
    pub trap_site: Option<usize>,
    /// Recombination rate γ^r.
    #[arg(long, value_parser = parse_rate)]
    pub loss: Option<f64>,
    /// Supermatrix construction: site or exciton.
    #[arg(long, default_value = "site")]
    pub builder: String,
    /// Bohr frequencies closer than this share a secular group.
    #[arg(long, value_parser = parse_energy, default_value_t = DEFAULT_SECULAR_TOL_CM1)]
    pub secular_tol: f64,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// Length of the sampled trajectory.
    #[arg(long, value_parser = parse_time, default_value = "10ps")]
    pub t_max: f64,
    /// Sampling interval.
    #[arg(long, value_parser = parse_time, default_value = "10fs")]
    pub dt: f64,
    /// Cross-check η and τ against time-domain quadrature.
    #[arg(long)]
    pub check: bool,
    /// Also write the supermatrix entries to supermatrix.txt.
    #[arg(long)]
    pub dump_supermatrix: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// temperature, reorg or trap.
    #[arg(long)]
    pub param: String,
    /// lin:START:STOP:COUNT or log:START:STOP:COUNT in the parameter's base unit.
    #[arg(long)]
    pub grid: String,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
}

#[derive(Debug, Args)]
pub struct SusceptibilityArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// analytic or fd.
    #[arg(long, default_value = "analytic")]
    pub method: String,
    /// Include the Hessian of η in the channel scalings.
    #[arg(long)]
    pub hessian: bool,
}

#[derive(Debug, Args)]
pub struct GroverArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// Target site.
    #[arg(long, default_value_t = 3)]
    pub target: usize,
    #[arg(long, value_parser = parse_time, default_value = "10ps")]
    pub t_max: f64,
    #[arg(long, value_parser = parse_time, default_value = "1fs")]
    pub dt: f64,
}

fn parse_units(s: &str, units: &[(&str, f64)], what: &str) -> std::result::Result<f64, String> {
    let s = s.trim();
    let (number, factor) = units
        .iter()
        .find_map(|&(suffix, f)| s.strip_suffix(suffix).map(|n| (n.trim(), f)))
        .unwrap_or((s, 1.0));
    let allowed: Vec<&str> = units.iter().map(|u| u.0).collect();
    match number.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v * factor),
        _ => Err(format!("invalid {what} '{s}' (units: {})", allowed.join(", "))),
    }
}

pub fn parse_energy(s: &str) -> std::result::Result<f64, String> {
    parse_units(s, &[("cm-1", 1.0), ("cm1", 1.0)], "energy")
}

pub fn parse_rate(s: &str) -> std::result::Result<f64, String> {
    parse_units(s, &[("ps1", 1.0), ("ps-1", 1.0), ("ns1", 1e-3), ("ns-1", 1e-3), ("fs1", 1e3), ("fs-1", 1e3)], "rate")
}

pub fn parse_temperature(s: &str) -> std::result::Result<f64, String> {
    parse_units(s, &[("K", 1.0)], "temperature")
}

pub fn parse_time(s: &str) -> std::result::Result<f64, String> {
    parse_units(s, &[("fs", 1e-3), ("ps", 1.0), ("ns", 1e3)], "time")
}

fn one_based(site: usize, n: usize) -> Result<usize> {
    if site == 0 || site > n {
        return Err(Error::InvalidSite { index: site, n_sites: n });
    }
    Ok(site - 1)
}

#[derive(Debug, Serialize)]
struct Params {
    network: String,
    init: String,
    #[serde(rename = "temperature_K")]
    temperature_k: f64,
    reorg_cm1: f64,
    cutoff_cm1: f64,
    trap_rates_ps1: BTreeMap<usize, f64>,
    loss_rate_ps1: f64,
    builder: String,
    secular_tol_cm1: f64,
}

struct Setup {
    system: SystemSpec,
    rho0: DensityState,
    params: Params,
}

impl SystemArgs {
    fn setup(&self) -> Result<Setup> {
        let (mut system, source) = match &self.network {
            Some(path) => (SystemSpec::load(path)?, path.display().to_string()),
            None => (fmo(), "builtin:fmo".to_string()),
        };
        let mut bath = system.bath;
        if let Some(t) = self.temperature {
            bath = bath.with_temperature(t)?;
        }
        if let Some(e) = self.reorg {
            bath = bath.with_reorg_energy(e)?;
        }
        if let Some(c) = self.cutoff {
            bath = bath.with_cutoff(c)?;
        }
        let mut net = system.network.clone();
        let n = net.n_sites();
        if let Some(site) = self.trap_site {
            let site = one_based(site, n)?;
            let rate = match self.trap {
                Some(r) => r,
                None => net.trap_rates().iter().cloned().fold(0.0, f64::max),
            };
            for m in net.trap_sites() {
                net = net.set_trap_rate(m, 0.0)?;
            }
            net = net.set_trap_rate(site, rate)?;
        } else if let Some(rate) = self.trap {
            for m in net.trap_sites() {
                net = net.set_trap_rate(m, rate)?;
            }
        }
        if let Some(loss) = self.loss {
            net = net.set_loss_rate(loss)?;
        }
        system = SystemSpec { network: net, bath };
        builders().get(&self.builder)?;
        if self.secular_tol <= 0.0 {
            return Err(Error::InvalidParameter("secular tolerance must be positive".into()));
        }
        let rho0 = initial_state(&self.init, n)?;
        let params = Params {
            network: source,
            init: self.init.to_string(),
            temperature_k: system.bath.temperature(),
            reorg_cm1: system.bath.reorg_energy(),
            cutoff_cm1: system.bath.cutoff(),
            trap_rates_ps1: system
                .network
                .trap_sites()
                .into_iter()
                .map(|m| (m + 1, system.network.trap_rates()[m]))
                .collect(),
            loss_rate_ps1: system.network.loss_rate(),
            builder: self.builder.clone(),
            secular_tol_cm1: self.secular_tol,
        };
        Ok(Setup { system, rho0, params })
    }

    fn basis(&self, sys: &SystemSpec) -> ExcitonBasis {
        ExcitonBasis::new(&sys.network, self.secular_tol)
    }

    fn supermatrix(&self, sys: &SystemSpec, basis: &ExcitonBasis) -> Result<Supermatrix> {
        let reg = builders();
        Ok(reg.get(&self.builder)?.build(&sys.network, basis, &sys.bath))
    }

    fn create(&self, name: &str) -> Result<BufWriter<File>> {
        fs::create_dir_all(&self.out)?;
        Ok(BufWriter::new(File::create(self.out.join(name))?))
    }

    fn write_json(&self, name: &str, value: &impl Serialize) -> Result<PathBuf> {
        let mut w = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::Io(e.into()))?;
        writeln!(w)?;
        w.flush()?;
        Ok(self.out.join(name))
    }
}

fn fmt_tau(tau: Option<f64>) -> String {
    tau.map_or_else(|| "undefined".into(), |t| format!("{t:.4} ps"))
}

#[derive(Serialize)]
struct Quadrature {
    eta: f64,
    tau: Option<f64>,
    horizon_ps: f64,
    eta_deviation: f64,
}

#[derive(Serialize)]
struct SimulateReport<'a> {
    #[serde(flatten)]
    efficiency: EfficiencyReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    quadrature: Option<Quadrature>,
    params: &'a Params,
}

fn write_report_csv(w: &mut impl Write, r: &EfficiencyReport) -> Result<()> {
    writeln!(w, "eta,tau_ps,eta_loss,residual")?;
    let tau = r.tau.map_or_else(|| "nan".into(), |t| format!("{t:.12e}"));
    writeln!(w, "{:.12e},{tau},{:.12e},{:.12e}", r.eta, r.eta_loss, r.residual)?;
    Ok(())
}

fn simulate(args: &SimulateArgs, out: &mut impl Write) -> Result<()> {
    let sa = &args.system;
    let setup = sa.setup()?;
    if !(args.t_max >= 0.0 && args.dt > 0.0) {
        return Err(Error::InvalidParameter("t-max must be >= 0 and dt > 0".into()));
    }
    let basis = sa.basis(&setup.system);
    let sm = sa.supermatrix(&setup.system, &basis)?;
    let report = ete(&sm, &setup.rho0)?;
    let quadrature = if args.check {
        let q = ete_quadrature(&sm, &setup.rho0, QuadratureOptions::default())?;
        let horizon = crate::dynamics::default_horizon(&sm)?;
        Some(Quadrature {
            eta: q.eta,
            tau: q.tau,
            horizon_ps: horizon,
            eta_deviation: (q.eta - report.eta).abs(),
        })
    } else {
        None
    };

    let steps = (args.t_max / args.dt).round() as usize;
    let times: Vec<f64> = (0..=steps).map(|k| k as f64 * args.dt).collect();
    let traj = propagate(&sm, &setup.rho0, &times)?;
    let mut w = sa.create("trajectory.csv")?;
    traj.write_csv(&mut w)?;
    w.flush()?;

    match sa.format {
        Format::Json => {
            sa.write_json("report.json", &SimulateReport { efficiency: report, quadrature, params: &setup.params })?;
        }
        Format::Csv => {
            let mut w = sa.create("report.csv")?;
            write_report_csv(&mut w, &report)?;
            w.flush()?;
        }
    }
    if args.dump_supermatrix {
        let mut w = sa.create("supermatrix.txt")?;
        sm.write_dump(&mut w)?;
        w.flush()?;
    }
    writeln!(out, "eta      = {:.6}", report.eta)?;
    writeln!(out, "tau      = {}", fmt_tau(report.tau))?;
    writeln!(out, "eta_loss = {:.6}", report.eta_loss)?;
    Ok(())
}

fn sweep(args: &SweepArgs, out: &mut impl Write) -> Result<()> {
    let sa = &args.system;
    let setup = sa.setup()?;
    let grid: Grid = args.grid.parse()?;
    let params = analysis::parameters();
    let param = params.get(&args.param)?;
    let reg = builders();
    let builder = reg.get(&sa.builder)?;
    let points = analysis::sweep(
        &setup.system,
        param,
        &grid.values(),
        builder,
        sa.secular_tol,
        &setup.rho0,
        args.jobs,
    )?;
    match sa.format {
        Format::Csv => {
            let mut w = sa.create("curve.csv")?;
            write_curve_csv(&mut w, param.label(), &points)?;
            w.flush()?;
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Curve<'a> {
                parameter: &'a str,
                grid: String,
                points: &'a [analysis::SweepPoint],
                params: &'a Params,
            }
            let curve = Curve { parameter: param.label(), grid: grid.to_string(), points: &points, params: &setup.params };
            sa.write_json("curve.json", &curve)?;
        }
    }
    let etas = points.iter().map(|p| p.report.eta);
    let lo = etas.clone().fold(f64::INFINITY, f64::min);
    let hi = etas.fold(f64::NEG_INFINITY, f64::max);
    writeln!(out, "{} points, eta in [{lo:.6}, {hi:.6}]", points.len())?;
    Ok(())
}

fn susceptibility_cmd(args: &SusceptibilityArgs, out: &mut impl Write) -> Result<()> {
    let sa = &args.system;
    let setup = sa.setup()?;
    let methods = analysis::methods();
    let method = methods.get(&args.method)?;
    let basis = sa.basis(&setup.system);
    let sm = sa.supermatrix(&setup.system, &basis)?;
    let channels = ChannelSet::build(&setup.system.network, &basis, &setup.system.bath);
    let efficiency = ete(&sm, &setup.rho0)?;
    let report = susceptibility(&sm, &setup.rho0, method, args.hessian)?;
    let edges = pathway_map(&sm, &channels, &setup.rho0)?;

    #[derive(Serialize)]
    struct Edge {
        m: usize,
        n: usize,
        rate_ps1: f64,
        susceptibility: f64,
    }
    #[derive(Serialize)]
    struct Full<'a> {
        eta: f64,
        #[serde(flatten)]
        report: &'a analysis::SusceptibilityReport,
        pathways: Vec<Edge>,
        params: &'a Params,
    }
    let full = Full {
        eta: efficiency.eta,
        report: &report,
        pathways: edges
            .iter()
            .map(|e| Edge { m: e.from + 1, n: e.to + 1, rate_ps1: e.rate, susceptibility: e.susceptibility })
            .collect(),
        params: &setup.params,
    };
    sa.write_json("susceptibility.json", &full)?;
    let mut w = sa.create("pathway.csv")?;
    write_pathway_csv(&mut w, &edges)?;
    w.flush()?;

    for (name, g) in report.channels.iter().zip(&report.gradient) {
        writeln!(out, "{name:<12} {g:+.6e}")?;
    }
    writeln!(out, "{:<12} {:+.3e}", "sum", report.gradient_sum)?;
    if let Some(s) = report.hessian_sum {
        writeln!(out, "{:<12} {s:+.3e}", "hessian sum")?;
    }
    Ok(())
}

fn grover(args: &GroverArgs, out: &mut impl Write) -> Result<()> {
    let sa = &args.system;
    let setup = sa.setup()?;
    let target = one_based(args.target, setup.system.network.n_sites())?;
    let mut r = grover_check(&setup.system.network, &setup.rho0, target, args.t_max, args.dt)?;
    r.target = args.target;
    #[derive(Serialize)]
    struct Full<'a> {
        #[serde(flatten)]
        report: &'a analysis::GroverReport,
        t_max_ps: f64,
        dt_ps: f64,
        params: &'a Params,
    }
    sa.write_json("grover.json", &Full { report: &r, t_max_ps: args.t_max, dt_ps: args.dt, params: &setup.params })?;
    writeln!(out, "max overlap with site {} = {:.4} at {:.3} ps", args.target, r.max_overlap, r.time_of_max)?;
    writeln!(out, "alpha = {:.4} (condition i: {})", r.alpha, r.condition_i)?;
    writeln!(out, "beta  = {:.4} (condition ii: {})", r.beta, r.condition_ii)?;
    Ok(())
}

pub fn execute(cli: &Cli, out: &mut impl Write) -> Result<()> {
    match &cli.command {
        Command::Simulate(a) => simulate(a, out),
        Command::Sweep(a) => sweep(a, out),
        Command::Susceptibility(a) => susceptibility_cmd(a, out),
        Command::Grover(a) => grover(a, out),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let stdout = std::io::stdout();
    match execute(&cli, &mut stdout.lock()) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
