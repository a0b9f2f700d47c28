use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use super::efficiency::{evaluate, EfficiencyReport};
use crate::error::{Error, Result};
use crate::liouville::SupermatrixBuilder;
use crate::model::{DensityState, SystemSpec};
use crate::registry::{Named, Registry};

/// A scalar knob of the system that a sweep varies.
pub trait SweepParameter: Named + Send + Sync {
    /// Column label including the unit.
    fn label(&self) -> &'static str;
    fn apply(&self, sys: &SystemSpec, value: f64) -> Result<SystemSpec>;
}

struct Temperature;
struct ReorgEnergy;
struct TrapRate;

impl Named for Temperature {
    fn name(&self) -> &'static str {
        "temperature"
    }
    fn description(&self) -> &'static str {
        "bath temperature, K"
    }
}

impl SweepParameter for Temperature {
    fn label(&self) -> &'static str {
        "temperature_K"
    }
    fn apply(&self, sys: &SystemSpec, value: f64) -> Result<SystemSpec> {
        Ok(SystemSpec {
            network: sys.network.clone(),
            bath: sys.bath.with_temperature(value)?,
        })
    }
}

impl Named for ReorgEnergy {
    fn name(&self) -> &'static str {
        "reorg"
    }
    fn description(&self) -> &'static str {
        "reorganization energy, cm^-1"
    }
}

impl SweepParameter for ReorgEnergy {
    fn label(&self) -> &'static str {
        "reorg_cm1"
    }
    fn apply(&self, sys: &SystemSpec, value: f64) -> Result<SystemSpec> {
        Ok(SystemSpec {
            network: sys.network.clone(),
            bath: sys.bath.with_reorg_energy(value)?,
        })
    }
}

impl Named for TrapRate {
    fn name(&self) -> &'static str {
        "trap"
    }
    fn description(&self) -> &'static str {
        "rate of every trap site, ps^-1"
    }
}

impl SweepParameter for TrapRate {
    fn label(&self) -> &'static str {
        "trap_ps1"
    }
    fn apply(&self, sys: &SystemSpec, value: f64) -> Result<SystemSpec> {
        let sites = sys.network.trap_sites();
        if sites.is_empty() {
            return Err(Error::InvalidParameter("network has no trap site to sweep".into()));
        }
        let mut net = sys.network.clone();
        for m in sites {
            net = net.set_trap_rate(m, value)?;
        }
        Ok(SystemSpec {
            network: net,
            bath: sys.bath,
        })
    }
}

pub fn parameters() -> Registry<dyn SweepParameter> {
    let mut r: Registry<dyn SweepParameter> = Registry::new("sweep parameter");
    r.register(Box::new(Temperature))
        .register(Box::new(ReorgEnergy))
        .register(Box::new(TrapRate));
    r
}

/// `lin:start:stop:count` or `log:start:stop:count`, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Grid {
    Linear { start: f64, stop: f64, count: usize },
    Log { start: f64, stop: f64, count: usize },
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        let (start, stop, n, log) = match *self {
            Grid::Linear { start, stop, count } => (start, stop, count, false),
            Grid::Log { start, stop, count } => (start, stop, count, true),
        };
        if n == 1 {
            return vec![stop];
        }
        let (a, b) = if log { (start.ln(), stop.ln()) } else { (start, stop) };
        let mut v: Vec<f64> = (0..n)
            .map(|k| {
                let x = a + (b - a) * k as f64 / (n - 1) as f64;
                if log { x.exp() } else { x }
            })
            .collect();
        // exact endpoints
        v[0] = start;
        v[n - 1] = stop;
        v
    }
}

impl FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("grid '{s}': expected lin|log:start:stop:count"));
        let parts: Vec<&str> = s.split(':').collect();
        let [kind, a, b, n] = parts[..] else {
            return Err(bad());
        };
        let start: f64 = a.trim().parse().map_err(|_| bad())?;
        let stop: f64 = b.trim().parse().map_err(|_| bad())?;
        let count: usize = n.trim().parse().map_err(|_| bad())?;
        if count == 0 || !start.is_finite() || !stop.is_finite() {
            return Err(bad());
        }
        match kind {
            "lin" => Ok(Grid::Linear { start, stop, count }),
            "log" if start > 0.0 && stop > 0.0 => Ok(Grid::Log { start, stop, count }),
            "log" => Err(Error::InvalidParameter(format!("grid '{s}': log spacing needs positive bounds"))),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Grid::Linear { start, stop, count } => write!(f, "lin:{start}:{stop}:{count}"),
            Grid::Log { start, stop, count } => write!(f, "log:{start}:{stop}:{count}"),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepPoint {
    pub value: f64,
    #[serde(flatten)]
    pub report: EfficiencyReport,
}

/// Evaluates every grid value on a pool of `jobs` workers (0 picks the
/// default) and returns points in grid order.
pub fn sweep(
    sys: &SystemSpec,
    param: &dyn SweepParameter,
    values: &[f64],
    builder: &dyn SupermatrixBuilder,
    secular_tol: f64,
    rho0: &DensityState,
    jobs: usize,
) -> Result<Vec<SweepPoint>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;
    pool.install(|| {
        values
            .par_iter()
            .map(|&value| {
                let point = param.apply(sys, value)?;
                let report = evaluate(&point, builder, secular_tol, rho0)?;
                Ok(SweepPoint { value, report })
            })
            .collect()
    })
}

pub fn write_curve_csv(w: &mut impl Write, label: &str, points: &[SweepPoint]) -> Result<()> {
    writeln!(w, "{label},eta,tau_ps,eta_loss,residual")?;
    for p in points {
        let tau = p.report.tau.map_or_else(|| "nan".to_string(), |t| format!("{t:.12e}"));
        writeln!(
            w,
            "{:.12e},{:.12e},{tau},{:.12e},{:.12e}",
            p.value, p.report.eta, p.report.eta_loss, p.report.residual
        )?;
    }
    Ok(())
}
