//! Time evolution in Liouville space and the infinite-horizon integrals
//! behind the efficiency and transfer time.

use std::collections::HashMap;
use std::io::Write;

use nalgebra::linalg::Schur;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::liouville::{devectorize, vectorize, CVector, Supermatrix};
use crate::model::{CMatrix, DensityState};

/// Sampled evolution of a density state together with its sink fluxes.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityState>,
    /// Σ κ_m ρ_mm(t), ps^-1.
    pub trapped_flux: Vec<f64>,
    /// γ^r Tr ρ(t), ps^-1.
    pub lost_flux: Vec<f64>,
}

impl Trajectory {
    /// Delimited text: time, site populations, |coherences| (upper triangle),
    /// trapped and lost weight.
    pub fn write_csv(&self, w: &mut impl Write) -> Result<()> {
        let n = self.states.first().map_or(0, |s| s.n_sites());
        let mut header = vec!["time_ps".to_string()];
        header.extend((1..=n).map(|m| format!("pop_{m}")));
        for i in 0..n {
            for j in (i + 1)..n {
                header.push(format!("coh_{}_{}", i + 1, j + 1));
            }
        }
        header.push("trapped".into());
        header.push("lost".into());
        writeln!(w, "{}", header.join(","))?;
        for (t, s) in self.times.iter().zip(&self.states) {
            let mut row = vec![format!("{t:.6}")];
            row.extend((0..n).map(|m| format!("{:.12e}", s.population(m))));
            for i in 0..n {
                for j in (i + 1)..n {
                    row.push(format!("{:.12e}", s.matrix[(i, j)].norm()));
                }
            }
            row.push(format!("{:.12e}", s.trapped));
            row.push(format!("{:.12e}", s.lost));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Generator extended by two sink coordinates fed by the trap and loss
/// fluxes, so that total weight is carried exactly by the exponential.
fn augmented_generator(sm: &Supermatrix) -> CMatrix {
    let d = sm.dim();
    let mut g = CMatrix::zeros(d + 2, d + 2);
    g.view_mut((0, 0), (d, d)).copy_from(sm.matrix());
    let trap = sm.trap_functional();
    let loss = sm.loss_functional();
    for k in 0..d {
        g[(d, k)] = Complex64::new(trap[k], 0.0);
        g[(d + 1, k)] = Complex64::new(loss[k], 0.0);
    }
    g
}

struct Stepper {
    generator: CMatrix,
    cache: HashMap<u64, CMatrix>,
}

impl Stepper {
    fn new(generator: CMatrix) -> Self {
        Self {
            generator,
            cache: HashMap::new(),
        }
    }

    fn step(&mut self, dt: f64) -> &CMatrix {
        let g = &self.generator;
        self.cache
            .entry(dt.to_bits())
            .or_insert_with(|| (g * Complex64::new(dt, 0.0)).exp())
    }
}

fn augmented_state(rho: &DensityState) -> CVector {
    let v = vectorize(&rho.matrix);
    let d = v.len();
    let mut x = CVector::zeros(d + 2);
    x.rows_mut(0, d).copy_from(&v);
    x[d] = Complex64::new(rho.trapped, 0.0);
    x[d + 1] = Complex64::new(rho.lost, 0.0);
    x
}

fn split_state(x: &CVector, n: usize) -> DensityState {
    let d = n * n;
    let v = x.rows(0, d).clone_owned();
    DensityState {
        matrix: devectorize(&v, n).expect("consistent dimension"),
        trapped: x[d].re,
        lost: x[d + 1].re,
    }
}

/// Evolves `rho0` under `sm`, sampling at `times` (ascending, ≥ 0). States
/// are exp(M t)·vec(ρ₀); the sinks are integrated by the same exponential.
pub fn propagate(sm: &Supermatrix, rho0: &DensityState, times: &[f64]) -> Result<Trajectory> {
    if rho0.n_sites() != sm.n() {
        return Err(Error::DimensionMismatch(format!(
            "{}-site state for a {}-site supermatrix",
            rho0.n_sites(),
            sm.n()
        )));
    }
    if times.iter().any(|t| !t.is_finite())
        || times.first().is_some_and(|&t| t < 0.0)
        || times.windows(2).any(|w| w[1] < w[0])
    {
        return Err(Error::NonAscendingTimes);
    }
    let n = sm.n();
    let trap = sm.trap_functional();
    let loss_rate = sm.loss_rate();
    let mut stepper = Stepper::new(augmented_generator(sm));
    let mut x = augmented_state(rho0);
    let mut now = 0.0;
    let mut traj = Trajectory {
        times: Vec::with_capacity(times.len()),
        states: Vec::with_capacity(times.len()),
        trapped_flux: Vec::with_capacity(times.len()),
        lost_flux: Vec::with_capacity(times.len()),
    };
    for &t in times {
        let dt = t - now;
        if dt > 0.0 {
            x = stepper.step(dt) * &x;
        }
        now = t;
        let state = split_state(&x, n);
        let flux: f64 = (0..n * n).map(|k| trap[k] * x[k].re).sum();
        traj.trapped_flux.push(flux);
        traj.lost_flux.push(loss_rate * state.trace());
        traj.times.push(t);
        traj.states.push(state);
    }
    Ok(traj)
}

/// Largest real part among the eigenvalues of M.
pub fn spectral_abscissa(sm: &Supermatrix) -> f64 {
    let (_, t) = Schur::new(sm.matrix().clone()).unpack();
    t.diagonal().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
}

/// Supermatrices with abscissa above this (ps^-1) are treated as non-decaying.
pub const HURWITZ_MARGIN: f64 = 1e-10;

pub fn ensure_hurwitz(sm: &Supermatrix) -> Result<f64> {
    let a = spectral_abscissa(sm);
    if a.is_nan() || a >= -HURWITZ_MARGIN {
        return Err(Error::NonHurwitz(a));
    }
    Ok(a)
}

/// S1 = ∫₀^∞ ρ dt and S2 = ∫₀^∞ t ρ dt, from M·vec(S1) = −vec(ρ₀) and
/// M·vec(S2) = −vec(S1).
pub fn stationary_integrals(sm: &Supermatrix, rho0: &DensityState) -> Result<(CMatrix, CMatrix)> {
    ensure_hurwitz(sm)?;
    let (s1, s2) = resolvent_moments(sm.matrix(), &vectorize(&rho0.matrix))?;
    Ok((devectorize(&s1, sm.n())?, devectorize(&s2, sm.n())?))
}

pub(crate) fn resolvent_moments(m: &CMatrix, v0: &CVector) -> Result<(CVector, CVector)> {
    let lu = m.clone().lu();
    let s1 = lu.solve(&(-v0)).ok_or(Error::Singular)?;
    let s2 = lu.solve(&(-&s1)).ok_or(Error::Singular)?;
    Ok((s1, s2))
}

/// Horizon 20/|abscissa| leaving a residual weight below e^-20.
pub fn default_horizon(sm: &Supermatrix) -> Result<f64> {
    Ok(20.0 / ensure_hurwitz(sm)?.abs())
}

/// Time-domain integrals of ρ(t) by composite Boole quadrature over
/// exp(M δ) steps, with a fine uniform phase followed by panels of doubling
/// width. Independent of the linear solves used by
/// [`stationary_integrals`]; accurate once coherences have decayed within
/// the fine phase.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureOptions {
    /// Upper integration limit, ps. `None` uses [`default_horizon`].
    pub horizon: Option<f64>,
    /// Sub-step of the fine phase, ps.
    pub fine_step: f64,
    /// Length of the fine phase, ps.
    pub fine_span: f64,
    /// Boole panels per doubling level.
    pub panels_per_level: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            horizon: None,
            fine_step: 0.0025,
            fine_span: 50.0,
            panels_per_level: 64,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TimeIntegrals {
    pub s1: CMatrix,
    pub s2: CMatrix,
    pub horizon: f64,
}

const BOOLE: [f64; 5] = [7.0, 32.0, 12.0, 32.0, 7.0];

pub fn time_integrals(
    sm: &Supermatrix,
    rho0: &DensityState,
    opts: QuadratureOptions,
) -> Result<TimeIntegrals> {
    let horizon = match opts.horizon {
        Some(h) => h,
        None => default_horizon(sm)?,
    };
    let d = sm.dim();
    let mut x = vectorize(&rho0.matrix);
    let mut s1 = CVector::zeros(d);
    let mut s2 = CVector::zeros(d);
    let mut t = 0.0;
    let mut delta = opts.fine_step;
    let mut step = (sm.matrix() * Complex64::new(delta, 0.0)).exp();
    let mut panels = ((opts.fine_span / (4.0 * delta)).ceil() as usize).max(1);
    while t < horizon {
        let start = t;
        for p in 0..panels {
            // x holds ρ(t) at the panel start
            let t0 = start + (4 * p) as f64 * delta;
            let w = 2.0 * delta / 45.0;
            let mut y = x.clone();
            for (k, &c) in BOOLE.iter().enumerate() {
                if k > 0 {
                    y = &step * &y;
                }
                let tk = t0 + k as f64 * delta;
                s1.axpy(Complex64::new(w * c, 0.0), &y, Complex64::new(1.0, 0.0));
                s2.axpy(Complex64::new(w * c * tk, 0.0), &y, Complex64::new(1.0, 0.0));
            }
            x = y;
            t = start + (4 * (p + 1)) as f64 * delta;
            if t >= horizon - 1e-9 * delta {
                break;
            }
        }
        step = &step * &step;
        delta *= 2.0;
        panels = opts.panels_per_level;
    }
    Ok(TimeIntegrals {
        s1: devectorize(&s1, sm.n())?,
        s2: devectorize(&s2, sm.n())?,
        horizon: t,
    })
}
