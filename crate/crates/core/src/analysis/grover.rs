use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{DensityState, NetworkSpec, HBAR_CM1_PS};

/// α and β at or below this count as "≪ 1".
pub const GROVER_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, Serialize)]
pub struct GroverReport {
    pub target: usize,
    /// max_t ⟨target|U(t) ρ₀ U(t)†|target⟩ over the grid.
    pub max_overlap: f64,
    /// Earliest grid time attaining the maximum, ps.
    pub time_of_max: f64,
    /// 1 − ⟨ψ_ES|ρ₀|ψ_ES⟩ for the equal superposition ψ_ES.
    pub alpha: f64,
    /// 1 − max_overlap.
    pub beta: f64,
    pub condition_i: bool,
    pub condition_ii: bool,
    /// Scaling t_f ∝ √N needs several sizes; only t_f/√N is reported.
    pub condition_iii: Option<bool>,
    pub time_over_sqrt_n: f64,
}

/// Scans the dissipation-free evolution e^{−iHt/ħ} on the grid 0, dt, …, t_max.
pub fn grover_check(
    net: &NetworkSpec,
    rho0: &DensityState,
    target: usize,
    t_max: f64,
    dt: f64,
) -> Result<GroverReport> {
    let n = net.n_sites();
    net.check_site(target)?;
    if rho0.n_sites() != n {
        return Err(Error::DimensionMismatch(format!("{}-site state", rho0.n_sites())));
    }
    if !(t_max > 0.0 && dt > 0.0 && t_max.is_finite() && dt.is_finite()) {
        return Err(Error::InvalidParameter("t_max and dt must be positive".into()));
    }
    let eig = net.hamiltonian().symmetric_eigen();
    let v = &eig.eigenvectors;
    let steps = (t_max / dt).round() as usize;
    let mut best = (f64::NEG_INFINITY, 0.0);
    for s in 0..=steps {
        let t = s as f64 * dt;
        // u_j = ⟨target|U(t)|j⟩
        let phases: Vec<Complex64> = eig
            .eigenvalues
            .iter()
            .map(|e| Complex64::from_polar(1.0, -e * t / HBAR_CM1_PS))
            .collect();
        let u: Vec<Complex64> = (0..n)
            .map(|j| (0..n).map(|k| v[(target, k)] * phases[k] * v[(j, k)]).sum())
            .collect();
        let mut overlap = Complex64::new(0.0, 0.0);
        for a in 0..n {
            for b in 0..n {
                overlap += u[a] * rho0.matrix[(a, b)] * u[b].conj();
            }
        }
        if overlap.re > best.0 + 1e-15 {
            best = (overlap.re, t);
        }
    }
    let inv = 1.0 / n as f64;
    let es_overlap: f64 = rho0.matrix.iter().map(|z| z.re).sum::<f64>() * inv;
    let alpha = 1.0 - es_overlap;
    let beta = 1.0 - best.0;
    Ok(GroverReport {
        target,
        max_overlap: best.0,
        time_of_max: best.1,
        alpha,
        beta,
        condition_i: alpha <= GROVER_THRESHOLD,
        condition_ii: beta <= GROVER_THRESHOLD,
        condition_iii: None,
        time_over_sqrt_n: best.1 / (n as f64).sqrt(),
    })
}
