use nalgebra::DVector;
use serde::Serialize;

use crate::dynamics::{ensure_hurwitz, resolvent_moments, time_integrals, QuadratureOptions};
use crate::error::{Error, Result};
use crate::liouville::{vectorize, CVector, Supermatrix, SupermatrixBuilder};
use crate::model::{DensityState, SystemSpec};
use crate::spectral::ExcitonBasis;

/// Slack allowed on η ∈ [0, 1] before a report is rejected.
pub const ETA_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EfficiencyReport {
    /// Probability eventually captured by the trap.
    pub eta: f64,
    /// Mean capture time in ps; absent when nothing is trapped.
    pub tau: Option<f64>,
    /// Probability lost to recombination.
    pub eta_loss: f64,
    /// 1 − η − η_loss.
    pub residual: f64,
}

fn functional(c: &DVector<f64>, x: &CVector) -> f64 {
    c.iter().zip(x.iter()).map(|(c, x)| c * x.re).sum()
}

fn report(sm: &Supermatrix, s1: &CVector, s2: &CVector) -> Result<EfficiencyReport> {
    let eta = functional(&sm.trap_functional(), s1);
    let eta_loss = functional(&sm.loss_functional(), s1);
    if !(-ETA_TOL..=1.0 + ETA_TOL).contains(&eta) || !eta.is_finite() {
        return Err(Error::EfficiencyOutOfRange(eta));
    }
    let tau = (eta > 0.0).then(|| functional(&sm.trap_functional(), s2) / eta);
    Ok(EfficiencyReport {
        eta,
        tau,
        eta_loss,
        residual: 1.0 - eta - eta_loss,
    })
}

/// η = Σ κ_m (S1)_mm and τ = Σ κ_m (S2)_mm / η from the resolvent.
pub fn ete(sm: &Supermatrix, rho0: &DensityState) -> Result<EfficiencyReport> {
    ensure_hurwitz(sm)?;
    let (s1, s2) = resolvent_moments(sm.matrix(), &vectorize(&rho0.matrix))?;
    report(sm, &s1, &s2)
}

/// The same observables from time-domain quadrature of the trajectory.
pub fn ete_quadrature(
    sm: &Supermatrix,
    rho0: &DensityState,
    opts: QuadratureOptions,
) -> Result<EfficiencyReport> {
    let ti = time_integrals(sm, rho0, opts)?;
    report(sm, &vectorize(&ti.s1), &vectorize(&ti.s2))
}

/// Builds the supermatrix of `sys` and evaluates the efficiency.
pub fn evaluate(
    sys: &SystemSpec,
    builder: &dyn SupermatrixBuilder,
    secular_tol: f64,
    rho0: &DensityState,
) -> Result<EfficiencyReport> {
    let basis = ExcitonBasis::new(&sys.network, secular_tol);
    ete(&builder.build(&sys.network, &basis, &sys.bath), rho0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouville::SiteBasisBuilder;
    use crate::model::{fmo, initial_state, BathSpec, InitialState, NetworkSpec};
    use crate::spectral::{diagonalize, DEFAULT_SECULAR_TOL_CM1};
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;

    fn single(kappa: f64, loss: f64) -> Supermatrix {
        let net = NetworkSpec::new(vec![10.0], DMatrix::zeros(1, 1), vec![kappa], loss).unwrap();
        let bath = BathSpec::new(295.0, 35.0, 150.0).unwrap();
        SiteBasisBuilder.build(&net, &diagonalize(&net), &bath)
    }

    #[test]
    fn single_site_closed_form() {
        let (k, g) = (1.3, 0.02);
        let rho = initial_state(&InitialState::Site(0), 1).unwrap();
        let r = ete(&single(k, g), &rho).unwrap();
        assert_relative_eq!(r.eta, k / (k + g), max_relative = 1e-12);
        assert_relative_eq!(r.tau.unwrap(), 1.0 / (k + g), max_relative = 1e-12);
        assert_relative_eq!(r.eta_loss, g / (k + g), max_relative = 1e-12);
        assert!(r.residual.abs() < 1e-14);
    }

    #[test]
    fn no_trap_means_no_efficiency() {
        let rho = initial_state(&InitialState::Site(0), 1).unwrap();
        let r = ete(&single(0.0, 0.5), &rho).unwrap();
        assert_eq!(r.eta, 0.0);
        assert_eq!(r.tau, None);
        assert_relative_eq!(r.eta_loss, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn fmo_defaults() {
        let sys = fmo();
        for site in [0, 5] {
            let rho = initial_state(&InitialState::Site(site), 7).unwrap();
            let r = evaluate(&sys, &SiteBasisBuilder, DEFAULT_SECULAR_TOL_CM1, &rho).unwrap();
            assert!((r.eta - 0.99).abs() <= 0.02, "{r:?}");
            assert!((r.tau.unwrap() - 4.0).abs() <= 1.0, "{r:?}");
            assert!(r.residual.abs() < 1e-8);
        }
    }

    #[test]
    fn quadrature_agrees_with_solve() {
        let sys = fmo();
        let sm = SiteBasisBuilder.build(&sys.network, &diagonalize(&sys.network), &sys.bath);
        let rho = initial_state(&InitialState::Site(5), 7).unwrap();
        let a = ete(&sm, &rho).unwrap();
        let b = ete_quadrature(&sm, &rho, QuadratureOptions::default()).unwrap();
        assert!((a.eta - b.eta).abs() < 1e-6);
        assert!((a.tau.unwrap() - b.tau.unwrap()).abs() < 1e-4);
    }
}
