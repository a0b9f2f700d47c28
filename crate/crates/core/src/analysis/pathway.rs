use std::io::Write;

use nalgebra::{DVector, Dyn, LU};
use num_complex::Complex64;
use serde::Serialize;

use crate::dynamics::ensure_hurwitz;
use crate::error::{Error, Result};
use crate::lindblad::ChannelSet;
use crate::liouville::{vec_index, vectorize, CVector, Supermatrix};
use crate::model::{CMatrix, DensityState};

/// Perturbation of the single phonon jump m → n: the population transfer
/// Γ(n,m,n,m) conj(W)⊗W with W = |n⟩⟨m|, and its share ½Γ(n,m,n,m) of the
/// damping of site m. Trace preserving; summing over n recovers the
/// diagonal damping Θ(m,m).
pub fn site_pair_operator(channels: &ChannelSet, from: usize, to: usize) -> CMatrix {
    let n = channels.n();
    let rate = channels.gamma(to, from, to, from).re;
    let mut op = CMatrix::zeros(n * n, n * n);
    if rate == 0.0 {
        return op;
    }
    let r = Complex64::new(rate, 0.0);
    op[(vec_index(to, to, n), vec_index(from, from, n))] += r;
    for k in 0..n {
        // ρ_mk and ρ_km each lose ½ rate; ρ_mm loses the full rate
        op[(vec_index(from, k, n), vec_index(from, k, n))] -= r * 0.5;
        op[(vec_index(k, from, n), vec_index(k, from, n))] -= r * 0.5;
    }
    op
}

/// Reuses one factorization of M for every site-pair direction.
pub struct PathwaySolver<'a> {
    channels: &'a ChannelSet,
    lu: LU<Complex64, Dyn, Dyn>,
    x: CVector,
    c: DVector<f64>,
}

impl<'a> PathwaySolver<'a> {
    pub fn new(sm: &Supermatrix, channels: &'a ChannelSet, rho0: &DensityState) -> Result<Self> {
        if channels.n() != sm.n() || rho0.n_sites() != sm.n() {
            return Err(Error::DimensionMismatch("pathway inputs".into()));
        }
        ensure_hurwitz(sm)?;
        let lu = sm.matrix().clone().lu();
        let x = lu.solve(&(-vectorize(&rho0.matrix))).ok_or(Error::Singular)?;
        Ok(Self {
            channels,
            lu,
            x,
            c: sm.trap_functional(),
        })
    }

    /// ∂η along the m → n pair operator.
    pub fn susceptibility(&self, from: usize, to: usize) -> Result<f64> {
        let n = self.channels.n();
        for site in [from, to] {
            if site >= n {
                return Err(Error::InvalidSite { index: site, n_sites: n });
            }
        }
        if from == to {
            return Err(Error::InvalidParameter(format!("site pair ({from}, {to}) is not a jump")));
        }
        let op = site_pair_operator(self.channels, from, to);
        let dx = self.lu.solve(&(-(op * &self.x))).ok_or(Error::Singular)?;
        Ok(self.c.iter().zip(dx.iter()).map(|(c, x)| c * x.re).sum())
    }
}

pub fn site_pair_susceptibility(
    sm: &Supermatrix,
    channels: &ChannelSet,
    rho0: &DensityState,
    from: usize,
    to: usize,
) -> Result<f64> {
    PathwaySolver::new(sm, channels, rho0)?.susceptibility(from, to)
}

/// Directed edge of the pathway map (0-based sites).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathwayEdge {
    pub from: usize,
    pub to: usize,
    /// Γ(n,m,n,m), ps^-1.
    pub rate: f64,
    pub susceptibility: f64,
}

/// Every ordered pair m ≠ n, row-major in (m, n).
pub fn pathway_map(
    sm: &Supermatrix,
    channels: &ChannelSet,
    rho0: &DensityState,
) -> Result<Vec<PathwayEdge>> {
    let solver = PathwaySolver::new(sm, channels, rho0)?;
    let n = sm.n();
    let mut edges = Vec::with_capacity(n * n.saturating_sub(1));
    for from in 0..n {
        for to in (0..n).filter(|&to| to != from) {
            edges.push(PathwayEdge {
                from,
                to,
                rate: channels.gamma(to, from, to, from).re,
                susceptibility: solver.susceptibility(from, to)?,
            });
        }
    }
    Ok(edges)
}

/// `m,n,rate_ps1,susceptibility` with 1-based sites.
pub fn write_pathway_csv(w: &mut impl Write, edges: &[PathwayEdge]) -> Result<()> {
    writeln!(w, "m,n,rate_ps1,susceptibility")?;
    for e in edges {
        writeln!(w, "{},{},{:.12e},{:.12e}", e.from + 1, e.to + 1, e.rate, e.susceptibility)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::ete;
    use crate::liouville::{Channel, SiteBasisBuilder, SupermatrixBuilder};
    use crate::model::{fmo, initial_state, BathSpec, InitialState, NetworkSpec};
    use crate::spectral::diagonalize;
    use nalgebra::DMatrix;

    #[test]
    fn pair_operators_are_trace_preserving_and_sum_to_population_part() {
        let sys = fmo();
        let basis = diagonalize(&sys.network);
        let ch = ChannelSet::build(&sys.network, &basis, &sys.bath);
        let n = 7;
        let tr = (0..n).map(|m| vec_index(m, m, n)).collect::<Vec<_>>();
        let mut total = CMatrix::zeros(n * n, n * n);
        for m in 0..n {
            for k in (0..n).filter(|&k| k != m) {
                let op = site_pair_operator(&ch, m, k);
                for col in 0..n * n {
                    let s: Complex64 = tr.iter().map(|&i| op[(i, col)]).sum();
                    assert!(s.norm() < 1e-12);
                }
                total += op;
            }
        }
        // population block of the summed operator equals the classical rate matrix
        let sm = SiteBasisBuilder.build(&sys.network, &basis, &sys.bath);
        let phonon = sm.part(Channel::PhononJump) + sm.part(Channel::Dephasing);
        for m in 0..n {
            for k in (0..n).filter(|&k| k != m) {
                let a = total[(tr[k], tr[m])];
                let b = phonon[(tr[k], tr[m])];
                assert!((a - b).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn fd_matches_directional_derivative() {
        let sys = fmo();
        let basis = diagonalize(&sys.network);
        let ch = ChannelSet::build(&sys.network, &basis, &sys.bath);
        let sm = SiteBasisBuilder.build(&sys.network, &basis, &sys.bath);
        let rho = initial_state(&InitialState::Site(0), 7).unwrap();
        let (from, to) = (3, 2);
        let s = site_pair_susceptibility(&sm, &ch, &rho, from, to).unwrap();
        let op = site_pair_operator(&ch, from, to);
        let h = 1e-4;
        let shifted = |d: f64| {
            let parts: Vec<CMatrix> = Channel::ALL
                .iter()
                .map(|&c| {
                    let p = sm.part(c).clone();
                    if c == Channel::Hamiltonian { p + &op * Complex64::new(d, 0.0) } else { p }
                })
                .collect();
            let m = Supermatrix::from_parts(parts, sys.network.trap_rates().to_vec(), sys.network.loss_rate());
            ete(&m, &rho).unwrap().eta
        };
        let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
        assert!((fd - s).abs() < 1e-7, "{fd} {s}");
    }

    #[test]
    fn decoupled_pair_is_zero() {
        // site 3 couples to nothing: no phonon element links it to the dimer
        let j = DMatrix::from_row_slice(3, 3, &[0.0, 50.0, 0.0, 50.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let net = NetworkSpec::new(vec![100.0, 0.0, 300.0], j, vec![0.0, 1.0, 0.0], 0.001).unwrap();
        let bath = BathSpec::new(295.0, 35.0, 150.0).unwrap();
        let basis = diagonalize(&net);
        let ch = ChannelSet::build(&net, &basis, &bath);
        let sm = SiteBasisBuilder.build(&net, &basis, &bath);
        let rho = initial_state(&InitialState::Site(0), 3).unwrap();
        assert_eq!(site_pair_susceptibility(&sm, &ch, &rho, 2, 1).unwrap(), 0.0);
        assert_eq!(site_pair_susceptibility(&sm, &ch, &rho, 0, 2).unwrap(), 0.0);
        assert!(site_pair_susceptibility(&sm, &ch, &rho, 0, 0).is_err());
        assert!(site_pair_susceptibility(&sm, &ch, &rho, 0, 3).is_err());
    }

    #[test]
    fn dimer_downhill_pair_positive() {
        let j = DMatrix::from_row_slice(2, 2, &[0.0, 40.0, 40.0, 0.0]);
        let net = NetworkSpec::new(vec![100.0, 0.0], j, vec![0.0, 1.0], 0.001).unwrap();
        let bath = BathSpec::new(0.0, 35.0, 150.0).unwrap();
        let basis = diagonalize(&net);
        let ch = ChannelSet::build(&net, &basis, &bath);
        let sm = SiteBasisBuilder.build(&net, &basis, &bath);
        let rho = initial_state(&InitialState::Site(0), 2).unwrap();
        assert!(site_pair_susceptibility(&sm, &ch, &rho, 0, 1).unwrap() > 0.0);
        assert!(site_pair_susceptibility(&sm, &ch, &rho, 1, 0).unwrap() < 0.0);
    }
}
