//! Exciton basis, secular Bohr-frequency grouping and the phonon bath rate
//! functions.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{energy_to_angular, BathSpec, NetworkSpec, HBAR_CM1_PS, KB_CM1_PER_K};

/// Absolute tolerance (cm^-1) under which two Bohr frequencies are treated
/// as the same secular frequency.
pub const DEFAULT_SECULAR_TOL_CM1: f64 = 1e-6;

/// Transitions sharing one Bohr frequency. Each pair is `(to, from)` in
/// exciton indices with `ħω = ε_from − ε_to`, so positive `omega` means
/// relaxation (emission into the bath).
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGroup {
    /// Angular frequency in ps^-1.
    pub omega: f64,
    pub pairs: Vec<(usize, usize)>,
}

impl FrequencyGroup {
    pub fn is_zero(&self) -> bool {
        self.omega == 0.0
    }

    /// Energy gap in cm^-1.
    pub fn gap(&self) -> f64 {
        self.omega * HBAR_CM1_PS
    }
}

/// Eigenbasis of the channel Hamiltonian.
#[derive(Debug, Clone)]
pub struct ExcitonBasis {
    energies: DVector<f64>,
    coefficients: DMatrix<f64>,
    groups: Vec<FrequencyGroup>,
    tol: f64,
}

impl ExcitonBasis {
    pub fn new(net: &NetworkSpec, tol: f64) -> Self {
        let n = net.n_sites();
        let eig = net.hamiltonian().symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

        let energies = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
        let mut coefficients = DMatrix::zeros(n, n);
        for (col, &k) in order.iter().enumerate() {
            let mut v = eig.eigenvectors.column(k).clone_owned();
            // largest-magnitude component positive
            let mut imax = 0;
            for i in 1..n {
                if v[i].abs() > v[imax].abs() {
                    imax = i;
                }
            }
            if v[imax] < 0.0 {
                v.neg_mut();
            }
            coefficients.set_column(col, &v);
        }
        let groups = bohr_frequencies(energies.as_slice(), tol);
        Self {
            energies,
            coefficients,
            groups,
            tol,
        }
    }

    pub fn n(&self) -> usize {
        self.energies.len()
    }

    /// Exciton energies ε_M in cm^-1, ascending.
    pub fn energies(&self) -> &DVector<f64> {
        &self.energies
    }

    /// Column M holds exciton M in the site basis: `c[(m, M)] = c_m(M)`.
    pub fn coefficients(&self) -> &DMatrix<f64> {
        &self.coefficients
    }

    pub fn groups(&self) -> &[FrequencyGroup] {
        &self.groups
    }

    pub fn secular_tol(&self) -> f64 {
        self.tol
    }

    /// Exciton-basis Gibbs state ∝ Σ_M exp(−ε_M/k_BT)|M⟩⟨M| in the site basis.
    /// At T = 0 this is the ground exciton projector.
    pub fn thermal_state(&self, temperature: f64) -> DMatrix<f64> {
        let n = self.n();
        let e0 = self.energies[0];
        let weights: Vec<f64> = (0..n)
            .map(|m| {
                if temperature == 0.0 {
                    if m == 0 { 1.0 } else { 0.0 }
                } else {
                    (-(self.energies[m] - e0) / (KB_CM1_PER_K * temperature)).exp()
                }
            })
            .collect();
        let z: f64 = weights.iter().sum();
        let p = DMatrix::from_diagonal(&DVector::from_iterator(n, weights.iter().map(|w| w / z)));
        &self.coefficients * p * self.coefficients.transpose()
    }

    pub fn regroup(&self, tol: f64) -> Self {
        Self {
            groups: bohr_frequencies(self.energies.as_slice(), tol),
            tol,
            ..self.clone()
        }
    }
}

pub fn diagonalize(net: &NetworkSpec) -> ExcitonBasis {
    ExcitonBasis::new(net, DEFAULT_SECULAR_TOL_CM1)
}

/// Groups all N² ordered exciton pairs by Bohr frequency. Differences closer
/// than `tol` (cm^-1) are chained into one group; the group holding the
/// diagonal pairs sits exactly at ω = 0 and groups come in ±ω mirror pairs.
pub fn bohr_frequencies(energies: &[f64], tol: f64) -> Vec<FrequencyGroup> {
    let n = energies.len();
    let mut diffs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for to in 0..n {
        for from in 0..n {
            let d = if to == from {
                0.0
            } else {
                energies[from] - energies[to]
            };
            diffs.push((d, to, from));
        }
    }
    diffs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut clusters: Vec<Vec<(f64, usize, usize)>> = Vec::new();
    for entry in diffs {
        match clusters.last_mut() {
            Some(c) if entry.0 - c.last().unwrap().0 <= tol => c.push(entry),
            _ => clusters.push(vec![entry]),
        }
    }

    clusters
        .into_iter()
        .map(|c| {
            let has_diagonal = c.iter().any(|&(_, to, from)| to == from);
            let gap = if has_diagonal {
                0.0
            } else {
                // mean over sorted magnitudes so that ±ω groups mirror exactly
                let sign = c[0].0.signum();
                let mut mags: Vec<f64> = c.iter().map(|e| e.0.abs()).collect();
                mags.sort_by(f64::total_cmp);
                sign * mags.iter().sum::<f64>() / mags.len() as f64
            };
            let mut pairs: Vec<(usize, usize)> = c.iter().map(|&(_, to, from)| (to, from)).collect();
            pairs.sort();
            FrequencyGroup {
                omega: energy_to_angular(gap),
                pairs,
            }
        })
        .collect()
}

/// Ohmic spectral density J(ω) = (E_R/ħ)(ω/ω_c) exp(−ω/ω_c) for ω > 0, zero
/// otherwise; ω in ps^-1, result in ps^-1.
pub fn spectral_density(omega: f64, bath: &BathSpec) -> f64 {
    if omega <= 0.0 {
        return 0.0;
    }
    let wc = bath.cutoff_angular();
    bath.reorg_energy() / HBAR_CM1_PS * (omega / wc) * (-omega / wc).exp()
}

/// Bose-Einstein occupation n(ω) = 1 / (exp(ħω/kT) − 1).
pub fn bose_occupation(omega: f64, temperature: f64) -> Result<f64> {
    if omega == 0.0 {
        return Err(Error::ZeroFrequency);
    }
    if temperature == 0.0 {
        return Ok(if omega > 0.0 { 0.0 } else { -1.0 });
    }
    let x = HBAR_CM1_PS * omega / (KB_CM1_PER_K * temperature);
    Ok(1.0 / x.exp_m1())
}

/// Phonon transition rate γ(ω) in ps^-1: emission 2πJ(ω)(1 + n(ω)) for
/// ω > 0, absorption 2πJ(|ω|)n(|ω|) for ω < 0, and the finite ω → 0 limit
/// 2π E_R k_B T / (ħ² ω_c) for pure dephasing.
pub fn phonon_rate(omega: f64, bath: &BathSpec) -> f64 {
    let t = bath.temperature();
    if bath.reorg_energy() == 0.0 {
        return 0.0;
    }
    if omega == 0.0 {
        return zero_frequency_rate(bath);
    }
    let w = omega.abs();
    let j = spectral_density(w, bath);
    if t == 0.0 {
        return if omega > 0.0 { 2.0 * PI * j } else { 0.0 };
    }
    let n = bose_occupation(w, t).expect("nonzero frequency");
    if omega > 0.0 {
        2.0 * PI * j * (1.0 + n)
    } else {
        2.0 * PI * j * n
    }
}

fn zero_frequency_rate(bath: &BathSpec) -> f64 {
    2.0 * PI * bath.reorg_energy() * KB_CM1_PER_K * bath.temperature()
        / (HBAR_CM1_PS * HBAR_CM1_PS * bath.cutoff_angular())
}
