//! Domain types: channel networks, phonon bath parameters, density states,
//! physical constants and the JSON network file format.
//!
//! Units throughout the crate: energies in cm^-1, times in ps, rates and
//! angular frequencies in ps^-1, temperatures in K.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{DMatrix, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub const SPEED_OF_LIGHT_CM_PER_S: f64 = 29_979_245_800.0;
const PLANCK_J_S: f64 = 6.626_070_15e-34;
const BOLTZMANN_J_PER_K: f64 = 1.380_649e-23;

/// Reduced Planck constant in cm^-1 ps (≈ 5.3088).
pub const HBAR_CM1_PS: f64 = 1.0e12 / (2.0 * std::f64::consts::PI * SPEED_OF_LIGHT_CM_PER_S);

/// Boltzmann constant in cm^-1 / K (≈ 0.69504).
pub const KB_CM1_PER_K: f64 = BOLTZMANN_J_PER_K / (PLANCK_J_S * SPEED_OF_LIGHT_CM_PER_S);

/// 1 Debye^2 / Angstrom^3 expressed in cm^-1.
pub const DEBYE2_PER_ANGSTROM3_CM1: f64 = 1.0e-19 / (PLANCK_J_S * SPEED_OF_LIGHT_CM_PER_S);

/// Angular frequency (ps^-1) of an energy given in cm^-1.
pub fn energy_to_angular(energy_cm1: f64) -> f64 {
    energy_cm1 / HBAR_CM1_PS
}

pub fn angular_to_energy(omega_ps1: f64) -> f64 {
    omega_ps1 * HBAR_CM1_PS
}

/// Thermal energy k_B T in cm^-1.
pub fn thermal_energy(temperature_k: f64) -> f64 {
    KB_CM1_PER_K * temperature_k
}

/// An N-site chromophore channel: site energies, coherent couplings, trapping
/// rates into the acceptor and the uniform recombination (loss) rate.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    site_energies: Vec<f64>,
    couplings: DMatrix<f64>,
    trap_rates: Vec<f64>,
    loss_rate: f64,
    labels: Vec<String>,
}

impl NetworkSpec {
    pub fn new(
        site_energies: Vec<f64>,
        couplings: DMatrix<f64>,
        trap_rates: Vec<f64>,
        loss_rate: f64,
    ) -> Result<Self> {
        let n = site_energies.len();
        let labels = (1..=n).map(|i| i.to_string()).collect();
        Self::with_labels(site_energies, couplings, trap_rates, loss_rate, labels)
    }

    pub fn with_labels(
        site_energies: Vec<f64>,
        couplings: DMatrix<f64>,
        trap_rates: Vec<f64>,
        loss_rate: f64,
        labels: Vec<String>,
    ) -> Result<Self> {
        let n = site_energies.len();
        if n == 0 {
            return Err(Error::InvalidParameter(
                "network needs at least one site".into(),
            ));
        }
        if couplings.nrows() != n || couplings.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "coupling matrix is {}x{} for {n} sites",
                couplings.nrows(),
                couplings.ncols()
            )));
        }
        if trap_rates.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} trap rates for {n} sites",
                trap_rates.len()
            )));
        }
        if labels.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {n} sites",
                labels.len()
            )));
        }
        if site_energies.iter().any(|e| !e.is_finite()) || couplings.iter().any(|v| !v.is_finite())
        {
            return Err(Error::InvalidParameter("non-finite energy".into()));
        }
        for i in 0..n {
            if couplings[(i, i)] != 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "nonzero diagonal coupling at site {i}"
                )));
            }
            for j in (i + 1)..n {
                if couplings[(i, j)] != couplings[(j, i)] {
                    return Err(Error::AsymmetricCouplings(i, j));
                }
            }
        }
        for (i, &k) in trap_rates.iter().enumerate() {
            check_rate(k, &format!("trap rate at site {i}"))?;
        }
        check_rate(loss_rate, "loss rate")?;
        Ok(Self {
            site_energies,
            couplings,
            trap_rates,
            loss_rate,
            labels,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.site_energies.len()
    }

    pub fn site_energies(&self) -> &[f64] {
        &self.site_energies
    }

    pub fn couplings(&self) -> &DMatrix<f64> {
        &self.couplings
    }

    pub fn trap_rates(&self) -> &[f64] {
        &self.trap_rates
    }

    pub fn loss_rate(&self) -> f64 {
        self.loss_rate
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Channel Hamiltonian H_C in cm^-1 (site basis).
    pub fn hamiltonian(&self) -> DMatrix<f64> {
        let mut h = self.couplings.clone();
        for (i, &e) in self.site_energies.iter().enumerate() {
            h[(i, i)] = e;
        }
        h
    }

    /// Diagonal trapping operator Σ κ_m |m⟩⟨m| in ps^-1.
    pub fn trap_operator(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.trap_rates))
    }

    pub fn trap_sites(&self) -> Vec<usize> {
        self.trap_rates
            .iter()
            .enumerate()
            .filter(|(_, &k)| k > 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn set_trap_rate(&self, site: usize, rate: f64) -> Result<Self> {
        self.check_site(site)?;
        let mut rates = self.trap_rates.clone();
        rates[site] = rate;
        Self::with_labels(
            self.site_energies.clone(),
            self.couplings.clone(),
            rates,
            self.loss_rate,
            self.labels.clone(),
        )
    }

    pub fn set_loss_rate(&self, rate: f64) -> Result<Self> {
        check_rate(rate, "loss rate")?;
        let mut out = self.clone();
        out.loss_rate = rate;
        Ok(out)
    }

    pub fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.n_sites() {
            return Err(Error::InvalidSite {
                index: site,
                n_sites: self.n_sites(),
            });
        }
        Ok(())
    }
}

fn check_rate(rate: f64, what: &str) -> Result<()> {
    if !rate.is_finite() {
        return Err(Error::InvalidParameter(format!("{what} is not finite")));
    }
    if rate < 0.0 {
        return Err(Error::NegativeRate(format!("{what} = {rate}")));
    }
    Ok(())
}

/// Ohmic spectral density with exponential cutoff, at a given temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathSpec {
    temperature: f64,
    reorg_energy: f64,
    cutoff: f64,
}

impl BathSpec {
    pub fn new(temperature_k: f64, reorg_energy_cm1: f64, cutoff_cm1: f64) -> Result<Self> {
        if !(temperature_k.is_finite() && temperature_k >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "temperature must be >= 0 K, got {temperature_k}"
            )));
        }
        if !(reorg_energy_cm1.is_finite() && reorg_energy_cm1 >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "reorganization energy must be >= 0, got {reorg_energy_cm1}"
            )));
        }
        if !(cutoff_cm1.is_finite() && cutoff_cm1 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "cutoff must be > 0, got {cutoff_cm1}"
            )));
        }
        Ok(Self {
            temperature: temperature_k,
            reorg_energy: reorg_energy_cm1,
            cutoff: cutoff_cm1,
        })
    }

    /// Temperature in K.
    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    /// Reorganization energy E_R in cm^-1.
    pub fn reorg_energy(&self) -> f64 {
        self.reorg_energy
    }

    /// Cutoff energy in cm^-1.
    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    /// Cutoff angular frequency ω_c in ps^-1.
    pub fn cutoff_angular(&self) -> f64 {
        energy_to_angular(self.cutoff)
    }

    pub fn with_temperature(&self, t: f64) -> Result<Self> {
        Self::new(t, self.reorg_energy, self.cutoff)
    }

    pub fn with_reorg_energy(&self, e: f64) -> Result<Self> {
        Self::new(self.temperature, e, self.cutoff)
    }

    pub fn with_cutoff(&self, c: f64) -> Result<Self> {
        Self::new(self.temperature, self.reorg_energy, c)
    }
}

/// Single-excitation density matrix plus the two zero-excitation sinks.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityState {
    pub matrix: CMatrix,
    pub trapped: f64,
    pub lost: f64,
}

impl DensityState {
    pub fn from_matrix(matrix: CMatrix) -> Self {
        Self {
            matrix,
            trapped: 0.0,
            lost: 0.0,
        }
    }

    pub fn n_sites(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn total_weight(&self) -> f64 {
        self.trace() + self.trapped + self.lost
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub fn population(&self, site: usize) -> f64 {
        self.matrix[(site, site)].re
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).camax()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        h.symmetric_eigen().eigenvalues.min()
    }
}

/// Initial channel excitation. Textual form (1-based sites): `site:1`,
/// `mixture:1,6`, `superposition`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InitialState {
    /// 0-based site index.
    Site(usize),
    /// Equal-weight incoherent mixture of 0-based sites.
    Mixture(Vec<usize>),
    /// Equal coherent superposition of all sites.
    UniformSuperposition,
}

impl FromStr for InitialState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parse_site = |t: &str| -> Result<usize> {
            let k: usize = t
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad site index '{t}'")))?;
            k.checked_sub(1).ok_or(Error::InvalidSite {
                index: 0,
                n_sites: 0,
            })
        };
        match s.split_once(':') {
            Some(("site", rest)) => Ok(Self::Site(parse_site(rest)?)),
            Some(("mixture", rest)) => {
                if rest.trim().is_empty() {
                    return Err(Error::EmptySiteSet);
                }
                let sites = rest.split(',').map(parse_site).collect::<Result<_>>()?;
                Ok(Self::Mixture(sites))
            }
            None if s == "superposition" || s == "uniform" => Ok(Self::UniformSuperposition),
            _ => Err(Error::Parse(format!(
                "initial state '{s}' (expected site:K, mixture:K,L,... or superposition)"
            ))),
        }
    }
}

impl fmt::Display for InitialState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Site(k) => write!(f, "site:{}", k + 1),
            Self::Mixture(s) => {
                let parts: Vec<String> = s.iter().map(|k| (k + 1).to_string()).collect();
                write!(f, "mixture:{}", parts.join(","))
            }
            Self::UniformSuperposition => write!(f, "superposition"),
        }
    }
}

pub fn initial_state(kind: &InitialState, n_sites: usize) -> Result<DensityState> {
    let check = |k: usize| {
        if k >= n_sites {
            Err(Error::InvalidSite { index: k, n_sites })
        } else {
            Ok(())
        }
    };
    let mut rho = CMatrix::zeros(n_sites, n_sites);
    match kind {
        InitialState::Site(k) => {
            check(*k)?;
            rho[(*k, *k)] = Complex64::new(1.0, 0.0);
        }
        InitialState::Mixture(sites) => {
            if sites.is_empty() {
                return Err(Error::EmptySiteSet);
            }
            let w = 1.0 / sites.len() as f64;
            for &k in sites {
                check(k)?;
                rho[(k, k)] += Complex64::new(w, 0.0);
            }
        }
        InitialState::UniformSuperposition => {
            rho.fill(Complex64::new(1.0 / n_sites as f64, 0.0));
        }
    }
    Ok(DensityState::from_matrix(rho))
}

/// Point-dipole coupling in cm^-1 for transition dipoles in Debye separated
/// by `r` in Angstrom.
pub fn dipole_coupling(mu_m: &Vector3<f64>, mu_n: &Vector3<f64>, r: &Vector3<f64>) -> Result<f64> {
    let dist = r.norm();
    if dist == 0.0 || !dist.is_finite() {
        return Err(Error::ZeroSeparation);
    }
    let orientation = mu_m.dot(mu_n) - 3.0 * mu_m.dot(r) * mu_n.dot(r) / (dist * dist);
    Ok(DEBYE2_PER_ANGSTROM3_CM1 * orientation / dist.powi(3))
}

/// Network together with its bath, as stored in a network file.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub network: NetworkSpec,
    pub bath: BathSpec,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SiteEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    energy_cm1: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BathEntry {
    #[serde(rename = "temperature_K")]
    temperature_k: f64,
    reorg_cm1: f64,
    cutoff_cm1: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    sites: Vec<SiteEntry>,
    couplings: Vec<(usize, usize, f64)>,
    trap_rates_ps1: BTreeMap<String, f64>,
    loss_rate_ps1: f64,
    bath: BathEntry,
}

impl SystemSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: NetworkFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let n = file.sites.len();
        let energies: Vec<f64> = file.sites.iter().map(|s| s.energy_cm1).collect();
        let labels: Vec<String> = file
            .sites
            .iter()
            .enumerate()
            .map(|(i, s)| s.label.clone().unwrap_or_else(|| (i + 1).to_string()))
            .collect();

        let mut entries: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for &(i, j, v) in &file.couplings {
            if i >= n || j >= n {
                return Err(Error::DimensionMismatch(format!(
                    "coupling ({i}, {j}) for {n} sites"
                )));
            }
            if i == j {
                return Err(Error::InvalidParameter(format!(
                    "diagonal coupling at site {i}"
                )));
            }
            if let Some(&prev) = entries.get(&(i, j)) {
                if prev != v {
                    return Err(Error::Parse(format!("conflicting duplicate coupling ({i}, {j})")));
                }
            }
            entries.insert((i, j), v);
        }
        let mut couplings = DMatrix::zeros(n, n);
        for (&(i, j), &v) in &entries {
            if let Some(&w) = entries.get(&(j, i)) {
                if w != v {
                    return Err(Error::AsymmetricCouplings(i.min(j), i.max(j)));
                }
            }
            couplings[(i, j)] = v;
            couplings[(j, i)] = v;
        }

        let mut traps = vec![0.0; n];
        for (key, &rate) in &file.trap_rates_ps1 {
            let k: usize = key
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("trap site key '{key}' is not an index")))?;
            if k >= n {
                return Err(Error::DimensionMismatch(format!(
                    "trap site {k} for {n} sites"
                )));
            }
            traps[k] = rate;
        }

        let network = NetworkSpec::with_labels(energies, couplings, traps, file.loss_rate_ps1, labels)?;
        let bath = BathSpec::new(
            file.bath.temperature_k,
            file.bath.reorg_cm1,
            file.bath.cutoff_cm1,
        )?;
        Ok(Self { network, bath })
    }

    pub fn to_json(&self) -> String {
        let net = &self.network;
        let n = net.n_sites();
        let sites = net
            .site_energies
            .iter()
            .zip(&net.labels)
            .map(|(&e, l)| SiteEntry {
                label: Some(l.clone()),
                energy_cm1: e,
            })
            .collect();
        let mut couplings = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let v = net.couplings[(i, j)];
                if v != 0.0 {
                    couplings.push((i, j, v));
                }
            }
        }
        let trap_rates_ps1 = net
            .trap_rates
            .iter()
            .enumerate()
            .filter(|(_, &k)| k != 0.0)
            .map(|(i, &k)| (i.to_string(), k))
            .collect();
        let file = NetworkFile {
            sites,
            couplings,
            trap_rates_ps1,
            loss_rate_ps1: net.loss_rate,
            bath: BathEntry {
                temperature_k: self.bath.temperature,
                reorg_cm1: self.bath.reorg_energy,
                cutoff_cm1: self.bath.cutoff,
            },
        };
        serde_json::to_string_pretty(&file).expect("network file serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::NetworkNotFound(path.to_path_buf()),
            _ => Error::Io(e),
        })?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }
}

pub fn load_network(path: impl AsRef<Path>) -> Result<NetworkSpec> {
    SystemSpec::load(path).map(|s| s.network)
}

pub fn load_system(path: impl AsRef<Path>) -> Result<SystemSpec> {
    SystemSpec::load(path)
}

const FMO_JSON: &str = include_str!("../data/fmo.json");

/// The bundled seven-site FMO channel (C. tepidum) with its default bath:
/// E_R = 35 cm^-1, ω_c = 150 cm^-1, T = 295 K, κ_3 = 1 ps^-1, γ^r = 1 ns^-1.
pub fn fmo() -> SystemSpec {
    SystemSpec::from_json(FMO_JSON).expect("bundled FMO file is valid")
}
