//! Dissipative channels: secular phonon generators, the jump tensors Γ and
//! Θ, uniform recombination loss, trapping into the acceptor, and the
//! effective non-Hermitian Hamiltonian of the no-jump evolution.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::model::{BathSpec, CMatrix, NetworkSpec, HBAR_CM1_PS};
use crate::spectral::{phonon_rate, ExcitonBasis, FrequencyGroup};

/// Secular generator A_m(ω) for one site and one Bohr-frequency group,
/// stored in the exciton basis (real because the coefficients are real).
#[derive(Debug, Clone)]
pub struct PhononGenerator {
    pub group: usize,
    pub omega: f64,
    pub site: usize,
    pub exciton: DMatrix<f64>,
}

impl PhononGenerator {
    pub fn site_basis(&self, basis: &ExcitonBasis) -> DMatrix<f64> {
        let c = basis.coefficients();
        c * &self.exciton * c.transpose()
    }
}

/// A_m(ω) = Σ_{(to, from) in group} c_m(to) c_m(from) |to⟩⟨from| for every
/// group and site, ordered group-major.
pub fn phonon_generators(basis: &ExcitonBasis) -> Vec<PhononGenerator> {
    let n = basis.n();
    let c = basis.coefficients();
    let mut out = Vec::with_capacity(basis.groups().len() * n);
    for (g, group) in basis.groups().iter().enumerate() {
        for m in 0..n {
            let mut a = DMatrix::zeros(n, n);
            for &(to, from) in &group.pairs {
                a[(to, from)] += c[(m, to)] * c[(m, from)];
            }
            out.push(PhononGenerator {
                group: g,
                omega: group.omega,
                site: m,
                exciton: a,
            });
        }
    }
    out
}

/// Rank-4 jump tensor Γ(m,m',n,n') with its damping contraction Θ(m,n),
/// in ps^-1 and the site basis.
///
/// The jump part of the generator reads Σ Γ(m,m',n,n') W_{mm'} ρ W_{nn'}†
/// with W_{mm'} = |m⟩⟨m'|, and Θ(m,n) = Σ_{m'} Γ(m',m,m',n).
#[derive(Debug, Clone, PartialEq)]
pub struct JumpTensors {
    n: usize,
    gamma: Vec<Complex64>,
    theta: CMatrix,
}

impl JumpTensors {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            gamma: vec![Complex64::new(0.0, 0.0); n * n * n * n],
            theta: CMatrix::zeros(n, n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn index(&self, m: usize, m2: usize, k: usize, k2: usize) -> usize {
        ((m * self.n + m2) * self.n + k) * self.n + k2
    }

    pub fn gamma(&self, m: usize, m2: usize, k: usize, k2: usize) -> Complex64 {
        self.gamma[self.index(m, m2, k, k2)]
    }

    pub fn theta(&self) -> &CMatrix {
        &self.theta
    }

    /// Adds `rate · A ρ A†` (site-basis `a`) to the tensors.
    pub fn accumulate(&mut self, a: &DMatrix<f64>, rate: f64) {
        if rate == 0.0 {
            return;
        }
        let n = self.n;
        let nz: Vec<(usize, usize, f64)> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter_map(|(i, j)| {
                let v = a[(i, j)];
                (v != 0.0).then_some((i, j, v))
            })
            .collect();
        for &(m, m2, x) in &nz {
            for &(k, k2, y) in &nz {
                let idx = self.index(m, m2, k, k2);
                self.gamma[idx] += Complex64::new(rate * x * y, 0.0);
            }
        }
        let ata = a.transpose() * a;
        self.theta += ata.map(|v| Complex64::new(rate * v, 0.0));
    }

    pub fn add(&mut self, other: &JumpTensors) {
        for (a, b) in self.gamma.iter_mut().zip(&other.gamma) {
            *a += b;
        }
        self.theta += &other.theta;
    }

    /// Largest deviation of Θ(m,n) from Σ_{m'} Γ(m',m,m',n).
    pub fn consistency_error(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for m in 0..n {
            for k in 0..n {
                let s: Complex64 = (0..n).map(|m2| self.gamma(m2, m, m2, k)).sum();
                worst = worst.max((s - self.theta[(m, k)]).norm());
            }
        }
        worst
    }
}

/// Jump tensors from every frequency group.
pub fn jump_tensors(basis: &ExcitonBasis, bath: &BathSpec) -> JumpTensors {
    jump_tensors_where(basis, bath, |_| true)
}

/// Jump tensors restricted to the frequency groups accepted by `keep`.
pub fn jump_tensors_where(
    basis: &ExcitonBasis,
    bath: &BathSpec,
    keep: impl Fn(&FrequencyGroup) -> bool,
) -> JumpTensors {
    let mut t = JumpTensors::zeros(basis.n());
    for gen in phonon_generators(basis) {
        let group = &basis.groups()[gen.group];
        if keep(group) {
            t.accumulate(&gen.site_basis(basis), phonon_rate(gen.omega, bath));
        }
    }
    t
}

/// All dissipative channels of a network coupled to a bath.
#[derive(Debug, Clone)]
pub struct ChannelSet {
    pub generators: Vec<PhononGenerator>,
    /// γ(ω) per frequency group, ps^-1.
    pub group_rates: Vec<f64>,
    /// Jumps and damping from the ω ≠ 0 groups.
    pub relaxation: JumpTensors,
    /// ω = 0 group: pure dephasing in the exciton basis.
    pub dephasing: JumpTensors,
    pub total: JumpTensors,
    /// γ^r per site, ps^-1.
    pub loss_rates: Vec<f64>,
    /// Σ κ_m |m⟩⟨m|, ps^-1.
    pub trap: DMatrix<f64>,
}

pub const CHANNEL_LABELS: [&str; 4] = ["phonon_jump", "dephasing", "loss", "trap"];

impl ChannelSet {
    pub fn build(net: &NetworkSpec, basis: &ExcitonBasis, bath: &BathSpec) -> Self {
        let n = net.n_sites();
        let generators = phonon_generators(basis);
        let group_rates: Vec<f64> = basis
            .groups()
            .iter()
            .map(|g| phonon_rate(g.omega, bath))
            .collect();
        let mut relaxation = JumpTensors::zeros(n);
        let mut dephasing = JumpTensors::zeros(n);
        for gen in &generators {
            let rate = group_rates[gen.group];
            let a = gen.site_basis(basis);
            if basis.groups()[gen.group].is_zero() {
                dephasing.accumulate(&a, rate);
            } else {
                relaxation.accumulate(&a, rate);
            }
        }
        let mut total = relaxation.clone();
        total.add(&dephasing);
        Self {
            generators,
            group_rates,
            relaxation,
            dephasing,
            total,
            loss_rates: vec![net.loss_rate(); n],
            trap: net.trap_operator(),
        }
    }

    pub fn n(&self) -> usize {
        self.trap.nrows()
    }

    pub fn gamma(&self, m: usize, m2: usize, k: usize, k2: usize) -> Complex64 {
        self.total.gamma(m, m2, k, k2)
    }

    pub fn theta(&self) -> &CMatrix {
        self.total.theta()
    }

    /// Applies the phonon dissipator Σ γ[AρA† − ½{A†A, ρ}] directly, without
    /// going through the tensors.
    pub fn apply_phonon(&self, basis: &ExcitonBasis, rho: &CMatrix) -> CMatrix {
        let n = self.n();
        let mut out = CMatrix::zeros(n, n);
        let half = Complex64::new(0.5, 0.0);
        for gen in &self.generators {
            let rate = self.group_rates[gen.group];
            if rate == 0.0 {
                continue;
            }
            let a = to_complex(&gen.site_basis(basis));
            let ad = a.adjoint();
            let ada = &ad * &a;
            let term = &a * rho * &ad - (&ada * rho + rho * &ada) * half;
            out += term * Complex64::new(rate, 0.0);
        }
        out
    }
}

/// H_eff = H_C − (iħ/2)(Θ + γ^r I + K), in cm^-1. Its anti-Hermitian part
/// generates the no-jump damping; population at site m decays into the
/// trap at κ_m and into the ground manifold at γ^r.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveHamiltonian {
    pub matrix: CMatrix,
}

impl EffectiveHamiltonian {
    pub fn hermitian_part(&self) -> CMatrix {
        (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0)
    }

    pub fn antihermitian_part(&self) -> CMatrix {
        (&self.matrix - self.matrix.adjoint()) * Complex64::new(0.5, 0.0)
    }

    /// Damping operator Θ + γ^r I + K in ps^-1 (= (2i/ħ) × anti-Hermitian part).
    pub fn decay_operator(&self) -> CMatrix {
        self.antihermitian_part() * Complex64::new(0.0, 2.0 / HBAR_CM1_PS)
    }
}

pub fn effective_hamiltonian(net: &NetworkSpec, channels: &ChannelSet) -> EffectiveHamiltonian {
    let n = net.n_sites();
    let mut decay = channels.theta().clone();
    for m in 0..n {
        decay[(m, m)] += Complex64::new(channels.loss_rates[m] + channels.trap[(m, m)], 0.0);
    }
    let matrix = to_complex(&net.hamiltonian()) - decay * Complex64::new(0.0, 0.5 * HBAR_CM1_PS);
    EffectiveHamiltonian { matrix }
}

pub fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|v| Complex64::new(v, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fmo;
    use crate::spectral::diagonalize;
    use approx::assert_relative_eq;

    fn dimer(eps: f64, j: f64) -> NetworkSpec {
        let c = DMatrix::from_row_slice(2, 2, &[0.0, j, j, 0.0]);
        NetworkSpec::new(vec![0.0, eps], c, vec![0.0; 2], 0.0).unwrap()
    }

    fn random_hermitian(n: usize, seed: u64) -> CMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let a = CMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        (&a + a.adjoint()) * Complex64::new(0.5, 0.0)
    }

    #[test]
    fn dimer_dephasing_generator() {
        let basis = diagonalize(&dimer(0.0, 20.0));
        let gens = phonon_generators(&basis);
        let zero = basis.groups().iter().position(|g| g.is_zero()).unwrap();
        let a = gens.iter().find(|g| g.group == zero && g.site == 0).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.5]);
        assert!((&a.exciton - expect).camax() < 1e-15);
    }

    #[test]
    fn generators_resolve_site_projectors() {
        let sys = fmo();
        let basis = diagonalize(&sys.network);
        let gens = phonon_generators(&basis);
        assert_eq!(gens.len(), 7 * 43);
        for m in 0..7 {
            let sum = gens
                .iter()
                .filter(|g| g.site == m)
                .fold(DMatrix::zeros(7, 7), |acc, g| acc + g.site_basis(&basis));
            let mut proj = DMatrix::zeros(7, 7);
            proj[(m, m)] = 1.0;
            assert!((sum - proj).camax() < 1e-12);
        }
        for g in &gens {
            let nnz = g.exciton.iter().filter(|v| **v != 0.0).count();
            assert!(nnz > 0);
            if !basis.groups()[g.group].is_zero() {
                assert_eq!(nnz, 1);
            }
        }
    }

    #[test]
    fn single_site_tensors() {
        let net = NetworkSpec::new(vec![0.0], DMatrix::zeros(1, 1), vec![0.0], 0.0).unwrap();
        let bath = BathSpec::new(295.0, 35.0, 150.0).unwrap();
        let basis = diagonalize(&net);
        let t = jump_tensors(&basis, &bath);
        let g0 = phonon_rate(0.0, &bath);
        assert_relative_eq!(t.gamma(0, 0, 0, 0).re, g0);
        assert_relative_eq!(t.theta()[(0, 0)].re, g0);
    }

    #[test]
    fn zero_temperature_only_downhill() {
        let bath = BathSpec::new(0.0, 35.0, 150.0).unwrap();
        let net = dimer(40.0, 20.0);
        let basis = diagonalize(&net);
        let ch = ChannelSet::build(&net, &basis, &bath);
        for (g, group) in basis.groups().iter().enumerate() {
            if group.omega < 0.0 {
                assert_eq!(ch.group_rates[g], 0.0);
            }
            if group.omega > 0.0 {
                assert!(ch.group_rates[g] > 0.0);
                assert_eq!(group.pairs, vec![(0, 1)]);
            }
        }
        // T = 0 also switches off pure dephasing
        assert!(ch.dephasing.theta().camax() == 0.0);
    }

    #[test]
    fn fmo_tensor_invariants() {
        let sys = fmo();
        let basis = diagonalize(&sys.network);
        let ch = ChannelSet::build(&sys.network, &basis, &sys.bath);
        assert!(ch.total.consistency_error() < 1e-12);
        assert!(ch.relaxation.consistency_error() < 1e-12);
        let theta = ch.theta();
        assert!((theta - theta.adjoint()).camax() < 1e-12);
        for m in 0..7 {
            assert!(theta[(m, m)].re >= 0.0);
        }
        for (a, b, c, d) in [(0, 1, 2, 3), (2, 2, 5, 1), (6, 0, 0, 6)] {
            let x = ch.gamma(a, b, c, d);
            let y = ch.gamma(c, d, a, b).conj();
            assert!((x - y).norm() < 1e-14);
        }
        let split = {
            let mut t = ch.relaxation.clone();
            t.add(&ch.dephasing);
            t
        };
        let whole = jump_tensors(&basis, &sys.bath);
        let diff = split.gamma.iter().zip(&whole.gamma).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(diff < 1e-12);
    }

    #[test]
    fn phonon_channel_trace_preserving() {
        let sys = fmo();
        let basis = diagonalize(&sys.network);
        let ch = ChannelSet::build(&sys.network, &basis, &sys.bath);
        for seed in 0..5 {
            let rho = random_hermitian(7, seed);
            let out = ch.apply_phonon(&basis, &rho);
            assert!(out.trace().norm() < 1e-12);
            assert!((&out - out.adjoint()).camax() < 1e-12);
        }
    }

    #[test]
    fn phonon_channel_fixes_gibbs_state() {
        let sys = fmo();
        let basis = diagonalize(&sys.network);
        for t in [77.0, 295.0] {
            let bath = sys.bath.with_temperature(t).unwrap();
            let ch = ChannelSet::build(&sys.network, &basis, &bath);
            let gibbs = to_complex(&basis.thermal_state(t));
            let out = ch.apply_phonon(&basis, &gibbs);
            assert!(out.camax() < 1e-10, "T={t}: {}", out.camax());
        }
    }

    #[test]
    fn effective_hamiltonian_parts() {
        let sys = fmo();
        let basis = diagonalize(&sys.network);
        let ch = ChannelSet::build(&sys.network, &basis, &sys.bath);
        let heff = effective_hamiltonian(&sys.network, &ch);
        let h = to_complex(&sys.network.hamiltonian());
        assert!((heff.hermitian_part() - &h).camax() < 1e-12);
        let decay = heff.decay_operator();
        let diag: Vec<f64> = (0..7).map(|m| decay[(m, m)].re).collect();
        let trap_site = diag[2];
        for (m, &d) in diag.iter().enumerate() {
            if m != 2 {
                assert!(trap_site > d, "site {m}: {d} vs trap site {trap_site}");
            }
        }
        let expect = ch.theta()[(2, 2)].re + 1.0 + 0.001;
        assert_relative_eq!(trap_site, expect, max_relative = 1e-12);
    }

    #[test]
    fn no_rates_means_bare_hamiltonian() {
        let net = dimer(40.0, 20.0);
        let bath = BathSpec::new(295.0, 0.0, 150.0).unwrap();
        let basis = diagonalize(&net);
        let ch = ChannelSet::build(&net, &basis, &bath);
        let heff = effective_hamiltonian(&net, &ch);
        assert_eq!(heff.matrix, to_complex(&net.hamiltonian()));
    }
}
