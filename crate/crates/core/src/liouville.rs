//! Liouville-space representation: column-stacking vectorization, the
//! N²×N² transition supermatrix with its named decomposition, and the two
//! interchangeable construction paths (site basis and exciton basis).

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lindblad::{effective_hamiltonian, to_complex, ChannelSet, EffectiveHamiltonian, JumpTensors};
use crate::model::{BathSpec, CMatrix, NetworkSpec, HBAR_CM1_PS};
use crate::registry::{Named, Registry};
use crate::spectral::ExcitonBasis;

pub type CVector = DVector<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Position of ρ_{row,col} in the column-stacked vector.
#[inline]
pub fn vec_index(row: usize, col: usize, n: usize) -> usize {
    col * n + row
}

pub fn vectorize(rho: &CMatrix) -> CVector {
    // nalgebra stores column-major, which is exactly column stacking
    CVector::from_column_slice(rho.as_slice())
}

pub fn devectorize(v: &CVector, n: usize) -> Result<CMatrix> {
    if v.len() != n * n {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} is not {n}x{n}",
            v.len()
        )));
    }
    Ok(CMatrix::from_column_slice(n, n, v.as_slice()))
}

/// Superoperator of ρ ↦ aρ.
pub fn left_mul(a: &CMatrix) -> CMatrix {
    CMatrix::identity(a.nrows(), a.nrows()).kronecker(a)
}

/// Superoperator of ρ ↦ ρb.
pub fn right_mul(b: &CMatrix) -> CMatrix {
    b.transpose().kronecker(&CMatrix::identity(b.nrows(), b.nrows()))
}

/// Superoperator of ρ ↦ aρb.
pub fn sandwich(a: &CMatrix, b: &CMatrix) -> CMatrix {
    b.transpose().kronecker(a)
}

/// Named parts Λ_k of the supermatrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Hamiltonian,
    PhononJump,
    Dephasing,
    Trap,
    Loss,
}

impl Channel {
    pub const ALL: [Channel; 5] = [
        Channel::Hamiltonian,
        Channel::PhononJump,
        Channel::Dephasing,
        Channel::Trap,
        Channel::Loss,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Channel::Hamiltonian => "hamiltonian",
            Channel::PhononJump => "phonon_jump",
            Channel::Dephasing => "dephasing",
            Channel::Trap => "trap",
            Channel::Loss => "loss",
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Channel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Channel::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown channel '{s}'")))
    }
}

/// Scale factors λ_k, one per [`Channel`].
pub type Scalings = [f64; 5];

pub const UNIT_SCALINGS: Scalings = [1.0; 5];

/// Liouville-space generator M = Σ_k λ_k Λ_k in ps^-1.
#[derive(Debug, Clone)]
pub struct Supermatrix {
    n: usize,
    parts: Vec<CMatrix>,
    scalings: Scalings,
    matrix: CMatrix,
    trap_rates: Vec<f64>,
    loss_rate: f64,
}

impl Supermatrix {
    /// `parts` ordered as [`Channel::ALL`].
    pub fn from_parts(parts: Vec<CMatrix>, trap_rates: Vec<f64>, loss_rate: f64) -> Self {
        assert_eq!(parts.len(), Channel::ALL.len());
        let n = trap_rates.len();
        let matrix = Self::combine(&parts, &UNIT_SCALINGS, n);
        Self {
            n,
            parts,
            scalings: UNIT_SCALINGS,
            matrix,
            trap_rates,
            loss_rate,
        }
    }

    fn combine(parts: &[CMatrix], scalings: &Scalings, n: usize) -> CMatrix {
        let mut m = CMatrix::zeros(n * n, n * n);
        for (p, &s) in parts.iter().zip(scalings) {
            m += p * Complex64::new(s, 0.0);
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.n * self.n
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Unscaled Λ_k, i.e. ∂M/∂λ_k.
    pub fn part(&self, ch: Channel) -> &CMatrix {
        &self.parts[ch.index()]
    }

    pub fn scaled_part(&self, ch: Channel) -> CMatrix {
        &self.parts[ch.index()] * Complex64::new(self.scalings[ch.index()], 0.0)
    }

    pub fn scalings(&self) -> &Scalings {
        &self.scalings
    }

    pub fn with_scalings(&self, scalings: Scalings) -> Self {
        Self {
            matrix: Self::combine(&self.parts, &scalings, self.n),
            scalings,
            ..self.clone()
        }
    }

    /// Trap rates κ_m as they act in this supermatrix (including λ_trap).
    pub fn trap_rates(&self) -> Vec<f64> {
        let s = self.scalings[Channel::Trap.index()];
        self.trap_rates.iter().map(|k| k * s).collect()
    }

    pub fn loss_rate(&self) -> f64 {
        self.loss_rate * self.scalings[Channel::Loss.index()]
    }

    /// Row functional x ↦ Σ_m κ_m x_mm giving the trapping flux.
    pub fn trap_functional(&self) -> DVector<f64> {
        let mut c = DVector::zeros(self.dim());
        for (m, k) in self.trap_rates().into_iter().enumerate() {
            c[vec_index(m, m, self.n)] = k;
        }
        c
    }

    /// Trapping functional with unit λ_trap (the derivative of
    /// [`Self::trap_functional`] with respect to λ_trap).
    pub fn base_trap_functional(&self) -> DVector<f64> {
        let mut c = DVector::zeros(self.dim());
        for (m, &k) in self.trap_rates.iter().enumerate() {
            c[vec_index(m, m, self.n)] = k;
        }
        c
    }

    /// Row functional x ↦ γ^r Tr x giving the loss flux.
    pub fn loss_functional(&self) -> DVector<f64> {
        self.trace_functional() * self.loss_rate()
    }

    pub fn trace_functional(&self) -> DVector<f64> {
        let mut c = DVector::zeros(self.dim());
        for m in 0..self.n {
            c[vec_index(m, m, self.n)] = 1.0;
        }
        c
    }

    /// Largest entry of |Σ_k λ_k Λ_k − M|.
    pub fn decomposition_error(&self) -> f64 {
        (Self::combine(&self.parts, &self.scalings, self.n) - &self.matrix).camax()
    }

    /// The supermatrix in exciton-basis Liouville coordinates.
    pub fn to_exciton_basis(&self, basis: &ExcitonBasis) -> CMatrix {
        let t = exciton_transform(basis);
        t.transpose() * &self.matrix * t
    }

    /// Writes every nonzero entry as `row col re im` (0-based).
    pub fn write_dump(&self, w: &mut impl Write) -> Result<()> {
        write_matrix_dump(w, &self.matrix)
    }
}

pub fn write_matrix_dump(w: &mut impl Write, m: &CMatrix) -> Result<()> {
    writeln!(w, "# {} {}", m.nrows(), m.ncols())?;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            if z != ZERO {
                writeln!(w, "{i} {j} {:.17e} {:.17e}", z.re, z.im)?;
            }
        }
    }
    Ok(())
}

pub fn read_matrix_dump(r: impl BufRead) -> Result<CMatrix> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty matrix dump".into()))??;
    let dims: Vec<usize> = header
        .trim_start_matches('#')
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad header '{header}'"))))
        .collect::<Result<_>>()?;
    if dims.len() != 2 {
        return Err(Error::Parse(format!("bad header '{header}'")));
    }
    let mut m = CMatrix::zeros(dims[0], dims[1]);
    for line in lines {
        let line = line?;
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.is_empty() {
            continue;
        }
        let bad = || Error::Parse(format!("bad dump line '{line}'"));
        if f.len() != 4 {
            return Err(bad());
        }
        let i: usize = f[0].parse().map_err(|_| bad())?;
        let j: usize = f[1].parse().map_err(|_| bad())?;
        let re: f64 = f[2].parse().map_err(|_| bad())?;
        let im: f64 = f[3].parse().map_err(|_| bad())?;
        if i >= dims[0] || j >= dims[1] {
            return Err(bad());
        }
        m[(i, j)] = Complex64::new(re, im);
    }
    Ok(m)
}

/// C ⊗ C, mapping exciton-basis vectorized matrices to the site basis.
pub fn exciton_transform(basis: &ExcitonBasis) -> CMatrix {
    let c = to_complex(basis.coefficients());
    c.kronecker(&c)
}

/// −(i/ħ)(I⊗H − H*⊗I) for a Hamiltonian in cm^-1.
pub fn commutator_superoperator(h: &CMatrix) -> CMatrix {
    (left_mul(h) - right_mul(&h.adjoint())) * Complex64::new(0.0, -1.0 / HBAR_CM1_PS)
}

/// Σ Γ(m,m',k,k') conj(W_{kk'}) ⊗ W_{mm'}.
pub fn jump_superoperator(t: &JumpTensors) -> CMatrix {
    let n = t.n();
    let mut s = CMatrix::zeros(n * n, n * n);
    for m in 0..n {
        for m2 in 0..n {
            for k in 0..n {
                for k2 in 0..n {
                    let g = t.gamma(m, m2, k, k2);
                    if g != ZERO {
                        s[(vec_index(m, k, n), vec_index(m2, k2, n))] += g;
                    }
                }
            }
        }
    }
    s
}

/// −½(I⊗D + D*⊗I): damping by a Hermitian decay operator D (ps^-1).
pub fn damping_superoperator(d: &CMatrix) -> CMatrix {
    (left_mul(d) + right_mul(d)) * Complex64::new(-0.5, 0.0)
}

/// M = −(i/ħ)(I⊗H_eff − H_eff*⊗I) + Σ Γ conj(W)⊗W, assembled directly from
/// the effective Hamiltonian.
pub fn liouvillian_from_effective(heff: &EffectiveHamiltonian, jumps: &JumpTensors) -> CMatrix {
    let h = &heff.matrix;
    let n = h.nrows();
    let id = CMatrix::identity(n, n);
    let coherent = (id.kronecker(h) - h.conjugate().kronecker(&id))
        * Complex64::new(0.0, -1.0 / HBAR_CM1_PS);
    coherent + jump_superoperator(jumps)
}

/// Site-basis construction from the jump tensors and effective Hamiltonian.
pub fn build_supermatrix(
    net: &NetworkSpec,
    channels: &ChannelSet,
    heff: &EffectiveHamiltonian,
) -> Supermatrix {
    let hc = to_complex(&net.hamiltonian());
    let trap = to_complex(&channels.trap);
    let loss = CMatrix::from_diagonal(&CVector::from_iterator(
        net.n_sites(),
        channels.loss_rates.iter().map(|&g| Complex64::new(g, 0.0)),
    ));
    let phonon = |t: &JumpTensors| jump_superoperator(t) + damping_superoperator(t.theta());
    let parts = vec![
        commutator_superoperator(&hc),
        phonon(&channels.relaxation),
        phonon(&channels.dephasing),
        damping_superoperator(&trap),
        damping_superoperator(&loss),
    ];
    let sm = Supermatrix::from_parts(parts, net.trap_rates().to_vec(), net.loss_rate());
    debug_assert!(
        (liouvillian_from_effective(heff, &channels.total) - sm.matrix()).camax() < 1e-9
    );
    sm
}

/// Exciton-basis construction: each secular Lindblad term is assembled as
/// γ[conj(A)⊗A − ½ I⊗A†A − ½ (A†A)ᵀ⊗I] with exciton-basis generators, then
/// the whole generator is rotated to site-basis Liouville coordinates.
pub fn build_supermatrix_exciton(
    net: &NetworkSpec,
    basis: &ExcitonBasis,
    bath: &BathSpec,
) -> Supermatrix {
    let n = net.n_sites();
    let dim = n * n;
    let energies = CMatrix::from_diagonal(&CVector::from_iterator(
        n,
        basis.energies().iter().map(|&e| Complex64::new(e, 0.0)),
    ));
    let mut relax = CMatrix::zeros(dim, dim);
    let mut dephase = CMatrix::zeros(dim, dim);
    let channels = ChannelSet::build(net, basis, bath);
    for gen in &channels.generators {
        let rate = channels.group_rates[gen.group];
        if rate == 0.0 {
            continue;
        }
        let a = to_complex(&gen.exciton);
        let ad = a.adjoint();
        let ada = &ad * &a;
        let term = (sandwich(&a, &ad) + damping_superoperator(&ada)) * Complex64::new(rate, 0.0);
        if basis.groups()[gen.group].is_zero() {
            dephase += term;
        } else {
            relax += term;
        }
    }
    let c = basis.coefficients();
    let trap_exc = to_complex(&(c.transpose() * net.trap_operator() * c));
    let loss = CMatrix::identity(n, n) * Complex64::new(net.loss_rate(), 0.0);

    let t = exciton_transform(basis);
    let tt = t.transpose();
    let rotate = |m: CMatrix| &t * m * &tt;
    let parts = vec![
        rotate(commutator_superoperator(&energies)),
        rotate(relax),
        rotate(dephase),
        rotate(damping_superoperator(&trap_exc)),
        rotate(damping_superoperator(&loss)),
    ];
    Supermatrix::from_parts(parts, net.trap_rates().to_vec(), net.loss_rate())
}

/// Population-to-population block of the dissipative part of M in the
/// exciton basis: a classical rate matrix, `rates[(a, b)]` = rate b → a.
pub fn classical_projection(sm: &Supermatrix, basis: &ExcitonBasis) -> DMatrix<f64> {
    let n = sm.n();
    let t = exciton_transform(basis);
    let dissipative = sm.matrix() - sm.scaled_part(Channel::Hamiltonian);
    let exc = t.transpose() * dissipative * t;
    DMatrix::from_fn(n, n, |a, b| exc[(vec_index(a, a, n), vec_index(b, b, n))].re)
}

/// A construction route for the supermatrix.
pub trait SupermatrixBuilder: Named + Send + Sync {
    fn build(&self, net: &NetworkSpec, basis: &ExcitonBasis, bath: &BathSpec) -> Supermatrix;
}

pub struct SiteBasisBuilder;

impl Named for SiteBasisBuilder {
    fn name(&self) -> &'static str {
        "site"
    }

    fn description(&self) -> &'static str {
        "jump tensors and effective Hamiltonian in the site basis"
    }
}

impl SupermatrixBuilder for SiteBasisBuilder {
    fn build(&self, net: &NetworkSpec, basis: &ExcitonBasis, bath: &BathSpec) -> Supermatrix {
        let channels = ChannelSet::build(net, basis, bath);
        let heff = effective_hamiltonian(net, &channels);
        build_supermatrix(net, &channels, &heff)
    }
}

pub struct ExcitonBasisBuilder;

impl Named for ExcitonBasisBuilder {
    fn name(&self) -> &'static str {
        "exciton"
    }

    fn description(&self) -> &'static str {
        "secular Lindblad terms in the exciton basis, rotated to sites"
    }
}

impl SupermatrixBuilder for ExcitonBasisBuilder {
    fn build(&self, net: &NetworkSpec, basis: &ExcitonBasis, bath: &BathSpec) -> Supermatrix {
        build_supermatrix_exciton(net, basis, bath)
    }
}

pub fn builders() -> Registry<dyn SupermatrixBuilder> {
    let mut r: Registry<dyn SupermatrixBuilder> = Registry::new("supermatrix builder");
    r.register(Box::new(SiteBasisBuilder))
        .register(Box::new(ExcitonBasisBuilder));
    r
}
