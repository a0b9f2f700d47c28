use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use super::efficiency::ete;
use crate::dynamics::ensure_hurwitz;
use crate::error::{Error, Result};
use crate::liouville::{vectorize, CVector, Channel, Scalings, Supermatrix};
use crate::model::DensityState;
use crate::registry::{Named, Registry};

pub type Hessian = [[f64; 5]; 5];

/// Derivatives of η with respect to the channel scalings λ_k of
/// M = Σ_k λ_k Λ_k, evaluated at the supermatrix's current scalings.
pub trait SusceptibilityMethod: Named + Send + Sync {
    fn gradient(&self, sm: &Supermatrix, rho0: &DensityState) -> Result<Scalings>;
    fn hessian(&self, sm: &Supermatrix, rho0: &DensityState) -> Result<Hessian>;
}

/// Resolvent derivatives: with X = −M⁻¹v, ∂_k X = −M⁻¹Λ_k X and
/// ∂_j∂_k X = −M⁻¹(Λ_j ∂_k X + Λ_k ∂_j X). The trap functional c carries its
/// own λ_trap dependence.
#[derive(Debug, Clone, Copy, Default)]
pub struct AnalyticMethod;

struct Resolvent<'a> {
    sm: &'a Supermatrix,
    lu: nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>,
    x: CVector,
    dx: Vec<CVector>,
    c: DVector<f64>,
}

fn dot(c: &DVector<f64>, x: &CVector) -> f64 {
    c.iter().zip(x.iter()).map(|(c, x)| c * x.re).sum()
}

impl<'a> Resolvent<'a> {
    fn new(sm: &'a Supermatrix, rho0: &DensityState) -> Result<Self> {
        ensure_hurwitz(sm)?;
        let lu = sm.matrix().clone().lu();
        let v = vectorize(&rho0.matrix);
        let x = lu.solve(&(-v)).ok_or(Error::Singular)?;
        let dx = Channel::ALL
            .iter()
            .map(|&ch| lu.solve(&(-(sm.part(ch) * &x))).ok_or(Error::Singular))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            sm,
            lu,
            x,
            dx,
            c: sm.trap_functional(),
        })
    }

    fn dc(&self, ch: Channel) -> Option<DVector<f64>> {
        (ch == Channel::Trap).then(|| self.sm.base_trap_functional())
    }

    fn gradient(&self) -> Scalings {
        let mut g = [0.0; 5];
        for ch in Channel::ALL {
            let k = ch.index();
            g[k] = dot(&self.c, &self.dx[k]);
            if let Some(dc) = self.dc(ch) {
                g[k] += dot(&dc, &self.x);
            }
        }
        g
    }

    fn hessian(&self) -> Result<Hessian> {
        let mut h = [[0.0; 5]; 5];
        for a in Channel::ALL {
            for b in Channel::ALL {
                let (j, k) = (a.index(), b.index());
                if k < j {
                    continue;
                }
                let rhs = -(self.sm.part(a) * &self.dx[k] + self.sm.part(b) * &self.dx[j]);
                let ddx = self.lu.solve(&rhs).ok_or(Error::Singular)?;
                let mut v = dot(&self.c, &ddx);
                if let Some(dc) = self.dc(a) {
                    v += dot(&dc, &self.dx[k]);
                }
                if let Some(dc) = self.dc(b) {
                    v += dot(&dc, &self.dx[j]);
                }
                h[j][k] = v;
                h[k][j] = v;
            }
        }
        Ok(h)
    }
}

impl Named for AnalyticMethod {
    fn name(&self) -> &'static str {
        "analytic"
    }
    fn description(&self) -> &'static str {
        "exact resolvent derivatives"
    }
}

impl SusceptibilityMethod for AnalyticMethod {
    fn gradient(&self, sm: &Supermatrix, rho0: &DensityState) -> Result<Scalings> {
        Ok(Resolvent::new(sm, rho0)?.gradient())
    }

    fn hessian(&self, sm: &Supermatrix, rho0: &DensityState) -> Result<Hessian> {
        Resolvent::new(sm, rho0)?.hessian()
    }
}

/// Central differences in λ.
#[derive(Debug, Clone, Copy)]
pub struct FiniteDifference {
    pub step: f64,
    pub hessian_step: f64,
}

impl Default for FiniteDifference {
    fn default() -> Self {
        Self {
            step: 1e-4,
            hessian_step: 1e-3,
        }
    }
}

fn eta_at(sm: &Supermatrix, rho0: &DensityState, shifts: &[(usize, f64)]) -> Result<f64> {
    let mut s = *sm.scalings();
    for &(k, d) in shifts {
        s[k] += d;
    }
    Ok(ete(&sm.with_scalings(s), rho0)?.eta)
}

impl Named for FiniteDifference {
    fn name(&self) -> &'static str {
        "fd"
    }
    fn description(&self) -> &'static str {
        "central finite differences"
    }
}

impl SusceptibilityMethod for FiniteDifference {
    fn gradient(&self, sm: &Supermatrix, rho0: &DensityState) -> Result<Scalings> {
        let h = self.step;
        let mut g = [0.0; 5];
        for (k, gk) in g.iter_mut().enumerate() {
            let up = eta_at(sm, rho0, &[(k, h)])?;
            let down = eta_at(sm, rho0, &[(k, -h)])?;
            *gk = (up - down) / (2.0 * h);
        }
        Ok(g)
    }

    fn hessian(&self, sm: &Supermatrix, rho0: &DensityState) -> Result<Hessian> {
        let h = self.hessian_step;
        let centre = ete(sm, rho0)?.eta;
        let mut out = [[0.0; 5]; 5];
        for j in 0..5 {
            let up = eta_at(sm, rho0, &[(j, h)])?;
            let down = eta_at(sm, rho0, &[(j, -h)])?;
            out[j][j] = (up - 2.0 * centre + down) / (h * h);
            for k in (j + 1)..5 {
                let pp = eta_at(sm, rho0, &[(j, h), (k, h)])?;
                let pm = eta_at(sm, rho0, &[(j, h), (k, -h)])?;
                let mp = eta_at(sm, rho0, &[(j, -h), (k, h)])?;
                let mm = eta_at(sm, rho0, &[(j, -h), (k, -h)])?;
                let v = (pp - pm - mp + mm) / (4.0 * h * h);
                out[j][k] = v;
                out[k][j] = v;
            }
        }
        Ok(out)
    }
}

pub fn methods() -> Registry<dyn SusceptibilityMethod> {
    let mut r: Registry<dyn SusceptibilityMethod> = Registry::new("susceptibility method");
    r.register(Box::new(AnalyticMethod))
        .register(Box::new(FiniteDifference::default()));
    r
}

#[derive(Debug, Clone, Serialize)]
pub struct SusceptibilityReport {
    pub method: String,
    pub channels: Vec<String>,
    pub gradient: Vec<f64>,
    pub gradient_sum: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hessian: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hessian_sum: Option<f64>,
}

pub fn susceptibility(
    sm: &Supermatrix,
    rho0: &DensityState,
    method: &dyn SusceptibilityMethod,
    with_hessian: bool,
) -> Result<SusceptibilityReport> {
    let g = method.gradient(sm, rho0)?;
    let h = with_hessian.then(|| method.hessian(sm, rho0)).transpose()?;
    Ok(SusceptibilityReport {
        method: method.name().to_string(),
        channels: Channel::ALL.iter().map(|c| c.name().to_string()).collect(),
        gradient: g.to_vec(),
        gradient_sum: g.iter().sum(),
        hessian_sum: h.map(|h| h.iter().flatten().sum()),
        hessian: h.map(|h| h.iter().map(|r| r.to_vec()).collect()),
    })
}

/// Hessian by central second differences with step 1e-3.
pub fn hessian(sm: &Supermatrix, rho0: &DensityState) -> Result<Hessian> {
    FiniteDifference::default().hessian(sm, rho0)
}
