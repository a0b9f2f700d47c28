//! Observables of the trapped walk: efficiency, transfer time,
//! susceptibilities, site-pair pathways, the unitary search check and
//! parameter sweeps.

mod efficiency;
mod grover;
mod pathway;
mod susceptibility;
mod sweep;

pub use efficiency::{ete, ete_quadrature, evaluate, EfficiencyReport, ETA_TOL};
pub use grover::{grover_check, GroverReport, GROVER_THRESHOLD};
pub use pathway::{
    pathway_map, site_pair_operator, site_pair_susceptibility, write_pathway_csv, PathwayEdge,
    PathwaySolver,
};
pub use susceptibility::{
    hessian, methods, susceptibility, AnalyticMethod, FiniteDifference, Hessian,
    SusceptibilityMethod, SusceptibilityReport,
};
pub use sweep::{parameters, sweep, write_curve_csv, Grid, SweepParameter, SweepPoint};
