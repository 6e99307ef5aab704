//! Reduced-density dynamics from the localized initial state `|l>`.

mod closed;
pub mod fourier;

pub use closed::{
    closed_single, closed_single_rate, closed_two, closed_two_rate, recorrelation_coefficient,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{validate, DensityRate, ModelParams, ReducedDensity, TimeGrid, Topology, TOL_POS};
use crate::oracle;
use crate::spectral::{self, Channel};

/// Default oracle resolution.
pub const ORACLE_BINS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvolutionMethod {
    /// Breit-Wigner closed forms.
    ClosedForm,
    /// Fourier transforms of the exact spectral densities.
    Quadrature,
    /// Brute-force discretized continuum with `n_bins` bins.
    Oracle { n_bins: usize },
}

impl EvolutionMethod {
    pub fn name(&self) -> &'static str {
        match self {
            EvolutionMethod::ClosedForm => "closed",
            EvolutionMethod::Quadrature => "quadrature",
            EvolutionMethod::Oracle { .. } => "oracle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub rho: ReducedDensity,
    #[serde(rename = "P")]
    pub p: f64,
    pub delta: f64,
    /// Exact time derivative, present when the trajectory came from a
    /// closed form.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rho_dot: Option<DensityRate>,
}

impl TrajectoryPoint {
    pub fn new(t: f64, rho: ReducedDensity, rho_dot: Option<DensityRate>) -> Result<Self> {
        Ok(TrajectoryPoint {
            t,
            rho,
            p: tunneling_probability(&rho),
            delta: idempotency_defect(&rho)?,
            rho_dot,
        })
    }
}

/// `P = (1 - 2 Re rho_pm)/2 = Tr(|r><r| rho)`.
pub fn tunneling_probability(rho: &ReducedDensity) -> f64 {
    0.5 * (1.0 - 2.0 * rho.rho_pm.re)
}

/// `delta = 2 det rho`, clipped at zero within the positivity slack.
pub fn idempotency_defect(rho: &ReducedDensity) -> Result<f64> {
    let det = rho.det();
    if det < -TOL_POS {
        return Err(Error::PositivityViolation(det));
    }
    Ok(2.0 * det.max(0.0))
}

/// Long-time limit of `delta` in the two-width regime.
pub fn delta_asymptote(gamma: f64, gamma_prime: f64, topology: Topology) -> Result<f64> {
    if !(gamma > 0.0 && gamma_prime > 0.0) {
        return Err(Error::DomainError(
            "both widths must be positive: the limits t -> inf and G' -> 0 do not commute".into(),
        ));
    }
    Ok(match topology {
        Topology::SingleContinuum => {
            0.5 - 2.0 * gamma * gamma_prime / ((gamma + gamma_prime) * (gamma + gamma_prime))
        }
        Topology::OrthogonalContinua => 0.5,
    })
}

/// Widths and splitting `(G, G', e_R - e'_R)` feeding the closed forms.
pub fn breit_wigner_parameters(params: &ModelParams) -> Result<(f64, f64, f64)> {
    let (ea, ga) = spectral::resonance(params, Channel::A)?;
    let (eb, gb) = spectral::resonance(params, Channel::B)?;
    Ok((ga, gb, ea - eb))
}

pub fn evolve(
    params: &ModelParams,
    grid: &TimeGrid,
    method: EvolutionMethod,
) -> Result<Vec<TrajectoryPoint>> {
    grid.check()?;
    let report = validate(params);
    let warnings = report.clone().into_result()?;
    let times = grid.samples();
    match method {
        EvolutionMethod::ClosedForm => {
            if !(params.g.is_constant() && params.g_prime.is_constant()) {
                return Err(Error::MethodUnavailable(
                    "closed forms need constant couplings".into(),
                ));
            }
            if !warnings.is_empty() {
                return Err(Error::MethodUnavailable(format!(
                    "closed forms need a broad band: {}",
                    warnings.join("; ")
                )));
            }
            let (g, gp, w) = breit_wigner_parameters(params)?;
            times
                .iter()
                .map(|&t| {
                    TrajectoryPoint::new(
                        t,
                        closed_two(g, gp, w, t, params.topology),
                        Some(closed_two_rate(g, gp, w, t, params.topology)),
                    )
                })
                .collect()
        }
        EvolutionMethod::Quadrature => {
            let rho = fourier::evolve_quadrature(params, &times)?;
            times
                .iter()
                .zip(rho)
                .map(|(&t, r)| TrajectoryPoint::new(t, r, None))
                .collect()
        }
        EvolutionMethod::Oracle { n_bins } => {
            let model = oracle::discretize(params, n_bins)?;
            oracle::evolve_oracle(&model, grid)
        }
    }
}

/// Largest `|rho_pp - rho_pp'|` or `|rho_pm - rho_pm'|` between two
/// trajectories on the same grid.
pub fn sup_norm_diff(a: &[TrajectoryPoint], b: &[TrajectoryPoint]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.rho.max_abs_diff(&y.rho))
        .fold(0.0, f64::max)
}
