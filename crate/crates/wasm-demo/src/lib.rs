//! Browser bindings: each export takes plain numbers and returns a JSON
//! string for the page to plot.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use fano_tunnel::dynamics::{closed_two, evolve, EvolutionMethod, TrajectoryPoint};
use fano_tunnel::fit::{fit, FitForm};
use fano_tunnel::lindblad::{integrate_cme, LindbladParams};
use fano_tunnel::rates::{rate_decomposition, Projector};
use fano_tunnel::spectral::{solve, Channel};
use fano_tunnel::{ModelParams, TimeGrid, Topology};

/// Oracle resolution used in the browser, kept small for responsiveness.
const DEMO_BINS: usize = 1500;

fn js(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn to_json<T: Serialize>(v: &T) -> Result<String, JsError> {
    serde_json::to_string(v).map_err(js)
}

fn topology(single: bool) -> Topology {
    if single {
        Topology::SingleContinuum
    } else {
        Topology::OrthogonalContinua
    }
}

#[derive(Serialize)]
struct TrajectoryView {
    t: Vec<f64>,
    p: Vec<f64>,
    delta: Vec<f64>,
    rho_pp: Vec<f64>,
    r_d: Vec<f64>,
    r_u: Vec<f64>,
    rates_error: Option<String>,
}

/// Trajectory from `|l>` with its dissipative/unitary rate split.
/// `method` is "closed", "quadrature" or "oracle".
#[wasm_bindgen]
pub fn trajectory(
    gamma: f64,
    gamma_prime: f64,
    epsilon: f64,
    single_continuum: bool,
    t_end: f64,
    n_points: usize,
    method: &str,
) -> Result<String, JsError> {
    let method = match method {
        "closed" => EvolutionMethod::ClosedForm,
        "quadrature" => EvolutionMethod::Quadrature,
        "oracle" => EvolutionMethod::Oracle { n_bins: DEMO_BINS },
        other => return Err(js(format!("unknown method {other:?}"))),
    };
    let params = ModelParams::broad_band(gamma, gamma_prime, epsilon, topology(single_continuum));
    let grid = TimeGrid::uniform(0.0, t_end, n_points).map_err(js)?;
    let traj = evolve(&params, &grid, method).map_err(js)?;
    let (r_d, r_u, rates_error) = match rate_decomposition(&traj, &Projector::right()) {
        Ok(r) => (r.iter().map(|x| x.r_d).collect(), r.iter().map(|x| x.r_u).collect(), None),
        Err(e) => (Vec::new(), Vec::new(), Some(e.to_string())),
    };
    to_json(&TrajectoryView {
        t: traj.iter().map(|x| x.t).collect(),
        p: traj.iter().map(|x| x.p).collect(),
        delta: traj.iter().map(|x| x.delta).collect(),
        rho_pp: traj.iter().map(|x| x.rho.rho_pp).collect(),
        r_d,
        r_u,
        rates_error,
    })
}

#[derive(Serialize)]
struct LineshapeView {
    e: Vec<f64>,
    exact: Vec<f64>,
    breit_wigner: Vec<f64>,
    resonance: f64,
    width: f64,
    completeness: f64,
}

/// Exact spectral density of the bare level against its Breit-Wigner
/// approximation, sampled over `span` widths either side of the resonance.
#[wasm_bindgen]
pub fn lineshape(
    gamma: f64,
    epsilon: f64,
    e0: f64,
    band_top: f64,
    span: f64,
    n_points: usize,
) -> Result<String, JsError> {
    let mut params = ModelParams::broad_band(gamma, 0.0, epsilon, Topology::SingleContinuum);
    params.e0 = e0;
    params.eta_max = band_top;
    let s = solve(&params, Channel::A).map_err(js)?;
    let n = n_points.max(2);
    let (lo, hi) = (s.resonance_energy - span * s.width, s.resonance_energy + span * s.width);
    let e: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let exact = e
        .iter()
        .map(|&x| s.density(x))
        .collect::<Result<Vec<_>, _>>()
        .map_err(js)?;
    to_json(&LineshapeView {
        breit_wigner: e.iter().map(|&x| s.breit_wigner(x)).collect(),
        e,
        exact,
        resonance: s.resonance_energy,
        width: s.width,
        completeness: s.completeness().map_err(js)?,
    })
}

#[derive(Serialize)]
struct ComparisonView {
    t: Vec<f64>,
    model: Vec<f64>,
    master: Vec<f64>,
    /// RMS residuals `[two-exponential, single-exponential]`.
    model_fits: [f64; 2],
    master_fits: [f64; 2],
}

fn residuals(t: &[f64], y: &[f64]) -> Result<[f64; 2], JsError> {
    Ok([
        fit(FitForm::TwoExponential, t, y).map_err(js)?.rms_residual,
        fit(FitForm::SingleExponential, t, y).map_err(js)?.rms_residual,
    ])
}

/// `rho_pp` of the closed-form model against the combined master equation
/// with matching widths, plus the two-timescale fit residuals.
#[wasm_bindgen]
pub fn master_vs_model(
    gamma: f64,
    gamma_prime: f64,
    epsilon: f64,
    t_end: f64,
    n_points: usize,
) -> Result<String, JsError> {
    let grid = TimeGrid::uniform(0.0, t_end, n_points).map_err(js)?;
    let lp = LindbladParams::new(epsilon, gamma, gamma_prime).map_err(js)?;
    let master: Vec<TrajectoryPoint> = integrate_cme(&lp, &grid).map_err(js)?;
    let t = grid.samples();
    let model: Vec<f64> = t
        .iter()
        .map(|&x| closed_two(gamma, gamma_prime, epsilon, x, Topology::SingleContinuum).rho_pp)
        .collect();
    let master: Vec<f64> = master.iter().map(|x| x.rho.rho_pp).collect();
    to_json(&ComparisonView {
        model_fits: residuals(&t, &model)?,
        master_fits: residuals(&t, &master)?,
        t,
        model,
        master,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exports_produce_json() {
        let v: serde_json::Value =
            serde_json::from_str(&trajectory(3.0, 0.0, 1.0, true, 4.0, 101, "closed").unwrap()).unwrap();
        assert_eq!(v["p"].as_array().unwrap().len(), 101);
        assert!(v["rates_error"].is_null());
        let v: serde_json::Value =
            serde_json::from_str(&lineshape(0.3, 1.0, 6.0, 13.0, 6.0, 51).unwrap()).unwrap();
        assert!((v["completeness"].as_f64().unwrap() - 1.0).abs() < 1e-6);
        let v: serde_json::Value =
            serde_json::from_str(&master_vs_model(2.0, 0.5, 1.0, 10.0, 201).unwrap()).unwrap();
        assert!(v["model_fits"][0].as_f64().unwrap() < 1e-10);
        assert!(v["master_fits"][1].as_f64().unwrap() < 1e-10);
    }
}
