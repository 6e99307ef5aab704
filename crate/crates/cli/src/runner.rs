//! Executes resolved scenarios and writes their output files.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use fano_tunnel::adiabatic::cutoff_sweep;
use fano_tunnel::dynamics::{
    breit_wigner_parameters, evolve, sup_norm_diff, EvolutionMethod, TrajectoryPoint,
};
use fano_tunnel::fit::{fit, FitForm};
use fano_tunnel::lindblad::{first_order_compare, integrate_cme, LindbladParams};
use fano_tunnel::rates::{rate_decomposition, Projector};
use fano_tunnel::{ModelParams, TimeGrid};

use crate::error::CliError;
use crate::output::{self, Format, Meta};
use crate::scenario::{LindbladSpec, MethodName, Output, Preset, Resolved, Scenario};

/// Thresholds of the comparison report.
pub const FIT_EXACT: f64 = 1e-10;
pub const FIT_POOR: f64 = 1e-3;
pub const RICHARDSON_TARGET: f64 = 4.0;
pub const RICHARDSON_TOLERANCE: f64 = 0.5;
pub const DIAGONAL_AGREEMENT: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub preset: Option<Preset>,
    pub method: Option<MethodName>,
    pub format: Format,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            out_dir: PathBuf::from("."),
            preset: None,
            method: None,
            format: Format::Csv,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub tolerance: f64,
}

impl Check {
    fn below(name: &str, value: f64, tolerance: f64) -> Check {
        Check {
            name: name.into(),
            pass: value <= tolerance,
            value,
            tolerance,
        }
    }

    fn above(name: &str, value: f64, tolerance: f64) -> Check {
        Check {
            name: name.into(),
            pass: value > tolerance,
            value,
            tolerance,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonParams {
    pub model: ModelParams,
    pub lindblad: LindbladParams,
    pub method: String,
    /// Breit-Wigner widths and splitting `(G, G', e_R - e'_R)` of the model.
    pub model_widths: [f64; 3],
    pub grid: TimeGrid,
}

#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub scenario: String,
    pub params: ComparisonParams,
    pub sup_norm_diffs: BTreeMap<String, f64>,
    pub fit_residuals: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
}

impl Comparison {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

#[derive(Debug, Default)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub comparison: Option<Comparison>,
}

fn module_of(method: &EvolutionMethod) -> &'static str {
    match method {
        EvolutionMethod::Oracle { .. } => "oracle",
        _ => "dynamics",
    }
}

fn apply_options(mut scenario: Scenario, opts: &RunOptions) -> Scenario {
    if opts.preset.is_some() {
        scenario.preset = opts.preset;
    }
    if let Some(m) = opts.method {
        scenario.methods = Some(vec![m]);
    }
    scenario
}

pub fn run(scenario: &Scenario, opts: &RunOptions) -> Result<RunSummary, CliError> {
    let resolved = apply_options(scenario.clone(), opts).resolve()?;
    execute(&resolved, opts)
}

/// Runs only the model-versus-master comparison; the lindblad side
/// defaults to the width correspondence.
pub fn compare(scenario: &Scenario, opts: &RunOptions) -> Result<RunSummary, CliError> {
    let mut s = apply_options(scenario.clone(), opts);
    s.outputs = Some(vec![Output::ComparisonJson]);
    if s.lindblad.is_none() {
        s.lindblad = Some(LindbladSpec::default());
    }
    execute(&s.resolve()?, opts)
}

fn write(dir: &Path, name: String, contents: &str, files: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    files.push(path);
    Ok(())
}

fn base_meta(r: &Resolved) -> Meta {
    let mut meta = vec![("scenario".to_string(), r.name.clone())];
    if let Some(p) = r.preset {
        meta.push(("preset".into(), p.name().into()));
    }
    meta
}

fn model_meta(r: &Resolved, model: &ModelParams, method: &EvolutionMethod) -> Result<Meta, CliError> {
    let mut meta = base_meta(r);
    let (g, gp, split) = breit_wigner_parameters(model).map_err(CliError::numerical("spectral"))?;
    meta.push(("method".into(), method.name().into()));
    if let EvolutionMethod::Oracle { n_bins } = method {
        meta.push(("oracle_bins".into(), n_bins.to_string()));
    }
    meta.push(("epsilon".into(), output::float(model.epsilon)));
    meta.push(("e0".into(), output::float(model.e0)));
    meta.push((
        "band".into(),
        format!("[{}, {}]", output::float(model.eta_min), output::float(model.eta_max)),
    ));
    meta.push(("topology".into(), format!("{:?}", model.topology)));
    meta.push(("Gamma".into(), output::float(g)));
    meta.push(("Gamma_prime".into(), output::float(gp)));
    let convention = match method {
        EvolutionMethod::ClosedForm => format!(
            "closed forms use e_R - e'_R = {} (resonance positions, level shift included)",
            output::float(split)
        ),
        _ => "exact spectral densities (the level shift enters through the solution)".into(),
    };
    meta.push(("splitting".into(), convention));
    Ok(meta)
}

fn rates_for(traj: &[TrajectoryPoint], projector: &Projector) -> Result<Vec<fano_tunnel::rates::RateDecomposition>, CliError> {
    rate_decomposition(traj, projector).map_err(CliError::numerical("rates"))
}

pub fn execute(r: &Resolved, opts: &RunOptions) -> Result<RunSummary, CliError> {
    fs::create_dir_all(&opts.out_dir).map_err(|source| CliError::Io {
        path: opts.out_dir.clone(),
        source,
    })?;
    let mut summary = RunSummary::default();
    let files = &mut summary.files;
    let ext = opts.format.extension();
    let wants = |o: Output| r.outputs.contains(&o);

    let mut trajectories: Vec<(EvolutionMethod, Vec<TrajectoryPoint>)> = Vec::new();
    if let (Some(model), Some(grid)) = (&r.model, &r.grid) {
        for method in &r.methods {
            let traj = evolve(model, grid, *method).map_err(CliError::numerical(module_of(method)))?;
            let meta = model_meta(r, model, method)?;
            if wants(Output::TrajectoryCsv) {
                let name = format!("{}_{}_trajectory.{ext}", r.name, method.name());
                write(&opts.out_dir, name, &output::trajectory(opts.format, &meta, &traj), files)?;
            }
            if wants(Output::RatesCsv) {
                let rates = rates_for(&traj, &r.projector)?;
                let name = format!("{}_{}_rates.{ext}", r.name, method.name());
                write(&opts.out_dir, name, &output::rates(opts.format, &meta, &rates), files)?;
            }
            trajectories.push((*method, traj));
        }
    }

    let mut master = None;
    if let (Some(lp), Some(grid)) = (&r.lindblad, &r.grid) {
        let traj = integrate_cme(lp, grid).map_err(CliError::numerical("lindblad"))?;
        let mut meta = base_meta(r);
        meta.push(("method".into(), "master".into()));
        meta.push(("epsilon".into(), output::float(lp.epsilon)));
        meta.push(("gamma".into(), output::float(lp.gamma)));
        meta.push(("gamma_prime".into(), output::float(lp.gamma_prime)));
        if wants(Output::TrajectoryCsv) {
            let name = format!("{}_master_trajectory.{ext}", r.name);
            write(&opts.out_dir, name, &output::trajectory(opts.format, &meta, &traj), files)?;
        }
        if wants(Output::RatesCsv) {
            let rates = rates_for(&traj, &r.projector)?;
            let name = format!("{}_master_rates.{ext}", r.name);
            write(&opts.out_dir, name, &output::rates(opts.format, &meta, &rates), files)?;
        }
        master = Some(traj);
    }

    if wants(Output::ComparisonJson) {
        let (model, lp, grid) = match (&r.model, &r.lindblad, &r.grid) {
            (Some(m), Some(l), Some(g)) => (m, l, g),
            _ => return Err(CliError::Config("comparison needs model, lindblad and grid".into())),
        };
        let master = master.as_deref().expect("master trajectory computed with lindblad");
        let report = comparison(r, model, lp, grid, &trajectories, master)?;
        let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
        text.push('\n');
        write(&opts.out_dir, format!("{}_comparison.json", r.name), &text, files)?;
        summary.comparison = Some(report);
    }

    if wants(Output::AdiabaticCsv) {
        let (params, cutoffs) = r.adiabatic.as_ref().expect("checked at resolution");
        let sweep = cutoff_sweep(params, cutoffs).map_err(CliError::numerical("adiabatic"))?;
        let mut meta = base_meta(r);
        if let fano_tunnel::CouplingFn::PowerLaw { prefactor, exponent } = params.g {
            meta.push(("prefactor".into(), output::float(prefactor)));
            meta.push(("exponent".into(), output::float(exponent)));
        }
        meta.push(("e0".into(), output::float(params.e0)));
        meta.push(("eta_min".into(), output::float(params.eta_min)));
        meta.push(("epsilon".into(), output::float(params.epsilon)));
        for w in sweep.first().map(|s| s.warnings.clone()).unwrap_or_default() {
            meta.push(("warning".into(), w));
        }
        let name = format!("{}_adiabatic.{ext}", r.name);
        write(&opts.out_dir, name, &output::adiabatic(opts.format, &meta, &sweep), files)?;
    }
    Ok(summary)
}

fn comparison(
    r: &Resolved,
    model: &ModelParams,
    lp: &LindbladParams,
    grid: &TimeGrid,
    trajectories: &[(EvolutionMethod, Vec<TrajectoryPoint>)],
    master: &[TrajectoryPoint],
) -> Result<Comparison, CliError> {
    let (gm, gpm, split) = breit_wigner_parameters(model).map_err(CliError::numerical("spectral"))?;
    let (method, traj) = &trajectories[0];

    let mut sup = BTreeMap::new();
    sup.insert("model_vs_master_rho".to_string(), sup_norm_diff(traj, master));
    let diag = traj
        .iter()
        .zip(master)
        .map(|(a, b)| (a.rho.rho_pp - b.rho.rho_pp).abs())
        .fold(0.0, f64::max);
    sup.insert("model_vs_master_rho_pp".to_string(), diag);
    for (i, (ma, ta)) in trajectories.iter().enumerate() {
        for (mb, tb) in &trajectories[i + 1..] {
            sup.insert(format!("{}_vs_{}_rho", ma.name(), mb.name()), sup_norm_diff(ta, tb));
        }
    }

    let t: Vec<f64> = traj.iter().map(|p| p.t).collect();
    let model_pp: Vec<f64> = traj.iter().map(|p| p.rho.rho_pp).collect();
    let master_pp: Vec<f64> = master.iter().map(|p| p.rho.rho_pp).collect();
    let mut fits = BTreeMap::new();
    for (side, y) in [("model", &model_pp), ("master", &master_pp)] {
        for form in [FitForm::TwoExponential, FitForm::SingleExponential] {
            let f = fit(form, &t, y).map_err(CliError::numerical("fit"))?;
            fits.insert(format!("{side}_{}", form.name()), f.rms_residual);
        }
    }

    let mut checks = Vec::new();
    let t_small = 1e-3 / (lp.gamma + lp.gamma_prime).max(1.0);
    let first = first_order_compare(lp, (gm, gpm), t_small).map_err(CliError::numerical("lindblad"))?;
    let scale = (gm + gpm + lp.gamma + lp.gamma_prime + lp.epsilon.abs()).max(1.0);
    let machine = 8.0 * f64::EPSILON * scale;
    checks.push(Check::below("first_order_rho_pp_coefficients", first.linear_difference, machine));
    checks.push(Check::below("first_order_rho_pm_coefficients", first.linear_difference_pm, machine));
    if gpm > 0.0 && lp.gamma_prime > 0.0 {
        checks.push(Check::below(
            "second_order_richardson_ratio",
            (first.richardson_ratio - RICHARDSON_TARGET).abs(),
            RICHARDSON_TOLERANCE,
        ));
        checks.push(Check::below("model_two_exponential_fit", fits["model_two_exponential"], FIT_EXACT));
        checks.push(Check::above("model_single_exponential_fit", fits["model_single_exponential"], FIT_POOR));
        checks.push(Check::below("master_single_exponential_fit", fits["master_single_exponential"], FIT_EXACT));
        checks.push(Check::above("master_two_exponential_fit", fits["master_two_exponential"], FIT_POOR));
    } else {
        checks.push(Check::below("diagonal_agreement", diag, DIAGONAL_AGREEMENT));
    }

    Ok(Comparison {
        scenario: r.name.clone(),
        params: ComparisonParams {
            model: model.clone(),
            lindblad: *lp,
            method: method.name().into(),
            model_widths: [gm, gpm, split],
            grid: *grid,
        },
        sup_norm_diffs: sup,
        fit_residuals: fits,
        checks,
    })
}
