//! Scenario files: TOML documents describing a model, the methods to run,
//! a time grid and the outputs to write.
//!
//! ```toml
//! name = "fig3"
//! preset = "fig3"                    # optional base configuration
//! methods = ["closed", "oracle"]     # closed | quadrature | oracle
//! oracle_bins = 4000
//! outputs = ["trajectory_csv", "rates_csv", "comparison_json"]
//!
//! [model]                            # widths expand to a broad band ...
//! epsilon = 1.0
//! gamma = 2.0
//! gamma_prime = 0.5
//! topology = "single_continuum"
//! # ... or give e0, eta_min, eta_max and explicit couplings:
//! # [model.g]
//! # kind = "power_law"
//! # prefactor = 0.1
//! # exponent = 0.5
//!
//! [lindblad]                         # empty: gamma <-> Gamma correspondence
//!
//! [grid]
//! t_start = 0.0
//! t_end = 20.0
//! n_points = 401
//!
//! [adiabatic]
//! prefactor = 1e-3
//! exponent = 0.5
//! cutoffs = [1.0, 10.0, 100.0, 1000.0]
//! ```

use serde::{Deserialize, Serialize};

use fano_tunnel::dynamics::{breit_wigner_parameters, EvolutionMethod, ORACLE_BINS};
use fano_tunnel::lindblad::LindbladParams;
use fano_tunnel::model::validate;
use fano_tunnel::rates::Projector;
use fano_tunnel::{BlochVector, CouplingFn, ModelParams, TimeGrid, Topology};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Fig1,
    Fig2,
    Fig3,
}

impl Preset {
    /// `(Gamma, Gamma', t_end)` with `epsilon = 1`.
    fn widths(self) -> (f64, f64, f64) {
        match self {
            Preset::Fig1 => (0.3, 0.0, 20.0),
            Preset::Fig2 => (3.0, 0.0, 4.0),
            Preset::Fig3 => (2.0, 0.5, 20.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig1 => "fig1",
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    Closed,
    Quadrature,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    TrajectoryCsv,
    RatesCsv,
    ComparisonJson,
    AdiabaticCsv,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_prime: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g: Option<CouplingFn>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_prime: Option<CouplingFn>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub topology: Option<Topology>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LindbladSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_prime: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_points: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdiabaticSpec {
    pub prefactor: f64,
    pub exponent: f64,
    #[serde(default)]
    pub e0: f64,
    #[serde(default)]
    pub eta_min: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    pub cutoffs: Vec<f64>,
}

/// A scenario file as written.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub methods: Option<Vec<MethodName>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_bins: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outputs: Option<Vec<Output>>,
    /// Bloch axis of the rank-1 projector for rates; default `|r><r|`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub projector: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lindblad: Option<LindbladSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adiabatic: Option<AdiabaticSpec>,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        if text.trim().is_empty() {
            return Err(CliError::Config("scenario file is empty".into()));
        }
        toml::from_str(text).map_err(|e| CliError::Config(format!("scenario parse error: {e}")))
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Fields of the preset, overridden by anything set in `self`.
    fn with_preset(&self) -> Scenario {
        let Some(preset) = self.preset else {
            return self.clone();
        };
        let (g, gp, t_end) = preset.widths();
        let model = self.model.clone().unwrap_or_default();
        let grid = self.grid.clone().unwrap_or_default();
        Scenario {
            name: self.name.clone().or_else(|| Some(preset.name().into())),
            preset: Some(preset),
            methods: self.methods.clone(),
            oracle_bins: self.oracle_bins,
            outputs: self.outputs.clone(),
            projector: self.projector,
            model: Some(ModelSpec {
                epsilon: model.epsilon.or(Some(1.0)),
                gamma: model.gamma.or(Some(g)),
                gamma_prime: model.gamma_prime.or(Some(gp)),
                ..model
            }),
            lindblad: Some(self.lindblad.clone().unwrap_or_default()),
            grid: Some(GridSpec {
                t_start: grid.t_start.or(Some(0.0)),
                t_end: grid.t_end.or(Some(t_end)),
                n_points: grid.n_points.or(Some(401)),
            }),
            adiabatic: self.adiabatic.clone(),
        }
    }

    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let s = self.with_preset();
        let name = s.name.clone().unwrap_or_else(|| "scenario".into());
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) {
            return Err(CliError::Config(format!(
                "scenario name {name:?} must be non-empty and use only [A-Za-z0-9._-]"
            )));
        }
        let model = s.model.as_ref().map(resolve_model).transpose()?;
        let methods: Vec<MethodName> = s.methods.clone().unwrap_or_else(|| vec![MethodName::Closed]);
        if methods.is_empty() {
            return Err(CliError::Config("methods must not be empty".into()));
        }
        let n_bins = s.oracle_bins.unwrap_or(ORACLE_BINS);
        let methods = methods
            .into_iter()
            .map(|m| match m {
                MethodName::Closed => EvolutionMethod::ClosedForm,
                MethodName::Quadrature => EvolutionMethod::Quadrature,
                MethodName::Oracle => EvolutionMethod::Oracle { n_bins },
            })
            .collect();
        let lindblad = match (&s.lindblad, &model) {
            (None, _) => None,
            (Some(spec), model) => Some(resolve_lindblad(spec, model.as_ref())?),
        };
        let grid = s
            .grid
            .as_ref()
            .map(|g| {
                let grid = TimeGrid::uniform(
                    g.t_start.unwrap_or(0.0),
                    g.t_end.ok_or_else(|| CliError::Config("grid.t_end is required".into()))?,
                    g.n_points.unwrap_or(401),
                )
                .map_err(|e| CliError::Config(format!("grid: {e}")))?;
                Ok::<_, CliError>(grid)
            })
            .transpose()?;
        if (model.is_some() || lindblad.is_some()) && grid.is_none() {
            return Err(CliError::Config("a [grid] section is required".into()));
        }
        let adiabatic = s
            .adiabatic
            .as_ref()
            .map(|a| resolve_adiabatic(a, model.as_ref()))
            .transpose()?;
        if model.is_none() && lindblad.is_none() && adiabatic.is_none() {
            return Err(CliError::Config(
                "scenario needs a [model], [lindblad] or [adiabatic] section, or a preset".into(),
            ));
        }
        let projector = match s.projector {
            None => Projector::right(),
            Some([x, y, z]) => Projector::new(BlochVector::new(x, y, z))
                .map_err(|e| CliError::Config(format!("projector: {e}")))?,
        };
        let mut outputs = s.outputs.clone().unwrap_or_else(|| {
            let mut o = Vec::new();
            if model.is_some() || lindblad.is_some() {
                o.extend([Output::TrajectoryCsv, Output::RatesCsv]);
            }
            if model.is_some() && lindblad.is_some() {
                o.push(Output::ComparisonJson);
            }
            if adiabatic.is_some() {
                o.push(Output::AdiabaticCsv);
            }
            o
        });
        outputs.dedup();
        if outputs.contains(&Output::ComparisonJson) && (model.is_none() || lindblad.is_none()) {
            return Err(CliError::Config(
                "comparison_json needs both [model] and [lindblad]".into(),
            ));
        }
        if outputs.contains(&Output::AdiabaticCsv) && adiabatic.is_none() {
            return Err(CliError::Config("adiabatic_csv needs an [adiabatic] section".into()));
        }
        Ok(Resolved {
            name,
            preset: s.preset,
            model,
            methods,
            lindblad,
            grid,
            adiabatic,
            projector,
            outputs,
        })
    }
}

fn resolve_model(spec: &ModelSpec) -> Result<ModelParams, CliError> {
    let epsilon = spec
        .epsilon
        .ok_or_else(|| CliError::Config("model.epsilon is required".into()))?;
    let topology = spec.topology.unwrap_or(Topology::SingleContinuum);
    let mut params = match (spec.gamma, &spec.g) {
        (Some(_), Some(_)) => {
            return Err(CliError::Config(
                "give either model.gamma or an explicit model.g, not both".into(),
            ))
        }
        (Some(gamma), None) => {
            let gp = spec.gamma_prime.unwrap_or(0.0);
            if spec.g_prime.is_some() {
                return Err(CliError::Config(
                    "model.g_prime needs an explicit model.g".into(),
                ));
            }
            if !(gamma >= 0.0 && gp >= 0.0) {
                return Err(CliError::Config("model widths must be >= 0".into()));
            }
            ModelParams::broad_band(gamma, gp, epsilon, topology)
        }
        (None, Some(g)) => {
            let field = |v: Option<f64>, name: &str| {
                v.ok_or_else(|| CliError::Config(format!("model.{name} is required with explicit couplings")))
            };
            if spec.gamma_prime.is_some() {
                return Err(CliError::Config(
                    "model.gamma_prime needs model.gamma; use model.g_prime".into(),
                ));
            }
            ModelParams {
                epsilon,
                e0: field(spec.e0, "e0")?,
                eta_min: field(spec.eta_min, "eta_min")?,
                eta_max: field(spec.eta_max, "eta_max")?,
                g: g.clone(),
                g_prime: spec.g_prime.clone().unwrap_or(CouplingFn::constant(0.0)),
                topology,
            }
        }
        (None, None) => {
            return Err(CliError::Config(
                "model needs gamma (broad band) or explicit couplings g".into(),
            ))
        }
    };
    if let Some(e0) = spec.e0 {
        params.e0 = e0;
    }
    if let Some(lo) = spec.eta_min {
        params.eta_min = lo;
    }
    if let Some(hi) = spec.eta_max {
        params.eta_max = hi;
    }
    let report = validate(&params);
    if !report.violations.is_empty() {
        return Err(CliError::Config(format!(
            "invalid model: {}",
            report.violations.join("; ")
        )));
    }
    Ok(params)
}

fn resolve_lindblad(
    spec: &LindbladSpec,
    model: Option<&ModelParams>,
) -> Result<LindbladParams, CliError> {
    let widths = match (spec.gamma, model) {
        (Some(_), _) => None,
        (None, Some(m)) => Some(
            breit_wigner_parameters(m).map_err(|e| CliError::Numerical {
                module: "spectral",
                source: e,
            })?,
        ),
        (None, None) => {
            return Err(CliError::Config(
                "lindblad.gamma is required without a [model] to correspond to".into(),
            ))
        }
    };
    let epsilon = spec
        .epsilon
        .or(model.map(|m| m.epsilon))
        .ok_or_else(|| CliError::Config("lindblad.epsilon is required".into()))?;
    let gamma = spec.gamma.or(widths.map(|w| w.0)).unwrap_or(0.0);
    let gamma_prime = spec
        .gamma_prime
        .or(widths.map(|w| w.1))
        .unwrap_or(0.0);
    LindbladParams::new(epsilon, gamma, gamma_prime)
        .map_err(|e| CliError::Config(format!("lindblad: {e}")))
}

fn resolve_adiabatic(
    spec: &AdiabaticSpec,
    model: Option<&ModelParams>,
) -> Result<(ModelParams, Vec<f64>), CliError> {
    let coupling = CouplingFn::power_law(spec.prefactor, spec.exponent);
    let first = *spec
        .cutoffs
        .first()
        .ok_or_else(|| CliError::Config("adiabatic.cutoffs must not be empty".into()))?;
    let params = ModelParams {
        epsilon: spec.epsilon.or(model.map(|m| m.epsilon)).unwrap_or(1.0),
        e0: spec.e0,
        eta_min: spec.eta_min,
        eta_max: first,
        g: coupling.clone(),
        g_prime: coupling,
        topology: Topology::SingleContinuum,
    };
    if !(0.0..1.0).contains(&spec.exponent) || !(spec.prefactor >= 0.0) {
        return Err(CliError::Config(
            "adiabatic needs prefactor >= 0 and exponent in [0, 1)".into(),
        ));
    }
    if spec.cutoffs.windows(2).any(|w| !(w[1] > w[0])) || !(first > spec.eta_min) {
        return Err(CliError::Config(
            "adiabatic.cutoffs must increase and lie above eta_min".into(),
        ));
    }
    Ok((params, spec.cutoffs.clone()))
}

/// A scenario with defaults applied and every section validated.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub name: String,
    pub preset: Option<Preset>,
    pub model: Option<ModelParams>,
    pub methods: Vec<EvolutionMethod>,
    pub lindblad: Option<LindbladParams>,
    pub grid: Option<TimeGrid>,
    pub adiabatic: Option<(ModelParams, Vec<f64>)>,
    pub projector: Projector,
    pub outputs: Vec<Output>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_a_config_error() {
        assert!(matches!(Scenario::parse("  \n"), Err(CliError::Config(_))));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(Scenario::parse("nme = \"x\"\n").is_err());
    }

    #[test]
    fn presets_expand() {
        let s = Scenario::parse("preset = \"fig3\"\n").unwrap();
        let r = s.resolve().unwrap();
        assert_eq!(r.name, "fig3");
        let m = r.model.unwrap();
        assert!((m.nominal_gamma() - 2.0).abs() < 1e-12);
        assert!((m.nominal_gamma_prime() - 0.5).abs() < 1e-12);
        assert_eq!(m.epsilon, 1.0);
        let l = r.lindblad.unwrap();
        assert!((l.gamma - 2.0).abs() < 1e-12 && (l.gamma_prime - 0.5).abs() < 1e-12);
        assert_eq!(r.grid.unwrap().n_points, 401);
        assert_eq!(r.methods, vec![EvolutionMethod::ClosedForm]);
        assert!(r.outputs.contains(&Output::ComparisonJson));
    }

    #[test]
    fn file_fields_override_preset() {
        let s = Scenario::parse(
            "preset = \"fig1\"\nname = \"weak\"\n[grid]\nt_end = 5.0\nn_points = 11\n",
        )
        .unwrap();
        let r = s.resolve().unwrap();
        assert_eq!(r.name, "weak");
        let g = r.grid.unwrap();
        assert_eq!((g.t_end, g.n_points), (5.0, 11));
    }

    #[test]
    fn round_trip() {
        let text = r#"
name = "custom"
methods = ["quadrature", "oracle"]
oracle_bins = 800
outputs = ["trajectory_csv", "adiabatic_csv"]
projector = [0.0, 0.0, 1.0]

[model]
epsilon = 1.0
e0 = 5.0
eta_min = 0.0
eta_max = 10.0
topology = "orthogonal_continua"

[model.g]
kind = "power_law"
prefactor = 0.01
exponent = 0.5

[model.g_prime]
kind = "tabulated"
knots = [[0.0, 0.1], [10.0, 0.2]]

[grid]
t_end = 3.0
n_points = 31

[adiabatic]
prefactor = 0.001
exponent = 0.5
cutoffs = [1.0, 10.0]
"#;
        let s = Scenario::parse(text).unwrap();
        let again = Scenario::parse(&s.to_toml().unwrap()).unwrap();
        assert_eq!(s, again);
        let r = s.resolve().unwrap();
        assert_eq!(r.methods[1], EvolutionMethod::Oracle { n_bins: 800 });
        assert_eq!(r.model.unwrap().topology, Topology::OrthogonalContinua);
    }

    #[test]
    fn conflicting_model_fields() {
        let s = Scenario::parse(
            "[model]\nepsilon = 1.0\ngamma = 0.3\n[model.g]\nkind = \"constant\"\nvalue = 0.1\n[grid]\nt_end = 1.0\n",
        )
        .unwrap();
        assert!(matches!(s.resolve(), Err(CliError::Config(_))));
        let s = Scenario::parse("[model]\nepsilon = -1.0\ngamma = 0.3\n[grid]\nt_end = 1.0\n").unwrap();
        assert!(matches!(s.resolve(), Err(CliError::Config(_))));
    }

    #[test]
    fn comparison_needs_lindblad() {
        let s = Scenario::parse(
            "outputs = [\"comparison_json\"]\n[model]\nepsilon = 1.0\ngamma = 0.3\n[grid]\nt_end = 1.0\n",
        )
        .unwrap();
        assert!(s.resolve().is_err());
    }
}
