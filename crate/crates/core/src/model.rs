//! Domain types shared by every module: Hamiltonian parameters, couplings,
//! the reduced density matrix of the doublet and its Bloch representation.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Slack allowed on `det rho` before a density is declared non-positive.
pub const TOL_POS: f64 = 1e-10;

/// Energy dependence of a coupling amplitude to the continuum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CouplingFn {
    Constant {
        value: f64,
    },
    /// `g^2(eta) = prefactor * eta^exponent` for `eta >= 0`, zero below.
    PowerLaw {
        prefactor: f64,
        exponent: f64,
    },
    /// Linear interpolation between `(eta, g)` knots, zero outside them.
    Tabulated {
        knots: Vec<(f64, f64)>,
    },
}

impl CouplingFn {
    pub fn constant(value: f64) -> Self {
        CouplingFn::Constant { value }
    }

    /// Constant coupling whose Golden-Rule width `2 pi g^2` equals `gamma`.
    pub fn from_width(gamma: f64) -> Self {
        CouplingFn::Constant {
            value: (gamma / (2.0 * PI)).sqrt(),
        }
    }

    pub fn power_law(prefactor: f64, exponent: f64) -> Self {
        CouplingFn::PowerLaw {
            prefactor,
            exponent,
        }
    }

    pub fn amplitude(&self, eta: f64) -> f64 {
        match self {
            CouplingFn::Constant { value } => *value,
            CouplingFn::PowerLaw { .. } => self.squared(eta).sqrt(),
            CouplingFn::Tabulated { knots } => interpolate(knots, eta),
        }
    }

    /// `|g(eta)|^2`.
    pub fn squared(&self, eta: f64) -> f64 {
        match self {
            CouplingFn::Constant { value } => value * value,
            CouplingFn::PowerLaw {
                prefactor,
                exponent,
            } => {
                if eta < 0.0 {
                    0.0
                } else if *exponent == 0.0 {
                    *prefactor
                } else {
                    prefactor * eta.powf(*exponent)
                }
            }
            CouplingFn::Tabulated { knots } => {
                let g = interpolate(knots, eta);
                g * g
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            CouplingFn::Constant { value } => *value == 0.0,
            CouplingFn::PowerLaw { prefactor, .. } => *prefactor == 0.0,
            CouplingFn::Tabulated { knots } => knots.iter().all(|&(_, g)| g == 0.0),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, CouplingFn::Constant { .. })
    }

    /// Points inside `(lo, hi)` where the coupling is not smooth.
    pub fn kinks(&self, lo: f64, hi: f64) -> Vec<f64> {
        match self {
            CouplingFn::Tabulated { knots } => knots
                .iter()
                .map(|&(x, _)| x)
                .filter(|&x| x > lo && x < hi)
                .collect(),
            CouplingFn::PowerLaw { .. } if lo < 0.0 && hi > 0.0 => vec![0.0],
            _ => Vec::new(),
        }
    }

    fn check(&self, name: &str, lo: f64, hi: f64, out: &mut Vec<String>) {
        match self {
            CouplingFn::Constant { value } => {
                if !(value.is_finite() && *value >= 0.0) {
                    out.push(format!("{name}: constant coupling must be finite and >= 0"));
                }
            }
            CouplingFn::PowerLaw {
                prefactor,
                exponent,
            } => {
                if !(prefactor.is_finite() && *prefactor >= 0.0) {
                    out.push(format!("{name}: power-law prefactor must be finite and >= 0"));
                }
                if !(exponent.is_finite() && *exponent >= 0.0) {
                    out.push(format!("{name}: power-law exponent must be finite and >= 0"));
                }
            }
            CouplingFn::Tabulated { knots } => {
                if knots.len() < 2 {
                    out.push(format!("{name}: tabulated coupling needs at least two knots"));
                    return;
                }
                if knots.iter().any(|&(x, g)| !x.is_finite() || !g.is_finite()) {
                    out.push(format!("{name}: tabulated knots must be finite"));
                }
                if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
                    out.push(format!("{name}: tabulated knots must be strictly increasing"));
                }
                if knots[0].0 > lo || knots[knots.len() - 1].0 < hi {
                    out.push(format!("{name}: tabulated knots must span [eta_min, eta_max]"));
                }
            }
        }
    }
}

fn interpolate(knots: &[(f64, f64)], x: f64) -> f64 {
    if knots.is_empty() || x < knots[0].0 || x > knots[knots.len() - 1].0 {
        return 0.0;
    }
    let i = knots.partition_point(|&(k, _)| k <= x);
    if i == 0 {
        return knots[0].1;
    }
    if i == knots.len() {
        return knots[i - 1].1;
    }
    let (x0, y0) = knots[i - 1];
    let (x1, y1) = knots[i];
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    /// Both doublet components couple to one and the same continuum.
    SingleContinuum,
    /// The `g'` coupling addresses a second, orthogonal continuum.
    OrthogonalContinua,
}

/// Full parameter set of the Hamiltonian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub epsilon: f64,
    pub e0: f64,
    pub eta_min: f64,
    pub eta_max: f64,
    /// Coupling of `|+0_b>` to `|-eta>`.
    pub g: CouplingFn,
    /// Coupling of `|-0_b>` to `|+eta>`.
    pub g_prime: CouplingFn,
    pub topology: Topology,
}

impl ModelParams {
    /// Broad-band geometry with constant couplings realizing the widths
    /// `gamma` and `gamma_prime`: `e0 = 20 G`, band `[0, 40 G + epsilon]`,
    /// where `G` is the larger width (or 1 if both vanish).
    pub fn broad_band(gamma: f64, gamma_prime: f64, epsilon: f64, topology: Topology) -> Self {
        let scale = gamma.max(gamma_prime);
        let scale = if scale > 0.0 { scale } else { 1.0 };
        ModelParams {
            epsilon,
            e0: 20.0 * scale,
            eta_min: 0.0,
            eta_max: 40.0 * scale + epsilon,
            g: CouplingFn::from_width(gamma),
            g_prime: CouplingFn::from_width(gamma_prime),
            topology,
        }
    }

    pub fn band_width(&self) -> f64 {
        self.eta_max - self.eta_min
    }

    /// Golden-Rule width of channel A at the bare level `e0 + epsilon`.
    pub fn nominal_gamma(&self) -> f64 {
        2.0 * PI * self.g.squared(self.e0 + self.epsilon)
    }

    /// Golden-Rule width of channel B, whose continuum state `|+eta>`
    /// sits at `eta + epsilon`, evaluated at the bare level `e0`.
    pub fn nominal_gamma_prime(&self) -> f64 {
        2.0 * PI * self.g_prime.squared(self.e0 - self.epsilon)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<Vec<String>> {
        if self.violations.is_empty() {
            Ok(self.warnings)
        } else {
            Err(Error::InvalidParams(self.violations.join("; ")))
        }
    }
}

pub fn validate(params: &ModelParams) -> ValidationReport {
    let mut report = ValidationReport::default();
    let v = &mut report.violations;
    for (name, x) in [
        ("epsilon", params.epsilon),
        ("e0", params.e0),
        ("eta_min", params.eta_min),
        ("eta_max", params.eta_max),
    ] {
        if !x.is_finite() {
            v.push(format!("{name} must be finite"));
        }
    }
    if !(params.epsilon > 0.0) {
        v.push("epsilon > 0".into());
    }
    if !(params.eta_min < params.eta_max) {
        v.push("eta_min < eta_max".into());
    }
    params.g.check("g", params.eta_min, params.eta_max, v);
    params
        .g_prime
        .check("g_prime", params.eta_min, params.eta_max, v);
    if !report.violations.is_empty() {
        return report;
    }

    let gamma = params.nominal_gamma().max(params.nominal_gamma_prime());
    for (name, level) in [("e0", params.e0), ("e0 + epsilon", params.e0 + params.epsilon)] {
        let margin = (level - params.eta_min).min(params.eta_max - level);
        if margin <= gamma {
            report
                .warnings
                .push(format!("discrete level at band edge: {name} lies within Gamma of the band edge"));
        }
    }
    report
}

/// Reduced density of the doublet in the `|+>, |->` basis. `rho_pm` is
/// `<+|rho|->`; `rho_mm = 1 - rho_pp` is implied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedDensity {
    pub rho_pp: f64,
    pub rho_pm: Complex64,
}

impl ReducedDensity {
    pub fn new(rho_pp: f64, rho_pm: Complex64) -> Self {
        ReducedDensity { rho_pp, rho_pm }
    }

    /// The localized state `|l> = (|+> + |->)/sqrt 2`.
    pub fn localized() -> Self {
        ReducedDensity::new(0.5, Complex64::new(0.5, 0.0))
    }

    pub fn rho_mm(&self) -> f64 {
        1.0 - self.rho_pp
    }

    pub fn det(&self) -> f64 {
        self.rho_pp * (1.0 - self.rho_pp) - self.rho_pm.norm_sqr()
    }

    pub fn is_positive(&self) -> bool {
        self.det() >= -TOL_POS && self.rho_pp >= -TOL_POS && self.rho_pp <= 1.0 + TOL_POS
    }

    pub fn bloch(&self) -> BlochVector {
        bloch_from_rho(self)
    }

    pub fn from_bloch(b: &BlochVector) -> Self {
        ReducedDensity::new((1.0 + b.bz) / 2.0, Complex64::new(b.bx, -b.by) / 2.0)
    }

    pub fn max_abs_diff(&self, other: &ReducedDensity) -> f64 {
        (self.rho_pp - other.rho_pp)
            .abs()
            .max((self.rho_pm - other.rho_pm).norm())
    }
}

/// Time derivative of a [`ReducedDensity`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityRate {
    pub rho_pp: f64,
    pub rho_pm: Complex64,
}

impl DensityRate {
    pub fn bloch(&self) -> BlochVector {
        BlochVector {
            bx: 2.0 * self.rho_pm.re,
            by: -2.0 * self.rho_pm.im,
            bz: 2.0 * self.rho_pp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub bx: f64,
    pub by: f64,
    pub bz: f64,
}

impl BlochVector {
    pub fn new(bx: f64, by: f64, bz: f64) -> Self {
        BlochVector { bx, by, bz }
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dot(&self, o: &BlochVector) -> f64 {
        self.bx * o.bx + self.by * o.by + self.bz * o.bz
    }

    pub fn scale(&self, s: f64) -> BlochVector {
        BlochVector::new(self.bx * s, self.by * s, self.bz * s)
    }
}

/// `b_i = Tr(rho sigma_i)` with standard Pauli matrices in the `|+>, |->` basis.
pub fn bloch_from_rho(rho: &ReducedDensity) -> BlochVector {
    BlochVector {
        bx: 2.0 * rho.rho_pm.re,
        by: -2.0 * rho.rho_pm.im,
        bz: 2.0 * rho.rho_pp - 1.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub n_points: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl TimeGrid {
    pub fn uniform(t_start: f64, t_end: f64, n_points: usize) -> Result<Self> {
        let grid = TimeGrid {
            t_start,
            t_end,
            n_points,
            spacing: Spacing::Uniform,
        };
        grid.check()?;
        Ok(grid)
    }

    pub fn check(&self) -> Result<()> {
        if !(self.t_start.is_finite() && self.t_end.is_finite()) {
            return Err(Error::InvalidParams("time grid bounds must be finite".into()));
        }
        if self.t_start < 0.0 {
            return Err(Error::InvalidParams("t_start >= 0".into()));
        }
        if self.n_points < 2 {
            return Err(Error::InvalidParams("n_points >= 2".into()));
        }
        if !(self.t_end > self.t_start) {
            return Err(Error::InvalidParams("time grid must be strictly increasing".into()));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        (self.t_end - self.t_start) / (self.n_points - 1) as f64
    }

    pub fn samples(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.n_points)
            .map(|i| {
                if i + 1 == self.n_points {
                    self.t_end
                } else {
                    self.t_start + i as f64 * h
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fig1_like() -> ModelParams {
        ModelParams {
            epsilon: 1.0,
            e0: 20.0,
            eta_min: 0.0,
            eta_max: 40.0,
            g: CouplingFn::constant(0.218),
            g_prime: CouplingFn::constant(0.0),
            topology: Topology::SingleContinuum,
        }
    }

    #[test]
    fn broad_band_is_valid_without_warnings() {
        let r = validate(&fig1_like());
        assert!(r.is_valid());
        assert!(r.warnings.is_empty(), "{:?}", r.warnings);
    }

    #[test]
    fn reversed_band_is_a_violation() {
        let mut p = fig1_like();
        p.eta_min = 5.0;
        p.eta_max = 3.0;
        let r = validate(&p);
        assert!(r.violations.iter().any(|v| v == "eta_min < eta_max"));
    }

    #[test]
    fn level_on_band_edge_warns() {
        let mut p = fig1_like();
        p.e0 = 0.0;
        let r = validate(&p);
        assert!(r.is_valid());
        assert!(r.warnings.iter().any(|w| w.contains("discrete level at band edge")));
    }

    #[test]
    fn tabulated_knots_must_increase_and_span() {
        let mut p = fig1_like();
        p.g = CouplingFn::Tabulated {
            knots: vec![(0.0, 0.1), (30.0, 0.2), (20.0, 0.1)],
        };
        let r = validate(&p);
        assert!(r.violations.iter().any(|v| v.contains("strictly increasing")));
        assert!(r.violations.iter().any(|v| v.contains("span")));
    }

    #[test]
    fn tabulated_interpolates_linearly() {
        let g = CouplingFn::Tabulated {
            knots: vec![(0.0, 0.0), (2.0, 1.0), (4.0, 0.0)],
        };
        assert_eq!(g.amplitude(1.0), 0.5);
        assert_eq!(g.amplitude(3.0), 0.5);
        assert_eq!(g.amplitude(2.0), 1.0);
        assert_eq!(g.amplitude(5.0), 0.0);
    }

    #[test]
    fn golden_rule_inversion() {
        let g = CouplingFn::from_width(0.3);
        assert!((g.amplitude(0.0) - 0.218_509_686).abs() < 1e-8);
    }

    #[test]
    fn bloch_poles() {
        let b = bloch_from_rho(&ReducedDensity::new(1.0, Complex64::new(0.0, 0.0)));
        assert_eq!((b.bx, b.by, b.bz), (0.0, 0.0, 1.0));
        let b = bloch_from_rho(&ReducedDensity::localized());
        assert_eq!((b.bx, b.by, b.bz), (1.0, 0.0, 0.0));
    }

    #[test]
    fn bloch_of_rotating_pure_state() {
        let t = 0.7;
        let rho = ReducedDensity::new(0.5, Complex64::from_polar(0.5, t));
        let b = rho.bloch();
        assert!((b.bx - t.cos()).abs() < 1e-15);
        assert!((b.by + t.sin()).abs() < 1e-15);
        assert!(b.bz.abs() < 1e-15);
    }

    #[test]
    fn grid_samples_are_strictly_increasing() {
        let g = TimeGrid::uniform(0.0, 3.0, 7).unwrap();
        let s = g.samples();
        assert_eq!(s.len(), 7);
        assert_eq!(s[6], 3.0);
        assert!(s.windows(2).all(|w| w[1] > w[0]));
        assert!(TimeGrid::uniform(0.0, 1.0, 1).is_err());
        assert!(TimeGrid::uniform(-1.0, 1.0, 3).is_err());
    }

    proptest! {
        #[test]
        fn bloch_round_trip(theta in 0.0..PI, phi in 0.0..(2.0 * PI), r in 0.0..1.0f64) {
            let b = BlochVector::new(r * theta.sin() * phi.cos(), r * theta.sin() * phi.sin(), r * theta.cos());
            let rho = ReducedDensity::from_bloch(&b);
            prop_assert!(rho.is_positive());
            let back = rho.bloch();
            prop_assert!((back.bx - b.bx).abs() < 1e-14);
            prop_assert!((back.by - b.by).abs() < 1e-14);
            prop_assert!((back.bz - b.bz).abs() < 1e-14);
            let again = ReducedDensity::from_bloch(&back);
            prop_assert!(again.max_abs_diff(&rho) < 1e-14);
        }
    }
}
