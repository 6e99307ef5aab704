//! Lowest adiabatic doublet of the bath-plus-coupling operators `H_b +- G`
//! for the continuum model with `g = g'`: the dispersion root below the
//! band, the doublet overlap, and its dependence on the high-energy cutoff.
//!
//! Integrals over the band are taken in the log-offset variable
//! `u = ln((eta - E)/d)` with `d = eta_min - E`, where `eta - E = d e^u`.
//! The `1/(eta - E)` weight then disappears and a root just below the band
//! edge costs nothing extra.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CouplingFn, ModelParams};
use crate::par;
use crate::quad::{self, QuadTol};

/// Smallest offset `eta_min - E0` considered.
const MIN_OFFSET: f64 = 1e-250;
/// Graded breakpoints towards the band edge in the log-offset variable.
const EDGE_BREAKS: i32 = 48;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticResult {
    /// Cutoff `eta_max` used.
    pub cutoff: f64,
    #[serde(rename = "E0")]
    pub e0: f64,
    pub a0_sq: f64,
    /// `(1/4) int g^2/(E0 - eta)^2`.
    #[serde(rename = "I")]
    pub i: f64,
    pub overlap: f64,
    pub effective_splitting: f64,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub warnings: Vec<String>,
}

struct Band<'a> {
    g: &'a CouplingFn,
    lo: f64,
    hi: f64,
}

impl Band<'_> {
    fn breaks(&self, d: f64, u_max: f64) -> Vec<f64> {
        let mut b: Vec<f64> = (1..EDGE_BREAKS).map(|k| u_max * 0.5f64.powi(k)).collect();
        b.extend(
            self.g
                .kinks(self.lo, self.hi)
                .into_iter()
                .map(|x| ((x - self.lo) / d).ln_1p()),
        );
        b
    }

    /// `int g^2(eta) (eta - E)^{-power} d eta` with `E = lo - d`, for
    /// power 1 or 2.
    fn moment(&self, d: f64, power: i32) -> Result<f64> {
        let ln_d = d.ln();
        let u_max = ((self.hi - self.lo) / d).ln_1p();
        let g = self.g;
        let lo = self.lo;
        // eta - lo = d (e^u - 1); (eta - E)^{1 - power} = (d e^u)^{1 - power}.
        let f = |u: f64| {
            let eta = lo + d * u.exp_m1();
            let w = if power == 1 { 1.0 } else { (-(ln_d + u)).exp() };
            g.squared(eta.min(self.hi)) * w
        };
        let tol = QuadTol {
            abs: 0.0,
            rel: 1e-12,
            ..QuadTol::default()
        };
        quad::integrate_with_breaks(f, 0.0, u_max, &self.breaks(d, u_max), tol)
    }
}

fn band(params: &ModelParams) -> Band<'_> {
    Band {
        g: &params.g,
        lo: params.eta_min,
        hi: params.eta_max,
    }
}

fn check(params: &ModelParams) -> Result<Vec<String>> {
    let mut report = crate::model::validate(params);
    report.warnings.clear();
    let mut warnings = report.into_result()?;
    if let CouplingFn::PowerLaw { exponent, .. } = params.g {
        if !(0.0..1.0).contains(&exponent) {
            return Err(Error::InvalidParams(format!(
                "power-law exponent must lie in [0, 1), got {exponent}"
            )));
        }
    }
    if params.g != params.g_prime {
        warnings.push("g and g_prime differ: the doublet analysis uses g".into());
    }
    let width = params.eta_max - params.eta_min;
    if (params.e0 - params.eta_min).abs() > 0.1 * width {
        warnings.push("e0 is far from the lower band edge".into());
    }
    Ok(warnings)
}

/// Root `E0 < eta_min` of `E0 - e0 = int g^2/(E0 - eta)`.
pub fn dispersion_root(params: &ModelParams) -> Result<f64> {
    check(params)?;
    root_offset(params).map(|d| params.eta_min - d)
}

fn root_offset(params: &ModelParams) -> Result<f64> {
    let b = band(params);
    let gap = params.eta_min - params.e0;
    // F(d) = (E0 - e0) + int g^2/(eta - E0), decreasing in d.
    let f = |d: f64| b.moment(d, 1).map(|j| gap - d + j);
    let f_min = f(MIN_OFFSET)?;
    if !(f_min > 0.0) {
        return Err(Error::NoRoot(
            "dispersion function has no sign change below the band".into(),
        ));
    }
    let total = quad::integrate_with_breaks(
        |eta| params.g.squared(eta),
        params.eta_min,
        params.eta_max,
        &params.g.kinks(params.eta_min, params.eta_max),
        QuadTol::default(),
    )?;
    let mut d_hi = 1f64.max(10.0 * total / (params.eta_max - params.eta_min));
    let mut f_hi = f(d_hi)?;
    while f_hi > 0.0 {
        d_hi *= 2.0;
        if !d_hi.is_finite() {
            return Err(Error::NoRoot("lower bracket expansion diverged".into()));
        }
        f_hi = f(d_hi)?;
    }
    if f_hi == 0.0 {
        return Ok(d_hi);
    }
    // Solve in ln d so that roots hugging the band edge are resolved.
    let failure = std::cell::RefCell::new(None);
    let w = quad::brent(
        |w| match f(w.exp()) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        },
        MIN_OFFSET.ln(),
        d_hi.ln(),
        1e-15,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(w?.exp())
}

/// Doublet quantities at the configured cutoff `eta_max`.
pub fn overlap_factor(params: &ModelParams) -> Result<AdiabaticResult> {
    let warnings = check(params)?;
    let d = root_offset(params)?;
    let i = 0.25 * band(params).moment(d, 2)?;
    let a0_sq = 1.0 / (1.0 + i);
    let overlap = (1.0 - i) / (1.0 + i);
    Ok(AdiabaticResult {
        cutoff: params.eta_max,
        e0: params.eta_min - d,
        a0_sq,
        i,
        overlap,
        effective_splitting: params.epsilon * overlap,
        warnings,
    })
}

/// [`overlap_factor`] for each cutoff, which must increase and exceed
/// `eta_min`.
pub fn cutoff_sweep(params: &ModelParams, cutoffs: &[f64]) -> Result<Vec<AdiabaticResult>> {
    if cutoffs.is_empty() {
        return Err(Error::InvalidParams("cutoff sweep needs at least one cutoff".into()));
    }
    if cutoffs.windows(2).any(|w| !(w[1] > w[0])) || !(cutoffs[0] > params.eta_min) {
        return Err(Error::InvalidParams(
            "cutoffs must increase and lie above eta_min".into(),
        ));
    }
    par::try_map(cutoffs, |&c| {
        let mut p = params.clone();
        p.eta_max = c;
        overlap_factor(&p)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Topology;

    fn edge(g: CouplingFn, cutoff: f64) -> ModelParams {
        ModelParams {
            epsilon: 1.0,
            e0: 0.0,
            eta_min: 0.0,
            eta_max: cutoff,
            g: g.clone(),
            g_prime: g,
            topology: Topology::SingleContinuum,
        }
    }

    #[test]
    fn uncoupled_root_is_bare_level() {
        let mut p = edge(CouplingFn::constant(0.0), 10.0);
        p.e0 = -0.3;
        let r = overlap_factor(&p).unwrap();
        assert!((r.e0 + 0.3).abs() < 1e-14, "{r:?}");
        assert_eq!((r.i, r.overlap, r.a0_sq), (0.0, 1.0, 1.0));
        assert_eq!(r.effective_splitting, 1.0);
        p.e0 = 0.0;
        assert!(matches!(dispersion_root(&p), Err(Error::NoRoot(_))));
    }

    #[test]
    fn constant_coupling_matches_closed_form() {
        // int g^2/(eta - E) = g^2 ln(1 + L/d), I = g^2/4 (1/d - 1/(d + L)).
        let g2 = 0.05;
        let p = edge(CouplingFn::power_law(g2, 0.0), 10.0);
        let r = overlap_factor(&p).unwrap();
        let d = -r.e0;
        assert!((d - g2 * (10.0 / d).ln_1p()).abs() < 1e-12 * d);
        let i = 0.25 * g2 * (1.0 / d - 1.0 / (d + 10.0));
        assert!((r.i - i).abs() < 1e-10 * i, "{} {}", r.i, i);
    }

    #[test]
    fn power_law_root_matches_bisection() {
        let p = edge(CouplingFn::power_law(0.1, 0.5), 20.0);
        let e0 = dispersion_root(&p).unwrap();
        assert!(e0 < 0.0);
        // Direct quadrature of the dispersion function in eta.
        let dispersion = |e: f64| {
            e - quad::integrate(|eta| 0.1 * eta.sqrt() / (e - eta), 0.0, 20.0, QuadTol::default()).unwrap()
        };
        let (mut lo, mut hi) = (-100.0, -1e-9);
        assert!(dispersion(lo) < 0.0 && dispersion(hi) > 0.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if dispersion(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((e0 - lo).abs() < 1e-8 * lo.abs(), "{e0} {lo}");
    }

    #[test]
    fn sweeps_are_monotone_and_consistent() {
        for (g, floor) in [
            (CouplingFn::power_law(1e-3, 0.5), 0.99),
            (CouplingFn::power_law(1e-21, 0.0), 0.99),
            (CouplingFn::power_law(0.05, 0.0), 0.0),
        ] {
            let sweep = cutoff_sweep(&edge(g.clone(), 1.0), &[1.0, 10.0, 100.0, 1000.0]).unwrap();
            for w in sweep.windows(2) {
                assert!(w[1].e0 < w[0].e0, "{g:?} {sweep:?}");
                assert!(w[1].overlap > w[0].overlap, "{g:?} {sweep:?}");
            }
            for r in &sweep {
                assert!((r.overlap - (2.0 * r.a0_sq - 1.0)).abs() <= 1e-12);
                assert!(r.i >= 0.0 && r.overlap <= 1.0 && r.overlap > -1.0);
            }
            assert!(sweep[3].overlap >= floor, "{g:?} {sweep:?}");
        }
    }

    #[test]
    fn weak_coupling_limit_is_continuous() {
        let mut last = 0.0;
        for k in 1..6 {
            let mut p = edge(CouplingFn::power_law(10f64.powi(-2 * k), 0.5), 10.0);
            p.e0 = -0.5;
            let r = overlap_factor(&p).unwrap();
            assert!(r.overlap > last);
            assert!((r.e0 + 0.5).abs() < 10f64.powi(1 - 2 * k));
            last = r.overlap;
        }
        assert!(1.0 - last < 1e-8);
    }

    #[test]
    fn rejects_bad_exponent_and_sweeps() {
        let p = edge(CouplingFn::power_law(0.1, 1.5), 10.0);
        assert!(overlap_factor(&p).is_err());
        let p = edge(CouplingFn::power_law(0.1, 0.5), 10.0);
        assert!(cutoff_sweep(&p, &[10.0, 5.0]).is_err());
        assert!(cutoff_sweep(&p, &[]).is_err());
    }

    #[test]
    fn asymmetric_couplings_warn() {
        let mut p = edge(CouplingFn::power_law(0.1, 0.5), 10.0);
        p.g_prime = CouplingFn::constant(0.0);
        assert!(!overlap_factor(&p).unwrap().warnings.is_empty());
    }
}
