//! Stationary Fano solution of each invariant subspace.
//!
//! Channel A is `{|+0_b>, |-eta>}`: bare level `e0 + epsilon`, continuum at
//! `eta`. Channel B is `{|-0_b>, |+eta>}`: bare level `e0`, continuum at
//! `eta + epsilon`. Both are instances of [`FanoProblem`], which works in
//! eigen-energy coordinates `E` with the continuum occupying
//! `[eta_min + offset, eta_max + offset]`.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{CouplingFn, ModelParams, Topology};
use crate::quad::{brent, integrate_with_breaks, QuadTol};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Channel {
    A,
    B,
}

/// `PV int_lo^hi f(eta) / (x - eta) d eta` by subtracting the singularity
/// when `x` is inside the band.
pub fn principal_value<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    x: f64,
    kinks: &[f64],
) -> Result<f64> {
    let tol = QuadTol::default();
    if x < lo || x > hi {
        // Proper integral; grade panels towards the nearer edge.
        let edge = if x < lo { lo } else { hi };
        let d = (x - edge).abs();
        let mut breaks = kinks.to_vec();
        let mut s = d;
        while s < hi - lo {
            breaks.push(if x < lo { lo + s } else { hi - s });
            s *= 8.0;
        }
        return integrate_with_breaks(|eta| f(eta) / (x - eta), lo, hi, &breaks, tol);
    }
    let fx = f(x);
    if x == lo || x == hi {
        if fx != 0.0 {
            let inf = if x == lo { f64::NEG_INFINITY } else { f64::INFINITY };
            return Ok(inf);
        }
        return integrate_with_breaks(|eta| f(eta) / (x - eta), lo, hi, kinks, tol);
    }
    let mut breaks = kinks.to_vec();
    breaks.push(x);
    let smooth = integrate_with_breaks(
        |eta| {
            if eta == x {
                0.0
            } else {
                (f(eta) - fx) / (x - eta)
            }
        },
        lo,
        hi,
        &breaks,
        tol,
    )?;
    let log = if fx == 0.0 {
        0.0
    } else {
        fx * ((x - lo) / (hi - x)).ln()
    };
    Ok(smooth + log)
}

/// One discrete level of energy `bare` coupled through `coupling` to a flat
/// continuum whose states `eta` sit at energy `eta + offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct FanoProblem {
    pub bare: f64,
    pub offset: f64,
    pub eta_min: f64,
    pub eta_max: f64,
    pub coupling: CouplingFn,
}

impl FanoProblem {
    pub fn new(params: &ModelParams, channel: Channel) -> Self {
        match channel {
            Channel::A => FanoProblem {
                bare: params.e0 + params.epsilon,
                offset: 0.0,
                eta_min: params.eta_min,
                eta_max: params.eta_max,
                coupling: params.g.clone(),
            },
            Channel::B => FanoProblem {
                bare: params.e0,
                offset: params.epsilon,
                eta_min: params.eta_min,
                eta_max: params.eta_max,
                coupling: params.g_prime.clone(),
            },
        }
    }

    pub fn lo(&self) -> f64 {
        self.eta_min + self.offset
    }

    pub fn hi(&self) -> f64 {
        self.eta_max + self.offset
    }

    pub fn width(&self) -> f64 {
        self.eta_max - self.eta_min
    }

    pub fn contains(&self, e: f64) -> bool {
        e >= self.lo() && e <= self.hi()
    }

    /// Squared coupling at eigen-energy coordinate `e`.
    pub fn c2(&self, e: f64) -> f64 {
        self.coupling.squared(e - self.offset)
    }

    fn kinks(&self) -> Vec<f64> {
        self.coupling
            .kinks(self.eta_min, self.eta_max)
            .into_iter()
            .map(|k| k + self.offset)
            .collect()
    }

    /// `F(E) = PV int |g|^2 / (E - eta - offset)`.
    pub fn shift(&self, e: f64) -> Result<f64> {
        if self.coupling.is_zero() {
            return Ok(0.0);
        }
        principal_value(|x| self.c2(x), self.lo(), self.hi(), e, &self.kinks())
    }

    /// `dF/dE = -int |g|^2 / (E - eta)^2`, defined outside the band only.
    pub fn shift_derivative(&self, e: f64) -> Result<f64> {
        if self.contains(e) {
            return Err(Error::DomainError(format!(
                "dF/dE requested at {e}, inside the band [{}, {}]",
                self.lo(),
                self.hi()
            )));
        }
        if self.coupling.is_zero() {
            return Ok(0.0);
        }
        let (lo, hi) = (self.lo(), self.hi());
        let edge = if e < lo { lo } else { hi };
        let mut breaks = self.kinks();
        let mut s = (e - edge).abs();
        while s < hi - lo {
            breaks.push(if e < lo { lo + s } else { hi - s });
            s *= 8.0;
        }
        integrate_with_breaks(
            |x| -self.c2(x) / ((e - x) * (e - x)),
            lo,
            hi,
            &breaks,
            QuadTol::default(),
        )
    }

    /// `E - bare - F(E)`; the roots outside the band are discrete levels.
    pub fn dispersion(&self, e: f64) -> Result<f64> {
        Ok(e - self.bare - self.shift(e)?)
    }

    /// `E - bare - F(E)` and `|g(E)|^2`, the ingredients of the density.
    pub fn detuning(&self, e: f64) -> Result<(f64, f64)> {
        Ok((self.dispersion(e)?, self.c2(e)))
    }

    /// `|a0(E)|^2` on the band.
    pub fn density(&self, e: f64) -> Result<f64> {
        if !self.contains(e) {
            return Err(Error::DomainError(format!(
                "spectral density requested at {e}, outside [{}, {}]",
                self.lo(),
                self.hi()
            )));
        }
        let c2 = self.c2(e);
        if c2 == 0.0 {
            return Ok(0.0);
        }
        let x = self.dispersion(e)?;
        Ok(c2 / (x * x + PI * PI * c2 * c2))
    }

    /// Resonance energy (root of the dispersion inside the band nearest to
    /// the bare level) and Golden-Rule width there.
    pub fn resonance(&self) -> Result<(f64, f64)> {
        if self.coupling.is_zero() {
            return Ok((self.bare, 0.0));
        }
        let (lo, hi) = (self.lo(), self.hi());
        let pad = 1e-12 * self.width();
        let x0 = self.bare.clamp(lo + pad, hi - pad);
        let d0 = self.dispersion(x0)?;
        if d0 == 0.0 {
            return Ok((x0, 2.0 * PI * self.c2(x0)));
        }
        let mut step = 1e-3 * self.width();
        let (mut left, mut right) = (x0, x0);
        let (mut d_left, mut d_right) = (d0, d0);
        loop {
            let can_left = left > lo + pad;
            let can_right = right < hi - pad;
            if !can_left && !can_right {
                return Err(Error::RootNotBracketed(format!(
                    "no sign change of E - bare - F(E) in [{lo}, {hi}]"
                )));
            }
            if can_right {
                let r = (x0 + step).min(hi - pad);
                let dr = self.dispersion(r)?;
                if dr.signum() != d_right.signum() {
                    let root = brent(|e| self.dispersion(e).unwrap_or(f64::NAN), right, r, 1e-12 * self.width())?;
                    return Ok((root, 2.0 * PI * self.c2(root)));
                }
                right = r;
                d_right = dr;
            }
            if can_left {
                let l = (x0 - step).max(lo + pad);
                let dl = self.dispersion(l)?;
                if dl.signum() != d_left.signum() {
                    let root = brent(|e| self.dispersion(e).unwrap_or(f64::NAN), l, left, 1e-12 * self.width())?;
                    return Ok((root, 2.0 * PI * self.c2(root)));
                }
                left = l;
                d_left = dl;
            }
            step *= 2.0;
        }
    }

    /// Roots of the dispersion equation outside the band, with their
    /// weights `(1 - F'(E_d))^-1`. With zero coupling the bare level itself
    /// is returned with weight 1.
    pub fn discrete_roots(&self) -> Result<Vec<(f64, f64)>> {
        if self.coupling.is_zero() {
            return Ok(vec![(self.bare, 1.0)]);
        }
        let (lo, hi) = (self.lo(), self.hi());
        let w = self.width();
        let delta = 1e-10 * w;
        let xtol = 1e-13 * w;
        let mut roots = Vec::new();

        let near = lo - delta;
        if self.dispersion(near)? > 0.0 {
            let mut step = 1e-3 * w;
            let mut inner = near;
            let root = loop {
                let outer = near - step;
                if self.dispersion(outer)? < 0.0 {
                    break brent(|e| self.dispersion(e).unwrap_or(f64::NAN), outer, inner, xtol)?;
                }
                inner = outer;
                step *= 2.0;
                if !step.is_finite() {
                    return Err(Error::RootNotBracketed("lower discrete root".into()));
                }
            };
            roots.push((root, 1.0 / (1.0 - self.shift_derivative(root)?)));
        }

        let near = hi + delta;
        if self.dispersion(near)? < 0.0 {
            let mut step = 1e-3 * w;
            let mut inner = near;
            let root = loop {
                let outer = near + step;
                if self.dispersion(outer)? > 0.0 {
                    break brent(|e| self.dispersion(e).unwrap_or(f64::NAN), inner, outer, xtol)?;
                }
                inner = outer;
                step *= 2.0;
                if !step.is_finite() {
                    return Err(Error::RootNotBracketed("upper discrete root".into()));
                }
            };
            roots.push((root, 1.0 / (1.0 - self.shift_derivative(root)?)));
        }
        Ok(roots)
    }

    /// `int |a0(E)|^2 dE` over the band.
    pub fn density_integral(&self, resonance: f64, width: f64) -> Result<f64> {
        if self.coupling.is_zero() {
            return Ok(0.0);
        }
        let mut breaks = self.kinks();
        for k in [-10.0, -3.0, -1.0, 0.0, 1.0, 3.0, 10.0] {
            breaks.push(resonance + k * width);
        }
        let tol = QuadTol {
            abs: 1e-12,
            rel: 1e-10,
            max_intervals: 20000,
        };
        integrate_with_breaks(
            |e| self.density(e).unwrap_or(f64::NAN),
            self.lo(),
            self.hi(),
            &breaks,
            tol,
        )
    }

    pub fn solve(&self, channel: Channel) -> Result<SpectralSolution> {
        let (resonance_energy, width) = self.resonance()?;
        let discrete = self.discrete_roots()?;
        Ok(SpectralSolution {
            channel,
            problem: self.clone(),
            resonance_energy,
            width,
            discrete,
        })
    }
}

/// Spectral decomposition of the bare level of one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSolution {
    pub channel: Channel,
    pub problem: FanoProblem,
    pub resonance_energy: f64,
    pub width: f64,
    /// `(E_d, |a0(E_d)|^2)` for every discrete root.
    pub discrete: Vec<(f64, f64)>,
}

impl SpectralSolution {
    pub fn density(&self, e: f64) -> Result<f64> {
        self.problem.density(e)
    }

    pub fn shift(&self, e: f64) -> Result<f64> {
        self.problem.shift(e)
    }

    /// Band integral of the density plus the discrete weights; 1 for a
    /// complete eigenbasis.
    pub fn completeness(&self) -> Result<f64> {
        let band = self
            .problem
            .density_integral(self.resonance_energy, self.width.max(1e-6 * self.problem.width()))?;
        Ok(band + self.discrete.iter().map(|&(_, w)| w).sum::<f64>())
    }

    /// Breit-Wigner approximation to the density.
    pub fn breit_wigner(&self, e: f64) -> f64 {
        let d = e - self.resonance_energy;
        let g = self.width;
        (g / (2.0 * PI)) / (d * d + g * g / 4.0)
    }
}

pub fn solve(params: &ModelParams, channel: Channel) -> Result<SpectralSolution> {
    FanoProblem::new(params, channel).solve(channel)
}

pub fn shift_function(params: &ModelParams, channel: Channel, e: f64) -> Result<f64> {
    FanoProblem::new(params, channel).shift(e)
}

pub fn spectral_density(params: &ModelParams, channel: Channel, e: f64) -> Result<f64> {
    FanoProblem::new(params, channel).density(e)
}

pub fn resonance(params: &ModelParams, channel: Channel) -> Result<(f64, f64)> {
    FanoProblem::new(params, channel).resonance()
}

pub fn discrete_roots(params: &ModelParams, channel: Channel) -> Result<Vec<(f64, f64)>> {
    FanoProblem::new(params, channel).discrete_roots()
}

/// Overlap `int B^(E)(eta) A^(E')(eta) d eta` of channel-B and channel-A
/// continuum eigenfunctions sharing one continuum, for real couplings.
///
/// With `x = E - epsilon` the overlap is
/// `PV (u(E) - v(E')) / (E' - x) + C(E) delta(E' - x)`, where
/// `u(E) = H(x) + z_b(E) c(x)`, `v(E') = H(E') + z_a(E') c(E')`,
/// `c = g g'`, `H(y) = PV int c(eta) / (y - eta)` and `z` are the Fano
/// detunings divided by `|g|^2` of each channel.
#[derive(Debug, Clone)]
pub struct RecorrelationKernel {
    pub a: FanoProblem,
    pub b: FanoProblem,
    pub epsilon: f64,
    g: CouplingFn,
    g_prime: CouplingFn,
}

impl RecorrelationKernel {
    pub fn new(params: &ModelParams) -> Result<Self> {
        if params.topology != Topology::SingleContinuum {
            return Err(Error::DomainError(
                "continuum overlap vanishes identically for orthogonal continua".into(),
            ));
        }
        Ok(RecorrelationKernel {
            a: FanoProblem::new(params, Channel::A),
            b: FanoProblem::new(params, Channel::B),
            epsilon: params.epsilon,
            g: params.g.clone(),
            g_prime: params.g_prime.clone(),
        })
    }

    pub fn is_zero(&self) -> bool {
        self.g.is_zero() || self.g_prime.is_zero()
    }

    /// `c(eta) = g(eta) g'(eta)`.
    pub fn c(&self, eta: f64) -> f64 {
        self.g.amplitude(eta) * self.g_prime.amplitude(eta)
    }

    /// `H(y) = PV int g g' / (y - eta)`.
    pub fn hilbert(&self, y: f64) -> Result<f64> {
        if self.is_zero() {
            return Ok(0.0);
        }
        let mut kinks = self.g.kinks(self.a.eta_min, self.a.eta_max);
        kinks.extend(self.g_prime.kinks(self.a.eta_min, self.a.eta_max));
        principal_value(|eta| self.c(eta), self.a.eta_min, self.a.eta_max, y, &kinks)
    }

    /// `u(E)` for a channel-B continuum energy.
    pub fn u(&self, e: f64) -> Result<f64> {
        let x = e - self.epsilon;
        let (xb, gp2) = self.b.detuning(e)?;
        Ok(self.hilbert(x)? + xb / gp2 * self.c(x))
    }

    /// `v(E')` for a channel-A continuum energy.
    pub fn v(&self, e: f64) -> Result<f64> {
        let (xa, g2) = self.a.detuning(e)?;
        Ok(self.hilbert(e)? + xa / g2 * self.c(e))
    }

    /// Smooth (principal-value) part of the kernel at `E != E' + epsilon`.
    pub fn smooth(&self, e: f64, e_prime: f64) -> Result<f64> {
        if self.is_zero() {
            return Ok(0.0);
        }
        Ok((self.u(e)? - self.v(e_prime)?) / (e_prime - (e - self.epsilon)))
    }

    /// Coefficient `C(E)` of `delta(E' - E + epsilon)`.
    pub fn delta_coefficient(&self, e: f64) -> Result<f64> {
        if self.is_zero() {
            return Ok(0.0);
        }
        let x = e - self.epsilon;
        let (xb, gp2) = self.b.detuning(e)?;
        let (xa, g2) = self.a.detuning(x)?;
        Ok(self.c(x) * (xb / gp2 * xa / g2 + PI * PI))
    }

    /// `|b0(E)|^2 u(E)`, finite even where the coupling vanishes.
    pub fn weighted_u(&self, e: f64) -> Result<f64> {
        let x = e - self.epsilon;
        let (xb, gp2) = self.b.detuning(e)?;
        let db = xb * xb + PI * PI * gp2 * gp2;
        if db == 0.0 {
            return Ok(0.0);
        }
        Ok((gp2 * self.hilbert(x)? + xb * self.c(x)) / db)
    }

    /// `|a0(E')|^2 v(E')`.
    pub fn weighted_v(&self, e: f64) -> Result<f64> {
        let (xa, g2) = self.a.detuning(e)?;
        let da = xa * xa + PI * PI * g2 * g2;
        if da == 0.0 {
            return Ok(0.0);
        }
        Ok((g2 * self.hilbert(e)? + xa * self.c(e)) / da)
    }

    /// `|b0(E)|^2 |a0(E - epsilon)|^2 C(E)`.
    pub fn weighted_delta(&self, e: f64) -> Result<f64> {
        let x = e - self.epsilon;
        let (xb, gp2) = self.b.detuning(e)?;
        let (xa, g2) = self.a.detuning(x)?;
        let db = xb * xb + PI * PI * gp2 * gp2;
        let da = xa * xa + PI * PI * g2 * g2;
        if db == 0.0 || da == 0.0 {
            return Ok(0.0);
        }
        Ok(self.c(x) * (xb * xa + PI * PI * g2 * gp2) / (db * da))
    }

    /// Long-time limit of the re-correlation integral with the
    /// `exp(-i epsilon t)` carrier removed:
    /// `int dE |b0|^2 |a0(x)|^2 [C + i pi (u(E) - v(x))]`.
    pub fn steady_amplitude(&self) -> Result<num_complex::Complex64> {
        use num_complex::Complex64;
        if self.is_zero() {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let (ra, wa) = self.a.resonance()?;
        let (rb, wb) = self.b.resonance()?;
        let mut breaks = Vec::new();
        for k in [-10.0, -3.0, -1.0, 0.0, 1.0, 3.0, 10.0] {
            breaks.push(rb + k * wb);
            breaks.push(ra + self.epsilon + k * wa);
        }
        let tol = QuadTol {
            abs: 1e-12,
            rel: 1e-9,
            max_intervals: 20000,
        };
        let (lo, hi) = (self.b.lo(), self.b.hi());
        let re = integrate_with_breaks(
            |e| self.weighted_delta(e).unwrap_or(f64::NAN),
            lo,
            hi,
            &breaks,
            tol,
        )?;
        let im = integrate_with_breaks(
            |e| {
                let x = e - self.epsilon;
                let rb = self.b.density(e).unwrap_or(f64::NAN);
                let ra = self.a.density(x).unwrap_or(f64::NAN);
                let wu = self.weighted_u(e).unwrap_or(f64::NAN);
                let wv = self.weighted_v(x).unwrap_or(f64::NAN);
                PI * (wu * ra - rb * wv)
            },
            lo,
            hi,
            &breaks,
            tol,
        )?;
        Ok(Complex64::new(re, im))
    }
}

pub fn continuum_amplitude_overlap(params: &ModelParams) -> Result<RecorrelationKernel> {
    RecorrelationKernel::new(params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Topology;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn params(g: f64, gp: f64, eps: f64, e0: f64, lo: f64, hi: f64) -> ModelParams {
        ModelParams {
            epsilon: eps,
            e0,
            eta_min: lo,
            eta_max: hi,
            g: CouplingFn::constant(g),
            g_prime: CouplingFn::constant(gp),
            topology: Topology::SingleContinuum,
        }
    }

    #[test]
    fn shift_vanishes_at_band_centre() {
        let p = params(0.5, 0.0, 1.0, 0.0, 0.0, 2.0);
        assert!(shift_function(&p, Channel::A, 1.0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn shift_matches_log_for_constant_coupling() {
        let p = params(0.5, 0.0, 1.0, 0.0, 0.0, 2.0);
        let f = shift_function(&p, Channel::A, 1.5).unwrap();
        assert_relative_eq!(f, 0.25 * 3f64.ln(), max_relative = 1e-12);
        assert_relative_eq!(f, 0.274_653_072_167_027, max_relative = 1e-12);
    }

    #[test]
    fn subtracted_quadrature_matches_log_for_nonconstant_but_flat_table() {
        // A tabulated flat coupling forces the generic path through the
        // quadrature of the subtracted integrand.
        let mut p = params(0.0, 0.0, 1.0, 0.0, 0.0, 2.0);
        p.g = CouplingFn::Tabulated {
            knots: vec![(0.0, 0.5), (0.7, 0.5), (2.0, 0.5)],
        };
        let f = shift_function(&p, Channel::A, 1.5).unwrap();
        assert_relative_eq!(f, 0.25 * 3f64.ln(), max_relative = 1e-9);
    }

    #[test]
    fn shift_of_linear_coupling_matches_closed_form() {
        // g^2 = eta on [0, 1]: PV int eta/(E-eta) = -1 + E ln(E/(1-E)).
        let mut p = params(0.0, 0.0, 1.0, 0.0, 0.0, 1.0);
        p.g = CouplingFn::power_law(1.0, 1.0);
        for &e in &[0.2f64, 0.5, 0.9, -0.5, 1.5] {
            let exact = -1.0 + e * (e / (1.0 - e)).abs().ln();
            let f = shift_function(&p, Channel::A, e).unwrap();
            assert_relative_eq!(f, exact, max_relative = 1e-9, epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_coupling() {
        let p = params(0.0, 0.0, 1.0, 5.0, 0.0, 40.0);
        assert_eq!(shift_function(&p, Channel::A, 3.0).unwrap(), 0.0);
        assert_eq!(spectral_density(&p, Channel::A, 3.0).unwrap(), 0.0);
        assert_eq!(discrete_roots(&p, Channel::A).unwrap(), vec![(6.0, 1.0)]);
    }

    #[test]
    fn density_outside_band_is_domain_error() {
        let p = params(0.2, 0.0, 1.0, 20.0, 0.0, 40.0);
        assert!(matches!(
            spectral_density(&p, Channel::A, 41.0),
            Err(Error::DomainError(_))
        ));
    }

    #[test]
    fn resonance_on_symmetric_band() {
        let p = params(0.2, 0.0, 1.0, 20.0, 1.0, 41.0);
        let (er, gamma) = resonance(&p, Channel::A).unwrap();
        assert!((er - 21.0).abs() < 1e-10, "{er}");
        assert_relative_eq!(gamma, 2.0 * PI * 0.04, max_relative = 1e-14);
        let peak = spectral_density(&p, Channel::A, er).unwrap();
        assert_relative_eq!(peak, 2.0 / (PI * gamma), max_relative = 1e-9);
    }

    #[test]
    fn resonance_splitting_close_to_epsilon() {
        let p = ModelParams::broad_band(0.3, 0.3, 1.0, Topology::SingleContinuum);
        let (ea, _) = resonance(&p, Channel::A).unwrap();
        let (eb, _) = resonance(&p, Channel::B).unwrap();
        assert!(((ea - eb) - 1.0).abs() < 0.05, "{}", ea - eb);
    }

    #[test]
    fn density_is_breit_wigner_for_broad_band() {
        let gamma = 0.3;
        let p = ModelParams {
            epsilon: 1.0,
            e0: 30.0 * gamma,
            eta_min: 0.0,
            eta_max: 60.0 * gamma + 2.0,
            g: CouplingFn::from_width(gamma),
            g_prime: CouplingFn::constant(0.0),
            topology: Topology::SingleContinuum,
        };
        let s = solve(&p, Channel::A).unwrap();
        let mut worst: f64 = 0.0;
        let peak = s.breit_wigner(s.resonance_energy);
        for i in 0..=400 {
            let e = s.resonance_energy + (i as f64 - 200.0) * 0.05 * gamma;
            worst = worst.max((s.density(e).unwrap() - s.breit_wigner(e)).abs());
        }
        assert!(worst / peak < 0.01, "{}", worst / peak);
    }

    #[test]
    fn power_law_has_single_root_below_band() {
        let p = ModelParams {
            epsilon: 1.0,
            e0: -1.0,
            eta_min: 0.0,
            eta_max: 20.0,
            g: CouplingFn::power_law(0.1, 0.5),
            g_prime: CouplingFn::constant(0.0),
            topology: Topology::SingleContinuum,
        };
        // Channel A bare level is e0 + epsilon = 0, the lower edge.
        let roots = discrete_roots(&p, Channel::A).unwrap();
        assert_eq!(roots.len(), 1);
        let (e, w) = roots[0];
        assert!(e < 0.0);
        assert!(w > 0.0 && w <= 1.0);
        // Independent bisection on the dispersion function.
        let fp = FanoProblem::new(&p, Channel::A);
        let (mut a, mut b) = (-100.0, -1e-12);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if fp.dispersion(m).unwrap() > 0.0 {
                b = m
            } else {
                a = m
            }
        }
        assert!((e - 0.5 * (a + b)).abs() < 1e-9);
    }

    #[test]
    fn broad_band_has_negligible_discrete_weight() {
        let p = ModelParams::broad_band(0.3, 0.0, 1.0, Topology::SingleContinuum);
        let roots = discrete_roots(&p, Channel::A).unwrap();
        assert!(roots.iter().all(|&(_, w)| w < 1e-12), "{roots:?}");
    }

    #[test]
    fn channel_b_is_channel_a_with_swapped_roles() {
        // Channel B of (eps, e0, g') equals channel A of a model whose bare
        // level and continuum are both shifted by eps.
        let p = params(0.0, 0.3, 1.5, 10.0, 0.0, 20.0);
        let q = ModelParams {
            epsilon: 1.5,
            e0: 10.0 - 1.5,
            eta_min: 1.5,
            eta_max: 21.5,
            g: CouplingFn::constant(0.3),
            g_prime: CouplingFn::constant(0.0),
            topology: Topology::SingleContinuum,
        };
        let (eb, gb) = resonance(&p, Channel::B).unwrap();
        let (ea, ga) = resonance(&q, Channel::A).unwrap();
        assert_relative_eq!(eb, ea, max_relative = 1e-12);
        assert_relative_eq!(gb, ga, max_relative = 1e-12);
        for &e in &[3.0, 9.0, 10.0, 17.0] {
            assert_relative_eq!(
                spectral_density(&p, Channel::B, e).unwrap(),
                spectral_density(&q, Channel::A, e).unwrap(),
                max_relative = 1e-10
            );
        }
    }

    #[test]
    fn kernel_zero_without_g_prime() {
        let p = params(0.2, 0.0, 1.0, 20.0, 0.0, 40.0);
        let k = continuum_amplitude_overlap(&p).unwrap();
        assert_eq!(k.smooth(25.0, 21.0).unwrap(), 0.0);
        assert_eq!(k.delta_coefficient(25.0).unwrap(), 0.0);
    }

    #[test]
    fn kernel_rejects_orthogonal_continua() {
        let mut p = params(0.2, 0.2, 1.0, 20.0, 0.0, 40.0);
        p.topology = Topology::OrthogonalContinua;
        assert!(continuum_amplitude_overlap(&p).is_err());
    }

    #[test]
    fn weighted_forms_agree_with_raw_kernel() {
        let p = params(0.2, 0.3, 1.0, 20.0, 0.0, 40.0);
        let k = continuum_amplitude_overlap(&p).unwrap();
        let e = 22.3;
        let x = e - 1.0;
        let rb = spectral_density(&p, Channel::B, e).unwrap();
        let ra = spectral_density(&p, Channel::A, x).unwrap();
        assert_relative_eq!(k.weighted_u(e).unwrap(), rb * k.u(e).unwrap(), max_relative = 1e-12);
        assert_relative_eq!(k.weighted_v(x).unwrap(), ra * k.v(x).unwrap(), max_relative = 1e-12);
        assert_relative_eq!(
            k.weighted_delta(e).unwrap(),
            rb * ra * k.delta_coefficient(e).unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn steady_amplitude_in_breit_wigner_regime() {
        // For epsilon small against the widths the steady coefficient tends
        // to 2 sqrt(G G') / (G + G').
        let (gamma, gamma_p) = (2.0, 0.5);
        let mut p = ModelParams::broad_band(gamma, gamma_p, 0.01, Topology::SingleContinuum);
        p.e0 = 60.0;
        p.eta_max = 120.0;
        let k = continuum_amplitude_overlap(&p).unwrap();
        let s = k.steady_amplitude().unwrap();
        let (ea, _) = resonance(&p, Channel::A).unwrap();
        let (eb, _) = resonance(&p, Channel::B).unwrap();
        let split = ea - eb + p.epsilon;
        let bw = num_complex::Complex64::i() * (gamma * gamma_p).sqrt()
            / num_complex::Complex64::new(split, (gamma + gamma_p) / 2.0);
        assert!((s - bw).norm() < 2e-2, "{s} vs {bw}");
        assert!((s.norm() - 0.8).abs() < 2e-2, "{}", s.norm());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn density_non_negative_and_complete(g in 0.05..0.4f64, e0 in 8.0..30.0f64, eps in 0.2..2.0f64) {
            let p = params(g, 0.0, eps, e0, 0.0, 40.0);
            let s = solve(&p, Channel::A).unwrap();
            for i in 0..50 {
                let e = 40.0 * (i as f64 + 0.5) / 50.0;
                prop_assert!(s.density(e).unwrap() >= 0.0);
            }
            for &(ed, w) in &s.discrete {
                prop_assert!(!(0.0..=40.0).contains(&ed));
                prop_assert!(w > 0.0 && w <= 1.0);
            }
            prop_assert!((s.completeness().unwrap() - 1.0).abs() < 1e-6);
        }
    }
}
