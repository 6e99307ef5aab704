//! Reduced density from Fourier transforms of the exact spectral densities.
//!
//! Both channels are sampled on one uniform grid of the band variable:
//! boundary nodes `y_j = eta_min + j h` carry the single transforms (Filon
//! weights for piecewise-linear amplitudes) and the sources of the inner
//! principal-value integrals; midpoints `x_i = y_i + h/2` carry the outer
//! integral over channel-B energies `E_i = x_i + epsilon`. The inner
//! integrals form a Toeplitz product with kernel `1/((j - i - 1/2) h)`,
//! applied by FFT convolution.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{ModelParams, ReducedDensity, Topology};
use crate::par;
use crate::spectral::{self, Channel, RecorrelationKernel, SpectralSolution};

const MAX_NODES: usize = 1 << 21;

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Panel width resolving the narrowest resonance and the fastest phase.
pub fn panel_width(widths: &[f64], t_max: f64, band: f64) -> f64 {
    let mut h = band / 256.0;
    for &w in widths {
        if w > 0.0 {
            h = h.min(w / 40.0);
        }
    }
    if t_max > 0.0 {
        h = h.min(PI / (32.0 * t_max));
    }
    h
}

struct Recorrelation {
    /// Toeplitz kernel spectrum (length `m`).
    kernel_hat: Vec<Complex64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    m: usize,
    /// `|a0|^2` and `|a0|^2 v` on boundary nodes (trapezoid weighted).
    ra_y: Vec<f64>,
    rav_y: Vec<f64>,
    /// Midpoint data.
    ra_x: Vec<f64>,
    rav_x: Vec<f64>,
    rb_x: Vec<f64>,
    rbu_x: Vec<f64>,
    /// `L_i - S_i` of the singularity subtraction.
    correction: Vec<f64>,
    /// Time-independent delta-line contribution.
    delta_line: f64,
    /// `(E_d, w, H(E_d))` of channel-A discrete states.
    disc_a: Vec<(f64, f64, f64)>,
    /// `(E_d, w, H(E_d - epsilon))` of channel-B discrete states.
    disc_b: Vec<(f64, f64, f64)>,
}

/// Precomputed quadrature data for one parameter set and time horizon.
pub struct QuadratureEvolver {
    h: f64,
    n: usize,
    lo: f64,
    epsilon: f64,
    /// Filon-weighted `h |a0(y_j)|^2` and `h |b0(y_j + eps)|^2`.
    wa: Vec<f64>,
    wb: Vec<f64>,
    disc_a: Vec<(f64, f64)>,
    disc_b: Vec<(f64, f64)>,
    rec: Option<Recorrelation>,
    pub solution_a: SpectralSolution,
    pub solution_b: SpectralSolution,
}

fn normalize(weights: &mut [f64], discrete: &[(f64, f64)]) {
    let band: f64 = weights.iter().sum();
    let disc: f64 = discrete.iter().map(|&(_, w)| w).sum();
    if band > 0.0 {
        let scale = (1.0 - disc).max(0.0) / band;
        weights.iter_mut().for_each(|w| *w *= scale);
    }
}

impl QuadratureEvolver {
    pub fn new(params: &ModelParams, t_max: f64) -> Result<Self> {
        let sa = spectral::solve(params, Channel::A)?;
        let sb = spectral::solve(params, Channel::B)?;
        let h0 = panel_width(&[sa.width, sb.width], t_max, params.band_width());
        Self::assemble(params, sa, sb, h0)
    }

    /// As [`QuadratureEvolver::new`] with an explicit panel width.
    pub fn with_panel_width(params: &ModelParams, h0: f64) -> Result<Self> {
        let sa = spectral::solve(params, Channel::A)?;
        let sb = spectral::solve(params, Channel::B)?;
        Self::assemble(params, sa, sb, h0)
    }

    fn assemble(
        params: &ModelParams,
        sa: SpectralSolution,
        sb: SpectralSolution,
        h0: f64,
    ) -> Result<Self> {
        let band = params.band_width();
        let n = (band / h0).ceil() as usize;
        if n > MAX_NODES {
            return Err(Error::QuadratureFailure(format!(
                "{n} panels needed to resolve the band; reduce t_max or widen the resonances"
            )));
        }
        let n = n.max(16);
        let h = band / n as f64;
        let lo = params.eta_min;
        let eps = params.epsilon;
        let y: Vec<f64> = (0..=n).map(|j| lo + j as f64 * h).collect();
        let x: Vec<f64> = (0..n).map(|i| lo + (i as f64 + 0.5) * h).collect();
        let interior = |j: &usize| *j > 0 && *j < n;

        let idx: Vec<usize> = (0..=n).collect();
        let mut wa = par::try_map(&idx, |j| {
            if interior(j) {
                sa.density(y[*j]).map(|d| h * d)
            } else {
                Ok(0.0)
            }
        })?;
        let mut wb = par::try_map(&idx, |j| {
            if interior(j) {
                sb.density(y[*j] + eps).map(|d| h * d)
            } else {
                Ok(0.0)
            }
        })?;
        normalize(&mut wa, &sa.discrete);
        normalize(&mut wb, &sb.discrete);

        let rec = if params.topology == Topology::SingleContinuum {
            let kernel = RecorrelationKernel::new(params)?;
            if kernel.is_zero() {
                None
            } else {
                Some(Self::recorrelation(&kernel, &sa, &sb, &y, &x, h, n, lo)?)
            }
        } else {
            None
        };

        Ok(QuadratureEvolver {
            h,
            n,
            lo,
            epsilon: eps,
            wa,
            wb,
            disc_a: sa.discrete.clone(),
            disc_b: sb.discrete.clone(),
            rec,
            solution_a: sa,
            solution_b: sb,
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn recorrelation(
        k: &RecorrelationKernel,
        sa: &SpectralSolution,
        sb: &SpectralSolution,
        y: &[f64],
        x: &[f64],
        h: f64,
        n: usize,
        lo: f64,
    ) -> Result<Recorrelation> {
        let hi = lo + n as f64 * h;
        let eps = k.epsilon;
        let idx: Vec<usize> = (0..=n).collect();
        let trap = |j: usize| if j == 0 || j == n { 0.5 * h } else { h };
        let yv = par::try_map(&idx, |&j| -> Result<(f64, f64)> {
            if j == 0 || j == n {
                return Ok((0.0, 0.0));
            }
            Ok((
                trap(j) * sa.density(y[j])?,
                trap(j) * k.weighted_v(y[j])?,
            ))
        })?;
        let mid: Vec<usize> = (0..n).collect();
        let xv = par::try_map(&mid, |&i| -> Result<[f64; 5]> {
            let e = x[i] + eps;
            Ok([
                sa.density(x[i])?,
                k.weighted_v(x[i])?,
                sb.density(e)?,
                k.weighted_u(e)?,
                k.weighted_delta(e)?,
            ])
        })?;

        // S_i = sum_j w_j / (y_j - x_i), computed once by the same
        // convolution that handles the time-dependent sources.
        let m = (2 * n + 2).next_power_of_two();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(m);
        let inv = planner.plan_fft_inverse(m);
        // h(d) = 1/((-d - 1/2) h) for d = i - j in [-n, n-1].
        let mut kernel = vec![Complex64::new(0.0, 0.0); m];
        for d in -(n as i64)..(n as i64) {
            let slot = d.rem_euclid(m as i64) as usize;
            kernel[slot] = Complex64::new(1.0 / ((-(d as f64) - 0.5) * h), 0.0);
        }
        fwd.process(&mut kernel);

        let mut rec = Recorrelation {
            kernel_hat: kernel,
            fwd,
            inv,
            m,
            ra_y: yv.iter().map(|v| v.0).collect(),
            rav_y: yv.iter().map(|v| v.1).collect(),
            ra_x: xv.iter().map(|v| v[0]).collect(),
            rav_x: xv.iter().map(|v| v[1]).collect(),
            rb_x: xv.iter().map(|v| v[2]).collect(),
            rbu_x: xv.iter().map(|v| v[3]).collect(),
            correction: Vec::new(),
            delta_line: h * xv.iter().map(|v| v[4]).sum::<f64>(),
            disc_a: Vec::new(),
            disc_b: Vec::new(),
        };
        let ones: Vec<Complex64> = (0..=n).map(|j| Complex64::new(trap(j), 0.0)).collect();
        let s = rec.convolve(&ones);
        rec.correction = (0..n)
            .map(|i| ((hi - x[i]) / (x[i] - lo)).ln() - s[i].re)
            .collect();

        for &(e, w) in &sa.discrete {
            rec.disc_a.push((e, w, k.hilbert(e)?));
        }
        for &(e, w) in &sb.discrete {
            rec.disc_b.push((e, w, k.hilbert(e - eps)?));
        }
        Ok(rec)
    }

    pub fn panel(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> usize {
        self.n + 1
    }

    /// Survival amplitudes `a0(t)` and `b0(t)` of the two bare levels.
    pub fn amplitudes(&self, t: f64) -> (Complex64, Complex64) {
        let filon = sinc(0.5 * self.h * t).powi(2);
        let mut a = Complex64::new(0.0, 0.0);
        let mut b = Complex64::new(0.0, 0.0);
        for j in 0..=self.n {
            let y = self.lo + j as f64 * self.h;
            if self.wa[j] != 0.0 {
                a += self.wa[j] * Complex64::from_polar(1.0, -y * t);
            }
            if self.wb[j] != 0.0 {
                b += self.wb[j] * Complex64::from_polar(1.0, -(y + self.epsilon) * t);
            }
        }
        a *= filon;
        b *= filon;
        for &(e, w) in &self.disc_a {
            a += w * Complex64::from_polar(1.0, -e * t);
        }
        for &(e, w) in &self.disc_b {
            b += w * Complex64::from_polar(1.0, -e * t);
        }
        (a, b)
    }

    /// `int B(eta, t) A*(eta, t) d eta`, the re-correlation overlap of the
    /// continuum components of the two channels.
    pub fn recorrelation_term(&self, t: f64) -> Complex64 {
        let Some(rec) = &self.rec else {
            return Complex64::new(0.0, 0.0);
        };
        let (h, n, lo, eps) = (self.h, self.n, self.lo, self.epsilon);
        let y = |j: usize| lo + j as f64 * h;
        let x = |i: usize| lo + (i as f64 + 0.5) * h;

        let src1: Vec<Complex64> = (0..=n)
            .map(|j| rec.ra_y[j] * Complex64::from_polar(1.0, y(j) * t))
            .collect();
        let src2: Vec<Complex64> = (0..=n)
            .map(|j| rec.rav_y[j] * Complex64::from_polar(1.0, y(j) * t))
            .collect();
        let i1 = rec.convolve(&src1);
        let i2 = rec.convolve(&src2);

        let cell = sinc(0.5 * h * t);
        let mut pv = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let xi = x(i);
            let ph = Complex64::from_polar(1.0, xi * t);
            let inner1 = i1[i] + rec.ra_x[i] * ph * rec.correction[i];
            let inner2 = i2[i] + rec.rav_x[i] * ph * rec.correction[i];
            let outer = Complex64::from_polar(1.0, -(xi + eps) * t);
            pv += outer * (rec.rbu_x[i] * inner1 - rec.rb_x[i] * inner2);
        }
        let mut total = pv * (h * cell) + Complex64::from_polar(rec.delta_line, -eps * t);

        // Discrete channel-A states against the channel-B continuum.
        for &(ea, wa, va) in &rec.disc_a {
            let mut s = Complex64::new(0.0, 0.0);
            for i in 0..n {
                let xi = x(i);
                let num = rec.rbu_x[i] - rec.rb_x[i] * va;
                s += Complex64::from_polar(num / (ea - xi), -(xi + eps) * t);
            }
            total += wa * h * cell * s * Complex64::from_polar(1.0, ea * t);
        }
        // Discrete channel-B states against the channel-A continuum.
        for &(eb, wb, ub) in &rec.disc_b {
            let xb = eb - eps;
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..=n {
                let num = ub * rec.ra_y[j] - rec.rav_y[j];
                s += Complex64::from_polar(num / (y(j) - xb), y(j) * t);
            }
            total += wb * s * Complex64::from_polar(1.0, -eb * t);
            for &(ea, wa, va) in &rec.disc_a {
                total += wa * wb * (ub - va) / (ea - xb) * Complex64::from_polar(1.0, -(eb - ea) * t);
            }
        }
        total
    }

    pub fn density(&self, t: f64) -> ReducedDensity {
        let (a, b) = self.amplitudes(t);
        let s = self.recorrelation_term(t);
        ReducedDensity::new(
            0.5 * (a.norm_sqr() + 1.0 - b.norm_sqr()),
            0.5 * (a * b.conj() + s),
        )
    }
}

impl Recorrelation {
    /// `T_i = sum_j g_j / ((j - i - 1/2) h)` for `i < n`.
    fn convolve(&self, g: &[Complex64]) -> Vec<Complex64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.m];
        buf[..g.len()].copy_from_slice(g);
        self.fwd.process(&mut buf);
        for (b, k) in buf.iter_mut().zip(&self.kernel_hat) {
            *b *= k;
        }
        self.inv.process(&mut buf);
        let scale = 1.0 / self.m as f64;
        buf.truncate(g.len() - 1);
        buf.iter_mut().for_each(|v| *v *= scale);
        buf
    }
}

/// Largest excess of `|b|` over 1 attributed to quadrature error.
pub const BALL_SLACK: f64 = 1e-5;

/// Quadrature error can push the Bloch vector of a nearly pure state just
/// outside the unit ball; pull it back onto the sphere when the excess is
/// within [`BALL_SLACK`], and report a violation otherwise.
pub fn clamp_to_ball(rho: ReducedDensity) -> Result<ReducedDensity> {
    let b = rho.bloch();
    let r = b.norm();
    if r <= 1.0 {
        return Ok(rho);
    }
    if r - 1.0 > BALL_SLACK {
        return Err(Error::PositivityViolation(rho.det()));
    }
    Ok(ReducedDensity::from_bloch(&b.scale(1.0 / r)))
}

/// Reduced density on `times` by quadrature of the exact spectral data.
pub fn evolve_quadrature(params: &ModelParams, times: &[f64]) -> Result<Vec<ReducedDensity>> {
    let t_max = times.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    let ev = QuadratureEvolver::new(params, t_max)?;
    par::try_map(times, |&t| clamp_to_ball(ev.density(t)))
}
