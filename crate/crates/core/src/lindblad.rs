//! Zero-temperature master equations for the two-level system: the
//! single-damping equation, the combined equation with the `g'`-type
//! dissipator and its `sqrt(g g')` cross terms, and a comparison of both
//! against the exact model at first order in the widths.
//!
//! The numerical integrator works on the Bloch vector, where the
//! generator reads
//!
//! ```text
//! dbx/dt = -e by - (k - s) bx
//! dby/dt =  e bx - (k + s) by
//! dbz/dt = (g' - g) - (g + g') bz
//! ```
//!
//! with `k = (g + g')/2` and `s = sqrt(g g')`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{closed_two, closed_two_rate, TrajectoryPoint};
use crate::error::{Error, Result};
use crate::model::{BlochVector, DensityRate, ReducedDensity, TimeGrid, Topology};
use crate::ode::{self, OdeTol};

/// Per-step tolerances for the master equation, tighter than the
/// integrator defaults so the accumulated error stays below 1e-10 over
/// tens of periods.
pub const CME_TOL: OdeTol = OdeTol {
    abs: 1e-13,
    rel: 1e-12,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LindbladParams {
    pub epsilon: f64,
    pub gamma: f64,
    pub gamma_prime: f64,
}

impl LindbladParams {
    pub fn new(epsilon: f64, gamma: f64, gamma_prime: f64) -> Result<Self> {
        let p = LindbladParams {
            epsilon,
            gamma,
            gamma_prime,
        };
        p.check()?;
        Ok(p)
    }

    pub fn check(&self) -> Result<()> {
        if !self.epsilon.is_finite() {
            return Err(Error::InvalidParams("epsilon must be finite".into()));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite())
            || !(self.gamma_prime >= 0.0 && self.gamma_prime.is_finite())
        {
            return Err(Error::InvalidParams("damping rates must be finite and >= 0".into()));
        }
        Ok(())
    }

    /// Time derivative of the Bloch vector.
    pub fn generator(&self, b: &BlochVector) -> BlochVector {
        let (g, gp) = (self.gamma, self.gamma_prime);
        let k = 0.5 * (g + gp);
        let s = (g * gp).sqrt();
        let e = self.epsilon;
        BlochVector::new(
            -e * b.by - (k - s) * b.bx,
            e * b.bx - (k + s) * b.by,
            (gp - g) - (g + gp) * b.bz,
        )
    }

    pub fn density_rate(&self, rho: &ReducedDensity) -> DensityRate {
        let d = self.generator(&rho.bloch());
        DensityRate {
            rho_pp: 0.5 * d.bz,
            rho_pm: Complex64::new(d.bx, -d.by) / 2.0,
        }
    }
}

/// Closed solution of the single-damping equation from the localized state.
pub fn solve_single_closed(params: &LindbladParams, t: f64) -> Result<ReducedDensity> {
    params.check()?;
    if params.gamma_prime != 0.0 {
        return Err(Error::InvalidParams(
            "the single-damping solution needs gamma_prime = 0".into(),
        ));
    }
    let g = params.gamma;
    Ok(ReducedDensity::new(
        0.5 * (-g * t).exp(),
        0.5 * Complex64::new(-0.5 * g * t, -params.epsilon * t).exp(),
    ))
}

/// The closed solution of the combined equation in its historical printed
/// form. The off-diagonal entry carries frequency `2 sqrt(e^2 - g g')` and
/// damping `g + g'`, which does not solve the equation (its undamped limit
/// oscillates at `2e`); it is kept for reference and is never used as
/// ground truth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrintedSolution {
    pub params: LindbladParams,
}

impl PrintedSolution {
    pub fn new(params: LindbladParams) -> Result<Self> {
        params.check()?;
        let radicand = params.epsilon * params.epsilon - params.gamma * params.gamma_prime;
        if radicand == 0.0 {
            return Err(Error::DomainError(
                "printed solution is singular at e^2 = g g'".into(),
            ));
        }
        Ok(PrintedSolution { params })
    }

    pub fn rho_pp(&self, t: f64) -> f64 {
        let (g, gp) = (self.params.gamma, self.params.gamma_prime);
        let sum = g + gp;
        let decay = (-sum * t).exp();
        let saturation = if sum == 0.0 { 0.0 } else { gp / sum * (1.0 - decay) };
        0.5 * decay + saturation
    }

    pub fn rho_pm(&self, t: f64) -> Complex64 {
        let p = &self.params;
        let (g, gp, e) = (p.gamma, p.gamma_prime, p.epsilon);
        // Complex root keeps the expression defined for e^2 < g g'.
        let q = Complex64::new(e * e - g * gp, 0.0).sqrt();
        let phase = 2.0 * q * t;
        let bracket = (g * gp).sqrt() - Complex64::i() * e * phase.sin() + q * phase.cos();
        (-(g + gp) * t).exp() / (2.0 * q) * bracket
    }

    pub fn density(&self, t: f64) -> ReducedDensity {
        ReducedDensity::new(self.rho_pp(t), self.rho_pm(t))
    }
}

pub fn solve_combined_closed(params: &LindbladParams, t: f64) -> Result<ReducedDensity> {
    Ok(PrintedSolution::new(*params)?.density(t))
}

/// Integrates the combined master equation from the localized state.
/// Each point carries the exact generator value as `rho_dot`.
pub fn integrate_cme(params: &LindbladParams, grid: &TimeGrid) -> Result<Vec<TrajectoryPoint>> {
    params.check()?;
    grid.check()?;
    let times = grid.samples();
    let start = ReducedDensity::localized().bloch();
    let states = ode::integrate(
        |_, y: &[f64; 3]| {
            let d = params.generator(&BlochVector::new(y[0], y[1], y[2]));
            [d.bx, d.by, d.bz]
        },
        times[0].min(0.0),
        [start.bx, start.by, start.bz],
        &times,
        CME_TOL,
    )?;
    times
        .iter()
        .zip(states)
        .map(|(&t, y)| {
            let rho = ReducedDensity::from_bloch(&BlochVector::new(y[0], y[1], y[2]));
            TrajectoryPoint::new(t, rho, Some(params.density_rate(&rho)))
        })
        .collect()
}

/// Model-versus-master comparison near `t = 0` under the correspondence
/// `g <-> G`, `g' <-> G'`, with the model splitting set to `epsilon`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub t: f64,
    /// Coefficient of `t` in `rho_pp` from the model.
    pub model_linear: f64,
    /// Coefficient of `t` in `rho_pp` from the master equation.
    pub master_linear: f64,
    pub linear_difference: f64,
    /// Largest difference of the `t` coefficients of `rho_pm`.
    pub linear_difference_pm: f64,
    pub linear_agree: bool,
    /// `|rho_pp^model - rho_pp^master|` at `t`.
    pub diagonal_residual: f64,
    /// Largest entry difference of the full solutions at `t` and `2t`.
    pub residual: f64,
    pub residual_doubled: f64,
    /// `residual_doubled / residual`; tends to 4 for a second-order split.
    pub richardson_ratio: f64,
}

pub fn first_order_compare(
    params: &LindbladParams,
    model_widths: (f64, f64),
    t: f64,
) -> Result<ComparisonReport> {
    params.check()?;
    let (gm, gpm) = model_widths;
    if !(gm >= 0.0 && gpm >= 0.0) {
        return Err(Error::InvalidParams("model widths must be >= 0".into()));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParams("comparison time must be positive".into()));
    }
    let topo = Topology::SingleContinuum;
    let e = params.epsilon;
    let model_rate = closed_two_rate(gm, gpm, e, 0.0, topo);
    let master_rate = params.density_rate(&ReducedDensity::localized());
    let linear_difference = (model_rate.rho_pp - master_rate.rho_pp).abs();
    let linear_difference_pm = (model_rate.rho_pm - master_rate.rho_pm).norm();
    let scale = (gm + gpm + params.gamma + params.gamma_prime + e.abs()).max(1.0);
    let linear_agree = linear_difference.max(linear_difference_pm) <= 8.0 * f64::EPSILON * scale;

    let grid = TimeGrid::uniform(0.0, 2.0 * t, 3)?;
    let master = integrate_cme(params, &grid)?;
    let gap = |i: usize| closed_two(gm, gpm, e, grid.samples()[i], topo).max_abs_diff(&master[i].rho);
    let residual = gap(1);
    let residual_doubled = gap(2);
    let diagonal_residual = (closed_two(gm, gpm, e, master[1].t, topo).rho_pp - master[1].rho.rho_pp).abs();
    Ok(ComparisonReport {
        t,
        model_linear: model_rate.rho_pp,
        master_linear: master_rate.rho_pp,
        linear_difference,
        linear_difference_pm,
        linear_agree,
        diagonal_residual,
        residual,
        residual_doubled,
        richardson_ratio: residual_doubled / residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Matrix2;
    use proptest::prelude::*;

    type M = Matrix2<Complex64>;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn matrix(rho: &ReducedDensity) -> M {
        M::new(c(rho.rho_pp), rho.rho_pm, rho.rho_pm.conj(), c(rho.rho_mm()))
    }

    /// The operator form of the combined equation, basis (|+>, |->).
    fn operator_generator(p: &LindbladParams, rho: &M) -> M {
        let sz = M::new(c(1.0), c(0.0), c(0.0), c(-1.0));
        let sp = M::new(c(0.0), c(1.0), c(0.0), c(0.0));
        let sm = sp.adjoint();
        let i = Complex64::i();
        let comm = sz * rho - rho * sz;
        let d_g = (sm * rho * sp * c(2.0)) - sp * sm * rho - rho * sp * sm;
        let d_gp = (sp * rho * sm * c(2.0)) - sm * sp * rho - rho * sm * sp;
        let cross = (sp * rho * sp + sm * rho * sm) * c(2.0);
        comm * (-i * p.epsilon / 2.0)
            + d_g * c(p.gamma / 2.0)
            + d_gp * c(p.gamma_prime / 2.0)
            + cross * c((p.gamma * p.gamma_prime).sqrt() / 2.0)
    }

    proptest! {
        #[test]
        fn bloch_generator_matches_operator_form(
            e in 0.1f64..3.0, g in 0.0f64..3.0, gp in 0.0f64..3.0,
            bx in -0.6f64..0.6, by in -0.6f64..0.6, bz in -0.6f64..0.6,
        ) {
            let p = LindbladParams::new(e, g, gp).unwrap();
            let rho = ReducedDensity::from_bloch(&BlochVector::new(bx, by, bz));
            let d = operator_generator(&p, &matrix(&rho));
            prop_assert!(d.trace().norm() < 1e-14);
            prop_assert!((d[(0, 1)] - d[(1, 0)].conj()).norm() < 1e-14);
            let r = p.density_rate(&rho);
            prop_assert!((d[(0, 0)].re - r.rho_pp).abs() < 1e-14);
            prop_assert!((d[(0, 1)] - r.rho_pm).norm() < 1e-14);
        }
    }

    #[test]
    fn integrator_matches_single_damping_solution() {
        let p = LindbladParams::new(1.0, 0.3, 0.0).unwrap();
        let grid = TimeGrid::uniform(0.0, 10.0, 201).unwrap();
        let traj = integrate_cme(&p, &grid).unwrap();
        for pt in &traj {
            let exact = solve_single_closed(&p, pt.t).unwrap();
            assert!(pt.rho.max_abs_diff(&exact) < 1e-8);
            assert!(pt.rho.det() >= -1e-10);
        }
    }

    #[test]
    fn undamped_limit_is_pure_rotation() {
        let p = LindbladParams::new(1.3, 0.0, 0.0).unwrap();
        let grid = TimeGrid::uniform(0.0, 20.0, 101).unwrap();
        for pt in integrate_cme(&p, &grid).unwrap() {
            let exact = ReducedDensity::new(0.5, 0.5 * Complex64::from_polar(1.0, -1.3 * pt.t));
            assert!(pt.rho.max_abs_diff(&exact) < 1e-10);
        }
        let s = solve_single_closed(&p, 0.0).unwrap();
        assert_eq!((s.rho_pp, s.rho_pm), (0.5, c(0.5)));
    }

    #[test]
    fn combined_equation_has_single_effective_rate() {
        let p = LindbladParams::new(1.0, 2.0, 0.5).unwrap();
        let grid = TimeGrid::uniform(0.0, 8.0, 81).unwrap();
        for pt in integrate_cme(&p, &grid).unwrap() {
            let single = 0.5 * (-2.5 * pt.t).exp() + 0.2 * (1.0 - (-2.5 * pt.t).exp());
            assert!((pt.rho.rho_pp - single).abs() < 1e-9);
            assert!((pt.rho.rho_pp + pt.rho.rho_mm() - 1.0).abs() < 1e-12);
            assert!(pt.rho.det() >= -1e-10);
        }
    }

    #[test]
    fn printed_solution_diagonal_is_exact_but_off_diagonal_is_not() {
        let p = LindbladParams::new(1.5, 2.0, 0.5).unwrap();
        let printed = PrintedSolution::new(p).unwrap();
        let grid = TimeGrid::uniform(0.0, 4.0, 41).unwrap();
        let traj = integrate_cme(&p, &grid).unwrap();
        let mut worst = 0.0f64;
        for pt in &traj {
            assert!((printed.rho_pp(pt.t) - pt.rho.rho_pp).abs() < 1e-9);
            worst = worst.max((printed.rho_pm(pt.t) - pt.rho.rho_pm).norm());
        }
        assert!(worst > 1e-2, "{worst}");
        assert!((printed.rho_pp(200.0) - 0.2).abs() < 1e-12);
        let undamped = PrintedSolution::new(LindbladParams::new(1.0, 0.0, 0.0).unwrap()).unwrap();
        // Oscillates at twice the splitting.
        assert!((undamped.rho_pm(std::f64::consts::PI) - c(0.5)).norm() < 1e-12);
        let single = PrintedSolution::new(LindbladParams::new(1.0, 0.4, 0.0).unwrap()).unwrap();
        assert!((single.rho_pp(3.0) - 0.5 * (-1.2f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn printed_solution_degenerate_radical() {
        let p = LindbladParams::new(1.0, 2.0, 0.5).unwrap();
        assert!(matches!(solve_combined_closed(&p, 1.0), Err(Error::DomainError(_))));
    }

    #[test]
    fn parameter_checks() {
        assert!(LindbladParams::new(1.0, -0.1, 0.0).is_err());
        let p = LindbladParams::new(1.0, 0.1, 0.2).unwrap();
        assert!(solve_single_closed(&p, 1.0).is_err());
    }

    #[test]
    fn first_order_terms_agree_and_second_order_splits() {
        let p = LindbladParams::new(1.0, 2.0, 0.5).unwrap();
        let r = first_order_compare(&p, (2.0, 0.5), 1e-3).unwrap();
        assert!(r.linear_agree, "{r:?}");
        assert_eq!(r.model_linear, r.master_linear);
        assert!((r.model_linear + 0.75).abs() < 1e-15);
        assert!((3.5..=4.5).contains(&r.richardson_ratio), "{r:?}");
        // Diagonals agree through second order.
        assert!(r.diagonal_residual < 1e-8, "{r:?}");
    }

    #[test]
    fn equal_rates_agree_on_the_diagonal() {
        let p = LindbladParams::new(1.0, 0.2, 0.2).unwrap();
        let grid = TimeGrid::uniform(0.0, 10.0, 51).unwrap();
        for pt in integrate_cme(&p, &grid).unwrap() {
            let model = closed_two(0.2, 0.2, 1.0, pt.t, Topology::SingleContinuum);
            assert!((model.rho_pp - pt.rho.rho_pp).abs() < 1e-9);
        }
    }
}
