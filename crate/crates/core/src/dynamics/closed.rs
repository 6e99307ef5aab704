//! Breit-Wigner closed forms of the reduced density and their exact time
//! derivatives.

use num_complex::Complex64;

use crate::model::{DensityRate, ReducedDensity, Topology};

/// Single relaxation time: `rho_pp = e^{-G t}/2`,
/// `rho_pm = e^{-i w t - G t/2}/2` with `w = e_R - e_0`.
pub fn closed_single(gamma: f64, omega: f64, t: f64) -> ReducedDensity {
    ReducedDensity::new(
        0.5 * (-gamma * t).exp(),
        0.5 * Complex64::new(-0.5 * gamma * t, -omega * t).exp(),
    )
}

pub fn closed_single_rate(gamma: f64, omega: f64, t: f64) -> DensityRate {
    let pm = 0.5 * Complex64::new(-0.5 * gamma * t, -omega * t).exp();
    DensityRate {
        rho_pp: -0.5 * gamma * (-gamma * t).exp(),
        rho_pm: Complex64::new(-0.5 * gamma, -omega) * pm,
    }
}

/// Re-correlation coefficient `2 sqrt(G G') / (G + G')`, zero when the
/// continua are orthogonal or both widths vanish.
pub fn recorrelation_coefficient(gamma: f64, gamma_prime: f64, topology: Topology) -> f64 {
    if topology == Topology::OrthogonalContinua || gamma + gamma_prime == 0.0 {
        0.0
    } else {
        2.0 * (gamma * gamma_prime).sqrt() / (gamma + gamma_prime)
    }
}

/// Two relaxation times `G` (channel A) and `G'` (channel B) with
/// resonance splitting `w = e_R - e'_R`.
pub fn closed_two(
    gamma: f64,
    gamma_prime: f64,
    omega: f64,
    t: f64,
    topology: Topology,
) -> ReducedDensity {
    let kappa = 0.5 * (gamma + gamma_prime);
    let r = recorrelation_coefficient(gamma, gamma_prime, topology);
    let decay = (-kappa * t).exp();
    let main = Complex64::from_polar(decay, -omega * t);
    let steady = Complex64::from_polar(r * (1.0 - decay), omega * t);
    ReducedDensity::new(
        0.5 * (1.0 + (-gamma * t).exp() - (-gamma_prime * t).exp()),
        0.5 * (main + steady),
    )
}

pub fn closed_two_rate(
    gamma: f64,
    gamma_prime: f64,
    omega: f64,
    t: f64,
    topology: Topology,
) -> DensityRate {
    let kappa = 0.5 * (gamma + gamma_prime);
    let r = recorrelation_coefficient(gamma, gamma_prime, topology);
    let decay = (-kappa * t).exp();
    let main = Complex64::from_polar(decay, -omega * t) * Complex64::new(-kappa, -omega);
    let phase = Complex64::from_polar(r, omega * t);
    let steady = phase * (Complex64::new(0.0, omega) * (1.0 - decay) + kappa * decay);
    DensityRate {
        rho_pp: 0.5 * (-gamma * (-gamma * t).exp() + gamma_prime * (-gamma_prime * t).exp()),
        rho_pm: 0.5 * (main + steady),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{idempotency_defect, tunneling_probability};
    use proptest::prelude::*;
    use std::f64::consts::LN_2;

    #[test]
    fn single_at_origin_and_half_life() {
        let r = closed_single(3.0, 1.0, 0.0);
        assert_eq!(r, ReducedDensity::localized());
        let r = closed_single(3.0, 1.0, LN_2 / 3.0);
        assert!((r.rho_pp - 0.25).abs() < 1e-15);
    }

    #[test]
    fn zero_width_is_undamped() {
        for i in 0..50 {
            let t = 0.37 * i as f64;
            let r = closed_single(0.0, 1.3, t);
            assert!((tunneling_probability(&r) - (0.65 * t).sin().powi(2)).abs() < 1e-14);
        }
    }

    #[test]
    fn two_reduces_to_single_without_g_prime() {
        for i in 0..40 {
            let t = 0.25 * i as f64;
            let a = closed_two(0.7, 0.0, 1.1, t, Topology::SingleContinuum);
            let b = closed_single(0.7, 1.1, t);
            assert!(a.max_abs_diff(&b) < 1e-15);
        }
    }

    #[test]
    fn equal_widths_cancel_transient_in_probability() {
        for i in 0..200 {
            let t = 0.1 * i as f64;
            let r = closed_two(0.8, 0.8, 1.0, t, Topology::SingleContinuum);
            assert!((tunneling_probability(&r) - (0.5 * t).sin().powi(2)).abs() < 1e-12);
            let x = (-0.8 * t).exp();
            let d = idempotency_defect(&r).unwrap();
            assert!((d - 2.0 * x * (1.0 - x) * t.sin().powi(2)).abs() < 1e-12);
        }
    }

    #[test]
    fn steady_oscillation_amplitude() {
        let r = recorrelation_coefficient(2.0, 0.5, Topology::SingleContinuum);
        assert!((r - 0.8).abs() < 1e-15);
        assert_eq!(recorrelation_coefficient(2.0, 0.5, Topology::OrthogonalContinua), 0.0);
        assert_eq!(recorrelation_coefficient(0.0, 0.0, Topology::SingleContinuum), 0.0);
    }

    fn fd_check(f: impl Fn(f64) -> ReducedDensity, d: DensityRate, t: f64) {
        let h = 1e-5;
        let p = f(t + h);
        let m = f(t - h);
        let dpp = (p.rho_pp - m.rho_pp) / (2.0 * h);
        let dpm = (p.rho_pm - m.rho_pm) / (2.0 * h);
        assert!((dpp - d.rho_pp).abs() < 1e-8, "{dpp} {}", d.rho_pp);
        assert!((dpm - d.rho_pm).norm() < 1e-8, "{dpm} {}", d.rho_pm);
    }

    proptest! {
        #[test]
        fn derivatives_match_finite_differences(g in 0.0..3.0f64, gp in 0.0..3.0f64, w in 0.1..2.0f64, t in 0.01..5.0f64) {
            fd_check(|s| closed_single(g, w, s), closed_single_rate(g, w, t), t);
            for topo in [Topology::SingleContinuum, Topology::OrthogonalContinua] {
                fd_check(|s| closed_two(g, gp, w, s, topo), closed_two_rate(g, gp, w, t, topo), t);
            }
        }

        #[test]
        fn closed_forms_are_valid_densities(g in 0.0..3.0f64, gp in 0.0..3.0f64, w in 0.0..2.0f64, t in 0.0..30.0f64) {
            for topo in [Topology::SingleContinuum, Topology::OrthogonalContinua] {
                let r = closed_two(g, gp, w, t, topo);
                prop_assert!(r.is_positive(), "det {}", r.det());
                prop_assert!((0.0..=1.0).contains(&r.rho_pp));
            }
        }
    }
}
