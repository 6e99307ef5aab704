//! Split of the tunneling rate into a dissipative part (changing
//! eigenvalues of rho) and a unitary part (rotating eigenvectors).
//!
//! Everything is computed in Bloch form: with `b = |b| n` and projector
//! axis `m`, `P = (1 + m.b)/2`, `R_d = (m.n) d|b|/dt / 2` and
//! `R_u = |b| d(m.n)/dt / 2`.

use serde::{Deserialize, Serialize};

use crate::dynamics::TrajectoryPoint;
use crate::error::{Error, Result};
use crate::model::{BlochVector, ReducedDensity};

/// `|b|` below which the eigenvalues count as degenerate.
pub const DEGENERATE: f64 = 1e-12;
/// Largest tolerated `|R_d + R_u - P_dot|` before the grid is rejected.
pub const SPLIT_TOLERANCE: f64 = 1e-6;

/// Rank-1 projector `(1 + n.sigma)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Projector {
    pub axis: BlochVector,
}

impl Projector {
    pub fn new(axis: BlochVector) -> Result<Self> {
        if (axis.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParams(format!(
                "projector axis must be a unit vector, |n| = {}",
                axis.norm()
            )));
        }
        Ok(Projector { axis })
    }

    /// `|r><r|`, whose expectation is the tunneling probability.
    pub fn right() -> Self {
        Projector {
            axis: BlochVector::new(-1.0, 0.0, 0.0),
        }
    }

    /// `|l><l|`, the initial localized state.
    pub fn left() -> Self {
        Projector {
            axis: BlochVector::new(1.0, 0.0, 0.0),
        }
    }
}

impl Default for Projector {
    fn default() -> Self {
        Projector::right()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NaturalOrbitals {
    pub p1: f64,
    pub p2: f64,
    /// Bloch direction of the dominant orbital; `None` at degeneracy.
    pub orientation: Option<BlochVector>,
}

impl NaturalOrbitals {
    pub fn is_degenerate(&self) -> bool {
        self.orientation.is_none()
    }
}

pub fn eigendecompose(rho: &ReducedDensity) -> NaturalOrbitals {
    let b = rho.bloch();
    let r = b.norm();
    NaturalOrbitals {
        p1: 0.5 * (1.0 + r),
        p2: 0.5 * (1.0 - r),
        orientation: (r >= DEGENERATE).then(|| b.scale(1.0 / r)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateDecomposition {
    pub t: f64,
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(rename = "P_dot")]
    pub p_dot: f64,
    #[serde(rename = "R_d")]
    pub r_d: f64,
    #[serde(rename = "R_u")]
    pub r_u: f64,
    pub p1: f64,
    /// `sum_k |<t,1|phi_k>|^2` over the projector's states.
    pub orbital_overlap: f64,
}

impl RateDecomposition {
    pub fn residual(&self) -> f64 {
        (self.r_d + self.r_u - self.p_dot).abs()
    }
}

/// Largest `|R_d + R_u - P_dot|` along a decomposition.
pub fn max_residual(rates: &[RateDecomposition]) -> f64 {
    rates.iter().map(RateDecomposition::residual).fold(0.0, f64::max)
}

/// Local kinematics of the Bloch vector at one time.
#[derive(Debug, Clone, Copy)]
struct Kinematics {
    radius: f64,
    radius_dot: f64,
    dir: BlochVector,
    dir_dot: BlochVector,
    p_dot: f64,
}

fn fd_derivative(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let c = 1.0 / (12.0 * h);
    (0..n)
        .map(|i| {
            if i >= 2 && i + 2 < n {
                c * (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2])
            } else if i == 0 {
                c * (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4])
            } else if i == 1 {
                c * (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4])
            } else if i == n - 1 {
                c * (25.0 * f[n - 1] - 48.0 * f[n - 2] + 36.0 * f[n - 3] - 16.0 * f[n - 4]
                    + 3.0 * f[n - 5])
            } else {
                c * (3.0 * f[n - 1] + 10.0 * f[n - 2] - 18.0 * f[n - 3] + 6.0 * f[n - 4]
                    - f[n - 5])
            }
        })
        .collect()
}

fn direction(b: &BlochVector) -> BlochVector {
    let r = b.norm();
    if r < DEGENERATE {
        BlochVector::new(0.0, 0.0, 0.0)
    } else {
        b.scale(1.0 / r)
    }
}

fn kinematics(traj: &[TrajectoryPoint], axes: &[BlochVector]) -> Result<Vec<Kinematics>> {
    let msum = axes.iter().fold(BlochVector::new(0.0, 0.0, 0.0), |s, m| {
        BlochVector::new(s.bx + m.bx, s.by + m.by, s.bz + m.bz)
    });
    if traj.iter().all(|p| p.rho_dot.is_some()) {
        return Ok(traj
            .iter()
            .map(|pt| {
                let b = pt.rho.bloch();
                let bd = pt.rho_dot.expect("checked above").bloch();
                let r = b.norm();
                let dir = direction(&b);
                let radius_dot = if r < DEGENERATE { 0.0 } else { b.dot(&bd) / r };
                let dir_dot = if r < DEGENERATE {
                    BlochVector::new(0.0, 0.0, 0.0)
                } else {
                    let along = dir.dot(&bd);
                    BlochVector::new(
                        (bd.bx - along * dir.bx) / r,
                        (bd.by - along * dir.by) / r,
                        (bd.bz - along * dir.bz) / r,
                    )
                };
                Kinematics {
                    radius: r,
                    radius_dot,
                    dir,
                    dir_dot,
                    p_dot: 0.5 * msum.dot(&bd),
                }
            })
            .collect());
    }

    let n = traj.len();
    if n < 5 {
        return Err(Error::InvalidParams(
            "finite-difference rates need at least 5 samples".into(),
        ));
    }
    let h = (traj[n - 1].t - traj[0].t) / (n - 1) as f64;
    let uniform = traj
        .windows(2)
        .all(|w| ((w[1].t - w[0].t) - h).abs() <= 1e-9 * h.abs().max(1.0));
    if !(h > 0.0) || !uniform {
        return Err(Error::InvalidParams(
            "finite-difference rates need a uniform, increasing grid".into(),
        ));
    }
    let bs: Vec<BlochVector> = traj.iter().map(|p| p.rho.bloch()).collect();
    let radius: Vec<f64> = bs.iter().map(BlochVector::norm).collect();
    let dirs: Vec<BlochVector> = bs.iter().map(direction).collect();
    let prob: Vec<f64> = bs
        .iter()
        .map(|b| axes.iter().map(|m| 0.5 * (1.0 + m.dot(b))).sum())
        .collect();
    let d_radius = fd_derivative(&radius, h);
    let dx = fd_derivative(&dirs.iter().map(|d| d.bx).collect::<Vec<_>>(), h);
    let dy = fd_derivative(&dirs.iter().map(|d| d.by).collect::<Vec<_>>(), h);
    let dz = fd_derivative(&dirs.iter().map(|d| d.bz).collect::<Vec<_>>(), h);
    let dp = fd_derivative(&prob, h);
    Ok((0..n)
        .map(|i| Kinematics {
            radius: radius[i],
            radius_dot: d_radius[i],
            dir: dirs[i],
            dir_dot: BlochVector::new(dx[i], dy[i], dz[i]),
            p_dot: dp[i],
        })
        .collect())
}

fn decompose(traj: &[TrajectoryPoint], axes: &[BlochVector]) -> Result<Vec<RateDecomposition>> {
    let out = decompose_unchecked(traj, axes)?;
    let residual = max_residual(&out);
    if residual > SPLIT_TOLERANCE {
        return Err(Error::GridTooCoarse {
            residual,
            tolerance: SPLIT_TOLERANCE,
        });
    }
    Ok(out)
}

fn decompose_unchecked(
    traj: &[TrajectoryPoint],
    axes: &[BlochVector],
) -> Result<Vec<RateDecomposition>> {
    let kin = kinematics(traj, axes)?;
    let out = traj
        .iter()
        .zip(&kin)
        .map(|(pt, k)| {
            let b = pt.rho.bloch();
            let p: f64 = axes.iter().map(|m| 0.5 * (1.0 + m.dot(&b))).sum();
            let p1 = 0.5 * (1.0 + k.radius);
            if k.radius < DEGENERATE {
                return RateDecomposition {
                    t: pt.t,
                    p,
                    p_dot: k.p_dot,
                    r_d: k.p_dot,
                    r_u: 0.0,
                    p1,
                    orbital_overlap: 0.5 * axes.len() as f64,
                };
            }
            // Overlaps W_n = sum_k (1 + s_n n.m_k)/2 with s_1 = 1, s_2 = -1.
            let o: f64 = axes.iter().map(|m| k.dir.dot(m)).sum();
            let o_dot: f64 = axes.iter().map(|m| k.dir_dot.dot(m)).sum();
            let w1 = axes.iter().map(|m| 0.5 * (1.0 + k.dir.dot(m))).sum::<f64>();
            // Dissipative: p1' W1 + p2' W2 = p1' (W1 - W2) = (|b|'/2) o.
            // Unitary: p1 W1' + p2 W2' = (p1 - p2) o'/2 = |b| o'/2.
            RateDecomposition {
                t: pt.t,
                p,
                p_dot: k.p_dot,
                r_d: 0.5 * k.radius_dot * o,
                r_u: 0.5 * k.radius * o_dot,
                p1,
                orbital_overlap: w1,
            }
        })
        .collect();
    Ok(out)
}

/// Rate split for a rank-1 projector. Uses exact derivatives when every
/// point carries `rho_dot`, fourth-order finite differences otherwise.
pub fn rate_decomposition(
    traj: &[TrajectoryPoint],
    projector: &Projector,
) -> Result<Vec<RateDecomposition>> {
    decompose(traj, &[projector.axis])
}

/// Rate split for the projector onto the span of orthonormal pure states,
/// each given by its unit Bloch vector.
pub fn projector_rate_decomposition(
    traj: &[TrajectoryPoint],
    subspace: &[BlochVector],
) -> Result<Vec<RateDecomposition>> {
    if subspace.is_empty() || subspace.len() > 2 {
        return Err(Error::InvalidParams(
            "a two-level subspace holds one or two orthonormal states".into(),
        ));
    }
    for m in subspace {
        if (m.norm() - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParams("subspace states must be normalized".into()));
        }
    }
    if subspace.len() == 2 {
        // |<a|b>|^2 = (1 + m_a.m_b)/2 must vanish.
        let overlap = 0.5 * (1.0 + subspace[0].dot(&subspace[1]));
        if overlap > 1e-10 {
            return Err(Error::InvalidParams("subspace states must be orthogonal".into()));
        }
    }
    decompose(traj, subspace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{closed_single, closed_single_rate, closed_two, closed_two_rate};
    use crate::model::{Topology, TimeGrid};
    use num_complex::Complex64;

    fn single(gamma: f64, grid: &TimeGrid, exact: bool) -> Vec<TrajectoryPoint> {
        grid.samples()
            .into_iter()
            .map(|t| {
                let d = exact.then(|| closed_single_rate(gamma, 1.0, t));
                TrajectoryPoint::new(t, closed_single(gamma, 1.0, t), d).unwrap()
            })
            .collect()
    }

    #[test]
    fn eigendecomposition_of_pure_and_mixed() {
        let e = eigendecompose(&ReducedDensity::new(0.5, Complex64::from_polar(0.5, 1.2)));
        assert!((e.p1 - 1.0).abs() < 1e-15 && e.p2.abs() < 1e-15);
        let e = eigendecompose(&ReducedDensity::new(0.5, Complex64::new(0.0, 0.0)));
        assert!(e.is_degenerate());
        assert_eq!((e.p1, e.p2), (0.5, 0.5));
    }

    #[test]
    fn eigenvalues_match_characteristic_polynomial() {
        for i in 0..20 {
            let rho = closed_single(3.0, 1.0, 0.1 * i as f64);
            let e = eigendecompose(&rho);
            // lambda^2 - lambda + det = 0.
            let disc = (1.0 - 4.0 * rho.det()).sqrt();
            assert!((e.p1 - 0.5 * (1.0 + disc)).abs() < 1e-14);
            assert!((e.p1 + e.p2 - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn undamped_split_is_purely_unitary() {
        let grid = TimeGrid::uniform(0.0, 20.0, 401).unwrap();
        for exact in [true, false] {
            let rates = rate_decomposition(&single(0.0, &grid, exact), &Projector::right()).unwrap();
            for r in &rates {
                assert!(r.r_d.abs() < 1e-10, "{r:?}");
                assert!((r.r_u - 0.5 * r.t.sin()).abs() < 1e-6, "{r:?}");
            }
        }
    }

    #[test]
    fn analytic_split_is_exact() {
        let grid = TimeGrid::uniform(0.0, 20.0, 201).unwrap();
        let traj: Vec<TrajectoryPoint> = grid
            .samples()
            .into_iter()
            .map(|t| {
                let topo = Topology::SingleContinuum;
                TrajectoryPoint::new(t, closed_two(2.0, 0.5, 1.0, t, topo), Some(closed_two_rate(2.0, 0.5, 1.0, t, topo)))
                    .unwrap()
            })
            .collect();
        let rates = rate_decomposition(&traj, &Projector::right()).unwrap();
        assert!(max_residual(&rates) < 1e-14);
    }

    #[test]
    fn finite_differences_converge_at_fourth_order() {
        let coarse = TimeGrid::uniform(0.0, 10.0, 41).unwrap();
        let fine = TimeGrid::uniform(0.0, 10.0, 81).unwrap();
        let m = [Projector::right().axis];
        let rc = max_residual(&decompose_unchecked(&single(0.3, &coarse, false), &m).unwrap());
        let rf = max_residual(&decompose_unchecked(&single(0.3, &fine, false), &m).unwrap());
        assert!(rc / rf >= 8.0, "{rc} {rf}");
    }

    #[test]
    fn under_resolved_grid_is_rejected() {
        let grid = TimeGrid::uniform(0.0, 20.0, 9).unwrap();
        assert!(matches!(
            rate_decomposition(&single(0.3, &grid, false), &Projector::right()),
            Err(Error::GridTooCoarse { .. })
        ));
    }

    #[test]
    fn projector_generalization() {
        let grid = TimeGrid::uniform(0.0, 10.0, 2001).unwrap();
        for exact in [true, false] {
            let traj = single(1.5, &grid, exact);
            let r = rate_decomposition(&traj, &Projector::right()).unwrap();
            let g = projector_rate_decomposition(&traj, &[Projector::right().axis]).unwrap();
            for (a, b) in r.iter().zip(&g) {
                assert!((a.r_d - b.r_d).abs() < 1e-12 && (a.r_u - b.r_u).abs() < 1e-12);
            }
            let full = projector_rate_decomposition(
                &traj,
                &[BlochVector::new(0.0, 0.0, 1.0), BlochVector::new(0.0, 0.0, -1.0)],
            )
            .unwrap();
            for f in &full {
                assert!((f.p - 1.0).abs() < 1e-14);
                assert!(f.r_d.abs() < 1e-12 && f.r_u.abs() < 1e-12);
            }
            let left = rate_decomposition(&traj, &Projector::left()).unwrap();
            for (a, b) in r.iter().zip(&left) {
                assert!((a.r_d + b.r_d).abs() < 1e-12 && (a.r_u + b.r_u).abs() < 1e-12);
                assert!((a.p + b.p - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn non_orthogonal_subspace_rejected() {
        let traj = single(1.0, &TimeGrid::uniform(0.0, 1.0, 11).unwrap(), true);
        assert!(projector_rate_decomposition(
            &traj,
            &[BlochVector::new(1.0, 0.0, 0.0), BlochVector::new(0.0, 1.0, 0.0)]
        )
        .is_err());
        assert!(Projector::new(BlochVector::new(1.0, 1.0, 0.0)).is_err());
    }

    #[test]
    fn degenerate_point_follows_convention() {
        let pt = TrajectoryPoint::new(
            0.0,
            ReducedDensity::new(0.5, Complex64::new(0.0, 0.0)),
            Some(crate::model::DensityRate {
                rho_pp: 0.1,
                rho_pm: Complex64::new(-0.2, 0.05),
            }),
        )
        .unwrap();
        let r = rate_decomposition(&[pt], &Projector::right()).unwrap()[0];
        assert_eq!(r.r_u, 0.0);
        assert_eq!(r.r_d, r.p_dot);
        assert_eq!(r.p1, 0.5);
    }
}
