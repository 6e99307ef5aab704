//! Brute-force validator: the continuum is cut into `N` uniform bins, each
//! invariant subspace becomes an `(N+1)`-dimensional arrowhead matrix, and
//! the localized state is evolved exactly in the eigenbasis.
//!
//! Eigenpairs come from the secular equation of the arrowhead form, solved
//! root by root in coordinates relative to the nearest pole, which keeps
//! the differences `lambda_k - d_j` accurate to full relative precision.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::TrajectoryPoint;
use crate::error::{Error, Result};
use crate::model::{ModelParams, ReducedDensity, TimeGrid, Topology};
use crate::par;
use crate::quad::brent;

pub const MAX_BINS: usize = 20000;

/// Real symmetric arrowhead matrix `[[head, z^T], [z, diag(d)]]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrowheadBlock {
    pub head: f64,
    pub diag: Vec<f64>,
    pub couplings: Vec<f64>,
}

/// One eigenvalue written as `diag[pole] + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub pole: usize,
    pub offset: f64,
    /// Squared head component of the eigenvector.
    pub head_weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArrowheadEigen {
    /// Eigenpairs with a nonzero head component, ascending.
    pub roots: Vec<Root>,
    /// Indices of diagonal entries decoupled from the head; each is an
    /// eigenvalue with a unit eigenvector.
    pub deflated: Vec<usize>,
    diag: Vec<f64>,
}

impl ArrowheadEigen {
    pub fn value(&self, k: usize) -> f64 {
        let r = self.roots[k];
        self.diag[r.pole] + r.offset
    }

    /// `lambda_k - d_j` without cancellation.
    pub fn gap(&self, k: usize, j: usize) -> f64 {
        let r = self.roots[k];
        (self.diag[r.pole] - self.diag[j]) + r.offset
    }

    /// All eigenvalues, ascending.
    pub fn values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = (0..self.roots.len()).map(|k| self.value(k)).collect();
        v.extend(self.deflated.iter().map(|&j| self.diag[j]));
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn head_weight_sum(&self) -> f64 {
        self.roots.iter().map(|r| r.head_weight).sum()
    }
}

impl ArrowheadBlock {
    pub fn dim(&self) -> usize {
        self.diag.len() + 1
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut m = vec![vec![0.0; n]; n];
        m[0][0] = self.head;
        for (j, (&d, &z)) in self.diag.iter().zip(&self.couplings).enumerate() {
            m[j + 1][j + 1] = d;
            m[0][j + 1] = z;
            m[j + 1][0] = z;
        }
        m
    }

    pub fn eigen(&self) -> Result<ArrowheadEigen> {
        let d = &self.diag;
        if d.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::EigenFailure(
                "arrowhead diagonal must be strictly increasing".into(),
            ));
        }
        let active: Vec<usize> = (0..d.len()).filter(|&j| self.couplings[j] != 0.0).collect();
        let deflated: Vec<usize> = (0..d.len()).filter(|&j| self.couplings[j] == 0.0).collect();
        let z2: Vec<f64> = active.iter().map(|&j| self.couplings[j].powi(2)).collect();
        let head = self.head;

        if active.is_empty() {
            // Head decoupled: it is an eigenvector by itself. Encode it as a
            // root relative to pole 0 (or a lone pole when d is empty).
            let (pole, offset) = if d.is_empty() {
                return Err(Error::EigenFailure("empty block".into()));
            } else {
                (0, head - d[0])
            };
            return Ok(ArrowheadEigen {
                roots: vec![Root {
                    pole,
                    offset,
                    head_weight: 1.0,
                }],
                deflated,
                diag: d.clone(),
            });
        }

        let norm_z: f64 = z2.iter().sum::<f64>().sqrt();
        let m = active.len();
        let pd: Vec<f64> = active.iter().map(|&j| d[j]).collect();

        // f(d_o + mu) with differences taken against the origin pole.
        let secular = |o: usize, mu: f64| -> f64 {
            let base = pd[o];
            let mut s = 0.0;
            for (i, &zz) in z2.iter().enumerate() {
                s += zz / ((base - pd[i]) + mu);
            }
            (base - head) + mu - s
        };
        let weight = |o: usize, mu: f64| -> f64 {
            let base = pd[o];
            let mut s = 0.0;
            for (i, &zz) in z2.iter().enumerate() {
                let g = (base - pd[i]) + mu;
                s += zz / (g * g);
            }
            1.0 / (1.0 + s)
        };

        let slots: Vec<usize> = (0..=m).collect();
        let roots = par::try_map(&slots, |&k| -> Result<Root> {
            // Root k lies in (pd[k-1], pd[k]) with open ends outside.
            let (o, lo, hi) = if k == 0 {
                let lower = head.min(pd[0]) - norm_z - 1.0;
                (0, lower - pd[0], 0.0)
            } else if k == m {
                let upper = head.max(pd[m - 1]) + norm_z + 1.0;
                (m - 1, 0.0, upper - pd[m - 1])
            } else {
                let gap = pd[k] - pd[k - 1];
                let mid = secular(k - 1, 0.5 * gap);
                if mid > 0.0 {
                    (k - 1, 0.0, 0.5 * gap)
                } else if mid < 0.0 {
                    (k, -0.5 * gap, 0.0)
                } else {
                    return Ok(Root {
                        pole: active[k - 1],
                        offset: 0.5 * gap,
                        head_weight: weight(k - 1, 0.5 * gap),
                    });
                }
            };
            // The secular function is increasing on each interval and
            // diverges at its poles; nudge the pole ends inward.
            let shrink = |x: f64, toward: f64| -> f64 {
                if x == 0.0 {
                    toward * 1e-300
                } else {
                    x
                }
            };
            let a = shrink(lo, 1.0);
            let b = shrink(hi, -1.0);
            let mu = brent(|mu| secular(o, mu), a, b, 0.0)
                .map_err(|e| Error::EigenFailure(format!("secular root {k}: {e}")))?;
            Ok(Root {
                pole: active[o],
                offset: mu,
                head_weight: weight(o, mu),
            })
        })?;

        let eig = ArrowheadEigen {
            roots,
            deflated,
            diag: d.clone(),
        };
        let total = eig.head_weight_sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::EigenFailure(format!(
                "head weights sum to {total}, expected 1"
            )));
        }
        Ok(eig)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretizedModel {
    pub n_bins: usize,
    pub bin_width: f64,
    pub bin_energies: Vec<f64>,
    pub bin_couplings_a: Vec<f64>,
    pub bin_couplings_b: Vec<f64>,
    pub block_a: ArrowheadBlock,
    pub block_b: ArrowheadBlock,
    pub topology: Topology,
}

impl DiscretizedModel {
    /// Poincare recurrence time `2 pi / bin_width` of the uniform bins.
    pub fn recurrence_time(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.bin_width
    }
}

pub fn discretize(params: &ModelParams, n_bins: usize) -> Result<DiscretizedModel> {
    if n_bins < 10 {
        return Err(Error::InvalidParams("oracle needs at least 10 bins".into()));
    }
    if n_bins > MAX_BINS {
        return Err(Error::InvalidParams(format!(
            "oracle limited to {MAX_BINS} bins"
        )));
    }
    let width = params.band_width() / n_bins as f64;
    let sqrt_w = width.sqrt();
    let eta: Vec<f64> = (0..n_bins)
        .map(|i| params.eta_min + (i as f64 + 0.5) * width)
        .collect();
    let za: Vec<f64> = eta.iter().map(|&e| params.g.amplitude(e) * sqrt_w).collect();
    let zb: Vec<f64> = eta
        .iter()
        .map(|&e| params.g_prime.amplitude(e) * sqrt_w)
        .collect();
    Ok(DiscretizedModel {
        n_bins,
        bin_width: width,
        block_a: ArrowheadBlock {
            head: params.e0 + params.epsilon,
            diag: eta.clone(),
            couplings: za.clone(),
        },
        block_b: ArrowheadBlock {
            head: params.e0,
            diag: eta.iter().map(|&e| e + params.epsilon).collect(),
            couplings: zb.clone(),
        },
        bin_energies: eta,
        bin_couplings_a: za,
        bin_couplings_b: zb,
        topology: params.topology,
    })
}

/// Exact propagation of one block started on its head state.
pub struct BlockPropagator {
    eig: ArrowheadEigen,
    block: ArrowheadBlock,
}

impl BlockPropagator {
    pub fn new(block: &ArrowheadBlock) -> Result<Self> {
        Ok(BlockPropagator {
            eig: block.eigen()?,
            block: block.clone(),
        })
    }

    fn phases(&self, t: f64) -> Vec<Complex64> {
        (0..self.eig.roots.len())
            .map(|k| Complex64::from_polar(self.eig.roots[k].head_weight, -self.eig.value(k) * t))
            .collect()
    }

    /// Head amplitude `<0|e^{-iHt}|0>`.
    pub fn survival(&self, t: f64) -> Complex64 {
        self.phases(t).iter().sum()
    }

    /// Head amplitude and all continuum amplitudes `<j|e^{-iHt}|0>`.
    pub fn amplitudes(&self, t: f64) -> (Complex64, Vec<Complex64>) {
        let c = self.phases(t);
        let head = c.iter().sum();
        let mut cont = vec![Complex64::new(0.0, 0.0); self.block.diag.len()];
        for (j, slot) in cont.iter_mut().enumerate() {
            let z = self.block.couplings[j];
            if z == 0.0 {
                continue;
            }
            let mut s = Complex64::new(0.0, 0.0);
            for (k, ck) in c.iter().enumerate() {
                s += ck / self.eig.gap(k, j);
            }
            *slot = z * s;
        }
        (head, cont)
    }

    pub fn eigen(&self) -> &ArrowheadEigen {
        &self.eig
    }
}

/// Both propagators of a discretized model.
pub struct Oracle {
    pub a: BlockPropagator,
    pub b: BlockPropagator,
    recorrelate: bool,
}

impl Oracle {
    pub fn new(model: &DiscretizedModel) -> Result<Self> {
        let recorrelate = model.topology == Topology::SingleContinuum
            && model.bin_couplings_a.iter().any(|&z| z != 0.0)
            && model.bin_couplings_b.iter().any(|&z| z != 0.0);
        Ok(Oracle {
            a: BlockPropagator::new(&model.block_a)?,
            b: BlockPropagator::new(&model.block_b)?,
            recorrelate,
        })
    }

    pub fn density(&self, t: f64) -> ReducedDensity {
        if self.recorrelate {
            let (pa0, pa) = self.a.amplitudes(t);
            let (pb0, pb) = self.b.amplitudes(t);
            let cross: Complex64 = pb.iter().zip(&pa).map(|(b, a)| b * a.conj()).sum();
            ReducedDensity::new(
                0.5 * (pa0.norm_sqr() + 1.0 - pb0.norm_sqr()),
                0.5 * (pa0 * pb0.conj() + cross),
            )
        } else {
            let pa0 = self.a.survival(t);
            let pb0 = self.b.survival(t);
            ReducedDensity::new(
                0.5 * (pa0.norm_sqr() + 1.0 - pb0.norm_sqr()),
                0.5 * pa0 * pb0.conj(),
            )
        }
    }

    /// Norm of the full evolved state; 1 up to rounding.
    pub fn state_norm(&self, t: f64) -> f64 {
        let (pa0, pa) = self.a.amplitudes(t);
        let (pb0, pb) = self.b.amplitudes(t);
        let sa: f64 = pa0.norm_sqr() + pa.iter().map(|c| c.norm_sqr()).sum::<f64>();
        let sb: f64 = pb0.norm_sqr() + pb.iter().map(|c| c.norm_sqr()).sum::<f64>();
        0.5 * (sa + sb)
    }
}

pub fn evolve_oracle(model: &DiscretizedModel, grid: &TimeGrid) -> Result<Vec<TrajectoryPoint>> {
    grid.check()?;
    let oracle = Oracle::new(model)?;
    let times = grid.samples();
    par::try_map(&times, |&t| TrajectoryPoint::new(t, oracle.density(t), None))
}
