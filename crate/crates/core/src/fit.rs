//! Least-squares fits of `rho_pp(t)` to the two competing relaxation
//! shapes: a difference of two exponentials, and a single exponential
//! relaxing to a shifted plateau.

use levenberg_marquardt::{LeastSquaresProblem, LevenbergMarquardt};
use nalgebra::storage::Owned;
use nalgebra::{DVector, Dyn, OMatrix, Vector2, U2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitForm {
    /// `(1 + e^{-a t} - e^{-b t})/2`, parameters `[a, b]`.
    TwoExponential,
    /// `e^{-k t}/2 + c (1 - e^{-k t})`, parameters `[k, c]`.
    SingleExponential,
}

impl FitForm {
    pub fn name(&self) -> &'static str {
        match self {
            FitForm::TwoExponential => "two_exponential",
            FitForm::SingleExponential => "single_exponential",
        }
    }

    pub fn eval(&self, p: [f64; 2], t: f64) -> f64 {
        match self {
            FitForm::TwoExponential => 0.5 * (1.0 + (-p[0] * t).exp() - (-p[1] * t).exp()),
            FitForm::SingleExponential => {
                let e = (-p[0] * t).exp();
                0.5 * e + p[1] * (1.0 - e)
            }
        }
    }

    fn gradient(&self, p: [f64; 2], t: f64) -> [f64; 2] {
        match self {
            FitForm::TwoExponential => [-0.5 * t * (-p[0] * t).exp(), 0.5 * t * (-p[1] * t).exp()],
            FitForm::SingleExponential => {
                let e = (-p[0] * t).exp();
                [t * e * (p[1] - 0.5), 1.0 - e]
            }
        }
    }

    fn starts(&self) -> Vec<[f64; 2]> {
        const RATES: [f64; 7] = [0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0];
        match self {
            FitForm::TwoExponential => RATES
                .iter()
                .flat_map(|&a| RATES.iter().filter(move |&&b| b != a).map(move |&b| [a, b]))
                .collect(),
            FitForm::SingleExponential => RATES
                .iter()
                .flat_map(|&k| [0.0, 0.1, 0.25, 0.4, 0.5].map(|c| [k, c]))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub form: FitForm,
    pub params: [f64; 2],
    /// Root-mean-square residual over the samples.
    pub rms_residual: f64,
    pub max_residual: f64,
}

struct Problem<'a> {
    form: FitForm,
    t: &'a [f64],
    y: &'a [f64],
    p: Vector2<f64>,
}

impl LeastSquaresProblem<f64, Dyn, U2> for Problem<'_> {
    type ResidualStorage = Owned<f64, Dyn>;
    type JacobianStorage = Owned<f64, Dyn, U2>;
    type ParameterStorage = Owned<f64, U2>;

    fn set_params(&mut self, p: &Vector2<f64>) {
        self.p.copy_from(p);
    }

    fn params(&self) -> Vector2<f64> {
        self.p
    }

    fn residuals(&self) -> Option<DVector<f64>> {
        let p = [self.p.x, self.p.y];
        Some(DVector::from_iterator(
            self.t.len(),
            self.t.iter().zip(self.y).map(|(&t, &y)| self.form.eval(p, t) - y),
        ))
    }

    fn jacobian(&self) -> Option<OMatrix<f64, Dyn, U2>> {
        let p = [self.p.x, self.p.y];
        let mut j = OMatrix::<f64, Dyn, U2>::zeros(self.t.len());
        for (i, &t) in self.t.iter().enumerate() {
            let g = self.form.gradient(p, t);
            j[(i, 0)] = g[0];
            j[(i, 1)] = g[1];
        }
        Some(j)
    }
}

fn residual_norms(form: FitForm, p: [f64; 2], t: &[f64], y: &[f64]) -> (f64, f64) {
    let (sq, max) = t.iter().zip(y).fold((0.0, 0.0f64), |(sq, max), (&t, &y)| {
        let r = form.eval(p, t) - y;
        (sq + r * r, max.max(r.abs()))
    });
    ((sq / t.len() as f64).sqrt(), max)
}

/// Best fit over a fixed multistart grid; deterministic.
pub fn fit(form: FitForm, t: &[f64], y: &[f64]) -> Result<FitResult> {
    if t.len() != y.len() || t.len() < 3 {
        return Err(Error::InvalidParams(
            "fits need matching time and value series of at least 3 samples".into(),
        ));
    }
    if t.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParams("fit data must be finite".into()));
    }
    let solver = LevenbergMarquardt::new()
        .with_ftol(f64::EPSILON)
        .with_xtol(f64::EPSILON)
        .with_gtol(0.0)
        .with_patience(200);
    let mut best: Option<FitResult> = None;
    for start in form.starts() {
        let problem = Problem {
            form,
            t,
            y,
            p: Vector2::new(start[0], start[1]),
        };
        let (solved, _) = solver.minimize(problem);
        let p = [solved.p.x, solved.p.y];
        if !(p[0].is_finite() && p[1].is_finite()) {
            continue;
        }
        let (rms, max) = residual_norms(form, p, t, y);
        if best.is_none_or(|b| rms < b.rms_residual) {
            best = Some(FitResult {
                form,
                params: p,
                rms_residual: rms,
                max_residual: max,
            });
        }
    }
    best.ok_or_else(|| Error::InvalidParams("no fit converged to finite parameters".into()))
}
