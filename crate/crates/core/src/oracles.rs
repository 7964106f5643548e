//! Models with known closed forms, used as references.

use std::fmt;
use std::sync::Arc;

use crate::params::{make_periodic, Growth, ModelSpec, ParameterModel, PeriodicEnvelope};
use crate::poly::{closed_form_p2n1_sq_zero, closed_form_p2n_zero};

/// Orthogonality density with its support.
#[derive(Clone)]
pub struct DensityOracle {
    pub name: String,
    pub support: (f64, f64),
    density: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for DensityOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DensityOracle")
            .field("name", &self.name)
            .field("support", &self.support)
            .finish()
    }
}

impl DensityOracle {
    pub fn new(
        name: &str,
        support: (f64, f64),
        density: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    ) -> Self {
        DensityOracle {
            name: name.to_string(),
            support,
            density,
        }
    }

    /// Density at `x`; zero outside the support.
    pub fn density(&self, x: f64) -> f64 {
        if x < self.support.0 || x > self.support.1 {
            0.0
        } else {
            (self.density)(x)
        }
    }
}

/// Constant coefficients `a_n = alpha`, `b_n = beta`: semicircle law
/// `sqrt(4 alpha^2 - (x - beta)^2) / (2 pi alpha^2)` on `[beta - 2 alpha, beta + 2 alpha]`.
pub fn constant_coefficient_oracle(alpha: f64, beta: f64) -> (ParameterModel, DensityOracle) {
    let env = PeriodicEnvelope::constant(alpha, beta).expect("alpha must be positive");
    let pi = std::f64::consts::PI;
    let oracle = DensityOracle::new(
        "semicircle",
        (beta - 2.0 * alpha, beta + 2.0 * alpha),
        Arc::new(move |x| {
            let d = x - beta;
            (4.0 * alpha * alpha - d * d).max(0.0).sqrt() / (2.0 * pi * alpha * alpha)
        }),
    );
    (make_periodic(env), oracle)
}

/// `a_n = sqrt(n+1)`, `b_n = 0`: orthonormal Hermite polynomials of the
/// standard normal density.
pub fn gaussian_oracle() -> (ParameterModel, DensityOracle) {
    let oracle = DensityOracle::new(
        "gaussian",
        (f64::NEG_INFINITY, f64::INFINITY),
        Arc::new(|x| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()),
    );
    (sqrt_modulated(1, 0.0), oracle)
}

/// `a_n = sqrt(n+1)` and `b_n = q sqrt(n+1)` viewed with period `N`.
pub fn sqrt_modulated(period: usize, q: f64) -> ParameterModel {
    let env = PeriodicEnvelope::new(vec![1.0; period], vec![q; period]).expect("valid envelope");
    let spec = ModelSpec {
        class: crate::params::ClassTag::PeriodicallyModulated,
        period,
        alpha: env.alphas().to_vec(),
        beta: env.betas().to_vec(),
        growth: Some(Growth::sqrt()),
        decay: None,
        b_offset: None,
        blend: None,
    };
    ParameterModel::from_spec(&spec).expect("static spec is valid")
}

/// Trace of the envelope monodromy at zero for `alpha = 1`, `beta = q`:
/// `2 cos(N arccos(-q/2))`.
pub fn shifted_constant_trace(period: usize, q: f64) -> f64 {
    2.0 * (period as f64 * (-q / 2.0).acos()).cos()
}

/// `a_n = sqrt(n+1)`, `b_n = 1` for even `n` and `0` for odd `n`.
pub fn alternating_diagonal_model() -> ParameterModel {
    let spec = ModelSpec {
        class: crate::params::ClassTag::PeriodicallyModulated,
        period: 1,
        alpha: vec![1.0],
        beta: vec![0.0],
        growth: Some(Growth::sqrt()),
        decay: None,
        b_offset: Some(vec![1.0, 0.0]),
        blend: None,
    };
    ParameterModel::from_spec(&spec).expect("static spec is valid")
}

/// Closed forms at `x = 0` for [`alternating_diagonal_model`].
#[derive(Clone, Debug)]
pub struct AlternatingDiagonal {
    pub model: ParameterModel,
}

impl AlternatingDiagonal {
    pub fn new() -> Self {
        AlternatingDiagonal {
            model: alternating_diagonal_model(),
        }
    }

    pub fn p_even(&self, n: u64) -> f64 {
        closed_form_p2n_zero(n)
    }

    pub fn p_odd_squared(&self, n: u64) -> f64 {
        closed_form_p2n1_sq_zero(n)
    }

    /// Odd values from the recurrence at zero driven by the closed even values:
    /// `p_{2n+1} = -p_{2n} / a_{2n} - (a_{2n-1} / a_{2n}) p_{2n-1}`.
    pub fn odd_by_recursion(&self, n_max: u64) -> Vec<f64> {
        let a = |m: u64| self.model.a(m as usize);
        let mut out = Vec::with_capacity(n_max as usize + 1);
        let mut prev = 0.0;
        for n in 0..=n_max {
            let m = 2 * n;
            let a_prev = if n == 0 { 0.0 } else { a(m - 1) };
            let v = -self.p_even(n) / a(m) - a_prev / a(m) * prev;
            out.push(v);
            prev = v;
        }
        out
    }

    /// Limit of `p_{2n+1}(0)^2 / sqrt(n+1)`.
    pub fn odd_square_limit() -> f64 {
        2.0 / std::f64::consts::PI.sqrt()
    }
}

impl Default for AlternatingDiagonal {
    fn default() -> Self {
        Self::new()
    }
}

/// Nodes and weights with `sum w_k g(y_k) = int_{-1}^{1} g(y) sqrt(1 - y^2) dy`
/// exactly for polynomials of degree below `2m`.
pub fn gauss_chebyshev_second_kind(m: usize) -> (Vec<f64>, Vec<f64>) {
    let pi = std::f64::consts::PI;
    let h = pi / (m as f64 + 1.0);
    (1..=m)
        .map(|k| {
            let t = k as f64 * h;
            (t.cos(), h * t.sin() * t.sin())
        })
        .unzip()
}
