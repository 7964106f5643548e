//! Weighted sums of rotating phases.
//!
//! A spec carries weights `gamma_k > 0` and phase functions `theta_k(x)` in
//! `(0, 2pi)` converging to `theta(x)`. Partial phases `sum_{j<=k} theta_j`
//! are accumulated modulo `2pi` in double-double precision.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::numeric::{NeumaierSum, PhaseAccumulator};

pub type Weight = Arc<dyn Fn(usize) -> f64 + Send + Sync>;
pub type PhaseFn = Arc<dyn Fn(usize, f64) -> f64 + Send + Sync>;
pub type PointFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct OscSpec {
    pub gamma: Weight,
    pub theta: PhaseFn,
    pub theta_limit: PointFn,
    /// Limit of `theta_k' / gamma_k`, when known.
    pub psi: Option<PointFn>,
    pub sigma: PointFn,
    pub theta_prime: Option<PhaseFn>,
    pub theta_second: Option<PhaseFn>,
}

impl OscSpec {
    /// `gamma_k = 1/sqrt(k+1)`, `theta_k(x) = 1 + gamma_k x`, `sigma = 0`;
    /// the frequency ratio is exactly one.
    pub fn canonical() -> Self {
        let g = |k: usize| 1.0 / (k as f64 + 1.0).sqrt();
        OscSpec {
            gamma: Arc::new(g),
            theta: Arc::new(move |k, x| 1.0 + g(k) * x),
            theta_limit: Arc::new(|_| 1.0),
            psi: Some(Arc::new(|_| 1.0)),
            sigma: Arc::new(|_| 0.0),
            theta_prime: Some(Arc::new(move |k, _| g(k))),
            theta_second: Some(Arc::new(|_, _| 0.0)),
        }
    }

    /// `gamma_k = (k+1)^-s` and `theta_k(x) = theta0 + x + amp (k+1)^-q`.
    pub fn power_law(s: f64, theta0: f64, amp: f64, q: f64) -> Self {
        OscSpec {
            gamma: Arc::new(move |k| (k as f64 + 1.0).powf(-s)),
            theta: Arc::new(move |k, x| theta0 + x + amp * (k as f64 + 1.0).powf(-q)),
            theta_limit: Arc::new(move |x| theta0 + x),
            psi: None,
            sigma: Arc::new(|_| 0.0),
            theta_prime: Some(Arc::new(|_, _| 1.0)),
            theta_second: Some(Arc::new(|_, _| 0.0)),
        }
    }

    /// Total weight `sum_{k<=n} gamma_k`.
    pub fn total_weight(&self, n: usize) -> f64 {
        let mut s = NeumaierSum::new();
        for k in 0..=n {
            s += (self.gamma)(k);
        }
        s.value()
    }

    /// Problems with the standing hypotheses, probed at degree `n`.
    pub fn hypothesis_warnings(&self, x: f64, n: usize) -> Vec<String> {
        let mut out = Vec::new();
        let tau = std::f64::consts::TAU;
        for k in [0, n / 2, n] {
            let t = (self.theta)(k, x);
            if !(t > 0.0 && t < tau) {
                out.push(format!("theta_{k}({x}) = {t} is outside (0, 2pi)"));
            }
            if !((self.gamma)(k) > 0.0) {
                out.push(format!("gamma_{k} is not positive"));
            }
        }
        let lim = (self.theta_limit)(x);
        if !(lim > 0.0 && lim < tau) {
            out.push(format!("limit phase {lim} is outside (0, 2pi)"));
        }
        if let (Some(psi), Some(tp)) = (&self.psi, &self.theta_prime) {
            let drift = (tp(n, x) / (self.gamma)(n) - psi(x)).abs();
            if drift > 1e-3 {
                out.push(format!(
                    "theta_n' / gamma_n is {drift:e} away from psi at n = {n}"
                ));
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ExpSumReport {
    pub n: usize,
    pub x: f64,
    pub re: f64,
    pub im: f64,
    pub total_weight: f64,
    /// `|sum| / total_weight`.
    pub normalized: f64,
    /// `sum_{k<n} |gamma_{k+1} - gamma_k| + gamma_{k+1} |theta_{k+1} - theta|`.
    pub bound_terms: f64,
    /// `|sum| / bound_terms`.
    pub fitted_constant: f64,
}

/// `sum_{k<=n} gamma_k exp(i sum_{j<=k} theta_j(x))` with its normalization
/// and bound bookkeeping.
pub fn weighted_exponential_sum(spec: &OscSpec, x: f64, n: usize) -> Result<ExpSumReport> {
    if !x.is_finite() {
        return Err(LabError::config("evaluation point must be finite"));
    }
    let lim = (spec.theta_limit)(x);
    let mut phase = PhaseAccumulator::new(0.0);
    let (mut re, mut im, mut w, mut rhs) = (
        NeumaierSum::new(),
        NeumaierSum::new(),
        NeumaierSum::new(),
        NeumaierSum::new(),
    );
    let mut g_prev = 0.0;
    for k in 0..=n {
        let g = (spec.gamma)(k);
        let t = (spec.theta)(k, x);
        phase.add(t);
        let (s, c) = phase.value().sin_cos();
        re += g * c;
        im += g * s;
        w += g;
        if k > 0 {
            rhs += (g - g_prev).abs() + g * (t - lim).abs();
        }
        g_prev = g;
    }
    let z = Complex64::new(re.value(), im.value());
    let total = w.value();
    let bound = rhs.value();
    Ok(ExpSumReport {
        n,
        x,
        re: z.re,
        im: z.im,
        total_weight: total,
        normalized: z.norm() / total,
        bound_terms: bound,
        fitted_constant: if bound > 0.0 {
            z.norm() / bound
        } else {
            f64::INFINITY
        },
    })
}

/// `sum_k gamma_k sin(S_k(x_n) + sigma(x_n)) sin(S_k(y_n) + sigma(y_n)) / W_n`
/// with `S_k = sum_{j<=k} theta_j`, `W_n = sum_{k<=n} gamma_k` and the moving
/// points `x_n = x + a/W_n`, `y_n = x + b/W_n`.
pub fn sinc_limit_sum(spec: &OscSpec, n: usize, x: f64, a: f64, b: f64) -> Result<f64> {
    if ![x, a, b].iter().all(|v| v.is_finite()) {
        return Err(LabError::config("evaluation points must be finite"));
    }
    let total = spec.total_weight(n);
    let (xn, yn) = (x + a / total, x + b / total);
    let mut px = PhaseAccumulator::new((spec.sigma)(xn));
    let mut py = PhaseAccumulator::new((spec.sigma)(yn));
    let mut s = NeumaierSum::new();
    for k in 0..=n {
        px.add((spec.theta)(k, xn));
        py.add((spec.theta)(k, yn));
        s += (spec.gamma)(k) * px.value().sin() * py.value().sin();
    }
    Ok(s.value() / total)
}

/// Limit value `sin(d psi) / (2 d psi)` of [`sinc_limit_sum`] for `d = b - a`.
pub fn sinc_limit_target(psi: f64, d: f64) -> f64 {
    0.5 * crate::kernel::sinc(d * psi)
}

/// `sum_k gamma_k cos(sigma(x_n) + sigma(y_n) + sum_{j<=k} (theta_j(x_n) + theta_j(y_n))) / W_n`
/// with `x_n = x + a / r`, `y_n = x + b / r`.
pub fn cos_average(spec: &OscSpec, n: usize, x: f64, a: f64, b: f64, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(LabError::config("scale r must be positive"));
    }
    let (xn, yn) = (x + a / r, x + b / r);
    let mut p = PhaseAccumulator::new((spec.sigma)(xn) + (spec.sigma)(yn));
    let mut s = NeumaierSum::new();
    let mut w = NeumaierSum::new();
    for k in 0..=n {
        p.add((spec.theta)(k, xn));
        p.add((spec.theta)(k, yn));
        let g = (spec.gamma)(k);
        s += g * p.value().cos();
        w += g;
    }
    Ok(s.value() / w.value())
}

/// Linearization residual of the phase step between the moving points:
/// returns `|theta_j(y_n) - theta_j(x_n) - (b-a) theta_j'(x) / W_n|` and the
/// scale `max(|a|,|b|) |b-a| W_n^-2 sup |theta_j''|` that bounds it.
pub fn linearization_residual(
    spec: &OscSpec,
    j: usize,
    n: usize,
    x: f64,
    a: f64,
    b: f64,
) -> Result<(f64, f64)> {
    let (tp, tpp) = match (&spec.theta_prime, &spec.theta_second) {
        (Some(p), Some(q)) => (p, q),
        _ => return Err(LabError::config("spec has no analytic derivatives")),
    };
    let total = spec.total_weight(n);
    let (xn, yn) = (x + a / total, x + b / total);
    let lhs = ((spec.theta)(j, yn) - (spec.theta)(j, xn) - (b - a) * tp(j, x) / total).abs();
    let reach = a.abs().max(b.abs()) / total;
    let sup = (0..=16)
        .map(|s| x - reach + 2.0 * reach * s as f64 / 16.0)
        .fold(0.0f64, |m, t| m.max(tpp(j, t).abs()));
    Ok((lhs, reach * (b - a).abs() / total * sup))
}

/// `sum_{k<n} |gamma_{k+1} - gamma_k| / W_n`, which tends to zero when
/// `gamma_{n-1} / gamma_n -> 1` and the weights are not summable.
pub fn variation_ratio(spec: &OscSpec, n: usize) -> f64 {
    let mut v = NeumaierSum::new();
    let mut w = NeumaierSum::from((spec.gamma)(0));
    for k in 0..n {
        let (g0, g1) = ((spec.gamma)(k), (spec.gamma)(k + 1));
        v += (g1 - g0).abs();
        w += g1;
    }
    v.value() / w.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_phase_sum_is_a_geometric_series() {
        // gamma = 1, theta = t: |sum_{k<=n} e^{i(k+1)t}| = |sin((n+1)t/2) / sin(t/2)|
        let t = 0.9;
        let spec = OscSpec {
            gamma: Arc::new(|_| 1.0),
            theta: Arc::new(move |_, _| t),
            theta_limit: Arc::new(move |_| t),
            psi: None,
            sigma: Arc::new(|_| 0.0),
            theta_prime: None,
            theta_second: None,
        };
        let n = 1000;
        let r = weighted_exponential_sum(&spec, 0.0, n).unwrap();
        let expect = (((n + 1) as f64) * t / 2.0).sin().abs() / (t / 2.0).sin();
        assert!((r.re.hypot(r.im) - expect).abs() < 1e-10);
        // nothing to charge the sum against
        assert_eq!(r.bound_terms, 0.0);
    }

    #[test]
    fn normalized_sum_decays() {
        let spec = OscSpec::power_law(0.5, 2.0, 0.3, 1.0);
        let a = weighted_exponential_sum(&spec, 0.0, 1000)
            .unwrap()
            .normalized;
        let b = weighted_exponential_sum(&spec, 0.0, 100_000)
            .unwrap()
            .normalized;
        assert!(b < a);
        assert!(b < 0.01);
    }

    #[test]
    fn canonical_fixture_at_equal_points_averages_sine_squared() {
        let v = sinc_limit_sum(&OscSpec::canonical(), 20_000, 0.0, 0.3, 0.3).unwrap();
        assert!((v - 0.5).abs() < 0.02, "{v}");
    }

    #[test]
    fn cos_average_vanishes() {
        let spec = OscSpec::canonical();
        let w = spec.total_weight(50_000);
        let v = cos_average(&spec, 50_000, 0.0, 0.5, -0.5, w).unwrap();
        assert!(v.abs() < 0.01, "{v}");
    }

    #[test]
    fn linearization_residual_is_within_scale() {
        let g = |k: usize| 1.0 / (k as f64 + 1.0).sqrt();
        let spec = OscSpec {
            gamma: Arc::new(g),
            theta: Arc::new(move |k, x| 1.0 + g(k) * x.sin()),
            theta_limit: Arc::new(|_| 1.0),
            psi: None,
            sigma: Arc::new(|_| 0.0),
            theta_prime: Some(Arc::new(move |k, x| g(k) * x.cos())),
            theta_second: Some(Arc::new(move |k, x| -g(k) * x.sin())),
        };
        for j in [0usize, 10, 1000] {
            let (lhs, scale) = linearization_residual(&spec, j, 1000, 0.4, -1.0, 2.0).unwrap();
            assert!(lhs <= scale * 1.01 + 1e-16, "j={j}: {lhs} vs {scale}");
        }
        // the canonical fixture is linear in x
        let (lhs, _) =
            linearization_residual(&OscSpec::canonical(), 5, 100, 0.0, 0.0, 1.0).unwrap();
        assert!(lhs < 1e-15);
    }

    #[test]
    fn variation_ratio_tends_to_zero() {
        let spec = OscSpec::canonical();
        assert!(variation_ratio(&spec, 100_000) < variation_ratio(&spec, 1000));
        assert!(variation_ratio(&spec, 100_000) < 0.002);
    }

    #[test]
    fn hypothesis_warnings_catch_bad_phases() {
        let spec = OscSpec::power_law(0.5, 7.0, 0.0, 1.0);
        assert!(!spec.hypothesis_warnings(0.0, 100).is_empty());
        assert!(OscSpec::canonical()
            .hypothesis_warnings(0.0, 100)
            .is_empty());
    }
}
