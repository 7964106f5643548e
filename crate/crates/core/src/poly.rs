//! Orthonormal polynomials generated by the three-term recurrence
//!
//! `x p_n = a_n p_{n+1} + b_n p_n + a_{n-1} p_{n-1}`, `p_0 = 1`, `p_{-1} = 0`,
//! and their associated (index shifted) families.

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::numeric::NeumaierSum;
use crate::params::ParameterModel;

/// Magnitude above which a sequence is cut off and flagged.
pub const OVERFLOW_LIMIT: f64 = 1e280;

#[derive(Clone, Debug, Serialize)]
pub struct PolySample {
    pub x: f64,
    /// `p_0(x), ..., p_m(x)`; shorter than requested when `overflowed`.
    pub values: Vec<f64>,
    pub overflowed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PolyDerivSample {
    pub x: f64,
    pub values: Vec<f64>,
    pub derivs: Vec<f64>,
    pub overflowed: bool,
}

fn check_x(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(LabError::config(format!(
            "evaluation point must be finite, got {x}"
        )))
    }
}

/// One recurrence step: `((x - b) p - a_prev p_prev) / a`.
#[inline]
fn step(x: f64, b: f64, a: f64, a_prev: f64, p: f64, p_prev: f64) -> f64 {
    (x - b).mul_add(p, -a_prev * p_prev) / a
}

/// Streams `p^{[k]}_0(x), p^{[k]}_1(x), ...` for the `k`-th associated family.
#[derive(Clone, Debug)]
pub struct PolyStream<'a> {
    model: &'a ParameterModel,
    k: usize,
    x: f64,
    n: usize,
    cur: f64,
    prev: f64,
}

impl<'a> PolyStream<'a> {
    pub fn new(model: &'a ParameterModel, k: usize, x: f64) -> Self {
        PolyStream {
            model,
            k,
            x,
            n: 0,
            cur: 1.0,
            prev: 0.0,
        }
    }

    /// Degree of the value returned by [`PolyStream::value`].
    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn value(&self) -> f64 {
        self.cur
    }

    pub fn previous(&self) -> f64 {
        self.prev
    }

    pub fn advance(&mut self) {
        let m = self.n + self.k;
        let a_prev = if self.n == 0 {
            0.0
        } else {
            self.model.a(m - 1)
        };
        let next = step(
            self.x,
            self.model.b(m),
            self.model.a(m),
            a_prev,
            self.cur,
            self.prev,
        );
        self.prev = self.cur;
        self.cur = next;
        self.n += 1;
    }
}

/// Values of the associated polynomials `p^{[k]}_0..=p^{[k]}_{n_max}` at `x`.
/// `k = 0` gives the orthonormal polynomials themselves.
pub fn eval_poly_sequence(
    model: &ParameterModel,
    k: usize,
    x: f64,
    n_max: usize,
) -> Result<PolySample> {
    check_x(x)?;
    let mut values = Vec::with_capacity(n_max + 1);
    let mut s = PolyStream::new(model, k, x);
    let mut overflowed = false;
    loop {
        let v = s.value();
        if !v.is_finite() || v.abs() > OVERFLOW_LIMIT {
            overflowed = true;
            break;
        }
        values.push(v);
        if s.degree() == n_max {
            break;
        }
        s.advance();
    }
    Ok(PolySample {
        x,
        values,
        overflowed,
    })
}

/// Streams `p_n(x)` and `p_n'(x)` together.
///
/// The derivative equals
/// `(1/a_0) sum_{m<n} (p_m p^{[1]}_{n-1} - p_n p^{[1]}_{m-1}) p_m`. Each term
/// of that sum solves the three-term recurrence in `n`, so the whole sum obeys
/// `a_n d_{n+1} = (x - b_n) d_n - a_{n-1} d_{n-1} + p_n` and is propagated
/// that way; evaluating the two running sums directly cancels to nothing once
/// the polynomials grow (see [`derivative_by_associated_sums`]).
#[derive(Clone, Debug)]
pub struct DerivStream<'a> {
    p: PolyStream<'a>,
    d: f64,
    d_prev: f64,
}

impl<'a> DerivStream<'a> {
    pub fn new(model: &'a ParameterModel, x: f64) -> Self {
        DerivStream {
            p: PolyStream::new(model, 0, x),
            d: 0.0,
            d_prev: 0.0,
        }
    }

    pub fn degree(&self) -> usize {
        self.p.degree()
    }

    pub fn value(&self) -> f64 {
        self.p.value()
    }

    pub fn derivative(&self) -> f64 {
        self.d
    }

    pub fn advance(&mut self) {
        let n = self.p.degree();
        let model = self.p.model;
        let a_prev = if n == 0 { 0.0 } else { model.a(n - 1) };
        let next = (self.p.x - model.b(n)).mul_add(self.d, self.p.value() - a_prev * self.d_prev)
            / model.a(n);
        self.d_prev = self.d;
        self.d = next;
        self.p.advance();
    }
}

/// `p_0'..=p_{n_max}'` from the two running sums
/// `S1 = sum_{m<n} p_m^2`, `S2 = sum_{m<n} p^{[1]}_{m-1} p_m` as
/// `(p^{[1]}_{n-1} S1 - p_n S2) / a_0`.
///
/// Only usable while the polynomials stay bounded: the two products grow like
/// `p_n^3` while their difference grows like `n p_n`.
pub fn derivative_by_associated_sums(
    model: &ParameterModel,
    x: f64,
    n_max: usize,
) -> Result<Vec<f64>> {
    check_x(x)?;
    let mut p = PolyStream::new(model, 0, x);
    let mut q = PolyStream::new(model, 1, x);
    let (mut s1, mut s2) = (NeumaierSum::new(), NeumaierSum::new());
    let a0 = model.a(0);
    let mut out = Vec::with_capacity(n_max + 1);
    loop {
        // at degree n the q stream holds p^{[1]}_{n-1} as its previous value
        out.push((q.previous() * s1.value() - p.value() * s2.value()) / a0);
        if p.degree() == n_max {
            break;
        }
        s1 += p.value() * p.value();
        s2 += q.previous() * p.value();
        p.advance();
        q.advance();
    }
    Ok(out)
}

/// Values and first derivatives of `p_0..=p_{n_max}` at `x`.
pub fn eval_poly_derivative(
    model: &ParameterModel,
    x: f64,
    n_max: usize,
) -> Result<PolyDerivSample> {
    check_x(x)?;
    let mut values = Vec::with_capacity(n_max + 1);
    let mut derivs = Vec::with_capacity(n_max + 1);
    let mut s = DerivStream::new(model, x);
    let mut overflowed = false;
    loop {
        let (v, d) = (s.value(), s.derivative());
        if !(v.is_finite() && d.is_finite()) || v.abs() > OVERFLOW_LIMIT || d.abs() > OVERFLOW_LIMIT
        {
            overflowed = true;
            break;
        }
        values.push(v);
        derivs.push(d);
        if s.degree() == n_max {
            break;
        }
        s.advance();
    }
    Ok(PolyDerivSample {
        x,
        values,
        derivs,
        overflowed,
    })
}

/// `C(2n, n) / 4^n`, accurate to a few ulp for all `n`.
pub fn central_binomial_ratio(n: u64) -> f64 {
    if n < 30 {
        let mut r = 1.0;
        for k in 1..=n {
            r *= (2 * k - 1) as f64 / (2 * k) as f64;
        }
        return r;
    }
    // ln Gamma(n + 1/2) - ln Gamma(n + 1) via the Stirling series, arranged so
    // the large terms cancel analytically.
    let nf = n as f64;
    let tail = |z: f64| {
        let z2 = z * z;
        (1.0 / 12.0 - (1.0 / 360.0 - (1.0 / 1260.0 - 1.0 / (1680.0 * z2)) / z2) / z2) / z
    };
    let lg = -0.5 * (nf + 1.0).ln() + nf * (-0.5 / (nf + 1.0)).ln_1p() + 0.5 + tail(nf + 0.5)
        - tail(nf + 1.0);
    (lg - 0.5 * std::f64::consts::PI.ln()).exp()
}

/// Closed form of `p_{2n}(0)` for `a_n = sqrt(n+1)` with `b_n = 1` on even `n`
/// and `0` on odd `n`: `(-1)^n sqrt((2n)!) / (2^n n!)`.
pub fn closed_form_p2n_zero(n: u64) -> f64 {
    let v = central_binomial_ratio(n).sqrt();
    if n.is_multiple_of(2) {
        v
    } else {
        -v
    }
}

/// Closed form of `p_{2n+1}(0)^2` for the same model:
/// `(n+1) (2n+2)! / ((n+1)!^2 2^(2n+1))`.
pub fn closed_form_p2n1_sq_zero(n: u64) -> f64 {
    2.0 * (n as f64 + 1.0) * central_binomial_ratio(n + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{make_modulated, make_periodic, Growth, ParameterModel, PeriodicEnvelope};
    use std::sync::Arc;

    fn chebyshev() -> ParameterModel {
        make_periodic(PeriodicEnvelope::constant(0.5, 0.0).unwrap())
    }

    fn hermite() -> ParameterModel {
        make_modulated(
            PeriodicEnvelope::constant(1.0, 0.0).unwrap(),
            Growth::sqrt().to_seq(),
        )
    }

    #[test]
    fn chebyshev_second_kind_closed_form() {
        let m = chebyshev();
        for &x in &[-0.9, -0.3, 0.0, 0.45, 0.99] {
            let t: f64 = f64::acos(x);
            let s = eval_poly_sequence(&m, 0, x, 200).unwrap();
            for (n, v) in s.values.iter().enumerate() {
                let u = ((n as f64 + 1.0) * t).sin() / t.sin();
                assert!((v - u).abs() < 1e-11 * (1.0 + u.abs()), "n={n} x={x}");
            }
        }
    }

    #[test]
    fn hermite_values_match_probabilists_hermite() {
        // He_{n+1} = x He_n - n He_{n-1}, normalized by sqrt(n!)
        let m = hermite();
        let x = 1.3;
        let s = eval_poly_sequence(&m, 0, x, 40).unwrap();
        let (mut h0, mut h1) = (1.0f64, x);
        let mut fact = 1.0f64;
        assert!((s.values[0] - 1.0).abs() < 1e-15);
        for n in 1..=40usize {
            fact *= n as f64;
            assert!(
                (s.values[n] - h1 / fact.sqrt()).abs() < 1e-12 * (1.0 + s.values[n].abs()),
                "n={n}"
            );
            let h2 = x * h1 - n as f64 * h0;
            h0 = h1;
            h1 = h2;
        }
    }

    #[test]
    fn associated_family_uses_shifted_coefficients() {
        let m = hermite();
        let s = eval_poly_sequence(&m, 3, 0.7, 2).unwrap();
        let p1 = (0.7 - m.b(3)) / m.a(3);
        let p2 = ((0.7 - m.b(4)) * p1 - m.a(3)) / m.a(4);
        assert!((s.values[1] - p1).abs() < 1e-15);
        assert!((s.values[2] - p2).abs() < 1e-15);
    }

    #[test]
    fn overflow_truncates_the_sample() {
        let m = ParameterModel::from_values(vec![1e-3; 4], vec![0.0; 4]).unwrap();
        let s = eval_poly_sequence(&m, 0, 10.0, 1000).unwrap();
        assert!(s.overflowed);
        assert!(s.values.len() < 1001);
        assert!(s.values.iter().all(|v| v.abs() <= OVERFLOW_LIMIT));
    }

    #[test]
    fn non_finite_x_is_rejected() {
        assert!(eval_poly_sequence(&chebyshev(), 0, f64::NAN, 3).is_err());
        assert!(eval_poly_derivative(&chebyshev(), f64::INFINITY, 3).is_err());
    }

    #[test]
    fn chebyshev_derivative_closed_form() {
        // U_n'(x) = ((n+1) T_{n+1}(x) - x U_n(x)) / (x^2 - 1)
        let m = chebyshev();
        for &x in &[-0.7, 0.1, 0.5] {
            let t: f64 = f64::acos(x);
            let s = eval_poly_derivative(&m, x, 120).unwrap();
            for n in 0..=120usize {
                let nf = n as f64;
                let u = ((nf + 1.0) * t).sin() / t.sin();
                let tn1 = ((nf + 1.0) * t).cos();
                let du = ((nf + 1.0) * tn1 - x * u) / (x * x - 1.0);
                assert!(
                    (s.derivs[n] - du).abs() < 1e-9 * (1.0 + du.abs()),
                    "n={n} x={x}"
                );
            }
        }
    }

    #[test]
    fn derivative_matches_associated_sums_for_hermite() {
        let m = hermite();
        let s = eval_poly_derivative(&m, 0.4, 300).unwrap();
        let r = derivative_by_associated_sums(&m, 0.4, 300).unwrap();
        for n in 0..=300 {
            assert!(
                (s.derivs[n] - r[n]).abs() < 1e-8 * (1.0 + r[n].abs()),
                "n={n}"
            );
        }
    }

    #[test]
    fn derivative_matches_central_differences() {
        let m = ParameterModel::from_values(
            vec![0.7, 1.3, 0.4, 2.2, 0.9],
            vec![0.3, -1.1, 0.8, 0.0, -0.4],
        )
        .unwrap();
        let h = 1e-5;
        for &x in &[-2.5, -0.3, 0.9, 3.1] {
            let s = eval_poly_derivative(&m, x, 30).unwrap();
            let up = eval_poly_sequence(&m, 0, x + h, 30).unwrap().values;
            let dn = eval_poly_sequence(&m, 0, x - h, 30).unwrap().values;
            for n in 1..=30 {
                let fd = (up[n] - dn[n]) / (2.0 * h);
                assert!(
                    (s.derivs[n] - fd).abs() < 1e-6 * fd.abs().max(1.0),
                    "x={x} n={n}: {} vs {fd}",
                    s.derivs[n]
                );
            }
        }
    }

    #[test]
    fn chebyshev_second_kind_derivative_at_point_three() {
        let s = eval_poly_derivative(&chebyshev(), 0.3, 2).unwrap();
        assert!((s.derivs[2] - 2.4).abs() < 1e-14);
    }

    #[test]
    fn central_ratio_branches_agree() {
        // the product and the series must join smoothly at the switch
        let mut r = 1.0;
        for k in 1..=60u64 {
            r *= (2 * k - 1) as f64 / (2 * k) as f64;
            if k >= 30 {
                let v = central_binomial_ratio(k);
                assert!((v - r).abs() < 1e-14 * r, "k={k}: {v} vs {r}");
            }
        }
    }

    #[test]
    fn closed_forms_match_recurrence_at_zero() {
        let m = crate::oracles::alternating_diagonal_model();
        let s = eval_poly_sequence(&m, 0, 0.0, 101).unwrap();
        for n in 0..=50u64 {
            let even = s.values[2 * n as usize];
            let odd = s.values[2 * n as usize + 1];
            assert!((even - closed_form_p2n_zero(n)).abs() < 1e-13, "n={n}");
            assert!(
                (odd * odd - closed_form_p2n1_sq_zero(n)).abs() < 1e-12 * odd * odd,
                "n={n}"
            );
        }
        assert!((s.values[1] + 1.0).abs() < 1e-15);
        assert!((s.values[3] * s.values[3] - 1.5).abs() < 1e-14);
    }

    #[test]
    fn custom_closure_models_work() {
        let m = ParameterModel::custom(
            crate::params::ClassTag::Custom,
            PeriodicEnvelope::constant(1.0, 0.0).unwrap(),
            Arc::new(|_| 1.0),
            Arc::new(|_| 0.0),
        );
        let s = eval_poly_sequence(&m, 0, 0.0, 4).unwrap();
        assert_eq!(s.values, vec![1.0, 0.0, -1.0, 0.0, 1.0]);
    }
}
