//! Christoffel-Darboux kernels, their normalizers and error bookkeeping.

use serde::Serialize;

use crate::equilibrium::omega_prime;
use crate::error::{LabError, Result};
use crate::numeric::NeumaierSum;
use crate::oracles::DensityOracle;
use crate::params::{ClassTag, ParameterModel};
use crate::poly::{DerivStream, PolyStream, OVERFLOW_LIMIT};
use crate::transfer::{limit_jet, one_step, product, Mat2};

/// Below this separation the kernel is evaluated with the confluent formula.
pub const CONFLUENT_GAP: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KernelPair {
    /// `sum_{j<=n} p_j(x) p_j(y)`.
    pub direct: f64,
    /// Closed two-term form.
    pub cd: f64,
}

fn guard(v: f64, degree: usize) -> Result<f64> {
    if v.is_finite() && v.abs() <= OVERFLOW_LIMIT {
        Ok(v)
    } else {
        Err(LabError::Overflow { degree })
    }
}

fn check_finite(xs: &[f64]) -> Result<()> {
    if xs.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(LabError::config("evaluation points must be finite"))
    }
}

/// `K_n(x, y)` by direct summation and by the two-term closed form.
pub fn kernel(model: &ParameterModel, n: usize, x: f64, y: f64) -> Result<KernelPair> {
    check_finite(&[x, y])?;
    let an = model.a(n);
    if (x - y).abs() < CONFLUENT_GAP {
        let mut s = DerivStream::new(model, x);
        let mut py = PolyStream::new(model, 0, y);
        let mut direct = NeumaierSum::new();
        let (mut pn, mut dn) = (0.0, 0.0);
        for j in 0..=n {
            let v = guard(s.value(), j)?;
            if j == n {
                (pn, dn) = (v, guard(s.derivative(), j)?);
            }
            direct += v * guard(py.value(), j)?;
            s.advance();
            py.advance();
        }
        let (pn1, dn1) = (guard(s.value(), n + 1)?, guard(s.derivative(), n + 1)?);
        let cd = an * (pn * dn1 - dn * pn1);
        return Ok(KernelPair {
            direct: direct.value(),
            cd,
        });
    }
    let mut px = PolyStream::new(model, 0, x);
    let mut py = PolyStream::new(model, 0, y);
    let mut direct = NeumaierSum::new();
    for j in 0..=n {
        direct += guard(px.value(), j)? * guard(py.value(), j)?;
        px.advance();
        py.advance();
    }
    let (xn, xn1) = (px.previous(), guard(px.value(), n + 1)?);
    let (yn, yn1) = (py.previous(), guard(py.value(), n + 1)?);
    let cd = an * (xn1 * yn - xn * yn1) / (x - y);
    Ok(KernelPair {
        direct: direct.value(),
        cd,
    })
}

/// Diagonal `K_n(x, x)` in one pass.
pub fn kernel_diagonal(model: &ParameterModel, n: usize, x: f64) -> Result<f64> {
    check_finite(&[x])?;
    let mut p = PolyStream::new(model, 0, x);
    let mut s = NeumaierSum::new();
    for j in 0..=n {
        let v = guard(p.value(), j)?;
        s += v * v;
        p.advance();
    }
    Ok(s.value())
}

/// `K_{i;n}(x, y) = sum_{j<=n} p_{jW+i}(x) p_{jW+i}(y)` with `W` the window.
pub fn sub_kernel(model: &ParameterModel, i: usize, n: usize, x: f64, y: f64) -> Result<f64> {
    check_finite(&[x, y])?;
    let w = model.window();
    if i >= w {
        return Err(LabError::config(format!(
            "residue {i} is not below the window {w}"
        )));
    }
    let last = n * w + i;
    let mut px = PolyStream::new(model, 0, x);
    let mut py = PolyStream::new(model, 0, y);
    let mut s = NeumaierSum::new();
    for m in 0..=last {
        if m % w == i {
            s += guard(px.value(), m)? * guard(py.value(), m)?;
        }
        px.advance();
        py.advance();
    }
    Ok(s.value())
}

/// Normalizer `rho_n`: `sum alpha_j / a_j`, or for blends the sum over the
/// non-inserted indices of `alpha_i / a_m` with `i` the position in the block.
pub fn rho(model: &ParameterModel, n: usize) -> f64 {
    let env = model.envelope();
    let mut s = NeumaierSum::new();
    match model.class() {
        ClassTag::PeriodicBlend => {
            let (w, per) = (model.window(), model.period());
            for m in 0..=n {
                let i = m % w;
                if i < per {
                    s += env.alpha(i as i64) / model.a(m);
                }
            }
        }
        _ => {
            for j in 0..=n {
                s += env.alpha(j as i64) / model.a(j);
            }
        }
    }
    s.value()
}

/// `rho_{i;n} = sum_{j<=n} 1 / a_{jW+i}`; `i = -1` uses `a_{-1} = alpha_{N-1}`.
pub fn rho_sub(model: &ParameterModel, i: i64, n: usize) -> f64 {
    let w = model.window() as i64;
    let mut s = NeumaierSum::new();
    for j in 0..=n as i64 {
        s += 1.0 / model.a_ext(j * w + i);
    }
    s.value()
}

/// Which part of the kernel to look at.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Residue {
    All,
    Class(usize),
}

/// One kernel measurement with its normalization and prediction.
#[derive(Clone, Debug, Default, Serialize)]
pub struct KernelReport {
    pub n: usize,
    pub x: f64,
    pub y: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v: Option<f64>,
    #[serde(rename = "K_direct")]
    pub k_direct: f64,
    #[serde(rename = "K_cd")]
    pub k_cd: f64,
    pub rho: f64,
    /// Second normalization of a residue kernel, `rho_{i;n} alpha_i / alpha_{i-1}`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_alt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicted: Option<f64>,
    pub ratio: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observed_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound_ledger: Option<f64>,
    /// Density recovered as `omega' rho / K`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_hat: Option<f64>,
}

/// Limit coefficient of `K_{i;n}(x,x) mu'(x) / rho_{i-1;n+1}`.
pub fn residue_coefficient(model: &ParameterModel, i: usize, x: f64) -> Result<f64> {
    let lim = limit_jet(model, i, x)?.value;
    let neg = -lim.discr();
    if !(neg > 0.0) {
        return Err(LabError::NotInBand { x });
    }
    Ok(lim.get(2, 1).abs() / (std::f64::consts::PI * neg.sqrt()))
}

/// Diagonal kernel against its normalizer, with the predicted main term when
/// the orthogonality density is known.
pub fn christoffel_ratio(
    model: &ParameterModel,
    residue: Residue,
    n: usize,
    x: f64,
    oracle: Option<&DensityOracle>,
) -> Result<KernelReport> {
    let mu = oracle.map(|o| o.density(x));
    match residue {
        Residue::All => {
            let k = kernel(model, n, x, x)?;
            let r = rho(model, n);
            let w = omega_prime(model, x)?.trace_form;
            let predicted = mu.map(|m| w / m * r);
            Ok(KernelReport {
                n,
                x,
                y: x,
                k_direct: k.direct,
                k_cd: k.cd,
                rho: r,
                predicted,
                ratio: k.direct / r,
                observed_error: predicted.map(|p| k.direct - p),
                mu_hat: Some(w * r / k.direct),
                ..Default::default()
            })
        }
        Residue::Class(i) => {
            if model.class() == ClassTag::PeriodicBlend && !(1..=model.period()).contains(&i) {
                return Err(LabError::config("blend residues must lie in 1..=N"));
            }
            let k = sub_kernel(model, i, n, x, x)?;
            let env = model.envelope();
            let r = rho_sub(model, i as i64 - 1, n + 1);
            let r_alt = rho_sub(model, i as i64, n) * env.alpha(i as i64) / env.alpha(i as i64 - 1);
            let c = residue_coefficient(model, i, x)?;
            let predicted = mu.map(|m| c / m * r);
            Ok(KernelReport {
                n,
                x,
                y: x,
                k_direct: k,
                k_cd: f64::NAN,
                rho: r,
                rho_alt: Some(r_alt),
                predicted,
                ratio: k / r,
                observed_error: predicted.map(|p| k - p),
                mu_hat: Some(c * r / k),
                ..Default::default()
            })
        }
    }
}

/// `K_n(x + u/rho_n, x + v/rho_n) / K_n(x, x)` against the sine kernel.
pub fn scaling_kernel(
    model: &ParameterModel,
    n: usize,
    x: f64,
    u: f64,
    v: f64,
) -> Result<KernelReport> {
    let r = rho(model, n);
    let (xs, ys) = (x + u / r, x + v / r);
    let k = kernel(model, n, xs, ys)?;
    let diag = kernel_diagonal(model, n, x)?;
    let w = omega_prime(model, x)?.trace_form;
    let predicted = sinc((u - v) * std::f64::consts::PI * w);
    let ratio = k.direct / diag;
    Ok(KernelReport {
        n,
        x: xs,
        y: ys,
        u: Some(u),
        v: Some(v),
        k_direct: k.direct,
        k_cd: k.cd,
        rho: r,
        predicted: Some(predicted),
        ratio,
        observed_error: Some(ratio - predicted),
        ..Default::default()
    })
}

pub fn sinc(t: f64) -> f64 {
    if t.abs() < 1e-8 {
        1.0 - t * t / 6.0
    } else {
        t.sin() / t
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LedgerReport {
    pub n: usize,
    pub value: f64,
    /// Set when some tail could not be shown to converge and was cut off.
    pub truncated: bool,
    pub warnings: Vec<String>,
}

/// `T(m) = sum_{j>=0} d(m + j s)` for `m < len`, with the tail past a horizon
/// extrapolated from a local power-law fit.
fn strided_tails<F: Fn(usize) -> Result<f64>>(
    d: F,
    len: usize,
    stride: usize,
    warnings: &mut Vec<String>,
) -> Result<Vec<f64>> {
    let horizon = 4 * len + 64 * stride;
    let mut vals = Vec::with_capacity(horizon);
    for k in 0..horizon {
        vals.push(d(k)?);
    }
    let mut tails = vec![0.0; horizon];
    for m in (0..horizon).rev() {
        tails[m] = vals[m]
            + if m + stride < horizon {
                tails[m + stride]
            } else {
                let next = m + stride;
                let far = next + stride * (next / stride);
                let (d1, d2) = (d(next)?, d(far)?);
                if d1 == 0.0 {
                    0.0
                } else {
                    let p = -(d2 / d1).ln() / ((far as f64) / (next as f64)).ln();
                    if !(p > 1.05) {
                        let msg = format!(
                            "increments near index {next} do not decay summably (exponent {p:.3})"
                        );
                        if !warnings.contains(&msg) {
                            warnings.push(msg);
                        }
                        0.0
                    } else {
                        d1 / 2.0 + d1 * next as f64 / (stride as f64 * (p - 1.0))
                    }
                }
            };
    }
    tails.truncate(len);
    Ok(tails)
}

fn sup_over_grid<F: Fn(f64) -> Result<Mat2>>(grid: &[f64], f: F) -> Result<f64> {
    let mut s = 0.0f64;
    for &x in grid {
        s = s.max(f(x)?.norm());
    }
    Ok(s)
}

/// Bound ledger for the kernel error at level `n`, with sup norms over `grid`.
///
/// `None` sums `(1/a_m) sum_j ||B_{m+(j+1)N} - B_{m+jN}||` over `m <= n + N`.
/// `Some(i)` is the residue form
/// `sum_{k<=n} |1/a_{(k+1)N+i-1} - 1/a_{kN+i-1}| + (1/a_{(k+1)N+i-1}) sum_{j>=k} ||X_{(j+1)N+i} - X_{jN+i}||`.
pub fn error_ledger(
    model: &ParameterModel,
    residue: Option<usize>,
    n: usize,
    grid: &[f64],
) -> Result<LedgerReport> {
    if model.class() == ClassTag::PeriodicBlend {
        return Err(LabError::config(
            "the ledger is defined for models without inserted entries",
        ));
    }
    if grid.is_empty() {
        return Err(LabError::config("ledger grid must not be empty"));
    }
    let per = model.period();
    let mut warnings = Vec::new();
    let value = match residue {
        None => {
            let len = n + per + 1;
            let d = |k: usize| {
                sup_over_grid(grid, |x| {
                    Ok(one_step(model, k + per, x)? - one_step(model, k, x)?)
                })
            };
            let tails = strided_tails(d, len, per, &mut warnings)?;
            let mut s = NeumaierSum::new();
            for (m, t) in tails.iter().enumerate() {
                s += t / model.a(m);
            }
            s.value()
        }
        Some(i) => {
            if i >= per {
                return Err(LabError::config(format!(
                    "residue {i} is not below N = {per}"
                )));
            }
            let inv = |k: usize| 1.0 / model.a_ext((k * per + i) as i64 - 1);
            let d = |j: usize| {
                sup_over_grid(grid, |x| {
                    Ok(product(model, (j + 1) * per + i, per, x)?.to_mat2()
                        - product(model, j * per + i, per, x)?.to_mat2())
                })
            };
            let tails = strided_tails(d, n + 1, 1, &mut warnings)?;
            let mut s = NeumaierSum::new();
            for (k, t) in tails.iter().enumerate() {
                s += (inv(k + 1) - inv(k)).abs() + inv(k + 1) * t;
            }
            s.value()
        }
    };
    Ok(LedgerReport {
        n,
        value,
        truncated: !warnings.is_empty(),
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{make_modulated, make_periodic, Growth, PeriodicEnvelope};

    fn chebyshev() -> ParameterModel {
        make_periodic(PeriodicEnvelope::constant(0.5, 0.0).unwrap())
    }

    #[test]
    fn chebyshev_kernel_at_zero_counts_even_degrees() {
        let m = chebyshev();
        for n in [0usize, 1, 2, 7, 50, 51] {
            let k = kernel(&m, n, 0.0, 0.0).unwrap();
            let expect = (n / 2 + 1) as f64;
            assert!((k.direct - expect).abs() < 1e-12);
            assert!((k.cd - expect).abs() < 1e-10, "n={n}: {}", k.cd);
        }
    }

    #[test]
    fn chebyshev_kernel_closed_form_off_diagonal() {
        // sum_{j<=n} U_j(x) U_j(y) from the trigonometric sum
        let m = chebyshev();
        let (x, y) = (0.3f64, -0.45f64);
        let (s, t) = (x.acos(), y.acos());
        let n = 40;
        let mut expect = 0.0;
        for j in 0..=n {
            let jf = j as f64 + 1.0;
            expect += (jf * s).sin() * (jf * t).sin() / (s.sin() * t.sin());
        }
        let k = kernel(&m, n, x, y).unwrap();
        assert!((k.direct - expect).abs() < 1e-11);
        assert!((k.cd - expect).abs() < 1e-11);
    }

    #[test]
    fn confluent_branch_matches_direct_sum() {
        let m = make_modulated(
            PeriodicEnvelope::constant(1.0, 0.3).unwrap(),
            Growth::sqrt().to_seq(),
        );
        for &n in &[1usize, 5, 60, 200] {
            let k = kernel(&m, n, 0.4, 0.4 + 1e-10).unwrap();
            assert!((k.direct - k.cd).abs() < 1e-8 * k.direct, "n={n}");
        }
    }

    #[test]
    fn rho_of_periodic_model_counts_terms() {
        let env = PeriodicEnvelope::new(vec![0.5, 2.0], vec![0.0, 1.0]).unwrap();
        let m = make_periodic(env);
        assert!((rho(&m, 9) - 10.0).abs() < 1e-13);
        // rho_{i;n} of the same model is (n+1) / alpha_i
        assert!((rho_sub(&m, 1, 4) - 2.5).abs() < 1e-14);
        assert!((rho_sub(&m, -1, 4) - 2.5).abs() < 1e-14);
    }

    #[test]
    fn sub_kernels_add_up() {
        let env = PeriodicEnvelope::new(vec![1.0, 0.7, 1.2], vec![0.0, 0.2, -0.1]).unwrap();
        let m = make_modulated(env, Growth::sqrt().to_seq());
        let n = 20;
        let total: f64 = (0..3)
            .map(|i| sub_kernel(&m, i, n, 0.3, 0.1).unwrap())
            .sum();
        let full = kernel(&m, 3 * n + 2, 0.3, 0.1).unwrap();
        assert!((total - full.direct).abs() < 1e-11 * full.direct.abs().max(1.0));
    }

    #[test]
    fn ledger_vanishes_for_exact_periodic_models() {
        let env = PeriodicEnvelope::new(vec![0.5, 1.0], vec![0.0, 0.3]).unwrap();
        let m = make_periodic(env);
        let l = error_ledger(&m, None, 500, &[-0.2, 0.0, 0.2]).unwrap();
        assert_eq!(l.value, 0.0);
        let l = error_ledger(&m, Some(1), 200, &[0.0]).unwrap();
        assert_eq!(l.value, 0.0);
    }

    #[test]
    fn ledger_tail_extrapolation_is_accurate() {
        // d(k) = (k+1)^-2 with stride 1: T(0) = pi^2 / 6
        let mut w = Vec::new();
        let t = strided_tails(|k| Ok(1.0 / ((k + 1) as f64).powi(2)), 1, 1, &mut w).unwrap();
        let exact = std::f64::consts::PI.powi(2) / 6.0;
        assert!((t[0] - exact).abs() < 1e-4, "{}", t[0]);
        assert!(w.is_empty());
        let mut w = Vec::new();
        strided_tails(|k| Ok(1.0 / (k + 1) as f64), 1, 1, &mut w).unwrap();
        assert_eq!(w.len(), 1);
    }

    #[test]
    fn sinc_is_smooth_at_zero() {
        assert_eq!(sinc(0.0), 1.0);
        assert!((sinc(1e-9) - 1.0).abs() < 1e-16);
        assert!((sinc(std::f64::consts::PI)).abs() < 1e-16);
    }
}
