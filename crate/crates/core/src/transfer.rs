//! Transfer matrices of the recurrence and of its periodic envelope.
//!
//! `B_n(x) = [[0, 1], [-a_{n-1}/a_n, (x - b_n)/a_n]]` maps `(p_{n-1}, p_n)` to
//! `(p_n, p_{n+1})`. Products are ordered with later factors on the left:
//! `prod_{j=m}^{k} B_j = B_k ... B_m`.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::numeric::Dd;
use crate::params::{ClassTag, Increment, ParameterModel, PeriodicEnvelope};
use crate::poly::eval_poly_sequence;

/// Real 2x2 matrix stored row-major.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[1.0, 0.0], [0.0, 1.0]]);
    pub const ZERO: Mat2 = Mat2([[0.0, 0.0], [0.0, 0.0]]);

    pub fn new(m11: f64, m12: f64, m21: f64, m22: f64) -> Self {
        Mat2([[m11, m12], [m21, m22]])
    }

    pub fn diag(d1: f64, d2: f64) -> Self {
        Mat2::new(d1, 0.0, 0.0, d2)
    }

    /// Entry in 1-based row/column.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.0[row - 1][col - 1]
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> f64 {
        let [[a, b], [c, d]] = self.0;
        // Kahan's ad - bc with one fused correction term
        let w = b * c;
        let e = (-b).mul_add(c, w);
        a.mul_add(d, -w) + e
    }

    /// `tr^2 - 4 det`.
    pub fn discr(&self) -> f64 {
        let t = self.trace();
        t * t - 4.0 * self.det()
    }

    pub fn scale(&self, s: f64) -> Mat2 {
        let [[a, b], [c, d]] = self.0;
        Mat2::new(s * a, s * b, s * c, s * d)
    }

    pub fn inverse(&self) -> Result<Mat2> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return Err(LabError::numerical("singular 2x2 matrix"));
        }
        let [[a, b], [c, d]] = self.0;
        Ok(Mat2::new(d, -b, -c, a).scale(1.0 / det))
    }

    /// Spectral norm.
    pub fn norm(&self) -> f64 {
        let [[a, b], [c, d]] = self.0;
        let s = a * a + b * b + c * c + d * d;
        let det = self.det();
        let disc = (s * s - 4.0 * det * det).max(0.0);
        ((s + disc.sqrt()) / 2.0).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let [[a, b], [c, d]] = self.0;
        let [[e, f], [g, h]] = o.0;
        Mat2::new(
            a.mul_add(e, b * g),
            a.mul_add(f, b * h),
            c.mul_add(e, d * g),
            c.mul_add(f, d * h),
        )
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let [[a, b], [c, d]] = self.0;
        let [[e, f], [g, h]] = o.0;
        Mat2::new(a + e, b + f, c + g, d + h)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        self + (-o)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale(-1.0)
    }
}

/// Matrices of one sequence element sampled on a grid of `x`; differences
/// are measured in the sup over the grid of the spectral norm.
#[derive(Clone, Debug)]
pub struct GridMatrices(pub Vec<Mat2>);

impl Increment for GridMatrices {
    fn minus(&self, other: &Self) -> Self {
        GridMatrices(self.0.iter().zip(&other.0).map(|(a, b)| *a - *b).collect())
    }
    fn size(&self) -> f64 {
        self.0.iter().fold(0.0f64, |m, a| m.max(a.norm()))
    }
}

/// Product of one-step matrices carried in double-double precision so that
/// the determinant survives long, badly scaled windows.
#[derive(Clone, Copy, Debug)]
pub struct TransferProduct {
    m: [[Dd; 2]; 2],
}

impl TransferProduct {
    pub fn identity() -> Self {
        TransferProduct {
            m: [[Dd::ONE, Dd::ZERO], [Dd::ZERO, Dd::ONE]],
        }
    }

    /// Left multiply by `[[0, 1], [-r, t]]`.
    fn push(&mut self, r: f64, t: f64) {
        let row1 = self.m[1];
        let row2 = [
            self.m[0][0] * (-r) + self.m[1][0] * t,
            self.m[0][1] * (-r) + self.m[1][1] * t,
        ];
        self.m = [row1, row2];
    }

    pub fn to_mat2(&self) -> Mat2 {
        Mat2::new(
            self.m[0][0].to_f64(),
            self.m[0][1].to_f64(),
            self.m[1][0].to_f64(),
            self.m[1][1].to_f64(),
        )
    }

    pub fn det(&self) -> f64 {
        (self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]).to_f64()
    }

    pub fn trace(&self) -> f64 {
        (self.m[0][0] + self.m[1][1]).to_f64()
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|v| v.is_finite())
    }
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

fn step_entries(model: &ParameterModel, n: usize, x: f64) -> (f64, f64) {
    let an = model.a(n);
    (model.a_ext(n as i64 - 1) / an, (x - model.b(n)) / an)
}

/// `B_n(x)`; `n = 0` uses `a_{-1} = alpha_{N-1}`.
pub fn one_step(model: &ParameterModel, n: usize, x: f64) -> Result<Mat2> {
    check_x(x)?;
    let (r, t) = step_entries(model, n, x);
    Ok(Mat2::new(0.0, 1.0, -r, t))
}

/// `d/dx B_n(x)`.
pub fn one_step_derivative(model: &ParameterModel, n: usize) -> Mat2 {
    Mat2::new(0.0, 0.0, 0.0, 1.0 / model.a(n))
}

/// `B_{start+len-1} ... B_{start}` in double-double arithmetic.
pub fn product(
    model: &ParameterModel,
    start: usize,
    len: usize,
    x: f64,
) -> Result<TransferProduct> {
    check_x(x)?;
    let mut p = TransferProduct::identity();
    for j in start..start + len {
        let (r, t) = step_entries(model, j, x);
        p.push(r, t);
    }
    if !p.is_finite() {
        return Err(LabError::numerical(format!(
            "transfer product over [{start}, {}) overflowed",
            start + len
        )));
    }
    Ok(p)
}

/// `X_n(x)`: product over one window (`N` factors, `N + 2` for blends).
pub fn n_step(model: &ParameterModel, n: usize, x: f64) -> Result<Mat2> {
    Ok(product(model, n, model.window(), x)?.to_mat2())
}

/// Value with first and second derivative in `x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Jet {
    pub value: Mat2,
    pub d1: Mat2,
    pub d2: Mat2,
}

impl Jet {
    pub fn constant(m: Mat2) -> Jet {
        Jet {
            value: m,
            d1: Mat2::ZERO,
            d2: Mat2::ZERO,
        }
    }

    pub fn identity() -> Jet {
        Jet::constant(Mat2::IDENTITY)
    }

    /// Left multiply by a factor that is affine in `x`.
    pub fn push_affine(self, f: Mat2, df: Mat2) -> Jet {
        Jet {
            value: f * self.value,
            d1: df * self.value + f * self.d1,
            d2: (df * self.d1).scale(2.0) + f * self.d2,
        }
    }

    /// `lhs * self` for two jets.
    pub fn then(self, lhs: Jet) -> Jet {
        Jet {
            value: lhs.value * self.value,
            d1: lhs.d1 * self.value + lhs.value * self.d1,
            d2: lhs.d2 * self.value + (lhs.d1 * self.d1).scale(2.0) + lhs.value * self.d2,
        }
    }
}

/// `X_n` with its `x` derivatives.
pub fn n_step_jet(model: &ParameterModel, n: usize, x: f64) -> Result<Jet> {
    check_x(x)?;
    let mut j = Jet::identity();
    for k in n..n + model.window() {
        j = j.push_affine(one_step(model, k, x)?, one_step_derivative(model, k));
    }
    if !(j.value.is_finite() && j.d1.is_finite() && j.d2.is_finite()) {
        return Err(LabError::numerical("transfer jet overflowed"));
    }
    Ok(j)
}

/// Right-hand side of the product identity for a window of `n` factors
/// starting at `k`, written with associated polynomials:
/// `[[-(a_{k-1}/a_k) q_{n-2}, p_{n-1}], [-(a_{k-1}/a_k) q_{n-1}, p_n]]`
/// where `p = p^{[k]}` and `q = p^{[k+1]}` (with `q_{-1} = 0`).
pub fn associated_product(model: &ParameterModel, k: usize, n: usize, x: f64) -> Result<Mat2> {
    if n == 0 {
        return Err(LabError::config("window length must be at least 1"));
    }
    let p = eval_poly_sequence(model, k, x, n)?;
    let q = eval_poly_sequence(model, k + 1, x, n - 1)?;
    if p.overflowed || q.overflowed {
        return Err(LabError::Overflow { degree: n });
    }
    let r = model.a_ext(k as i64 - 1) / model.a(k);
    let q_nm2 = if n >= 2 { q.values[n - 2] } else { 0.0 };
    Ok(Mat2::new(
        -r * q_nm2,
        p.values[n - 1],
        -r * q.values[n - 1],
        p.values[n],
    ))
}

/// Envelope one-step matrix `[[0, 1], [-alpha_{n-1}/alpha_n, (x - beta_n)/alpha_n]]`.
pub fn envelope_matrix(env: &PeriodicEnvelope, n: i64, x: f64) -> Mat2 {
    Mat2::new(
        0.0,
        1.0,
        -env.alpha(n - 1) / env.alpha(n),
        (x - env.beta(n)) / env.alpha(n),
    )
}

fn envelope_factor(env: &PeriodicEnvelope, n: i64, x: f64) -> (Mat2, Mat2) {
    (
        envelope_matrix(env, n, x),
        Mat2::new(0.0, 0.0, 0.0, 1.0 / env.alpha(n)),
    )
}

/// Envelope product `prod_{j=n}^{n+N-1}` of the envelope one-step matrices.
pub fn envelope_n_step(env: &PeriodicEnvelope, n: i64, x: f64) -> Mat2 {
    envelope_jet(env, n, x).value
}

pub fn envelope_jet(env: &PeriodicEnvelope, n: i64, x: f64) -> Jet {
    envelope_range_jet(env, n, n + env.period() as i64, x)
}

/// Jet of `prod_{j=from}^{to-1}` of envelope one-step matrices.
fn envelope_range_jet(env: &PeriodicEnvelope, from: i64, to: i64, x: f64) -> Jet {
    let mut j = Jet::identity();
    for k in from..to {
        let (f, df) = envelope_factor(env, k, x);
        j = j.push_affine(f, df);
    }
    j
}

/// Limit of the three factors around an inserted pair of a blend:
/// `[[0, -1], [alpha_{N-1}/alpha_0, -(2x - beta_0)/alpha_0]]`.
pub fn blend_core(env: &PeriodicEnvelope, x: f64) -> Jet {
    let a0 = env.alpha(0);
    Jet {
        value: Mat2::new(0.0, -1.0, env.alpha(-1) / a0, -(2.0 * x - env.beta(0)) / a0),
        d1: Mat2::new(0.0, 0.0, 0.0, -2.0 / a0),
        d2: Mat2::ZERO,
    }
}

/// Limits of the blend window products `X_{k(N+2)+i}` for `i = 1..=N`, with
/// derivatives.
pub fn blend_limit_jet(env: &PeriodicEnvelope, i: usize, x: f64) -> Result<Jet> {
    let n = env.period();
    if i < 1 || i > n {
        return Err(LabError::config(format!(
            "blend limit index must be in 1..={n}, got {i}"
        )));
    }
    check_x(x)?;
    let right = envelope_range_jet(env, i as i64, n as i64, x);
    let left = envelope_range_jet(env, 1, i as i64, x);
    Ok(right.then(blend_core(env, x)).then(left))
}

pub fn blend_limit_matrices(env: &PeriodicEnvelope, i: usize, x: f64) -> Result<Mat2> {
    Ok(blend_limit_jet(env, i, x)?.value)
}

/// Envelope whose band set coincides with that of a blend: the two entries
/// around the insertion are scaled by `1/sqrt(2)` and `beta_0` is halved.
/// For `N = 1` the matching envelope is `(alpha_0 / 2, beta_0 / 2)`.
pub fn blend_equivalent_envelope(env: &PeriodicEnvelope) -> PeriodicEnvelope {
    let n = env.period();
    let mut alpha = env.alphas().to_vec();
    let mut beta = env.betas().to_vec();
    if n == 1 {
        alpha[0] /= 2.0;
    } else {
        alpha[0] /= std::f64::consts::SQRT_2;
        alpha[n - 1] /= std::f64::consts::SQRT_2;
    }
    beta[0] /= 2.0;
    PeriodicEnvelope::new(alpha, beta).expect("scaled envelope stays valid")
}

/// Limit matrix governing residue class `i` of a model at `x`: the envelope
/// product at `x` for (asymptotically) periodic models, at `0` for modulated
/// models and the blend limits for blends (`i` in `1..=N`).
pub fn limit_jet(model: &ParameterModel, i: usize, x: f64) -> Result<Jet> {
    let env = model.envelope();
    match model.class() {
        ClassTag::PeriodicallyModulated => Ok(envelope_jet(env, i as i64, 0.0)),
        ClassTag::PeriodicBlend => blend_limit_jet(env, i, x),
        _ => Ok(envelope_jet(env, i as i64, x)),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhaseSample {
    pub n: usize,
    pub x: f64,
    pub theta: f64,
    pub theta_prime: f64,
    pub theta_second: f64,
    #[serde(serialize_with = "ser_complex")]
    pub lambda: Complex64,
}

fn ser_complex<S: serde::Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&z.re)?;
    t.serialize_element(&z.im)?;
    t.end()
}

/// Smallest `-discr` accepted before a point is treated as a band edge.
pub const BAND_EDGE_EPS: f64 = 1e-14;

/// Rotation angle of `X_n(x)` and its `x` derivatives.
pub fn phase(model: &ParameterModel, n: usize, x: f64) -> Result<PhaseSample> {
    let jet = n_step_jet(model, n, x)?;
    let det = product(model, n, model.window(), x)?.det();
    phase_from_jet(&jet, det, n, x)
}

pub(crate) fn phase_from_jet(jet: &Jet, det: f64, n: usize, x: f64) -> Result<PhaseSample> {
    let tr = jet.value.trace();
    let neg = 4.0 * det - tr * tr;
    if !(neg >= BAND_EDGE_EPS) || !(det > 0.0) {
        return Err(LabError::BandEdge { x, neg_discr: neg });
    }
    let mut arg = tr / (2.0 * det.sqrt());
    if arg.abs() > 1.0 && arg.abs() <= 1.0 + 1e-12 {
        arg = arg.signum();
    }
    let theta = arg.acos();
    let root = neg.sqrt();
    let d1 = jet.d1.trace();
    let d2 = jet.d2.trace();
    let theta_prime = -d1 / root;
    let theta_second = -d2 / root - d1 * d1 * tr / (neg * root);
    Ok(PhaseSample {
        n,
        x,
        theta,
        theta_prime,
        theta_second,
        lambda: Complex64::new(tr / 2.0, root / 2.0),
    })
}
