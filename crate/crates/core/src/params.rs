//! Recurrence coefficient models.
//!
//! A model supplies the off-diagonal `a_n > 0` and diagonal `b_n` entries of a
//! Jacobi matrix together with the periodic envelope `(alpha, beta)` that the
//! entries follow asymptotically. Models are either built from closures or
//! from a JSON [`ModelSpec`].

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::numeric::NeumaierSum;

/// Coefficient sequence indexed from zero.
pub type Seq = Arc<dyn Fn(usize) -> f64 + Send + Sync>;

/// Periodic sequences `alpha_n > 0`, `beta_n` with period `N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicEnvelope {
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl PeriodicEnvelope {
    pub fn new(alpha: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(LabError::config("envelope period must be at least 1"));
        }
        if alpha.len() != beta.len() {
            return Err(LabError::config(format!(
                "alpha has {} entries but beta has {}",
                alpha.len(),
                beta.len()
            )));
        }
        if let Some(a) = alpha.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return Err(LabError::config(format!(
                "alpha entries must be positive, got {a}"
            )));
        }
        if beta.iter().any(|b| !b.is_finite()) {
            return Err(LabError::config("beta entries must be finite"));
        }
        Ok(Self { alpha, beta })
    }

    pub fn constant(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(vec![alpha], vec![beta])
    }

    pub fn period(&self) -> usize {
        self.alpha.len()
    }

    fn wrap(&self, n: i64) -> usize {
        let p = self.period() as i64;
        (((n % p) + p) % p) as usize
    }

    /// `alpha_n` for any integer `n`, wrapping periodically.
    pub fn alpha(&self, n: i64) -> f64 {
        self.alpha[self.wrap(n)]
    }

    pub fn beta(&self, n: i64) -> f64 {
        self.beta[self.wrap(n)]
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alpha
    }

    pub fn betas(&self) -> &[f64] {
        &self.beta
    }
}

/// Structural class of a model; decides which limit theorems apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassTag {
    #[serde(alias = "periodic")]
    ExactPeriodic,
    #[serde(alias = "asymptotic")]
    AsymptoticallyPeriodic,
    #[serde(alias = "modulated")]
    PeriodicallyModulated,
    #[serde(alias = "blend")]
    PeriodicBlend,
    Custom,
}

impl fmt::Display for ClassTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ClassTag::ExactPeriodic => "exact_periodic",
            ClassTag::AsymptoticallyPeriodic => "asymptotically_periodic",
            ClassTag::PeriodicallyModulated => "periodically_modulated",
            ClassTag::PeriodicBlend => "periodic_blend",
            ClassTag::Custom => "custom",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthKind {
    Sqrt,
    Pow,
    Log,
}

/// Unbounded increasing weight `g(n)`.
///
/// * `sqrt`: `(n + shift)^(1/2)`
/// * `pow`: `(n + shift)^exponent`
/// * `log`: `ln(n + shift + 1)^exponent`
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Growth {
    pub kind: GrowthKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<f64>,
}

impl Growth {
    pub fn sqrt() -> Self {
        Growth {
            kind: GrowthKind::Sqrt,
            exponent: None,
            shift: None,
        }
    }

    pub fn pow(exponent: f64, shift: f64) -> Self {
        Growth {
            kind: GrowthKind::Pow,
            exponent: Some(exponent),
            shift: Some(shift),
        }
    }

    fn validate(&self) -> Result<()> {
        let shift = self.shift.unwrap_or(1.0);
        if !(shift.is_finite() && shift > 0.0) {
            return Err(LabError::config("growth shift must be positive"));
        }
        match (self.kind, self.exponent) {
            (GrowthKind::Sqrt, Some(e)) if e != 0.5 => Err(LabError::config(
                "sqrt growth has a fixed exponent of 0.5; use kind \"pow\" instead",
            )),
            (GrowthKind::Pow, None) => Err(LabError::config("pow growth needs an exponent")),
            (_, Some(e)) if !(e.is_finite() && e > 0.0) => {
                Err(LabError::config("growth exponent must be positive"))
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, n: usize) -> f64 {
        let shift = self.shift.unwrap_or(1.0);
        let t = n as f64 + shift;
        match self.kind {
            GrowthKind::Sqrt => t.sqrt(),
            GrowthKind::Pow => t.powf(self.exponent.unwrap_or(1.0)),
            GrowthKind::Log => (t + 1.0).ln().powf(self.exponent.unwrap_or(1.0)),
        }
    }

    pub fn to_seq(self) -> Seq {
        Arc::new(move |n| self.eval(n))
    }
}

/// Power-law perturbation of a periodic envelope:
/// `a_n = alpha_n (1 + A (n+1)^-p)`, `b_n = beta_n + B (n+1)^-p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Decay {
    #[serde(default)]
    pub a_amplitude: f64,
    #[serde(default)]
    pub b_amplitude: f64,
    pub exponent: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlendSpec {
    /// Growth of the inserted pairs `c_0, c_1, ...`.
    pub c_growth: Growth,
}

/// JSON description of a model.
///
/// ```json
/// {"class": "periodically_modulated", "N": 1, "alpha": [1.0], "beta": [0.0],
///  "growth": {"kind": "sqrt"}}
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub class: ClassTag,
    #[serde(rename = "N")]
    pub period: usize,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub growth: Option<Growth>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay: Option<Decay>,
    /// Periodic additive term on `b_n` that is not scaled by the growth.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_offset: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blend: Option<BlendSpec>,
}

#[derive(Clone)]
struct BlendParts {
    inner: Box<ParameterModel>,
    c: Seq,
}

/// Jacobi parameters `(a_n, b_n)` with their envelope and class.
#[derive(Clone)]
pub struct ParameterModel {
    class: ClassTag,
    envelope: PeriodicEnvelope,
    a: Seq,
    b: Seq,
    blend: Option<BlendParts>,
    spec: Option<ModelSpec>,
}

impl fmt::Debug for ParameterModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParameterModel")
            .field("class", &self.class)
            .field("envelope", &self.envelope)
            .field("spec", &self.spec)
            .finish()
    }
}

/// Exactly periodic model `a_n = alpha_n`, `b_n = beta_n`.
pub fn make_periodic(envelope: PeriodicEnvelope) -> ParameterModel {
    let ea = envelope.clone();
    let eb = envelope.clone();
    ParameterModel {
        class: ClassTag::ExactPeriodic,
        envelope,
        a: Arc::new(move |n| ea.alpha(n as i64)),
        b: Arc::new(move |n| eb.beta(n as i64)),
        blend: None,
        spec: None,
    }
}

/// Periodic envelope perturbed by power-law decay.
pub fn make_asymptotically_periodic(
    envelope: PeriodicEnvelope,
    decay: Decay,
) -> Result<ParameterModel> {
    if !(decay.exponent.is_finite() && decay.exponent > 0.0) {
        return Err(LabError::config("decay exponent must be positive"));
    }
    if decay.a_amplitude <= -1.0 || !decay.a_amplitude.is_finite() || !decay.b_amplitude.is_finite()
    {
        return Err(LabError::config(
            "decay a_amplitude must exceed -1 so that a_n > 0",
        ));
    }
    let ea = envelope.clone();
    let eb = envelope.clone();
    Ok(ParameterModel {
        class: ClassTag::AsymptoticallyPeriodic,
        envelope,
        a: Arc::new(move |n| {
            ea.alpha(n as i64) * (1.0 + decay.a_amplitude * (n as f64 + 1.0).powf(-decay.exponent))
        }),
        b: Arc::new(move |n| {
            eb.beta(n as i64) + decay.b_amplitude * (n as f64 + 1.0).powf(-decay.exponent)
        }),
        blend: None,
        spec: None,
    })
}

/// `a_n = alpha_n g(n)`, `b_n = beta_n g(n)` for an unbounded weight `g`.
pub fn make_modulated(envelope: PeriodicEnvelope, growth: Seq) -> ParameterModel {
    let ea = envelope.clone();
    let eb = envelope.clone();
    let ga = growth.clone();
    ParameterModel {
        class: ClassTag::PeriodicallyModulated,
        envelope,
        a: Arc::new(move |n| ea.alpha(n as i64) * ga(n)),
        b: Arc::new(move |n| eb.beta(n as i64) * growth(n)),
        blend: None,
        spec: None,
    }
}

/// Insert a pair `c_{2k}, c_{2k+1}` (with zero diagonal) after every block of
/// `N` entries of an (asymptotically) periodic model.
pub fn make_blend(inner: ParameterModel, c: Seq) -> Result<ParameterModel> {
    if !matches!(
        inner.class,
        ClassTag::ExactPeriodic | ClassTag::AsymptoticallyPeriodic
    ) {
        return Err(LabError::config(format!(
            "blend needs an exactly or asymptotically periodic inner model, got {}",
            inner.class
        )));
    }
    let n = inner.period();
    let w = n + 2;
    let ia = inner.a.clone();
    let ib = inner.b.clone();
    let ca = c.clone();
    Ok(ParameterModel {
        class: ClassTag::PeriodicBlend,
        envelope: inner.envelope.clone(),
        a: Arc::new(move |m| {
            let (k, i) = (m / w, m % w);
            if i < n {
                ia(k * n + i)
            } else {
                ca(2 * k + (i - n))
            }
        }),
        b: Arc::new(move |m| {
            let (k, i) = (m / w, m % w);
            if i < n {
                ib(k * n + i)
            } else {
                0.0
            }
        }),
        blend: Some(BlendParts {
            inner: Box::new(inner),
            c,
        }),
        spec: None,
    })
}

impl ParameterModel {
    /// Arbitrary closures; the envelope is used for normalizations only.
    pub fn custom(class: ClassTag, envelope: PeriodicEnvelope, a: Seq, b: Seq) -> Self {
        ParameterModel {
            class,
            envelope,
            a,
            b,
            blend: None,
            spec: None,
        }
    }

    /// Finite coefficient lists; indices past the end repeat the last entry.
    pub fn from_values(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.is_empty() || a.len() != b.len() {
            return Err(LabError::config(
                "coefficient lists must be non-empty and of equal length",
            ));
        }
        if a.iter().any(|x| !(x.is_finite() && *x > 0.0)) || b.iter().any(|x| !x.is_finite()) {
            return Err(LabError::config("a_n must be positive and b_n finite"));
        }
        let envelope = PeriodicEnvelope::constant(*a.last().unwrap(), *b.last().unwrap())?;
        let a = Arc::new(a);
        let b = Arc::new(b);
        Ok(Self::custom(
            ClassTag::Custom,
            envelope,
            Arc::new(move |n| a[n.min(a.len() - 1)]),
            Arc::new(move |n| b[n.min(b.len() - 1)]),
        ))
    }

    pub fn from_spec(spec: &ModelSpec) -> Result<Self> {
        if spec.period == 0 || spec.alpha.len() != spec.period || spec.beta.len() != spec.period {
            return Err(LabError::config(format!(
                "N = {} but alpha/beta have {}/{} entries",
                spec.period,
                spec.alpha.len(),
                spec.beta.len()
            )));
        }
        let envelope = PeriodicEnvelope::new(spec.alpha.clone(), spec.beta.clone())?;
        if let Some(g) = &spec.growth {
            g.validate()?;
        }
        let mut model = match spec.class {
            ClassTag::ExactPeriodic => {
                reject(
                    spec.growth.is_some(),
                    "growth is only valid for modulated models",
                )?;
                reject(
                    spec.decay.is_some(),
                    "decay is only valid for asymptotically periodic models",
                )?;
                make_periodic(envelope)
            }
            ClassTag::AsymptoticallyPeriodic => {
                reject(
                    spec.growth.is_some(),
                    "growth is only valid for modulated models",
                )?;
                let decay = spec.decay.ok_or_else(|| {
                    LabError::config("asymptotically periodic models need a decay block")
                })?;
                make_asymptotically_periodic(envelope, decay)?
            }
            ClassTag::PeriodicallyModulated => {
                reject(
                    spec.decay.is_some(),
                    "decay is only valid for asymptotically periodic models",
                )?;
                let growth = spec
                    .growth
                    .ok_or_else(|| LabError::config("modulated models need a growth block"))?;
                make_modulated(envelope, growth.to_seq())
            }
            ClassTag::PeriodicBlend => {
                reject(
                    spec.growth.is_some(),
                    "blend models take their growth from blend.c_growth",
                )?;
                let blend = spec
                    .blend
                    .ok_or_else(|| LabError::config("blend models need a blend block"))?;
                blend.c_growth.validate()?;
                let inner = match spec.decay {
                    Some(d) => make_asymptotically_periodic(envelope, d)?,
                    None => make_periodic(envelope),
                };
                make_blend(inner, blend.c_growth.to_seq())?
            }
            ClassTag::Custom => {
                return Err(LabError::config(
                    "custom models are built from code and cannot be loaded from JSON",
                ))
            }
        };
        if spec.blend.is_some() && spec.class != ClassTag::PeriodicBlend {
            return Err(LabError::config("blend block given for a non-blend class"));
        }
        if let Some(off) = &spec.b_offset {
            if off.is_empty() || off.iter().any(|x| !x.is_finite()) {
                return Err(LabError::config(
                    "b_offset must be a non-empty list of finite values",
                ));
            }
            let off = Arc::new(off.clone());
            let b = model.b.clone();
            model.b = Arc::new(move |n| b(n) + off[n % off.len()]);
        }
        model.spec = Some(spec.clone());
        Ok(model)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let spec: ModelSpec =
            serde_json::from_str(s).map_err(|e| LabError::config(format!("model JSON: {e}")))?;
        Self::from_spec(&spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::config(format!("reading {}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn spec(&self) -> Option<&ModelSpec> {
        self.spec.as_ref()
    }

    pub fn class(&self) -> ClassTag {
        self.class
    }

    pub fn envelope(&self) -> &PeriodicEnvelope {
        &self.envelope
    }

    /// Envelope period `N`.
    pub fn period(&self) -> usize {
        self.envelope.period()
    }

    /// Number of one-step factors in a transfer window: `N`, or `N + 2` for blends.
    pub fn window(&self) -> usize {
        match self.class {
            ClassTag::PeriodicBlend => self.period() + 2,
            _ => self.period(),
        }
    }

    pub fn a(&self, n: usize) -> f64 {
        (self.a)(n)
    }

    pub fn b(&self, n: usize) -> f64 {
        (self.b)(n)
    }

    /// `a_n` extended to `n = -1` by `a_{-1} = alpha_{N-1}`.
    pub fn a_ext(&self, n: i64) -> f64 {
        if n < 0 {
            self.envelope.alpha(-1)
        } else {
            self.a(n as usize)
        }
    }

    /// Inner model and inserted sequence of a blend.
    pub fn blend_parts(&self) -> Option<(&ParameterModel, &Seq)> {
        self.blend.as_ref().map(|p| (p.inner.as_ref(), &p.c))
    }

    /// Model with indices shifted by `k`: `a'_n = a_{n+k}`, `b'_n = b_{n+k}`.
    /// Polynomials of the shifted model are the associated polynomials.
    pub fn shifted(&self, k: usize) -> ParameterModel {
        if k == 0 {
            return self.clone();
        }
        let a = self.a.clone();
        let b = self.b.clone();
        ParameterModel {
            class: ClassTag::Custom,
            envelope: self.envelope.clone(),
            a: Arc::new(move |n| a(n + k)),
            b: Arc::new(move |n| b(n + k)),
            blend: None,
            spec: None,
        }
    }

    /// Warnings about coefficients that do not follow the envelope the way the
    /// class requires, probed far out along the sequence.
    pub fn class_warnings(&self) -> Vec<String> {
        const TOL: f64 = 1e-6;
        const PROBE: usize = 10_000_000_000_000;
        let mut out = Vec::new();
        let n0 = PROBE - PROBE % self.window().max(1);
        let env = &self.envelope;
        for n in n0..n0 + 2 * self.window() {
            let (an, bn) = (self.a(n), self.b(n));
            if !(an.is_finite() && an > 0.0 && bn.is_finite()) {
                out.push(format!("coefficients at n = {n} are not admissible"));
                continue;
            }
            let i = n as i64;
            match self.class {
                ClassTag::ExactPeriodic | ClassTag::AsymptoticallyPeriodic => {
                    if (an - env.alpha(i)).abs() > TOL || (bn - env.beta(i)).abs() > TOL {
                        out.push(format!(
                            "a_n, b_n at n = {n} are not within {TOL} of the envelope"
                        ));
                    }
                }
                ClassTag::PeriodicallyModulated => {
                    let r = self.a(n - 1) / an;
                    let er = env.alpha(i - 1) / env.alpha(i);
                    let q = bn / an;
                    let eq = env.beta(i) / env.alpha(i);
                    if (r - er).abs() > TOL || (q - eq).abs() > TOL || 1.0 / an > TOL {
                        out.push(format!(
                            "ratios at n = {n} are not within {TOL} of the envelope"
                        ));
                    }
                }
                _ => {}
            }
        }
        out.dedup();
        out
    }
}

fn reject(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Err(LabError::config(msg))
    } else {
        Ok(())
    }
}

/// Partial sum `sum_{j <= n} 1 / a_j`.
pub fn carleman_partial_sum(model: &ParameterModel, n: usize) -> f64 {
    let mut s = NeumaierSum::new();
    for j in 0..=n {
        s += 1.0 / model.a(j);
    }
    s.value()
}

/// Elements of a sequence that can be differenced and measured.
pub trait Increment: Sized {
    fn minus(&self, other: &Self) -> Self;
    fn size(&self) -> f64;
}

impl Increment for f64 {
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn size(&self) -> f64 {
        self.abs()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Converging,
    Diverging,
    Inconclusive,
}

/// Total variation style diagnostic of order `r`.
#[derive(Clone, Debug, Serialize)]
pub struct DrDiagnostic {
    pub r: usize,
    /// `partial_sums[j-1][n] = sum_{m <= n} |Delta^j x_m|^(r/j)`.
    pub partial_sums: Vec<Vec<f64>>,
    /// Ratio of the tail block sums used for the verdict, one per order.
    pub decay_ratios: Vec<f64>,
    pub verdict: Verdict,
}

impl DrDiagnostic {
    pub fn totals(&self) -> Vec<f64> {
        self.partial_sums
            .iter()
            .map(|p| p.last().copied().unwrap_or(0.0))
            .collect()
    }
}

/// Block sums over `[W/10, W/sqrt(10))` and `[W/sqrt(10), W)` scale by
/// `10^((1-p)/2)` for terms decaying like `n^-p`; a ratio below
/// `10^(-0.025)` means faster than `n^-1.05`.
fn decay_verdict(terms: &[f64]) -> (f64, Verdict) {
    let w = terms.len();
    let lo = w / 10;
    let mid = ((w as f64) / 10f64.sqrt()).round() as usize;
    let s1: f64 = terms[lo..mid.max(lo)].iter().sum();
    let s2: f64 = terms[mid.max(lo)..].iter().sum();
    if s1 == 0.0 && s2 == 0.0 {
        return (0.0, Verdict::Converging);
    }
    if w < 20 || s1 == 0.0 {
        return (f64::NAN, Verdict::Inconclusive);
    }
    let ratio = s2 / s1;
    let v = if ratio < 10f64.powf(-0.025) {
        Verdict::Converging
    } else if ratio >= 1.0 {
        Verdict::Diverging
    } else {
        Verdict::Inconclusive
    };
    (ratio, v)
}

/// Partial sums of `|Delta^j x_n|^(r/j)` for `j = 1..=r` over the supplied
/// window, with a heuristic verdict on convergence.
pub fn dr_diagnostic<T: Increment>(x: &[T], r: usize) -> Result<DrDiagnostic> {
    if r < 1 {
        return Err(LabError::config("diagnostic order r must be at least 1"));
    }
    if x.len() < r + 2 {
        return Err(LabError::config(format!(
            "window of {} samples is too short for order {r}; need at least {}",
            x.len(),
            r + 2
        )));
    }
    let mut diffs: Vec<T> = x.windows(2).map(|w| w[1].minus(&w[0])).collect();
    let mut partial_sums = Vec::with_capacity(r);
    let mut decay_ratios = Vec::with_capacity(r);
    let mut verdict = Verdict::Converging;
    for j in 1..=r {
        if j > 1 {
            diffs = diffs.windows(2).map(|w| w[1].minus(&w[0])).collect();
        }
        let power = r as f64 / j as f64;
        let terms: Vec<f64> = diffs.iter().map(|d| d.size().powf(power)).collect();
        let mut acc = NeumaierSum::new();
        let sums = terms
            .iter()
            .map(|t| {
                acc += *t;
                acc.value()
            })
            .collect();
        partial_sums.push(sums);
        let (ratio, v) = decay_verdict(&terms);
        decay_ratios.push(ratio);
        verdict = match (verdict, v) {
            (Verdict::Diverging, _) | (_, Verdict::Diverging) => Verdict::Diverging,
            (Verdict::Inconclusive, _) | (_, Verdict::Inconclusive) => Verdict::Inconclusive,
            _ => Verdict::Converging,
        };
    }
    Ok(DrDiagnostic {
        r,
        partial_sums,
        decay_ratios,
        verdict,
    })
}
