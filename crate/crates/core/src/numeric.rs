//! Small floating point helpers: compensated sums, double-double values and
//! a phase accumulator that reduces modulo 2pi without losing the low bits.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// Neumaier (improved Kahan) running sum.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl AddAssign<f64> for NeumaierSum {
    fn add_assign(&mut self, x: f64) {
        self.add(x);
    }
}

impl From<f64> for NeumaierSum {
    fn from(x: f64) -> Self {
        Self { sum: x, comp: 0.0 }
    }
}

impl std::iter::Sum<f64> for NeumaierSum {
    fn sum<I: Iterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Compensated sum of an iterator.
pub fn csum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().sum::<NeumaierSum>().value()
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Unevaluated sum `hi + lo` carrying roughly 106 bits of mantissa.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub fn new(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd::new(x)
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Mul<f64> for Dd {
    type Output = Dd;
    fn mul(self, b: f64) -> Dd {
        let (p, e) = two_prod(self.hi, b);
        let (hi, lo) = quick_two_sum(p, e + self.lo * b);
        Dd { hi, lo }
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

const TAU_HI: f64 = std::f64::consts::TAU;
const TAU_LO: f64 = 2.449_293_598_294_706_4e-16;

/// Running sum of angles kept reduced to `[0, 2pi)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct PhaseAccumulator {
    acc: Dd,
}

impl PhaseAccumulator {
    pub fn new(start: f64) -> Self {
        let mut p = PhaseAccumulator {
            acc: Dd::new(start),
        };
        p.reduce();
        p
    }

    pub fn add(&mut self, theta: f64) {
        self.acc = self.acc + Dd::new(theta);
        if !(0.0..TAU_HI).contains(&self.acc.hi) {
            self.reduce();
        }
    }

    fn reduce(&mut self) {
        let k = (self.acc.hi / TAU_HI).floor();
        if k != 0.0 {
            let tau = Dd {
                hi: TAU_HI,
                lo: TAU_LO,
            };
            self.acc = self.acc - tau * k;
        }
        if self.acc.hi < 0.0 {
            self.acc = self.acc
                + Dd {
                    hi: TAU_HI,
                    lo: TAU_LO,
                };
        }
    }

    /// Current angle in `[0, 2pi)`.
    pub fn value(&self) -> f64 {
        self.acc.to_f64()
    }
}

/// Format a float with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{:.16e}", x)
}

/// Log-log slope of `y` against `x` by least squares.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (a, b) in lx.iter().zip(&ly) {
        num += (a - mx) * (b - my);
        den += (a - mx) * (a - mx);
    }
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumaier_recovers_cancelled_terms() {
        let xs = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(csum(xs), 2.0);
    }

    #[test]
    fn harmonic_partial_sum_matches_digamma_asymptotics() {
        let n = 1_000_000u64;
        let h = csum((1..=n).map(|k| 1.0 / k as f64));
        let nf = n as f64;
        let euler = 0.577_215_664_901_532_9;
        let approx = nf.ln() + euler + 1.0 / (2.0 * nf) - 1.0 / (12.0 * nf * nf);
        assert!((h - approx).abs() < 1e-14);
    }

    #[test]
    fn dd_product_keeps_low_bits() {
        let a = Dd::new(1.0 + f64::EPSILON);
        let p = a * a;
        // (1 + e)^2 = 1 + 2e + e^2; the e^2 term survives in lo.
        assert_eq!(p.hi, 1.0 + 2.0 * f64::EPSILON);
        assert_eq!(p.lo, f64::EPSILON * f64::EPSILON);
    }

    #[test]
    fn phase_accumulator_tracks_long_sums() {
        let mut p = PhaseAccumulator::new(0.0);
        let theta = 0.1;
        let n = 1_000_000;
        for _ in 0..n {
            p.add(theta);
        }
        // 1e5 reduced mod 2pi with a high precision reference.
        let expect = 100_000.0_f64 - 15915.0 * std::f64::consts::TAU;
        assert!(
            (p.value() - expect).abs() < 1e-9,
            "{} vs {}",
            p.value(),
            expect
        );
    }

    #[test]
    fn slope_of_power_law() {
        let x = [10.0, 100.0, 1000.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(-1.5)).collect();
        assert!((loglog_slope(&x, &y) + 1.5).abs() < 1e-12);
    }
}
