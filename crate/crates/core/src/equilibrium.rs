//! Band sets and equilibrium densities of periodic envelopes and of blends.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::params::{ClassTag, ParameterModel, PeriodicEnvelope};
use crate::transfer::{
    blend_equivalent_envelope, blend_limit_jet, envelope_jet, envelope_n_step, Jet, BAND_EDGE_EPS,
};

/// Open intervals of the band set with density samples.
#[derive(Clone, Debug, Serialize)]
pub struct BandStructure {
    pub intervals: Vec<[f64; 2]>,
    pub samples: Vec<[f64; 2]>,
}

impl BandStructure {
    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|[l, r]| *l < x && x < *r)
    }
}

/// Density from the explicit sum over residues and from the trace derivative;
/// the two agree inside the band set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DensityPair {
    pub sum_form: f64,
    pub trace_form: f64,
}

/// Whether the band set belongs to the envelope itself or to a blend built on it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Geometry {
    Periodic,
    Blend,
}

fn classify(tr: f64, neg: f64, x: f64) -> Result<()> {
    if neg >= BAND_EDGE_EPS {
        Ok(())
    } else if tr.abs() > 2.0 + 1e-12 {
        Err(LabError::NotInBand { x })
    } else {
        Err(LabError::BandEdge { x, neg_discr: neg })
    }
}

/// Equilibrium density of a periodic envelope at `x`.
pub fn omega_prime_periodic(env: &PeriodicEnvelope, x: f64) -> Result<DensityPair> {
    if !x.is_finite() {
        return Err(LabError::config("evaluation point must be finite"));
    }
    let n = env.period();
    let pi = std::f64::consts::PI;
    let j0 = envelope_jet(env, 0, x);
    let neg0 = -j0.value.discr();
    classify(j0.value.trace(), neg0, x)?;
    let mut sum = 0.0;
    for i in 0..n {
        let xi = if i == 0 {
            j0.value
        } else {
            envelope_n_step(env, i as i64, x)
        };
        let neg = (-xi.discr()).max(BAND_EDGE_EPS);
        sum += xi.get(2, 1).abs() / (pi * neg.sqrt()) / env.alpha(i as i64 - 1);
    }
    Ok(DensityPair {
        sum_form: sum / n as f64,
        trace_form: j0.d1.trace().abs() / (pi * n as f64 * neg0.sqrt()),
    })
}

/// Equilibrium density of the blend built on `env` at `x`.
pub fn omega_prime_blend(env: &PeriodicEnvelope, x: f64) -> Result<DensityPair> {
    if !x.is_finite() {
        return Err(LabError::config("evaluation point must be finite"));
    }
    let n = env.period();
    let pi = std::f64::consts::PI;
    let j1 = blend_limit_jet(env, 1, x)?;
    let neg = -j1.value.discr();
    classify(j1.value.trace(), neg, x)?;
    let mut sum = 0.0;
    for i in 1..=n {
        let xi = if i == 1 {
            j1.value
        } else {
            blend_limit_jet(env, i, x)?.value
        };
        let w = if i == n { 2.0 } else { 1.0 };
        sum += w * xi.get(2, 1).abs() / env.alpha(i as i64 - 1);
    }
    let denom = n as f64 * pi * neg.sqrt();
    Ok(DensityPair {
        sum_form: sum / denom,
        trace_form: j1.d1.trace().abs() / denom,
    })
}

/// Density appearing in the limit theorems for `model` at `x`: the envelope
/// density at `x`, at `0` for modulated models, or the blend density.
pub fn omega_prime(model: &ParameterModel, x: f64) -> Result<DensityPair> {
    match model.class() {
        ClassTag::PeriodicallyModulated => omega_prime_periodic(model.envelope(), 0.0),
        ClassTag::PeriodicBlend => omega_prime_blend(model.envelope(), x),
        _ => omega_prime_periodic(model.envelope(), x),
    }
}

fn density(env: &PeriodicEnvelope, geometry: Geometry, x: f64) -> Result<f64> {
    match geometry {
        Geometry::Periodic => omega_prime_periodic(env, x).map(|d| d.trace_form),
        Geometry::Blend => omega_prime_blend(env, x).map(|d| d.trace_form),
    }
}

fn trace_jet(env: &PeriodicEnvelope, geometry: Geometry, x: f64) -> Jet {
    match geometry {
        Geometry::Periodic => envelope_jet(env, 0, x),
        Geometry::Blend => blend_limit_jet(env, 1, x).expect("index 1 is always valid"),
    }
}

/// Eigenvalues of the `N x N` Jacobi matrix with Floquet multiplier `s = +-1`;
/// these are the solutions of `tr = 2s` for the envelope monodromy.
fn floquet_eigenvalues(env: &PeriodicEnvelope, s: f64) -> Vec<f64> {
    let n = env.period();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        m[(i, i)] += env.beta(i as i64);
        let j = (i + 1) % n;
        let c = if i == n - 1 {
            s * env.alpha(i as i64)
        } else {
            env.alpha(i as i64)
        };
        m[(i, j)] += c;
        m[(j, i)] += c;
    }
    SymmetricEigen::new(m).eigenvalues.iter().copied().collect()
}

/// Newton polish of a band edge against `|tr| = 2`, keeping the start
/// when the derivative vanishes (touching bands).
fn polish_edge(env: &PeriodicEnvelope, geometry: Geometry, x0: f64) -> f64 {
    let mut x = x0;
    let target = 2.0 * trace_jet(env, geometry, x0).value.trace().signum();
    for _ in 0..8 {
        let j = trace_jet(env, geometry, x);
        let f = j.value.trace() - target;
        let df = j.d1.trace();
        if df.abs() < 1e-8 || f == 0.0 {
            break;
        }
        let next = x - f / df;
        if (next - x0).abs() > 1e-6 * (1.0 + x0.abs()) {
            break;
        }
        let done = (next - x).abs() <= 1e-15 * (1.0 + x.abs());
        x = next;
        if done {
            break;
        }
    }
    x
}

/// Interval endpoints of the band set, in increasing order.
pub fn band_edges(env: &PeriodicEnvelope, geometry: Geometry) -> Vec<[f64; 2]> {
    let floquet_env = match geometry {
        Geometry::Periodic => env.clone(),
        Geometry::Blend => blend_equivalent_envelope(env),
    };
    let mut e = floquet_eigenvalues(&floquet_env, 1.0);
    e.extend(floquet_eigenvalues(&floquet_env, -1.0));
    e.sort_by(|a, b| a.total_cmp(b));
    let e: Vec<f64> = e
        .into_iter()
        .map(|x| polish_edge(env, geometry, x))
        .collect();
    e.chunks(2).map(|c| [c[0], c[1]]).collect()
}

/// Band set with `samples_per_band` density samples at Chebyshev points of each
/// interval.
pub fn band_set(
    env: &PeriodicEnvelope,
    geometry: Geometry,
    samples_per_band: usize,
) -> Result<BandStructure> {
    let intervals = band_edges(env, geometry);
    let mut samples = Vec::with_capacity(intervals.len() * samples_per_band);
    for [l, r] in &intervals {
        let (c, h) = ((l + r) / 2.0, (r - l) / 2.0);
        for k in 0..samples_per_band {
            let t = std::f64::consts::PI * (samples_per_band - k) as f64
                / (samples_per_band + 1) as f64;
            let x = c + h * t.cos();
            samples.push([x, density(env, geometry, x)?]);
        }
    }
    Ok(BandStructure { intervals, samples })
}

/// Total mass of the density over the band set, integrated in the angle
/// variable `x = c + h cos t` that absorbs the edge singularities.
pub fn density_mass(env: &PeriodicEnvelope, geometry: Geometry, nodes: usize) -> Result<f64> {
    let mut total = 0.0;
    let pi = std::f64::consts::PI;
    for [l, r] in band_edges(env, geometry) {
        let (c, h) = ((l + r) / 2.0, (r - l) / 2.0);
        let mut s = crate::numeric::NeumaierSum::new();
        for k in 0..nodes {
            let t = pi * (k as f64 + 0.5) / nodes as f64;
            let x = c + h * t.cos();
            s += density(env, geometry, x)? * h * t.sin();
        }
        total += s.value() * pi / nodes as f64;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arcsine_density_for_constant_envelope() {
        let env = PeriodicEnvelope::constant(1.0, 0.0).unwrap();
        for &x in &[-1.9, -0.5, 0.0, 1.2] {
            let d = omega_prime_periodic(&env, x).unwrap();
            let expect = 1.0 / (std::f64::consts::PI * (4.0 - x * x).sqrt());
            assert!((d.sum_form - expect).abs() < 1e-14);
            assert!((d.trace_form - expect).abs() < 1e-14);
        }
        let bands = band_edges(&env, Geometry::Periodic);
        assert_eq!(bands.len(), 1);
        assert!((bands[0][0] + 2.0).abs() < 1e-12 && (bands[0][1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn outside_points_are_reported() {
        let env = PeriodicEnvelope::constant(1.0, 0.0).unwrap();
        assert!(matches!(
            omega_prime_periodic(&env, 2.5),
            Err(LabError::NotInBand { .. })
        ));
        assert!(matches!(
            omega_prime_periodic(&env, 2.0),
            Err(LabError::BandEdge { .. })
        ));
    }

    #[test]
    fn shifted_constant_envelope_matches_closed_form() {
        // alpha = 1, beta = q: arcsine law on [q - 2, q + 2]
        let q = 0.7;
        let env = PeriodicEnvelope::new(vec![1.0; 3], vec![q; 3]).unwrap();
        let x = 0.1;
        let d = omega_prime_periodic(&env, x).unwrap();
        let expect = 1.0 / (std::f64::consts::PI * (4.0 - (x - q) * (x - q)).sqrt());
        assert!((d.sum_form - expect).abs() < 1e-13);
        assert!((d.trace_form - expect).abs() < 1e-13);
        // period-3 view of a constant envelope: gaps close, bands split at tangencies
        let bands = band_edges(&env, Geometry::Periodic);
        assert_eq!(bands.len(), 3);
        assert!((bands[0][0] - (q - 2.0)).abs() < 1e-12);
        assert!((bands[2][1] - (q + 2.0)).abs() < 1e-12);
        assert!((bands[0][1] - bands[1][0]).abs() < 1e-7);
    }

    #[test]
    fn two_periodic_bands_have_a_gap() {
        let env = PeriodicEnvelope::new(vec![1.0, 1.0], vec![1.0, -1.0]).unwrap();
        let bands = band_edges(&env, Geometry::Periodic);
        assert_eq!(bands.len(), 2);
        // known edges: +-sqrt(1 + 4) and +-1
        let s5 = 5f64.sqrt();
        assert!((bands[0][0] + s5).abs() < 1e-12 && (bands[0][1] + 1.0).abs() < 1e-12);
        assert!((bands[1][0] - 1.0).abs() < 1e-12 && (bands[1][1] - s5).abs() < 1e-12);
        for [l, r] in bands {
            let m = (l + r) / 2.0;
            assert!(envelope_n_step(&env, 0, m).trace().abs() < 2.0);
        }
    }

    #[test]
    fn density_integrates_to_one() {
        let env = PeriodicEnvelope::new(vec![1.0, 0.5, 2.0], vec![0.3, -1.0, 0.0]).unwrap();
        let mass = density_mass(&env, Geometry::Periodic, 400).unwrap();
        assert!((mass - 1.0).abs() < 1e-6, "{mass}");
        let mass = density_mass(&env, Geometry::Blend, 400).unwrap();
        assert!((mass - 1.0).abs() < 1e-6, "{mass}");
    }

    #[test]
    fn blend_with_one_period_is_rescaled_arcsine() {
        let env = PeriodicEnvelope::constant(2.0, 1.0).unwrap();
        let bands = band_edges(&env, Geometry::Blend);
        assert_eq!(bands.len(), 1);
        assert!((bands[0][0] + 1.5).abs() < 1e-12 && (bands[0][1] - 2.5).abs() < 1e-12);
        let x = 0.2;
        let d = omega_prime_blend(&env, x).unwrap();
        let expect = 1.0 / (std::f64::consts::PI * (4.0 - (x - 0.5) * (x - 0.5)).sqrt());
        assert!((d.sum_form - expect).abs() < 1e-13);
        assert!((d.trace_form - expect).abs() < 1e-13);
    }

    #[test]
    fn band_samples_are_inside() {
        let env = PeriodicEnvelope::new(vec![1.0, 0.8], vec![0.4, -0.2]).unwrap();
        let b = band_set(&env, Geometry::Periodic, 16).unwrap();
        assert_eq!(b.samples.len(), 32);
        for [x, w] in &b.samples {
            assert!(b.contains(*x));
            assert!(*w > 0.0);
        }
    }
}
