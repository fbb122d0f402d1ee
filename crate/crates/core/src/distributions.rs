//! Skew-normal and half-normal primitives.
//!
//! `SN(α)` has density `2 φ(x) Φ(αx)`. Samples are generated through the
//! two-normal representation `δ|Z₁| + √(1-δ²) Z₂` with `δ = α/√(1+α²)`,
//! which holds for every real α, negative ones included.
//!
//! Standard normals come from `rand_distr::StandardNormal` (ziggurat) driven
//! by the ChaCha8 streams of [`crate::rng`]. Downstream checks are
//! distributional, so bit-compatibility with other generators is not a goal.

use std::f64::consts::FRAC_1_SQRT_2;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::rng::{self, Purpose};
use crate::{Error, Result};

/// `√(2/π)`, the mean of the standard half-normal law.
pub const HALF_NORMAL_MEAN: f64 = 0.797_884_560_802_865_4;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Shape parameter of the standard skew-normal family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct SkewNormalShape {
    alpha: f64,
    delta: f64,
}

impl SkewNormalShape {
    pub fn new(alpha: f64) -> Result<Self> {
        let delta = delta_of_alpha(alpha)?;
        Ok(Self { alpha, delta })
    }

    pub const NORMAL: Self = Self {
        alpha: 0.0,
        delta: 0.0,
    };

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `α / √(1+α²)`, always in `(-1, 1)`.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `√(1-δ²) = 1/√(1+α²)`, computed without cancellation.
    pub fn delta_complement(&self) -> f64 {
        1.0 / self.alpha.hypot(1.0)
    }

    /// Inverse of [`delta_of_alpha`] for `|δ| < 1`.
    pub fn from_delta(delta: f64) -> Result<Self> {
        if !delta.is_finite() || delta.abs() >= 1.0 {
            return Err(Error::Domain(format!(
                "delta must lie in (-1, 1), got {delta}"
            )));
        }
        Self::new(delta / ((1.0 - delta) * (1.0 + delta)).sqrt())
    }
}

impl TryFrom<f64> for SkewNormalShape {
    type Error = Error;
    fn try_from(alpha: f64) -> Result<Self> {
        Self::new(alpha)
    }
}

impl From<SkewNormalShape> for f64 {
    fn from(shape: SkewNormalShape) -> f64 {
        shape.alpha
    }
}

pub fn delta_of_alpha(alpha: f64) -> Result<f64> {
    if !alpha.is_finite() {
        return Err(Error::Domain(format!("alpha must be finite, got {alpha}")));
    }
    Ok(alpha / alpha.hypot(1.0))
}

pub fn normal_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Density `2 φ(x) Φ(αx)` of `SN(α)`.
pub fn sn_pdf(shape: SkewNormalShape, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("x must be finite, got {x}")));
    }
    Ok(2.0 * normal_pdf(x) * normal_cdf(shape.alpha * x))
}

/// One `SN(α)` draw from `rng`.
#[inline]
pub fn draw_sn<R: Rng + ?Sized>(shape: SkewNormalShape, rng: &mut R) -> f64 {
    let z1: f64 = rng.sample(StandardNormal);
    let z2: f64 = rng.sample(StandardNormal);
    shape.delta * z1.abs() + shape.delta_complement() * z2
}

/// Fills `out` with i.i.d. `SN(α)` draws from `rng`.
pub fn fill_sn<R: Rng + ?Sized>(shape: SkewNormalShape, rng: &mut R, out: &mut [f64]) {
    for x in out.iter_mut() {
        *x = draw_sn(shape, rng);
    }
}

/// `n` i.i.d. `SN(α)` draws, bit-reproducible from `(shape, n, seed)`.
pub fn sample_sn(shape: SkewNormalShape, n: usize, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let mut rng = rng::substream(seed, Purpose::Sample, 0);
    let mut out = vec![0.0; n];
    fill_sn(shape, &mut rng, &mut out);
    Ok(out)
}

/// Raw moments `E Xʲ`, `j = 0..=8`, of one of the building-block laws.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaseMomentVector(pub [f64; 9]);

impl BaseMomentVector {
    pub fn get(&self, j: usize) -> f64 {
        self.0[j]
    }
}

impl std::ops::Index<usize> for BaseMomentVector {
    type Output = f64;
    fn index(&self, j: usize) -> &f64 {
        &self.0[j]
    }
}

/// Moments of `|Z|`: `(1, c, 1, 2c, 3, 8c, 15, 48c, 105)` with `c = √(2/π)`.
pub fn half_normal_moments() -> BaseMomentVector {
    let c = HALF_NORMAL_MEAN;
    BaseMomentVector([1.0, c, 1.0, 2.0 * c, 3.0, 8.0 * c, 15.0, 48.0 * c, 105.0])
}

pub fn standard_normal_moments() -> BaseMomentVector {
    BaseMomentVector([1.0, 0.0, 1.0, 0.0, 3.0, 0.0, 15.0, 0.0, 105.0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn delta_examples() {
        assert_eq!(delta_of_alpha(0.0).unwrap(), 0.0);
        assert!((delta_of_alpha(1.0).unwrap() - 0.7071067811865475).abs() < 1e-16);
        assert!((delta_of_alpha(-1.0).unwrap() + 0.7071067811865475).abs() < 1e-16);
        assert!(delta_of_alpha(f64::NAN).is_err());
        assert!(delta_of_alpha(f64::INFINITY).is_err());
    }

    #[test]
    fn delta_stays_inside_unit_interval() {
        for &a in &[1e-300, 1e-8, 3.0, 1e8, 1e300, -1e300] {
            let s = SkewNormalShape::new(a).unwrap();
            assert!(s.delta().abs() <= 1.0);
            assert_eq!(s.delta().signum(), a.signum());
            assert!(s.delta_complement() >= 0.0);
        }
    }

    #[test]
    fn from_delta_inverts() {
        for &a in &[-7.5, -1.0, 0.0, 0.3, 2.0, 40.0] {
            let s = SkewNormalShape::new(a).unwrap();
            let back = SkewNormalShape::from_delta(s.delta()).unwrap();
            assert!((back.alpha() - a).abs() < 1e-9 * a.abs().max(1.0));
        }
        assert!(SkewNormalShape::from_delta(1.0).is_err());
    }

    #[test]
    fn constant_matches_definition() {
        assert!((HALF_NORMAL_MEAN - (2.0 / PI).sqrt()).abs() < 1e-16);
    }

    #[test]
    fn pdf_examples() {
        let normal = SkewNormalShape::NORMAL;
        assert!((sn_pdf(normal, 1.0).unwrap() - 0.24197072451914337).abs() < 1e-16);
        for &a in &[-3.0, 0.0, 0.7, 12.0] {
            let s = SkewNormalShape::new(a).unwrap();
            assert!((sn_pdf(s, 0.0).unwrap() - 0.3989422804014327).abs() < 1e-16);
        }
        assert!(sn_pdf(normal, f64::NAN).is_err());
    }

    #[test]
    fn pdf_alpha_one_against_erf_series() {
        // Maclaurin series of erf, independent of the erfc routine.
        let x: f64 = FRAC_1_SQRT_2;
        let mut term = x;
        let mut sum = x;
        for k in 1..60 {
            term *= -x * x / k as f64;
            sum += term / (2 * k + 1) as f64;
        }
        let big_phi = 0.5 * (1.0 + 2.0 / PI.sqrt() * sum);
        let expected = 2.0 * 0.24197072451914337 * big_phi;
        let s = SkewNormalShape::new(1.0).unwrap();
        assert!((sn_pdf(s, 1.0).unwrap() - expected).abs() < 1e-14);
        assert!((expected - 0.4071616).abs() < 1e-6);
    }

    #[test]
    fn sampling_rejects_empty() {
        assert!(matches!(
            sample_sn(SkewNormalShape::NORMAL, 0, 1),
            Err(Error::EmptySample)
        ));
    }

    #[test]
    fn sampling_is_deterministic() {
        let s = SkewNormalShape::new(2.5).unwrap();
        let a = sample_sn(s, 1000, 99).unwrap();
        let b = sample_sn(s, 1000, 99).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
        assert_ne!(a, sample_sn(s, 1000, 100).unwrap());
    }

    #[test]
    fn base_vectors() {
        let h = half_normal_moments();
        assert_eq!(h[1], 0.7978845608028654);
        assert_eq!(h[8], 105.0);
        assert_eq!(h[0], 1.0);
        let z = standard_normal_moments();
        assert_eq!(z[6], 15.0);
        assert!((1..9).step_by(2).all(|j| z[j] == 0.0));
    }
}
