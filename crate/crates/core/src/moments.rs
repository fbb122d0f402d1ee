//! Exact raw moments of `SN(α)` up to order eight.
//!
//! With `X = δ|Z₁| + √(1-δ²) Z₂` and independent factors, the binomial
//! expansion gives
//!
//! ```text
//! E Xʲ = Σₕ C(j,h) δʰ (1-δ²)^((j-h)/2) E|Z₁|ʰ E Z₂^(j-h)
//! ```
//!
//! from the two fixed vectors in [`crate::distributions`]. Everything else
//! here (centered moments, skewness, kurtosis) is derived from that vector.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::distributions::{half_normal_moments, standard_normal_moments, SkewNormalShape};
use crate::{Error, Result};

/// Highest raw moment order carried by a [`MomentVector`].
pub const MAX_ORDER: usize = 8;

/// Raw moments `m₀..m₈` of a law, `m₀ = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentVector {
    entries: [f64; MAX_ORDER + 1],
    /// Shape the vector was computed for, if it came from the skew-normal family.
    alpha: Option<f64>,
}

impl MomentVector {
    /// Wraps arbitrary raw moments `m₁..m₈` (e.g. of a non skew-normal law).
    pub fn from_raw(m: [f64; MAX_ORDER]) -> Result<Self> {
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("raw moments must be finite".into()));
        }
        let mut entries = [1.0; MAX_ORDER + 1];
        entries[1..].copy_from_slice(&m);
        Ok(Self {
            entries,
            alpha: None,
        })
    }

    pub fn entries(&self) -> &[f64; MAX_ORDER + 1] {
        &self.entries
    }

    pub fn alpha(&self) -> Option<f64> {
        self.alpha
    }

    pub fn mean(&self) -> f64 {
        self.entries[1]
    }

    /// `m₂ - m₁²`.
    pub fn variance(&self) -> f64 {
        self.entries[2] - self.entries[1] * self.entries[1]
    }
}

impl std::ops::Index<usize> for MomentVector {
    type Output = f64;
    fn index(&self, j: usize) -> &f64 {
        &self.entries[j]
    }
}

/// Kurtosis (non-excess) and skewness of a law.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeStatistics {
    pub skewness_b: f64,
    pub kurtosis_a: f64,
}

/// `C(n, p)` for `p ≤ n ≤ 8`, exact.
pub fn binomial_coefficient(p: usize, n: usize) -> Result<u64> {
    if p > n {
        return Err(Error::Domain(format!("binomial C({n}, {p}) needs p <= n")));
    }
    if n > MAX_ORDER {
        return Err(Error::Domain(format!(
            "binomial order {n} exceeds {MAX_ORDER}"
        )));
    }
    let k = p.min(n - p) as u64;
    let n = n as u64;
    // Each partial product C(n-k+i, i) is an integer, so the division is exact.
    Ok((1..=k).fold(1u64, |acc, i| acc * (n - k + i) / i))
}

pub fn sn_raw_moments(shape: SkewNormalShape) -> MomentVector {
    let half = half_normal_moments();
    let normal = standard_normal_moments();
    let a = shape.delta();
    let b = shape.delta_complement();

    let mut entries = [0.0; MAX_ORDER + 1];
    for (j, entry) in entries.iter_mut().enumerate() {
        *entry = (0..=j)
            .map(|h| {
                let binom = binomial_coefficient(h, j).expect("h <= j <= 8") as f64;
                binom * a.powi(h as i32) * b.powi((j - h) as i32) * half[h] * normal[j - h]
            })
            .sum();
    }
    MomentVector {
        entries,
        alpha: Some(shape.alpha()),
    }
}

/// `E(X - m₁)^order` by binomial recentring of the raw moments.
pub fn centered_moment(order: usize, raw: &MomentVector) -> Result<f64> {
    if order == 0 || order > MAX_ORDER {
        return Err(Error::Domain(format!(
            "centered moment order must be in 1..=8, got {order}"
        )));
    }
    if order == 1 {
        return Ok(0.0);
    }
    let shift = -raw.mean();
    let mut total = 0.0;
    for j in 0..=order {
        let binom = binomial_coefficient(j, order)? as f64;
        total += binom * raw[j] * shift.powi((order - j) as i32);
    }
    Ok(total)
}

/// Skewness `μ₃/μ₂^{3/2}` and kurtosis `μ₄/μ₂²` from raw moments.
pub fn shape_statistics(raw: &MomentVector) -> Result<ShapeStatistics> {
    let mu2 = centered_moment(2, raw)?;
    if !(mu2 > 0.0) {
        return Err(Error::DegenerateLaw(mu2));
    }
    let mu3 = centered_moment(3, raw)?;
    let mu4 = centered_moment(4, raw)?;
    Ok(ShapeStatistics {
        skewness_b: mu3 / mu2.powf(1.5),
        kurtosis_a: mu4 / (mu2 * mu2),
    })
}

/// Closed-form skewness and kurtosis of `SN(α)` in terms of δ:
///
/// ```text
/// b = √2 (4-π) δ³ / (π - 2δ²)^{3/2}
/// a = 3 + 8 (π-3) δ⁴ / (π - 2δ²)²
/// ```
pub fn analytic_shape_statistics(shape: SkewNormalShape) -> ShapeStatistics {
    let d = shape.delta();
    let d2 = d * d;
    let denom = PI - 2.0 * d2;
    ShapeStatistics {
        skewness_b: SQRT_2 * (4.0 - PI) * d2 * d / denom.powf(1.5),
        kurtosis_a: 3.0 + 8.0 * (PI - 3.0) * d2 * d2 / (denom * denom),
    }
}

/// Supremum of `|b|` over the family, reached as `|α| → ∞`.
pub fn max_skewness() -> f64 {
    SQRT_2 * (4.0 - PI) / (PI - 2.0).powf(1.5)
}
