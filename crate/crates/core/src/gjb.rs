//! Asymptotic machinery of the generalized Jarque-Bera statistic.
//!
//! For a law with eight finite moments, `√n (aₙ - a, bₙ - b)` is asymptotically
//! `N(0, Σ)` where `Σ` is the covariance of `(C(X), B(X))` and `C`, `B` are the
//! influence polynomials of kurtosis and skewness. Both are polynomials of
//! degree at most four in `x`, so every entry of `Σ` is an exact linear
//! combination of the raw moments `m₀..m₈`. That is the `analytic` route; the
//! `monte-carlo` route estimates the same matrix by simulation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{fill_sn, SkewNormalShape};
use crate::moments::{centered_moment, MomentVector, MAX_ORDER};
use crate::rng::{self, Purpose};
use crate::{Error, Result};

/// Which set of conventions the statistic is calibrated with.
///
/// `Exact` uses the influence functions of kurtosis and skewness as they are
/// and standardizes empirical moments with the `1/n` variance.
///
/// `Legacy` reproduces the published R implementation: empirical moments
/// are standardized by the `1/(n-1)` sample variance and the recentring term
/// of the skewness influence polynomial is scaled by `v` instead of `1/v`
/// (`v = m₂ - m₁²`). The two agree exactly for symmetric laws. Use it to
/// reproduce the published simulation tables.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Calibration {
    #[default]
    Exact,
    Legacy,
}

impl std::str::FromStr for Calibration {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Self::Exact),
            "legacy" => Ok(Self::Legacy),
            other => Err(Error::InvalidParameter(format!(
                "unknown calibration '{other}'"
            ))),
        }
    }
}

impl std::fmt::Display for Calibration {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Exact => "exact",
            Self::Legacy => "legacy",
        })
    }
}

/// Polynomial `Σ cⱼ xʲ` of degree at most four.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfluencePolynomial {
    pub coeffs: [f64; 5],
}

impl InfluencePolynomial {
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// `E P(X) Q(X)` given the raw moments of `X`.
    fn expect_product(&self, other: &Self, raw: &MomentVector) -> f64 {
        let mut total = 0.0;
        for (i, &p) in self.coeffs.iter().enumerate() {
            for (j, &q) in other.coeffs.iter().enumerate() {
                debug_assert!(i + j <= MAX_ORDER);
                total += p * q * raw[i + j];
            }
        }
        total
    }

    fn expect(&self, raw: &MomentVector) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(j, &c)| c * raw[j])
            .sum()
    }
}

/// Influence polynomials of kurtosis (`c`) and skewness (`b`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfluencePair {
    pub c: InfluencePolynomial,
    pub b: InfluencePolynomial,
}

/// The exact influence polynomials.
pub fn influence_polynomials(raw: &MomentVector) -> Result<InfluencePair> {
    influence_polynomials_with(raw, Calibration::Exact)
}

pub fn influence_polynomials_with(
    raw: &MomentVector,
    calibration: Calibration,
) -> Result<InfluencePair> {
    let m1 = raw[1];
    let m2 = raw[2];
    let m3 = raw[3];
    let v = raw.variance();
    if !(v > 0.0) {
        return Err(Error::DegenerateLaw(v));
    }
    let mu3 = centered_moment(3, raw)?;
    let mu4 = centered_moment(4, raw)?;
    let v2 = v * v;

    // v⁴ C = v² h₄ - 4m₁v² h₃ + (6m₁²v² - 2vμ₄) h₂
    //        + (v²(-4m₃ + 12m₁m₂ - 12m₁³) + 4m₁vμ₄) h₁
    let c = {
        let v4 = v2 * v2;
        InfluencePolynomial {
            coeffs: [
                0.0,
                (v2 * (-4.0 * m3 + 12.0 * m1 * m2 - 12.0 * m1.powi(3)) + 4.0 * m1 * v * mu4) / v4,
                (6.0 * m1 * m1 * v2 - 2.0 * v * mu4) / v4,
                -4.0 * m1 / v2,
                1.0 / v2,
            ],
        }
    };

    let sd = v.sqrt();
    let v32 = v * sd;
    // Coefficient multiplying (h₂ - 2m₁h₁) in the skewness influence.
    let recentre = match calibration {
        Calibration::Exact => 1.5 * mu3 / (v * v32),
        Calibration::Legacy => 1.5 * v * mu3 / v32,
    };
    // v³ B = v^{3/2} h₃ + (-3m₁v^{3/2} - (3/2)μ₃v^{1/2}) h₂
    //        + (v^{3/2}(-3m₂ + 6m₁²) + 3m₁μ₃v^{1/2}) h₁
    let b = InfluencePolynomial {
        coeffs: [
            0.0,
            (6.0 * m1 * m1 - 3.0 * m2) / v32 + 2.0 * m1 * recentre,
            -3.0 * m1 / v32 - recentre,
            1.0 / v32,
            0.0,
        ],
    };
    Ok(InfluencePair { c, b })
}

/// Symmetric 2×2 covariance of `(C(X), B(X))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovarianceMatrix2 {
    pub s11: f64,
    pub s22: f64,
    pub s12: f64,
    pub det: f64,
}

impl CovarianceMatrix2 {
    pub fn new(s11: f64, s22: f64, s12: f64) -> Self {
        Self {
            s11,
            s22,
            s12,
            det: s11 * s22 - s12 * s12,
        }
    }

    pub fn diagonal(s11: f64, s22: f64) -> Self {
        Self::new(s11, s22, 0.0)
    }

    /// `s12² ≤ s11·s22` with a relative slack for rounding.
    pub fn satisfies_cauchy_schwarz(&self) -> bool {
        self.s11 >= 0.0
            && self.s22 >= 0.0
            && self.s12 * self.s12 <= self.s11 * self.s22 * (1.0 + 1e-12)
    }

    /// Fails unless `det > 1e-12·s11·s22`.
    pub fn ensure_invertible(&self) -> Result<()> {
        let scale = self.s11 * self.s22;
        if !(self.det > 1e-12 * scale) || !(scale > 0.0) {
            return Err(Error::SingularCovariance { det: self.det });
        }
        Ok(())
    }
}

pub fn sigma_analytic(raw: &MomentVector) -> Result<CovarianceMatrix2> {
    sigma_analytic_with(raw, Calibration::Exact)
}

pub fn sigma_analytic_with(
    raw: &MomentVector,
    calibration: Calibration,
) -> Result<CovarianceMatrix2> {
    let InfluencePair { c, b } = influence_polynomials_with(raw, calibration)?;
    let (ec, eb) = (c.expect(raw), b.expect(raw));
    let sigma = CovarianceMatrix2::new(
        c.expect_product(&c, raw) - ec * ec,
        b.expect_product(&b, raw) - eb * eb,
        c.expect_product(&b, raw) - ec * eb,
    );
    sigma.ensure_invertible()?;
    Ok(sigma)
}

/// Monte-Carlo estimate of `Σ` together with the standard errors of its
/// three entries across replicates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSigma {
    pub sigma: CovarianceMatrix2,
    /// Standard errors of `(s11, s22, s12)`.
    pub std_error: [f64; 3],
    pub reps: usize,
    pub per_rep_n: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloPlan {
    pub reps: usize,
    pub per_rep_n: usize,
    pub seed: u64,
}

impl Default for MonteCarloPlan {
    fn default() -> Self {
        Self {
            reps: 10_000,
            per_rep_n: 1_000,
            seed: 0,
        }
    }
}

pub fn sigma_monte_carlo(
    shape: SkewNormalShape,
    reps: usize,
    per_rep_n: usize,
    seed: u64,
) -> Result<CovarianceMatrix2> {
    let plan = MonteCarloPlan {
        reps,
        per_rep_n,
        seed,
    };
    Ok(sigma_monte_carlo_with(shape, &plan, Calibration::Exact)?.sigma)
}

/// Averages, over `reps` independent `SN(α)` samples of size `per_rep_n`,
/// the sample variances (`1/(n-1)`) of `C(Z)`, `B(Z)` and their sample
/// covariance. Replicate `i` draws from substream `(seed, i)`; the
/// reduction runs in replicate order, so the result does not depend on the
/// thread count.
pub fn sigma_monte_carlo_with(
    shape: SkewNormalShape,
    plan: &MonteCarloPlan,
    calibration: Calibration,
) -> Result<MonteCarloSigma> {
    if plan.reps == 0 {
        return Err(Error::InvalidParameter("reps must be >= 1".into()));
    }
    if plan.per_rep_n < 2 {
        return Err(Error::InvalidParameter("per_rep_n must be >= 2".into()));
    }
    let raw = crate::moments::sn_raw_moments(shape);
    let InfluencePair { c, b } = influence_polynomials_with(&raw, calibration)?;
    let n = plan.per_rep_n;

    let per_rep: Vec<[f64; 3]> = (0..plan.reps)
        .into_par_iter()
        .map_init(
            || (vec![0.0; n], vec![0.0; n], vec![0.0; n]),
            |(z, cz, bz), i| {
                let mut rng = rng::substream(plan.seed, Purpose::Covariance, i as u64);
                fill_sn(shape, &mut rng, z);
                for ((x, cx), bx) in z.iter().zip(cz.iter_mut()).zip(bz.iter_mut()) {
                    *cx = c.eval(*x);
                    *bx = b.eval(*x);
                }
                sample_covariances(cz, bz)
            },
        )
        .collect();

    let reps = plan.reps as f64;
    let mut mean = [0.0; 3];
    for r in &per_rep {
        for k in 0..3 {
            mean[k] += r[k] / reps;
        }
    }
    let mut std_error = [f64::NAN; 3];
    if plan.reps > 1 {
        let mut ss = [0.0; 3];
        for r in &per_rep {
            for k in 0..3 {
                ss[k] += (r[k] - mean[k]).powi(2);
            }
        }
        for k in 0..3 {
            std_error[k] = (ss[k] / (reps - 1.0) / reps).sqrt();
        }
    }
    Ok(MonteCarloSigma {
        sigma: CovarianceMatrix2::new(mean[0], mean[1], mean[2]),
        std_error,
        reps: plan.reps,
        per_rep_n: plan.per_rep_n,
    })
}

/// `(var x, var y, cov(x, y))` with the `1/(n-1)` convention.
fn sample_covariances(x: &[f64], y: &[f64]) -> [f64; 3] {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxx += da * da;
        syy += db * db;
        sxy += da * db;
    }
    [sxx / (n - 1.0), syy / (n - 1.0), sxy / (n - 1.0)]
}

/// `P(χ²_dof > x)`.
pub fn chi2_survival(x: f64, dof: u32) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::Domain(format!(
            "chi-square argument must be >= 0, got {x}"
        )));
    }
    if dof == 0 {
        return Err(Error::Domain("chi-square needs dof >= 1".into()));
    }
    if x == f64::INFINITY {
        return Ok(0.0);
    }
    if dof == 2 {
        return Ok((-0.5 * x).exp());
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    Ok(regularized_gamma_upper(0.5 * dof as f64, 0.5 * x))
}

/// `Q(s, x) = Γ(s, x)/Γ(s)` for `s > 0`, `x > 0`: power series for
/// `x < s + 1`, Lentz continued fraction otherwise.
fn regularized_gamma_upper(s: f64, x: f64) -> f64 {
    const EPS: f64 = 1e-16;
    const TINY: f64 = 1e-300;
    let log_prefactor = s * x.ln() - x - libm::lgamma(s);
    if x < s + 1.0 {
        let mut term = 1.0 / s;
        let mut sum = term;
        let mut a = s;
        for _ in 0..10_000 {
            a += 1.0;
            term *= x / a;
            sum += term;
            if term.abs() < sum.abs() * EPS {
                break;
            }
        }
        1.0 - sum * log_prefactor.exp()
    } else {
        let mut b = x + 1.0 - s;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..10_000 {
            let an = -(i as f64) * (i as f64 - s);
            b += 2.0;
            d = an * d + b;
            if d.abs() < TINY {
                d = TINY;
            }
            c = b + an / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < EPS {
                break;
            }
        }
        h * log_prefactor.exp()
    }
}
