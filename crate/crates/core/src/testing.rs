//! The goodness-of-fit test and the simulation campaigns built on it.
//!
//! A [`Hypothesis`] fixes the skew-normal shape under test together with its
//! theoretical `(a, b)` and covariance `Σ`; it is built once and then applied
//! to any number of samples. Duplicating a sample `k` times leaves the
//! standardized empirical moments unchanged and multiplies `Jₙ` by `k`, so
//! duplication is applied arithmetically rather than by materializing the
//! concatenated sample.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{fill_sn, SkewNormalShape};
use crate::gjb::{
    chi2_survival, sigma_analytic_with, sigma_monte_carlo_with, Calibration, CovarianceMatrix2,
    MonteCarloPlan,
};
use crate::moments::{analytic_shape_statistics, max_skewness, shape_statistics, sn_raw_moments};
use crate::rng::{self, Purpose};
use crate::{Error, Result};

/// How the covariance `Σ` of the hypothesis is obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "route", rename_all = "kebab-case")]
pub enum SigmaRoute {
    #[default]
    Analytic,
    MonteCarlo(MonteCarloPlan),
}

impl SigmaRoute {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Analytic => "analytic",
            Self::MonteCarlo(_) => "monte-carlo",
        }
    }
}

/// Centered power sums of a sample, enough to rebuild every standardized
/// moment for any duplication factor.
#[derive(Clone, Copy, Debug, PartialEq)]
struct PowerSums {
    n: usize,
    s2: f64,
    s3: f64,
    s4: f64,
}

impl PowerSums {
    fn of(sample: &[f64]) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::EmptySample);
        }
        let n = sample.len();
        let mean = sample.iter().sum::<f64>() / n as f64;
        let (mut s2, mut s3, mut s4) = (0.0, 0.0, 0.0);
        for &x in sample {
            let d = x - mean;
            let d2 = d * d;
            s2 += d2;
            s3 += d2 * d;
            s4 += d2 * d2;
        }
        if !(s2 > 0.0) {
            return Err(Error::ZeroVariance);
        }
        Ok(Self { n, s2, s3, s4 })
    }

    /// `(aₙ, bₙ)` of the sample repeated `k` times.
    fn shape(&self, calibration: Calibration, k: usize) -> (f64, f64) {
        let n = self.n as f64;
        let m3 = self.s3 / n;
        let m4 = self.s4 / n;
        let var = match calibration {
            Calibration::Exact => self.s2 / n,
            Calibration::Legacy => {
                let kn = (k * self.n) as f64;
                k as f64 * self.s2 / (kn - 1.0)
            }
        };
        (m4 / (var * var), m3 / (var * var.sqrt()))
    }
}

/// Empirical kurtosis `aₙ` and skewness `bₙ` with the `1/n` convention.
pub fn empirical_shape(sample: &[f64]) -> Result<(f64, f64)> {
    empirical_shape_with(sample, Calibration::Exact)
}

pub fn empirical_shape_with(sample: &[f64], calibration: Calibration) -> Result<(f64, f64)> {
    if sample.len() < 2 {
        return Err(Error::InvalidParameter(
            "need at least 2 observations".into(),
        ));
    }
    Ok(PowerSums::of(sample)?.shape(calibration, 1))
}

/// Quadratic form `[s22 da² + s11 db² - 2 s12 da db] / det` per observation.
fn quadratic_form(da: f64, db: f64, sigma: &CovarianceMatrix2) -> f64 {
    let q = (sigma.s22 * da * da + sigma.s11 * db * db - 2.0 * sigma.s12 * da * db) / sigma.det;
    q.max(0.0)
}

/// `Jₙ = n [s22 (aₙ-a)² + s11 (bₙ-b)² - 2 s12 (aₙ-a)(bₙ-b)] / det Σ`.
pub fn gjb_statistic(
    a_n: f64,
    b_n: f64,
    a: f64,
    b: f64,
    sigma: &CovarianceMatrix2,
    n: usize,
) -> Result<f64> {
    sigma.ensure_invertible()?;
    Ok(n as f64 * quadratic_form(a_n - a, b_n - b, sigma))
}

/// Outcome of one application of the test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    /// Effective sample size, `k · |sample|`.
    pub n: usize,
    pub a_n: f64,
    pub b_n: f64,
    pub a: f64,
    pub b: f64,
    pub j_n: f64,
    pub p_value: f64,
    pub sigma: CovarianceMatrix2,
    pub duplication_factor: usize,
}

/// A skew-normal null hypothesis ready to be tested against samples.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub shape: SkewNormalShape,
    pub a: f64,
    pub b: f64,
    pub sigma: CovarianceMatrix2,
    pub calibration: Calibration,
    pub route: SigmaRoute,
}

impl Hypothesis {
    pub fn new(alpha: f64, route: SigmaRoute, calibration: Calibration) -> Result<Self> {
        let shape = SkewNormalShape::new(alpha)?;
        let raw = sn_raw_moments(shape);
        let stats = shape_statistics(&raw)?;
        let sigma = match route {
            SigmaRoute::Analytic => sigma_analytic_with(&raw, calibration)?,
            SigmaRoute::MonteCarlo(plan) => {
                let mc = sigma_monte_carlo_with(shape, &plan, calibration)?.sigma;
                mc.ensure_invertible()?;
                mc
            }
        };
        Ok(Self {
            shape,
            a: stats.kurtosis_a,
            b: stats.skewness_b,
            sigma,
            calibration,
            route,
        })
    }

    /// Tests `sample` repeated `k` times.
    pub fn test(&self, sample: &[f64], k: usize) -> Result<TestOutcome> {
        if k == 0 {
            return Err(Error::InvalidParameter(
                "duplication factor must be >= 1".into(),
            ));
        }
        if sample.len() < 2 {
            return Err(Error::InvalidParameter(
                "need at least 2 observations".into(),
            ));
        }
        let sums = PowerSums::of(sample)?;
        let (a_n, b_n) = sums.shape(self.calibration, k);
        let j_n = k as f64 * gjb_statistic(a_n, b_n, self.a, self.b, &self.sigma, sample.len())?;
        Ok(TestOutcome {
            n: k * sample.len(),
            a_n,
            b_n,
            a: self.a,
            b: self.b,
            j_n,
            p_value: chi2_survival(j_n, 2)?,
            sigma: self.sigma,
            duplication_factor: k,
        })
    }
}

/// Tests whether `sample` (duplicated `k` times) comes from `SN(α)`.
pub fn run_test(sample: &[f64], alpha: f64, route: SigmaRoute, k: usize) -> Result<TestOutcome> {
    Hypothesis::new(alpha, route, Calibration::Exact)?.test(sample, k)
}

pub fn run_test_with(
    sample: &[f64],
    alpha: f64,
    route: SigmaRoute,
    k: usize,
    calibration: Calibration,
) -> Result<TestOutcome> {
    Hypothesis::new(alpha, route, calibration)?.test(sample, k)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    /// Shape under the null hypothesis.
    pub alpha: f64,
    pub sample_size: usize,
    pub replications: usize,
    pub seed: u64,
    pub sigma_route: SigmaRoute,
    pub calibration: Calibration,
}

impl CampaignConfig {
    pub fn new(alpha: f64, sample_size: usize, replications: usize, seed: u64) -> Self {
        Self {
            alpha,
            sample_size,
            replications,
            seed,
            sigma_route: SigmaRoute::Analytic,
            calibration: Calibration::Exact,
        }
    }

    pub fn with_calibration(mut self, calibration: Calibration) -> Self {
        self.calibration = calibration;
        self
    }

    pub fn with_sigma_route(mut self, route: SigmaRoute) -> Self {
        self.sigma_route = route;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::InvalidParameter("replications must be >= 1".into()));
        }
        if self.sample_size < 2 {
            return Err(Error::InvalidParameter("sample size must be >= 2".into()));
        }
        Ok(())
    }
}

/// Law the campaign draws its data from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum DataLaw {
    StandardNormal,
    SkewNormal { alpha: f64 },
}

impl DataLaw {
    fn fill<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) -> Result<()> {
        match *self {
            Self::StandardNormal => {
                for x in out.iter_mut() {
                    *x = rng.sample(StandardNormal);
                }
            }
            Self::SkewNormal { alpha } => fill_sn(SkewNormalShape::new(alpha)?, rng, out),
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignResult {
    pub mean_p_value: f64,
    pub p_values: Vec<f64>,
}

impl CampaignResult {
    /// Fraction of replicates with `p < level`.
    pub fn rejection_rate(&self, level: f64) -> f64 {
        let rejected = self.p_values.iter().filter(|&&p| p < level).count();
        rejected as f64 / self.p_values.len() as f64
    }
}

/// Mean p-value of the test at the true shape over independent samples.
pub fn simulate_true_model(config: &CampaignConfig) -> Result<CampaignResult> {
    simulate_alternative(
        config,
        DataLaw::SkewNormal {
            alpha: config.alpha,
        },
    )
}

/// Same campaign with data drawn from `data_law` while the test keeps
/// hypothesizing `config.alpha`. Replicate `i` uses substream `(seed, i)`.
pub fn simulate_alternative(config: &CampaignConfig, data_law: DataLaw) -> Result<CampaignResult> {
    config.validate()?;
    let hypothesis = Hypothesis::new(config.alpha, config.sigma_route, config.calibration)?;
    let n = config.sample_size;
    let p_values = (0..config.replications)
        .into_par_iter()
        .map_init(
            || vec![0.0; n],
            |buf, i| {
                let mut rng = rng::substream(config.seed, Purpose::Campaign, i as u64);
                data_law.fill(&mut rng, buf)?;
                Ok(hypothesis.test(buf, 1)?.p_value)
            },
        )
        .collect::<Result<Vec<f64>>>()?;
    let mean_p_value = p_values.iter().sum::<f64>() / p_values.len() as f64;
    Ok(CampaignResult {
        mean_p_value,
        p_values,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeSearchOptions {
    pub start: usize,
    pub growth: usize,
    pub cap: usize,
    pub replications: usize,
    pub calibration: Calibration,
}

impl Default for SizeSearchOptions {
    fn default() -> Self {
        Self {
            start: 2,
            growth: 2,
            cap: 2_000_000,
            replications: 1000,
            calibration: Calibration::Exact,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub n: usize,
    pub mean_p_value: f64,
    pub rejection_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeSearch {
    /// Smallest grid size whose mean p-value fell below the level.
    pub needed_n: Option<usize>,
    pub cap_exceeded: bool,
    pub grid: Vec<GridPoint>,
}

/// Walks the grid `start, start·growth, …` testing `SN(α)` against standard
/// normal data until the mean p-value drops below `level`.
pub fn rejection_size_search(
    alpha: f64,
    level: f64,
    seed: u64,
    options: &SizeSearchOptions,
) -> Result<SizeSearch> {
    if alpha == 0.0 || !alpha.is_finite() {
        return Err(Error::InvalidParameter(
            "alpha must be finite and non-zero".into(),
        ));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "level must be in (0, 1), got {level}"
        )));
    }
    if options.start < 2 || options.growth < 2 {
        return Err(Error::InvalidParameter(
            "grid needs start >= 2 and growth >= 2".into(),
        ));
    }
    let mut grid = Vec::new();
    let mut n = options.start;
    let mut step = 0u64;
    while n <= options.cap {
        let config =
            CampaignConfig::new(alpha, n, options.replications, rng::child_seed(seed, step))
                .with_calibration(options.calibration);
        let result = simulate_alternative(&config, DataLaw::StandardNormal)?;
        grid.push(GridPoint {
            n,
            mean_p_value: result.mean_p_value,
            rejection_rate: result.rejection_rate(level),
        });
        if result.mean_p_value < level {
            return Ok(SizeSearch {
                needed_n: Some(n),
                cap_exceeded: false,
                grid,
            });
        }
        n = match n.checked_mul(options.growth) {
            Some(next) => next,
            None => break,
        };
        step += 1;
    }
    Ok(SizeSearch {
        needed_n: None,
        cap_exceeded: true,
        grid,
    })
}

/// Skewness values are clamped to this magnitude before inversion; the
/// family cannot exceed [`max_skewness`] ≈ 0.99527.
pub const SKEWNESS_CLAMP: f64 = 0.9952;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaEstimate {
    pub alpha: f64,
    pub clamped: bool,
}

/// Method-of-moments shape estimate: invert the family's skewness curve at
/// the sample skewness `bₙ`.
pub fn estimate_alpha(sample: &[f64]) -> Result<AlphaEstimate> {
    if sample.len() < 3 {
        return Err(Error::InvalidParameter(
            "shape estimation needs at least 3 observations".into(),
        ));
    }
    let (_, b_n) = empirical_shape(sample)?;
    Ok(alpha_from_skewness(b_n))
}

pub fn alpha_from_skewness(b: f64) -> AlphaEstimate {
    let clamped = b.abs() > SKEWNESS_CLAMP;
    let target = b.abs().min(SKEWNESS_CLAMP);
    if target == 0.0 {
        return AlphaEstimate {
            alpha: 0.0,
            clamped,
        };
    }
    debug_assert!(target < max_skewness());
    let skew_at = |delta: f64| {
        analytic_shape_statistics(SkewNormalShape::from_delta(delta).expect("|δ| < 1")).skewness_b
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64 - 1e-15);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if skew_at(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let delta = 0.5 * (lo + hi);
    let alpha = delta / ((1.0 - delta) * (1.0 + delta)).sqrt();
    AlphaEstimate {
        alpha: alpha.copysign(b),
        clamped,
    }
}

/// Percentile bootstrap interval for the shape estimate. Resamples whose
/// variance is zero are skipped.
pub fn bootstrap_alpha_interval(
    sample: &[f64],
    resamples: usize,
    confidence: f64,
    seed: u64,
) -> Result<(f64, f64)> {
    if sample.len() < 3 {
        return Err(Error::InvalidParameter(
            "bootstrap needs at least 3 observations".into(),
        ));
    }
    if resamples == 0 || !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidParameter(
            "bad bootstrap configuration".into(),
        ));
    }
    let n = sample.len();
    let mut estimates: Vec<f64> = (0..resamples)
        .into_par_iter()
        .map_init(
            || vec![0.0; n],
            |buf, i| {
                let mut rng = rng::substream(seed, Purpose::Bootstrap, i as u64);
                for x in buf.iter_mut() {
                    *x = sample[rng.random_range(0..n)];
                }
                estimate_alpha(buf).ok().map(|e| e.alpha)
            },
        )
        .flatten()
        .collect();
    if estimates.is_empty() {
        return Err(Error::ZeroVariance);
    }
    estimates.sort_by(f64::total_cmp);
    let tail = 0.5 * (1.0 - confidence);
    Ok((
        quantile_sorted(&estimates, tail),
        quantile_sorted(&estimates, 1.0 - tail),
    ))
}

/// Linear-interpolation quantile of sorted data.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Sample sizes at which standard normal data was rejected against `SN(α)`,
/// indexed by α. Used to pick the duplication target.
pub const REJECTION_SIZES: [(f64, f64); 6] = [
    (0.1, 1_000_000.0),
    (0.5, 100_000.0),
    (1.0, 3_200.0),
    (1.5, 750.0),
    (6.0, 130.0),
    (10.0, 118.0),
];

/// Size needed to reject normality for shape `|alpha|`, log-log
/// interpolated in [`REJECTION_SIZES`]; extrapolated below the first knot
/// and flat beyond the last.
pub fn target_rejection_size(alpha: f64) -> f64 {
    let a = alpha.abs();
    let last = REJECTION_SIZES[REJECTION_SIZES.len() - 1];
    if a >= last.0 {
        return last.1;
    }
    if a == 0.0 {
        return f64::INFINITY;
    }
    let seg = REJECTION_SIZES
        .windows(2)
        .position(|w| a < w[1].0)
        .unwrap_or(REJECTION_SIZES.len() - 2);
    let (x0, y0) = REJECTION_SIZES[seg];
    let (x1, y1) = REJECTION_SIZES[seg + 1];
    if a == x0 {
        return y0;
    }
    let t = (a.ln() - x0.ln()) / (x1.ln() - x0.ln());
    (y0.ln() + t * (y1.ln() - y0.ln())).exp()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    AcceptSymmetry,
    RejectNormality,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::AcceptSymmetry => "accept-symmetry",
            Self::RejectNormality => "reject-normality",
            Self::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionOptions {
    pub level: f64,
    /// Largest allowed duplication factor.
    pub k_cap: usize,
    /// Ceiling on the duplicated size `k·n`.
    pub max_total: usize,
    pub resamples: usize,
    pub confidence: f64,
    /// Shapes with `|α|` below this are treated as symmetric.
    pub symmetry_threshold: f64,
    pub seed: u64,
}

impl Default for DecisionOptions {
    fn default() -> Self {
        Self {
            level: 0.05,
            k_cap: 20_000,
            max_total: 1_000_000,
            resamples: 1000,
            confidence: 0.95,
            symmetry_threshold: 0.5,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub verdict: Verdict,
    pub alpha_hat: AlphaEstimate,
    pub interval: (f64, f64),
    /// Duplicated size the protocol aimed for, when it got that far.
    pub target_size: Option<f64>,
    pub capped: bool,
    /// Normality test; duplicated when the protocol reached that step.
    pub outcome: TestOutcome,
}

/// Sample-duplication protocol for testing normality against skew-normal
/// alternatives.
///
/// 1. Estimate α and a percentile bootstrap interval `[c, d]`.
/// 2. If the interval reaches into `(-t, t)` (`t` = symmetry threshold),
///    accept symmetry.
/// 3. Otherwise duplicate the sample until `k·n` reaches the size needed to
///    reject normality at `α̂` and test the normal hypothesis; reject when
///    `p < level`.
/// 4. When the duplication cap stops short of that size and the test does not
///    reject, the decision is inconclusive.
pub fn duplication_decision(sample: &[f64], options: &DecisionOptions) -> Result<Decision> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    if options.k_cap == 0 {
        return Err(Error::InvalidParameter("k_cap must be >= 1".into()));
    }
    let normal = Hypothesis::new(0.0, SigmaRoute::Analytic, Calibration::Exact)?;
    let alpha_hat = estimate_alpha(sample)?;
    let interval =
        bootstrap_alpha_interval(sample, options.resamples, options.confidence, options.seed)?;
    let t = options.symmetry_threshold;
    if interval.0 < t && interval.1 > -t {
        return Ok(Decision {
            verdict: Verdict::AcceptSymmetry,
            alpha_hat,
            interval,
            target_size: None,
            capped: false,
            outcome: normal.test(sample, 1)?,
        });
    }

    let n = sample.len();
    let target = target_rejection_size(alpha_hat.alpha);
    let wanted = if target.is_finite() {
        (target / n as f64).ceil().max(1.0)
    } else {
        f64::INFINITY
    };
    let max_k = options.k_cap.min(options.max_total / n).max(1);
    let capped = wanted > max_k as f64;
    let k = if capped { max_k } else { wanted as usize };

    let outcome = normal.test(sample, k)?;
    let verdict = if outcome.p_value < options.level {
        Verdict::RejectNormality
    } else if capped {
        Verdict::Inconclusive
    } else {
        Verdict::AcceptSymmetry
    };
    Ok(Decision {
        verdict,
        alpha_hat,
        interval,
        target_size: Some(target),
        capped,
        outcome,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsampleScreen {
    pub subsample_size: usize,
    pub subsamples: usize,
    pub mean_p_value: f64,
    pub threshold: f64,
    pub rejects_symmetry: bool,
}

/// Experimental screen: test normality on random subsamples (drawn without
/// replacement) and flag asymmetry when their mean p-value does not exceed
/// `threshold`.
pub fn subsample_screen(
    sample: &[f64],
    subsample_size: usize,
    subsamples: usize,
    threshold: f64,
    seed: u64,
) -> Result<SubsampleScreen> {
    if subsample_size < 2 || subsample_size > sample.len() || subsamples == 0 {
        return Err(Error::InvalidParameter(
            "bad subsample configuration".into(),
        ));
    }
    let normal = Hypothesis::new(0.0, SigmaRoute::Analytic, Calibration::Exact)?;
    let mut total = 0.0;
    let mut used = 0usize;
    for i in 0..subsamples {
        let mut rng = rng::substream(seed, Purpose::Search, i as u64);
        let picked: Vec<f64> = rand::seq::index::sample(&mut rng, sample.len(), subsample_size)
            .into_iter()
            .map(|j| sample[j])
            .collect();
        if let Ok(outcome) = normal.test(&picked, 1) {
            total += outcome.p_value;
            used += 1;
        }
    }
    if used == 0 {
        return Err(Error::ZeroVariance);
    }
    let mean_p_value = total / used as f64;
    Ok(SubsampleScreen {
        subsample_size,
        subsamples: used,
        mean_p_value,
        threshold,
        rejects_symmetry: mean_p_value <= threshold,
    })
}
