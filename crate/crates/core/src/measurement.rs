//! Lattice-valued measurements and the densities reconstructed from them.
//!
//! An instrument with sensitivity `num/den` can only return values on the
//! lattice `(num/den) Z`. A reading is modelled as
//! `quantize(x_true + offset + eps)` where `offset` is one fixed realization
//! of the systematic error and `eps ~ N(0, sigma_rand^2)` is redrawn for every
//! reading. From `n` readings the estimator produces
//!
//! ```text
//! X̄ = (1/n) sum X_i
//! S_rand^2 = 1/(n-1) sum (X_i - X̄)^2
//! S^2 = S_rand^2 / n + sigma_syst^2
//! ```
//!
//! and the reconstruction `rho_n = N(X̄, S^2)`, which tends to
//! `rho_inf = N(X̄, sigma_syst^2)` as `n` grows.
//!
//! Rounding to the lattice inflates `S_rand^2` by about `step^2 / 12`. No
//! correction is applied.

use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use statrs::function::erf::erfc;

use crate::error::{invalid, Error, Result};

/// Tail mass above which [`cell_probabilities`] rejects an index window.
pub const WINDOW_TAIL_TOLERANCE: f64 = 1e-6;

/// Positive rational lattice step `num/den`, kept in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RationalStep {
    num: u64,
    den: u64,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl RationalStep {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(invalid("step", format!("{num}/{den} must have positive parts")));
        }
        let g = gcd(num, den);
        Ok(Self {
            num: num / g,
            den: den / g,
        })
    }

    pub fn numerator(&self) -> u64 {
        self.num
    }

    pub fn denominator(&self) -> u64 {
        self.den
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `step^2` with a single rounding.
    pub fn squared(&self) -> f64 {
        (self.num as f64 * self.num as f64) / (self.den as f64 * self.den as f64)
    }

    /// Lattice value `step * m` with a single rounding.
    pub fn lattice_value(&self, m: i64) -> f64 {
        (m as f64 * self.num as f64) / self.den as f64
    }

    /// Half-point `step * (m - 1/2)`.
    pub fn half_point(&self, m: i64) -> f64 {
        ((2 * m - 1) as f64 * self.num as f64) / (2.0 * self.den as f64)
    }
}

impl fmt::Display for RationalStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for RationalStep {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || invalid("step", format!("expected `num/den`, got `{s}`"));
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s.trim(), "1"),
        };
        let num = n.parse::<u64>().map_err(|_| bad())?;
        let den = d.parse::<u64>().map_err(|_| bad())?;
        Self::new(num, den)
    }
}

/// Index of the lattice point nearest to `x`; exact half-points round to the
/// even index.
pub fn quantize(x: f64, step: RationalStep) -> i64 {
    let scaled = x * step.den as f64 / step.num as f64;
    scaled.round_ties_even() as i64
}

/// Instrument description: lattice, error dispersions and the realized
/// systematic offset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementDevice {
    step: RationalStep,
    sigma_syst: f64,
    sigma_rand: f64,
    systematic_offset: f64,
}

impl MeasurementDevice {
    pub fn new(
        step: RationalStep,
        sigma_syst: f64,
        sigma_rand: f64,
        systematic_offset: f64,
    ) -> Result<Self> {
        if !(sigma_syst >= 0.0 && sigma_syst.is_finite()) {
            return Err(invalid("sigma_syst", format!("must be >= 0, got {sigma_syst}")));
        }
        if !(sigma_rand >= 0.0 && sigma_rand.is_finite()) {
            return Err(invalid("sigma_rand", format!("must be >= 0, got {sigma_rand}")));
        }
        if sigma_syst * sigma_syst + sigma_rand * sigma_rand <= 0.0 {
            return Err(invalid("sigma", "sigma_syst^2 + sigma_rand^2 must be > 0"));
        }
        if !systematic_offset.is_finite() {
            return Err(invalid("systematic_offset", "must be finite"));
        }
        Ok(Self {
            step,
            sigma_syst,
            sigma_rand,
            systematic_offset,
        })
    }

    /// Draws the systematic offset once from `N(0, sigma_syst^2)`.
    pub fn with_drawn_offset(
        step: RationalStep,
        sigma_syst: f64,
        sigma_rand: f64,
        seed: u64,
    ) -> Result<Self> {
        let mut rng = stream_rng(seed, u64::MAX);
        let z: f64 = StandardNormal.sample(&mut rng);
        Self::new(step, sigma_syst, sigma_rand, sigma_syst * z)
    }

    pub fn step(&self) -> RationalStep {
        self.step
    }

    pub fn sigma_syst(&self) -> f64 {
        self.sigma_syst
    }

    pub fn sigma_rand(&self) -> f64 {
        self.sigma_rand
    }

    pub fn systematic_offset(&self) -> f64 {
        self.systematic_offset
    }

    /// `sigma_syst^2 + sigma_rand^2`.
    pub fn total_variance(&self) -> f64 {
        self.sigma_syst * self.sigma_syst + self.sigma_rand * self.sigma_rand
    }

    /// One reading of `x_true`.
    pub fn read<R: rand::Rng + ?Sized>(&self, x_true: f64, rng: &mut R) -> i64 {
        let eps: f64 = StandardNormal.sample(rng);
        quantize(x_true + self.systematic_offset + self.sigma_rand * eps, self.step)
    }
}

/// Readings stored as lattice indices sharing one step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSet {
    step: RationalStep,
    indices: Vec<i64>,
}

impl SampleSet {
    pub fn new(step: RationalStep, indices: Vec<i64>) -> Result<Self> {
        if indices.is_empty() {
            return Err(invalid("samples", "at least one sample is required"));
        }
        Ok(Self { step, indices })
    }

    /// Quantizes real values onto the lattice.
    pub fn from_values(step: RationalStep, values: &[f64]) -> Result<Self> {
        Self::new(step, values.iter().map(|&x| quantize(x, step)).collect())
    }

    pub fn step(&self) -> RationalStep {
        self.step
    }

    pub fn indices(&self) -> &[i64] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.indices.iter().map(|&m| self.step.lattice_value(m))
    }

    /// Occurrence count of each lattice index.
    pub fn counts(&self) -> BTreeMap<i64, usize> {
        let mut counts = BTreeMap::new();
        for &m in &self.indices {
            *counts.entry(m).or_insert(0) += 1;
        }
        counts
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Seed for the `stream`-th independent substream of `seed`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    stream_rng(seed, stream).next_u64()
}

/// `n` readings of `x_true`; a fixed `seed` gives a fixed sample set.
pub fn sample_measurements(
    dev: &MeasurementDevice,
    x_true: f64,
    n: usize,
    seed: u64,
) -> Result<SampleSet> {
    if n == 0 {
        return Err(invalid("n", "at least one measurement is required"));
    }
    if !x_true.is_finite() {
        return Err(invalid("x_true", "must be finite"));
    }
    let mut rng = stream_rng(seed, 0);
    let indices = (0..n).map(|_| dev.read(x_true, &mut rng)).collect();
    SampleSet::new(dev.step, indices)
}

/// Which stage of the reconstruction a density represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityKind {
    /// The underlying continuous model `rho_*`.
    Model,
    /// `rho_n`, built from `n` readings.
    FiniteN,
    /// `rho_inf`, the large-sample limit.
    Limit,
}

/// Normal density `N(mean, variance)` with strictly positive variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructionDensity {
    mean: f64,
    variance: f64,
    kind: DensityKind,
}

impl ReconstructionDensity {
    pub fn new(mean: f64, variance: f64, kind: DensityKind) -> Result<Self> {
        if !mean.is_finite() {
            return Err(invalid("mean", "must be finite"));
        }
        if variance == 0.0 {
            return Err(Error::ZeroVariance);
        }
        if !(variance > 0.0 && variance.is_finite()) {
            return Err(invalid("variance", format!("must be > 0, got {variance}")));
        }
        Ok(Self {
            mean,
            variance,
            kind,
        })
    }

    /// The continuous model `rho_*` with the given mean and dispersion.
    pub fn model(mean: f64, variance: f64) -> Result<Self> {
        Self::new(mean, variance, DensityKind::Model)
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }

    pub fn kind(&self) -> DensityKind {
        self.kind
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let d = x - self.mean;
        (-(d * d) / (2.0 * self.variance)).exp() / (2.0 * PI * self.variance).sqrt()
    }

    /// Probability of `[a, b]`, evaluated on whichever side of the mean
    /// keeps the complementary error functions away from cancellation.
    pub fn mass_between(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let s = self.std_dev() * SQRT_2;
        let za = (a - self.mean) / s;
        let zb = (b - self.mean) / s;
        let mass = if za >= 0.0 {
            0.5 * (erfc(za) - erfc(zb))
        } else if zb <= 0.0 {
            0.5 * (erfc(-zb) - erfc(-za))
        } else {
            1.0 - 0.5 * erfc(-za) - 0.5 * erfc(zb)
        };
        mass.clamp(0.0, 1.0)
    }

    /// Mass below `x`.
    pub fn lower_tail(&self, x: f64) -> f64 {
        0.5 * erfc(-(x - self.mean) / (self.std_dev() * SQRT_2))
    }

    /// Mass above `x`.
    pub fn upper_tail(&self, x: f64) -> f64 {
        0.5 * erfc((x - self.mean) / (self.std_dev() * SQRT_2))
    }
}

/// Probabilities of lattice indices.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    pub step: RationalStep,
    pub probs: BTreeMap<i64, f64>,
    /// Probability outside the stored indices.
    pub tail_mass: f64,
}

impl DiscreteDistribution {
    pub fn get(&self, m: i64) -> f64 {
        self.probs.get(&m).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }

    /// `max_m |self_m - other_m|` over the union of supports.
    pub fn max_abs_difference(&self, other: &DiscreteDistribution) -> f64 {
        self.probs
            .keys()
            .chain(other.probs.keys())
            .map(|&m| (self.get(m) - other.get(m)).abs())
            .fold(0.0, f64::max)
    }
}

/// `p_m` = mass of the cell `[step (m - 1/2), step (m + 1/2)]` for every `m`
/// in `window`.
pub fn cell_probabilities(
    density: &ReconstructionDensity,
    step: RationalStep,
    window: RangeInclusive<i64>,
) -> Result<DiscreteDistribution> {
    let (lo, hi) = (*window.start(), *window.end());
    if lo > hi {
        return Err(invalid("window", format!("empty index window {lo}..={hi}")));
    }
    let probs: BTreeMap<i64, f64> = window
        .map(|m| (m, density.mass_between(step.half_point(m), step.half_point(m + 1))))
        .collect();
    let tail_mass = density.lower_tail(step.half_point(lo)) + density.upper_tail(step.half_point(hi + 1));
    if tail_mass > WINDOW_TAIL_TOLERANCE {
        return Err(Error::WindowTooSmall { tail: tail_mass });
    }
    Ok(DiscreteDistribution {
        step,
        probs,
        tail_mass,
    })
}

/// Index window covering `mean ± k sigma` of `density`.
pub fn window_for(density: &ReconstructionDensity, step: RationalStep, k: f64) -> RangeInclusive<i64> {
    let half = k * density.std_dev();
    quantize(density.mean() - half, step) - 1..=quantize(density.mean() + half, step) + 1
}

/// Relative frequencies `n_m / n` of the observed lattice indices.
pub fn empirical_cell_frequencies(s: &SampleSet) -> DiscreteDistribution {
    let n = s.len() as f64;
    let probs = s
        .counts()
        .into_iter()
        .map(|(m, c)| (m, c as f64 / n))
        .collect();
    DiscreteDistribution {
        step: s.step,
        probs,
        tail_mass: 0.0,
    }
}

/// Output of [`estimate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateResult {
    pub n: usize,
    pub mean_est: f64,
    pub s2_rand: f64,
    pub s2_total: f64,
    pub density: ReconstructionDensity,
}

/// Sample mean, random-error dispersion and the combined dispersion
/// `S^2 = S_rand^2 / n + sigma_syst^2`.
///
/// Sums run over the exact integer lattice indices; only the final scaling
/// by the step is done in floating point.
pub fn estimate(s: &SampleSet, sigma_syst: f64) -> Result<EstimateResult> {
    let n = s.len();
    if n < 2 {
        return Err(Error::InsufficientSamples(n));
    }
    if !(sigma_syst >= 0.0 && sigma_syst.is_finite()) {
        return Err(invalid("sigma_syst", format!("must be >= 0, got {sigma_syst}")));
    }
    let step = s.step;
    let sum: i128 = s.indices.iter().map(|&m| m as i128).sum();
    let sum_sq: i128 = s.indices.iter().map(|&m| (m as i128) * (m as i128)).sum();
    let nn = n as i128;
    // n * sum (m - m̄)^2 = n sum m^2 - (sum m)^2, exactly.
    let scatter = nn * sum_sq - sum * sum;

    let mean_est = (sum as f64 * step.num as f64) / (n as f64 * step.den as f64);
    let s2_rand = step.squared() * (scatter as f64 / (n as f64 * (n - 1) as f64));
    let s2_total = s2_rand / n as f64 + sigma_syst * sigma_syst;
    if s2_total == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let density = ReconstructionDensity::new(mean_est, s2_total, DensityKind::FiniteN)?;
    Ok(EstimateResult {
        n,
        mean_est,
        s2_rand,
        s2_total,
        density,
    })
}

/// `rho_inf = N(X̄, sigma_syst^2)`.
pub fn rho_infinity(mean_est: f64, sigma_syst: f64) -> Result<ReconstructionDensity> {
    if sigma_syst == 0.0 {
        return Err(Error::ZeroVariance);
    }
    if !(sigma_syst > 0.0 && sigma_syst.is_finite()) {
        return Err(invalid("sigma_syst", format!("must be > 0, got {sigma_syst}")));
    }
    ReconstructionDensity::new(mean_est, sigma_syst * sigma_syst, DensityKind::Limit)
}

/// Interval `[step (m - 1/2), step (l - 1/2)]` with half-point endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatticeInterval {
    step: RationalStep,
    m: i64,
    l: i64,
}

impl LatticeInterval {
    pub fn from_indices(step: RationalStep, m: i64, l: i64) -> Result<Self> {
        if m > l {
            return Err(invalid("interval", format!("need m <= l, got m={m}, l={l}")));
        }
        Ok(Self { step, m, l })
    }

    /// Accepts real endpoints only if both sit on the half-point lattice.
    pub fn from_endpoints(step: RationalStep, a: f64, b: f64) -> Result<Self> {
        let index = |x: f64| -> Result<i64> {
            let k = x / step.value() + 0.5;
            let r = k.round();
            if (k - r).abs() > 1e-9 * k.abs().max(1.0) {
                return Err(Error::OffLattice(x));
            }
            Ok(r as i64)
        };
        Self::from_indices(step, index(a)?, index(b)?)
    }

    pub fn a(&self) -> f64 {
        self.step.half_point(self.m)
    }

    pub fn b(&self) -> f64 {
        self.step.half_point(self.l)
    }

    pub fn indices(&self) -> (i64, i64) {
        (self.m, self.l)
    }

    pub fn step(&self) -> RationalStep {
        self.step
    }

    /// Whether the lattice reading `k` lies in `[a, b]`, i.e. `m <= k < l`.
    pub fn contains_index(&self, k: i64) -> bool {
        self.m <= k && k < self.l
    }
}

pub fn interval_probability(density: &ReconstructionDensity, iv: &LatticeInterval) -> f64 {
    density.mass_between(iv.a(), iv.b())
}

/// Settings for [`convergence_experiment`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceSettings {
    pub n_schedule: Vec<usize>,
    pub trials: usize,
    pub fresh_draws: usize,
    pub seed: u64,
}

/// One row of the convergence report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    /// `∫_a^b rho_inf`, averaged over trials.
    pub limit_probability: f64,
    /// Frequency of fresh readings of the reconstruction inside `[a, b]`,
    /// averaged over trials.
    pub frequency: f64,
    /// Mean over trials of `|frequency - ∫_a^b rho_inf|`.
    pub gap: f64,
    /// Binomial standard error of a single trial's frequency.
    pub error_bar: f64,
    /// Mean over trials of `|device frequency - ∫_a^b rho_inf|`, where the
    /// device frequency comes from fresh readings of the instrument itself.
    pub device_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub interval: LatticeInterval,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    /// True when every gap is at most the previous one plus `k` combined
    /// error bars.
    pub fn is_non_increasing(&self, k: f64) -> bool {
        self.rows.windows(2).all(|w| {
            let slack = k * (w[0].error_bar.powi(2) + w[1].error_bar.powi(2)).sqrt();
            w[1].gap <= w[0].gap + slack
        })
    }
}

struct TrialOutcome {
    limit: f64,
    frequency: f64,
    device_frequency: f64,
}

fn run_trial(
    dev: &MeasurementDevice,
    x_true: f64,
    n: usize,
    fresh: usize,
    seed: u64,
    iv: &LatticeInterval,
) -> Result<TrialOutcome> {
    let samples = sample_measurements(dev, x_true, n, derive_seed(seed, 0))?;
    let est = estimate(&samples, dev.sigma_syst)?;
    let limit_density = rho_infinity(est.mean_est, dev.sigma_syst)?;
    let limit = interval_probability(&limit_density, iv);

    // Fresh lattice readings of the finite-n reconstruction X ~ rho_n.
    let mut rng = stream_rng(derive_seed(seed, 1), 0);
    let sd = est.density.std_dev();
    let mut hits = 0usize;
    for _ in 0..fresh {
        let z: f64 = StandardNormal.sample(&mut rng);
        if iv.contains_index(quantize(est.mean_est + sd * z, dev.step)) {
            hits += 1;
        }
    }

    let device = sample_measurements(dev, x_true, fresh, derive_seed(seed, 2))?;
    let device_hits = device.indices.iter().filter(|&&k| iv.contains_index(k)).count();

    Ok(TrialOutcome {
        limit,
        frequency: hits as f64 / fresh as f64,
        device_frequency: device_hits as f64 / fresh as f64,
    })
}

/// Monte Carlo check that probabilities of half-point lattice intervals under
/// the reconstruction approach `∫_a^b rho_inf` as the sample size grows.
///
/// For each `n` and trial: estimate from `n` fresh readings, form `rho_n`
/// and `rho_inf`, then draw `fresh_draws` lattice readings of a variable
/// distributed as `rho_n` and compare their in-interval frequency with
/// `∫_a^b rho_inf`. The same comparison against direct instrument readings
/// is reported as `device_gap`; it does not vanish when `sigma_rand > 0`
/// because single readings scatter with `sigma_rand`, not `sigma_syst`.
pub fn convergence_experiment(
    dev: &MeasurementDevice,
    x_true: f64,
    settings: &ConvergenceSettings,
    iv: &LatticeInterval,
) -> Result<ConvergenceReport> {
    if settings.n_schedule.is_empty() {
        return Err(invalid("n_schedule", "must not be empty"));
    }
    if settings.n_schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("n_schedule", "must be strictly increasing"));
    }
    if settings.n_schedule[0] < 2 {
        return Err(Error::InsufficientSamples(settings.n_schedule[0]));
    }
    if settings.trials == 0 || settings.fresh_draws == 0 {
        return Err(invalid("trials", "trials and fresh_draws must be >= 1"));
    }
    if iv.step() != dev.step {
        return Err(invalid("interval", "interval lattice differs from the device lattice"));
    }
    if dev.sigma_syst <= 0.0 {
        return Err(Error::ZeroVariance);
    }

    let mut rows = Vec::with_capacity(settings.n_schedule.len());
    for (k, &n) in settings.n_schedule.iter().enumerate() {
        let outcomes: Vec<TrialOutcome> = (0..settings.trials)
            .into_par_iter()
            .map(|trial| {
                let stream = (k as u64) << 32 | trial as u64;
                run_trial(dev, x_true, n, settings.fresh_draws, derive_seed(settings.seed, stream), iv)
            })
            .collect::<Result<_>>()?;
        let trials = outcomes.len() as f64;
        let mean = |f: &dyn Fn(&TrialOutcome) -> f64| outcomes.iter().map(f).sum::<f64>() / trials;
        let limit_probability = mean(&|o| o.limit);
        let frequency = mean(&|o| o.frequency);
        let gap = mean(&|o| (o.frequency - o.limit).abs());
        let device_gap = mean(&|o| (o.device_frequency - o.limit).abs());
        let p = limit_probability.clamp(0.0, 1.0);
        rows.push(ConvergenceRow {
            n,
            limit_probability,
            frequency,
            gap,
            error_bar: (p * (1.0 - p) / settings.fresh_draws as f64).sqrt(),
            device_gap,
        });
    }
    Ok(ConvergenceReport { interval: *iv, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tenth() -> RationalStep {
        RationalStep::new(1, 10).unwrap()
    }

    #[test]
    fn step_parsing_and_normalization() {
        assert_eq!("1/10".parse::<RationalStep>().unwrap(), RationalStep::new(1, 10).unwrap());
        let s = RationalStep::new(4, 6).unwrap();
        assert_eq!((s.numerator(), s.denominator()), (2, 3));
        assert_eq!(" 3 / 9 ".parse::<RationalStep>().unwrap().to_string(), "1/3");
        assert_eq!("2".parse::<RationalStep>().unwrap().value(), 2.0);
        assert!("0/3".parse::<RationalStep>().is_err());
        assert!("-1/3".parse::<RationalStep>().is_err());
        assert!("a/b".parse::<RationalStep>().is_err());
    }

    #[test]
    fn quantize_examples() {
        assert_eq!(quantize(0.26, tenth()), 3);
        assert_eq!(quantize(0.25, tenth()), 2);
        assert_eq!(quantize(0.35, RationalStep::new(1, 2).unwrap()), 1);
        assert_eq!(quantize(-0.26, tenth()), -3);
        assert_eq!(quantize(0.75, RationalStep::new(1, 2).unwrap()), 2);
        assert_eq!(quantize(0.25, RationalStep::new(1, 2).unwrap()), 0);
    }

    #[test]
    fn noiseless_device_repeats_the_truth() {
        let dev = MeasurementDevice::new(tenth(), 0.1, 0.0, 0.0).unwrap();
        let s = sample_measurements(&dev, 0.731, 50, 1).unwrap();
        assert!(s.indices().iter().all(|&m| m == quantize(0.731, tenth())));
    }

    #[test]
    fn sampling_is_deterministic() {
        let dev = MeasurementDevice::new(tenth(), 0.1, 1.0, 0.05).unwrap();
        let a = sample_measurements(&dev, 0.0, 1000, 9).unwrap();
        let b = sample_measurements(&dev, 0.0, 1000, 9).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_measurements(&dev, 0.0, 1000, 10).unwrap());
    }

    #[test]
    fn device_validation() {
        assert!(MeasurementDevice::new(tenth(), 0.0, 0.0, 0.0).is_err());
        assert!(MeasurementDevice::new(tenth(), -0.1, 1.0, 0.0).is_err());
        let d = MeasurementDevice::with_drawn_offset(tenth(), 0.2, 1.0, 5).unwrap();
        assert_eq!(d, MeasurementDevice::with_drawn_offset(tenth(), 0.2, 1.0, 5).unwrap());
        assert!(d.systematic_offset() != 0.0);
        assert!(MeasurementDevice::with_drawn_offset(tenth(), 0.0, 1.0, 5).unwrap().systematic_offset() == 0.0);
    }

    #[test]
    fn cell_probabilities_are_symmetric_and_normalized() {
        let rho = ReconstructionDensity::model(0.0, 0.37).unwrap();
        let window = window_for(&rho, tenth(), 8.0);
        let d = cell_probabilities(&rho, tenth(), window).unwrap();
        for m in 1..40 {
            assert!((d.get(m) - d.get(-m)).abs() < 1e-12);
        }
        assert!((d.total() - 1.0).abs() < 1e-6);
        assert!(d.probs.values().all(|p| (0.0..=1.0).contains(p)));
    }

    #[test]
    fn narrow_density_concentrates_on_one_cell() {
        let step = tenth();
        let rho = ReconstructionDensity::model(0.0, (step.value() / 100.0).powi(2)).unwrap();
        let d = cell_probabilities(&rho, step, -2..=2).unwrap();
        assert!(d.get(0) >= 1.0 - 1e-10);
    }

    #[test]
    fn small_window_is_rejected() {
        let rho = ReconstructionDensity::model(0.0, 1.0).unwrap();
        assert!(matches!(
            cell_probabilities(&rho, tenth(), -5..=5),
            Err(Error::WindowTooSmall { .. })
        ));
    }

    #[test]
    fn cell_probability_matches_quadrature() {
        let rho = ReconstructionDensity::model(0.13, 0.8).unwrap();
        let step = RationalStep::new(1, 4).unwrap();
        let d = cell_probabilities(&rho, step, window_for(&rho, step, 8.0)).unwrap();
        for m in [-3, 0, 1, 5] {
            let (a, b) = (step.half_point(m), step.half_point(m + 1));
            assert!((d.get(m) - simpson(|x| rho.pdf(x), a, b, 2000)).abs() < 1e-10);
        }
    }

    fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut acc = f(a) + f(b);
        for k in 1..n {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(a + k as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn estimate_constant_data() {
        let s = SampleSet::new(tenth(), vec![7; 20]).unwrap();
        let e = estimate(&s, 0.1).unwrap();
        assert!((e.mean_est - 0.7).abs() < 1e-15);
        assert_eq!(e.s2_rand, 0.0);
        assert!((e.s2_total - 0.01).abs() < 1e-17);
        assert_eq!(estimate(&s, 0.0), Err(Error::ZeroVariance));
    }

    #[test]
    fn estimate_two_points() {
        let s = SampleSet::new(tenth(), vec![0, 1]).unwrap();
        let e = estimate(&s, 0.0).unwrap();
        assert_eq!(e.mean_est, 1.0 / 20.0);
        assert_eq!(e.s2_rand, 1.0 / 200.0);
        assert_eq!(e.s2_total, e.s2_rand / 2.0);
        assert_eq!(e.density.kind(), DensityKind::FiniteN);
    }

    #[test]
    fn estimate_needs_two_samples() {
        let s = SampleSet::new(tenth(), vec![3]).unwrap();
        assert_eq!(estimate(&s, 0.1), Err(Error::InsufficientSamples(1)));
    }

    #[test]
    fn rho_infinity_shape() {
        let rho = rho_infinity(0.4, 0.2).unwrap();
        assert_eq!(rho.kind(), DensityKind::Limit);
        assert!((rho.mass_between(-10.0, 10.0) - 1.0).abs() < 1e-15);
        assert!(rho.pdf(0.4) > rho.pdf(0.41) && rho.pdf(0.4) > rho.pdf(0.39));
        assert_eq!(rho_infinity(0.4, 0.0), Err(Error::ZeroVariance));
    }

    #[test]
    fn interval_probabilities() {
        let step = RationalStep::new(1, 20).unwrap();
        let rho = ReconstructionDensity::new(0.0, 0.04, DensityKind::Limit).unwrap();
        let point = LatticeInterval::from_indices(step, 3, 3).unwrap();
        assert_eq!(interval_probability(&rho, &point), 0.0);
        // Half-points -1.625 and 1.625 enclose ±8 sigma = ±1.6.
        let wide = LatticeInterval::from_indices(step, -32, 33).unwrap();
        assert!((wide.a() + 1.625).abs() < 1e-15 && (wide.b() - 1.625).abs() < 1e-15);
        assert!((interval_probability(&rho, &wide) - 1.0).abs() < 1e-12);

        let iv = LatticeInterval::from_endpoints(step, -0.225, 0.175).unwrap();
        assert_eq!(iv.indices(), (-4, 4));
        let direct = simpson(|x| rho.pdf(x), iv.a(), iv.b(), 4000);
        assert!((interval_probability(&rho, &iv) - direct).abs() < 1e-10);

        assert_eq!(LatticeInterval::from_endpoints(step, 0.01, 0.175), Err(Error::OffLattice(0.01)));
        assert!(LatticeInterval::from_indices(step, 2, 1).is_err());
    }

    #[test]
    fn empirical_frequencies() {
        let single = SampleSet::new(tenth(), vec![2]).unwrap();
        let f = empirical_cell_frequencies(&single);
        assert_eq!(f.probs, BTreeMap::from([(2, 1.0)]));

        let dev = MeasurementDevice::new(tenth(), 0.0, 1.0, 0.0).unwrap();
        let s = sample_measurements(&dev, 0.0, 5000, 2).unwrap();
        assert_eq!(s.counts().values().sum::<usize>(), 5000);
        assert!((empirical_cell_frequencies(&s).total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn convergence_preconditions() {
        let step = RationalStep::new(1, 20).unwrap();
        let dev = MeasurementDevice::new(step, 0.2, 0.5, 0.0).unwrap();
        let iv = LatticeInterval::from_indices(step, -4, 5).unwrap();
        let mut settings = ConvergenceSettings {
            n_schedule: vec![100, 50],
            trials: 1,
            fresh_draws: 100,
            seed: 1,
        };
        assert!(convergence_experiment(&dev, 0.0, &settings, &iv).is_err());
        settings.n_schedule = vec![50, 100];
        let other = LatticeInterval::from_indices(tenth(), -4, 5).unwrap();
        assert!(convergence_experiment(&dev, 0.0, &settings, &other).is_err());
        let r = convergence_experiment(&dev, 0.0, &settings, &iv).unwrap();
        assert_eq!(r, convergence_experiment(&dev, 0.0, &settings, &iv).unwrap());
        assert_eq!(r.rows.len(), 2);
    }
}
