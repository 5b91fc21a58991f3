//! Synthetic series with known fractal properties.
//!
//! These generators back the test oracles for the fluctuation and scaling
//! stages: white noise (h(2) = 0.5), fractional Gaussian noise with an
//! exact target autocovariance (h(2) = H), and the binomial multiplicative
//! cascade whose generalized Hurst spectrum is available in closed form.
//!
//! All generators are pure functions of `(spec, seed)`; equal seeds give
//! bitwise-equal output.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Families of synthetic series.
#[derive(Debug, Clone, PartialEq)]
pub enum SurrogateFamily {
    /// Independent standard Gaussian draws.
    WhiteNoise,
    /// Stationary Gaussian increments with autocovariance
    /// `γ(k) = (|k+1|^2H − 2|k|^2H + |k−1|^2H) / 2`, generated by circulant
    /// embedding, so the target covariance is exact rather than asymptotic.
    FractionalGaussianNoise { hurst: f64 },
    /// Deterministic binomial measure: position `k` of `2^g` carries weight
    /// `p^ones(k) (1−p)^(g−ones(k))`, where `ones` counts 1-bits.
    BinomialCascade { weight: f64, generations: u32 },
    /// Binomial cascade values in a seeded random order; value distribution
    /// is kept, correlation structure is destroyed.
    ShuffledCascade { weight: f64, generations: u32 },
    /// Binomial cascade with independent random signs per element; the
    /// amplitude landscape is kept, the series becomes signed and
    /// linearly uncorrelated.
    SignFlippedCascade { weight: f64, generations: u32 },
    /// Pair `(x, y)` with `y = coupling·x + (1−coupling)·z` for an
    /// independent copy `z` of the base family. For cascade bases the
    /// deterministic measure carries no seed entropy, so the independent
    /// copy is the shuffled variant.
    CoupledPair {
        base: Box<SurrogateFamily>,
        coupling: f64,
    },
}

/// A fully specified generation request.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateSpec {
    pub family: SurrogateFamily,
    pub length: usize,
    pub seed: u64,
}

/// Generator output: one series, or a co-indexed pair.
#[derive(Debug, Clone)]
pub enum SurrogateOutput {
    Single(Vec<f64>),
    Pair(Vec<f64>, Vec<f64>),
}

/// Generate a surrogate series (or pair) from a spec.
pub fn generate(spec: &SurrogateSpec) -> Result<SurrogateOutput> {
    if spec.length < 2 {
        return Err(Error::Param("surrogate length must be at least 2".into()));
    }
    match &spec.family {
        SurrogateFamily::WhiteNoise => Ok(SurrogateOutput::Single(white_noise(
            spec.length,
            spec.seed,
        ))),
        SurrogateFamily::FractionalGaussianNoise { hurst } => {
            let gen = FgnGenerator::new(*hurst, spec.length)?;
            Ok(SurrogateOutput::Single(gen.sample(spec.seed)))
        }
        SurrogateFamily::BinomialCascade { weight, generations } => Ok(SurrogateOutput::Single(
            binomial_cascade(*weight, *generations, spec.length)?,
        )),
        SurrogateFamily::ShuffledCascade { weight, generations } => {
            let mut values = binomial_cascade(*weight, *generations, spec.length)?;
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            values.shuffle(&mut rng);
            Ok(SurrogateOutput::Single(values))
        }
        SurrogateFamily::SignFlippedCascade { weight, generations } => {
            let mut values = binomial_cascade(*weight, *generations, spec.length)?;
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            for v in values.iter_mut() {
                if rng.gen::<bool>() {
                    *v = -*v;
                }
            }
            Ok(SurrogateOutput::Single(values))
        }
        SurrogateFamily::CoupledPair { base, coupling } => {
            let (x, y) = coupled_pair(base, *coupling, spec.length, spec.seed)?;
            Ok(SurrogateOutput::Pair(x, y))
        }
    }
}

/// [`generate`] restricted to single-series families.
pub fn generate_single(spec: &SurrogateSpec) -> Result<Vec<f64>> {
    match generate(spec)? {
        SurrogateOutput::Single(v) => Ok(v),
        SurrogateOutput::Pair(..) => Err(Error::Param(
            "spec generates a pair; use generate or generate_pair".into(),
        )),
    }
}

/// [`generate`] restricted to pair families.
pub fn generate_pair(spec: &SurrogateSpec) -> Result<(Vec<f64>, Vec<f64>)> {
    match generate(spec)? {
        SurrogateOutput::Pair(x, y) => Ok((x, y)),
        SurrogateOutput::Single(_) => Err(Error::Param(
            "spec generates a single series; use generate or generate_single".into(),
        )),
    }
}

fn white_noise(length: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..length).map(|_| rng.sample(StandardNormal)).collect()
}

fn coupled_pair(
    base: &SurrogateFamily,
    coupling: f64,
    length: usize,
    seed: u64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(0.0..=1.0).contains(&coupling) {
        return Err(Error::Param(format!("coupling {coupling} outside [0, 1]")));
    }
    if matches!(base, SurrogateFamily::CoupledPair { .. }) {
        return Err(Error::Param("coupled pair cannot nest".into()));
    }
    let x = generate_single(&SurrogateSpec {
        family: base.clone(),
        length,
        seed: child_seed(seed, 1),
    })?;
    let z = generate_single(&SurrogateSpec {
        family: independent_copy_family(base),
        length,
        seed: child_seed(seed, 2),
    })?;
    let y = if coupling == 1.0 {
        x.clone()
    } else if coupling == 0.0 {
        z
    } else {
        x.iter()
            .zip(z.iter())
            .map(|(&a, &b)| coupling * a + (1.0 - coupling) * b)
            .collect()
    };
    Ok((x, y))
}

/// Family used for the independent half of a coupled pair. The plain
/// binomial cascade is deterministic, so its independent copy is the
/// seeded shuffle of the same measure.
fn independent_copy_family(base: &SurrogateFamily) -> SurrogateFamily {
    match base {
        SurrogateFamily::BinomialCascade { weight, generations } => {
            SurrogateFamily::ShuffledCascade {
                weight: *weight,
                generations: *generations,
            }
        }
        other => other.clone(),
    }
}

fn child_seed(seed: u64, salt: u64) -> u64 {
    splitmix64(seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn binomial_cascade(weight: f64, generations: u32, length: usize) -> Result<Vec<f64>> {
    check_cascade_weight(weight)?;
    if generations == 0 || generations > 30 {
        return Err(Error::Param(format!(
            "cascade generations {generations} outside 1..=30"
        )));
    }
    let expect = 1usize << generations;
    if length != expect {
        return Err(Error::Param(format!(
            "cascade length {length} must equal 2^{generations} = {expect}"
        )));
    }
    // Weight of position k depends only on its 1-bit count; precompute the
    // g+1 possible products once.
    let q = 1.0 - weight;
    let by_ones: Vec<f64> = (0..=generations)
        .map(|j| weight.powi(j as i32) * q.powi((generations - j) as i32))
        .collect();
    Ok((0..expect)
        .map(|k| by_ones[k.count_ones() as usize])
        .collect())
}

fn check_cascade_weight(weight: f64) -> Result<()> {
    if !(weight > 0.5 && weight < 1.0) {
        return Err(Error::Param(format!(
            "cascade weight {weight} outside (0.5, 1)"
        )));
    }
    Ok(())
}

/// Exact fGn autocovariance at lag `k` for unit-variance increments.
pub fn fgn_autocovariance(hurst: f64, k: usize) -> f64 {
    let k = k as f64;
    let two_h = 2.0 * hurst;
    0.5 * ((k + 1.0).powf(two_h) - 2.0 * k.powf(two_h) + (k - 1.0).abs().powf(two_h))
}

/// Circulant-embedding fGn generator.
///
/// The embedding eigenvalues depend only on `(hurst, length)` and are
/// precomputed, so repeated sampling (Monte Carlo over seeds) costs one
/// FFT per draw.
pub struct FgnGenerator {
    length: usize,
    /// sqrt of embedding eigenvalues, length 2 * length.
    sqrt_eigenvalues: Vec<f64>,
}

impl FgnGenerator {
    pub fn new(hurst: f64, length: usize) -> Result<Self> {
        if !(hurst > 0.0 && hurst < 1.0) {
            return Err(Error::Param(format!("hurst {hurst} outside (0, 1)")));
        }
        if length < 2 {
            return Err(Error::Param("fGn length must be at least 2".into()));
        }
        let m = 2 * length;
        // First row of the circulant embedding of the Toeplitz covariance.
        let mut row: Vec<Complex<f64>> = (0..m)
            .map(|j| {
                let lag = if j <= length { j } else { m - j };
                Complex::new(fgn_autocovariance(hurst, lag), 0.0)
            })
            .collect();
        FftPlanner::new().plan_fft_forward(m).process(&mut row);

        let max_eig = row.iter().fold(0.0f64, |a, c| a.max(c.re));
        let tol = -1e-10 * max_eig.max(1.0);
        let mut sqrt_eigenvalues = Vec::with_capacity(m);
        for c in &row {
            if c.re < tol {
                return Err(Error::Param(format!(
                    "circulant embedding not nonnegative definite (eigenvalue {})",
                    c.re
                )));
            }
            sqrt_eigenvalues.push(c.re.max(0.0).sqrt());
        }
        Ok(Self {
            length,
            sqrt_eigenvalues,
        })
    }

    pub fn len(&self) -> usize {
        self.length
    }

    pub fn is_empty(&self) -> bool {
        self.length == 0
    }

    /// Draw one realization of length `len()` with unit variance.
    pub fn sample(&self, seed: u64) -> Vec<f64> {
        let m = 2 * self.length;
        let half = self.length; // = m / 2
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut spectral = vec![Complex::new(0.0, 0.0); m];

        let scale = 1.0 / (m as f64).sqrt();
        let g0: f64 = rng.sample(StandardNormal);
        spectral[0] = Complex::new(self.sqrt_eigenvalues[0] * g0 * scale, 0.0);
        for k in 1..half {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let amp = self.sqrt_eigenvalues[k] * scale / 2f64.sqrt();
            spectral[k] = Complex::new(amp * re, amp * im);
            spectral[m - k] = spectral[k].conj();
        }
        let gh: f64 = rng.sample(StandardNormal);
        spectral[half] = Complex::new(self.sqrt_eigenvalues[half] * gh * scale, 0.0);

        FftPlanner::new().plan_fft_forward(m).process(&mut spectral);
        spectral[..self.length].iter().map(|c| c.re).collect()
    }
}

/// Closed-form generalized Hurst spectrum of the binomial cascade:
/// `h(q) = 1/q − log2(p^q + (1−p)^q) / q`, with the continuous limit
/// `−log2(p(1−p)) / 2` at `q = 0`.
#[derive(Debug, Clone, Copy)]
pub struct CascadeSpectrum {
    weight: f64,
}

/// Build the closed-form spectrum for cascade weight `p ∈ (0.5, 1)`.
pub fn cascade_spectrum(weight: f64) -> Result<CascadeSpectrum> {
    check_cascade_weight(weight)?;
    Ok(CascadeSpectrum { weight })
}

impl CascadeSpectrum {
    pub fn h(&self, q: f64) -> f64 {
        let p = self.weight;
        let r = 1.0 - p;
        if q.abs() < 1e-9 {
            return -(p * r).log2() / 2.0;
        }
        1.0 / q - (p.powf(q) + r.powf(q)).log2() / q
    }

    /// Spread `max h − min h` over a q grid; h is non-increasing in q, so
    /// this is `h(q_min) − h(q_max)`.
    pub fn delta_h(&self, q_values: &[f64]) -> f64 {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &q in q_values {
            let h = self.h(q);
            lo = lo.min(h);
            hi = hi.max(h);
        }
        hi - lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric;

    fn autocovariance(x: &[f64], lag: usize) -> f64 {
        let m = numeric::mean(x);
        let n = x.len() - lag;
        let mut acc = numeric::CompensatedSum::new();
        for i in 0..n {
            acc.add((x[i] - m) * (x[i + lag] - m));
        }
        acc.value() / n as f64
    }

    #[test]
    fn white_noise_is_uncorrelated_at_lag_one() {
        let n = 1 << 14;
        let x = white_noise(n, 7);
        let var = autocovariance(&x, 0);
        let rho1 = autocovariance(&x, 1) / var;
        assert!(rho1.abs() < 3.0 / (n as f64).sqrt(), "rho1 = {rho1}");
    }

    #[test]
    fn cascade_conserves_mass() {
        let v = binomial_cascade(0.75, 14, 1 << 14).unwrap();
        let total = numeric::sum(&v);
        assert!((total - 1.0).abs() < 1e-12, "total = {total}");
        assert!(v.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn cascade_rejects_bad_parameters() {
        assert!(binomial_cascade(0.5, 4, 16).is_err());
        assert!(binomial_cascade(1.0, 4, 16).is_err());
        assert!(binomial_cascade(0.75, 4, 15).is_err());
        assert!(binomial_cascade(0.75, 0, 1).is_err());
    }

    #[test]
    fn equal_seeds_are_bitwise_equal() {
        let spec = SurrogateSpec {
            family: SurrogateFamily::FractionalGaussianNoise { hurst: 0.7 },
            length: 1 << 10,
            seed: 42,
        };
        let a = generate_single(&spec).unwrap();
        let b = generate_single(&spec).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    /// Raw-moment autocovariance, using the known zero mean. Subtracting
    /// the sample mean instead would bias every lag low by O(n^(2H-2)) for
    /// long-memory input, which at these lengths exceeds the Monte Carlo
    /// error being tested against.
    fn autocovariance_zero_mean(x: &[f64], lag: usize) -> f64 {
        let n = x.len() - lag;
        let mut acc = numeric::CompensatedSum::new();
        for i in 0..n {
            acc.add(x[i] * x[i + lag]);
        }
        acc.value() / n as f64
    }

    #[test]
    fn fgn_matches_exact_autocovariance() {
        // Monte Carlo over seeds: per-lag mean of the sample autocovariance
        // must sit within 3 standard errors of the closed form.
        let hurst = 0.7;
        let n = 1 << 14;
        let runs = 12;
        let gen = FgnGenerator::new(hurst, n).unwrap();
        for lag in 1..=8usize {
            let estimates: Vec<f64> = (0..runs)
                .map(|seed| autocovariance_zero_mean(&gen.sample(seed), lag))
                .collect();
            let mean = numeric::mean(&estimates);
            let sd = (estimates
                .iter()
                .map(|e| (e - mean) * (e - mean))
                .sum::<f64>()
                / (runs - 1) as f64)
                .sqrt();
            let se = sd / (runs as f64).sqrt();
            let exact = fgn_autocovariance(hurst, lag);
            assert!(
                (mean - exact).abs() <= 3.0 * se + 1e-4,
                "lag {lag}: mean {mean} vs exact {exact} (se {se})"
            );
        }
    }

    #[test]
    fn fgn_full_covariance_matrix_at_small_size() {
        // Brute force: with n = 4 the whole 4×4 covariance matrix can be
        // estimated from many draws and compared entry-wise to γ(|i−j|).
        let hurst = 0.8;
        let n = 4;
        let runs = 40_000u64;
        let gen = FgnGenerator::new(hurst, n).unwrap();
        let mut moments = [[0.0f64; 4]; 4];
        for seed in 0..runs {
            let x = gen.sample(seed);
            for i in 0..n {
                for j in 0..n {
                    moments[i][j] += x[i] * x[j];
                }
            }
        }
        let se = 2.0 / (runs as f64).sqrt(); // Var(x_i x_j) <= ~2 for unit-variance Gaussians
        for i in 0..n {
            for j in 0..n {
                let got = moments[i][j] / runs as f64;
                let expect = fgn_autocovariance(hurst, i.abs_diff(j));
                assert!(
                    (got - expect).abs() < 4.0 * se,
                    "cov[{i}][{j}] = {got}, expect {expect}"
                );
            }
        }
    }

    #[test]
    fn fgn_variance_is_near_unit() {
        let gen = FgnGenerator::new(0.6, 1 << 14).unwrap();
        let runs = 10;
        let estimates: Vec<f64> = (0..runs)
            .map(|seed| autocovariance_zero_mean(&gen.sample(seed), 0))
            .collect();
        let mean = numeric::mean(&estimates);
        let sd = (estimates
            .iter()
            .map(|e| (e - mean) * (e - mean))
            .sum::<f64>()
            / (runs - 1) as f64)
            .sqrt();
        let se = sd / (runs as f64).sqrt();
        assert!(
            (mean - 1.0).abs() <= 3.0 * se + 1e-3,
            "variance {mean} (se {se})"
        );
    }

    #[test]
    fn coupled_pair_identity_at_full_coupling() {
        let spec = SurrogateSpec {
            family: SurrogateFamily::CoupledPair {
                base: Box::new(SurrogateFamily::WhiteNoise),
                coupling: 1.0,
            },
            length: 4096,
            seed: 3,
        };
        let (x, y) = generate_pair(&spec).unwrap();
        assert!(x.iter().zip(&y).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn coupled_pair_uncorrelated_at_zero_coupling() {
        let n = 1 << 14;
        let spec = SurrogateSpec {
            family: SurrogateFamily::CoupledPair {
                base: Box::new(SurrogateFamily::WhiteNoise),
                coupling: 0.0,
            },
            length: n,
            seed: 11,
        };
        let (x, y) = generate_pair(&spec).unwrap();
        let mx = numeric::mean(&x);
        let my = numeric::mean(&y);
        let mut cov = numeric::CompensatedSum::new();
        let mut vx = numeric::CompensatedSum::new();
        let mut vy = numeric::CompensatedSum::new();
        for i in 0..n {
            cov.add((x[i] - mx) * (y[i] - my));
            vx.add((x[i] - mx) * (x[i] - mx));
            vy.add((y[i] - my) * (y[i] - my));
        }
        let corr = cov.value() / (vx.value() * vy.value()).sqrt();
        assert!(corr.abs() < 3.0 / (n as f64).sqrt(), "corr = {corr}");
    }

    #[test]
    fn cascade_pair_uses_shuffled_independent_copy() {
        let spec = SurrogateSpec {
            family: SurrogateFamily::CoupledPair {
                base: Box::new(SurrogateFamily::BinomialCascade {
                    weight: 0.75,
                    generations: 10,
                }),
                coupling: 0.0,
            },
            length: 1 << 10,
            seed: 5,
        };
        let (x, y) = generate_pair(&spec).unwrap();
        // Same mass, different order.
        assert!((numeric::sum(&x) - numeric::sum(&y)).abs() < 1e-12);
        assert!(x.iter().zip(&y).any(|(a, b)| a != b));
    }

    #[test]
    fn spectrum_value_at_q2() {
        // h(2) = 1/2 − log2(p² + (1−p)²)/2 for p = 0.75.
        let h2 = cascade_spectrum(0.75).unwrap().h(2.0);
        let expect = 0.5 - 0.625f64.log2() / 2.0;
        assert!((h2 - expect).abs() < 1e-15);
        assert!((h2 - 0.839_035_952_556_318_9).abs() < 1e-12);
    }

    #[test]
    fn spectrum_monofractal_limit() {
        let spec = cascade_spectrum(0.500_001).unwrap();
        for q in [-4.0, -1.0, 0.0, 1.0, 4.0] {
            assert!((spec.h(q) - 1.0).abs() < 1e-4, "h({q}) = {}", spec.h(q));
        }
    }

    #[test]
    fn spectrum_non_increasing_in_q() {
        let spec = cascade_spectrum(0.75).unwrap();
        let grid: Vec<f64> = (-16..=16).map(|k| k as f64 * 0.25).collect();
        for w in grid.windows(2) {
            assert!(
                spec.h(w[0]) >= spec.h(w[1]) - 1e-12,
                "h not monotone at q = {}",
                w[1]
            );
        }
    }

    #[test]
    fn spectrum_matches_partition_function_of_generated_cascade() {
        // Independent route to h(2): dyadic box sums of the generated series
        // give the partition function Z_q(2^j) = Σ (box mass)^q; the slope of
        // log2 Z against j is τ(q) = q·h(q) − 1.
        let generations = 16u32;
        let series = binomial_cascade(0.75, generations, 1 << generations).unwrap();
        let q = 2.0;
        let mut log_z = Vec::new();
        let mut js = Vec::new();
        for j in 2..=8u32 {
            let box_len = 1usize << j;
            let mut z = numeric::CompensatedSum::new();
            for chunk in series.chunks_exact(box_len) {
                z.add(numeric::sum(chunk).powf(q));
            }
            log_z.push(z.value().log2());
            js.push(j as f64);
        }
        let fit = numeric::line_fit(&js, &log_z).unwrap();
        let tau = fit.slope;
        let h_emp = (tau + 1.0) / q;
        let h_exact = cascade_spectrum(0.75).unwrap().h(q);
        assert!(
            (h_emp - h_exact).abs() < 1e-10,
            "partition-function h(2) = {h_emp} vs closed form {h_exact}"
        );
    }
}
