//! Sparse MISO channel world.
//!
//! The received sample is `y(n) = Σ_t h_tᵀ x_t(n) + z(n) = hᵀx(n) + z(n)` where
//! `h` stacks the `N_t` per-antenna impulse responses and `x(n)` stacks each
//! antenna's sliding window of training symbols, newest symbol first.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// One draw of the stacked sparse channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub per_antenna: Vec<Vec<f64>>,
    pub stacked: Vec<f64>,
    /// Sorted tap positions of the dominant taps of each antenna.
    pub supports: Vec<Vec<usize>>,
}

impl ChannelRealization {
    /// Taps per antenna (`N`).
    pub fn taps(&self) -> usize {
        self.per_antenna.first().map_or(0, Vec::len)
    }

    pub fn antennas(&self) -> usize {
        self.per_antenna.len()
    }

    /// All-zero channel with the given shape and empty supports.
    pub fn zeros(n: usize, n_t: usize) -> Self {
        ChannelRealization {
            per_antenna: vec![vec![0.0; n]; n_t],
            stacked: vec![0.0; n * n_t],
            supports: vec![Vec::new(); n_t],
        }
    }

    /// Builds a realization from per-antenna vectors; supports are the nonzero
    /// positions.
    pub fn from_per_antenna(per_antenna: Vec<Vec<f64>>) -> Result<Self> {
        let n = per_antenna.first().map_or(0, Vec::len);
        if n == 0 {
            return Err(Error::invalid("per_antenna", "empty channel"));
        }
        if let Some(bad) = per_antenna.iter().find(|h| h.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: bad.len(),
            });
        }
        let stacked = per_antenna.concat();
        let supports = per_antenna
            .iter()
            .map(|h| (0..n).filter(|&i| h[i] != 0.0).collect())
            .collect();
        Ok(ChannelRealization {
            per_antenna,
            stacked,
            supports,
        })
    }
}

/// Noise level of the observations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub snr_db: f64,
    pub sigma_n2: f64,
    /// Transmit power per antenna, also the variance of the training symbols.
    pub e0: f64,
}

impl NoiseSpec {
    pub fn from_snr(snr_db: f64, e0: f64) -> Result<Self> {
        if !(e0 > 0.0 && e0.is_finite()) {
            return Err(Error::invalid("e0", format!("{e0} must be > 0")));
        }
        if snr_db.is_nan() {
            return Err(Error::invalid("snr_db", "NaN"));
        }
        Ok(NoiseSpec {
            snr_db,
            sigma_n2: sigma_from_snr(snr_db, e0),
            e0,
        })
    }

    /// Zero noise (infinite SNR).
    pub fn noiseless(e0: f64) -> Self {
        NoiseSpec {
            snr_db: f64::INFINITY,
            sigma_n2: 0.0,
            e0,
        }
    }
}

/// `σ_n² = E_0 / 10^(snr_db/20)`, inverting `snr_db = 20·log10(E_0/σ_n²)`.
///
/// The 20·log10 form is applied to a variance ratio on purpose; outputs are
/// labelled with this definition.
pub fn sigma_from_snr(snr_db: f64, e0: f64) -> f64 {
    e0 / 10f64.powf(snr_db / 20.0)
}

/// Draws a channel with `t_dominant` standard-Gaussian taps per antenna at
/// uniformly chosen positions, each antenna scaled to unit Euclidean norm.
pub fn generate_channel(
    n: usize,
    n_t: usize,
    t_dominant: usize,
    seed: u64,
) -> Result<ChannelRealization> {
    if n_t == 0 {
        return Err(Error::invalid("n_t", "need at least one antenna"));
    }
    if t_dominant == 0 || t_dominant > n {
        return Err(Error::invalid(
            "t_dominant",
            format!("{t_dominant} not in [1, n = {n}]"),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut per_antenna = Vec::with_capacity(n_t);
    let mut supports = Vec::with_capacity(n_t);
    for _ in 0..n_t {
        let mut support = index::sample(&mut rng, n, t_dominant).into_vec();
        support.sort_unstable();
        let mut h = vec![0.0; n];
        // a draw of exactly zero would break the support invariant
        loop {
            for &i in &support {
                h[i] = StandardNormal.sample(&mut rng);
            }
            if support.iter().all(|&i| h[i] != 0.0) {
                break;
            }
        }
        let norm = h.iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in &mut h {
            *v /= norm;
        }
        per_antenna.push(h);
        supports.push(support);
    }
    let stacked = per_antenna.concat();
    Ok(ChannelRealization {
        per_antenna,
        stacked,
        supports,
    })
}

/// One training sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    /// Stacked regressor `[x_1(n)ᵀ … x_Nt(n)ᵀ]ᵀ`.
    pub regressor: Vec<f64>,
    pub observation: f64,
}

/// Iterator over training samples for one channel.
///
/// Per step it draws one `N(0, e0)` symbol per antenna (antenna order) and then
/// one `N(0, σ_n²)` noise value. Windows start zero-filled.
#[derive(Debug, Clone)]
pub struct TrainingStream<'a> {
    channel: &'a ChannelRealization,
    rng: ChaCha8Rng,
    symbol_std: f64,
    noise_std: f64,
    window: Vec<f64>,
    remaining: usize,
}

impl Iterator for TrainingStream<'_> {
    type Item = Sample;

    fn next(&mut self) -> Option<Sample> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let n = self.channel.taps();
        for chunk in self.window.chunks_exact_mut(n) {
            chunk.rotate_right(1);
            let s: f64 = StandardNormal.sample(&mut self.rng);
            chunk[0] = self.symbol_std * s;
        }
        let z: f64 = StandardNormal.sample(&mut self.rng);
        let clean: f64 = self
            .channel
            .stacked
            .iter()
            .zip(&self.window)
            .map(|(h, x)| h * x)
            .sum();
        Some(Sample {
            regressor: self.window.clone(),
            observation: clean + self.noise_std * z,
        })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining, Some(self.remaining))
    }
}

impl ExactSizeIterator for TrainingStream<'_> {}

/// Emits `length` samples of `y = hᵀx + z` for `channel`.
pub fn training_stream<'a>(
    channel: &'a ChannelRealization,
    noise: &NoiseSpec,
    length: usize,
    seed: u64,
) -> Result<TrainingStream<'a>> {
    if length == 0 {
        return Err(Error::invalid("length", "must be >= 1"));
    }
    if channel.taps() == 0 {
        return Err(Error::invalid("channel", "empty channel"));
    }
    if !(noise.e0 > 0.0 && noise.e0.is_finite()) {
        return Err(Error::invalid("e0", format!("{} must be > 0", noise.e0)));
    }
    if !(noise.sigma_n2 >= 0.0 && noise.sigma_n2.is_finite()) {
        return Err(Error::invalid(
            "sigma_n2",
            format!("{} must be >= 0", noise.sigma_n2),
        ));
    }
    Ok(TrainingStream {
        channel,
        rng: ChaCha8Rng::seed_from_u64(seed),
        symbol_std: noise.e0.sqrt(),
        noise_std: noise.sigma_n2.sqrt(),
        window: vec![0.0; channel.stacked.len()],
        remaining: length,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma_from_snr(0.0, 1.0), 1.0);
        assert_relative_eq!(sigma_from_snr(20.0, 1.0), 0.1, max_relative = 1e-15);
        assert_relative_eq!(sigma_from_snr(3.0, 1.0), 0.707_945_784_384_137_9, max_relative = 1e-14);
    }

    #[test]
    fn single_antenna_three_taps() {
        let ch = generate_channel(16, 1, 3, 11).unwrap();
        assert_eq!(ch.per_antenna.len(), 1);
        assert_eq!(ch.supports[0].len(), 3);
        assert_eq!(ch.stacked.iter().filter(|v| **v != 0.0).count(), 3);
        let norm2: f64 = ch.stacked.iter().map(|v| v * v).sum();
        assert_relative_eq!(norm2, 1.0, max_relative = 1e-14);
    }

    #[test]
    fn dense_channel_is_unit_norm() {
        let ch = generate_channel(8, 2, 8, 3).unwrap();
        for h in &ch.per_antenna {
            assert!(h.iter().all(|v| *v != 0.0));
            assert_relative_eq!(h.iter().map(|v| v * v).sum::<f64>(), 1.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn channel_parameter_errors() {
        assert!(generate_channel(4, 1, 5, 0).is_err());
        assert!(generate_channel(4, 1, 0, 0).is_err());
        assert!(generate_channel(4, 0, 1, 0).is_err());
    }

    #[test]
    fn channel_is_deterministic() {
        assert_eq!(
            generate_channel(16, 3, 2, 99).unwrap(),
            generate_channel(16, 3, 2, 99).unwrap()
        );
        assert_ne!(
            generate_channel(16, 3, 2, 99).unwrap(),
            generate_channel(16, 3, 2, 100).unwrap()
        );
    }

    #[test]
    fn sliding_window_cold_start() {
        let ch = ChannelRealization::from_per_antenna(vec![vec![1.0, 0.0]]).unwrap();
        let noise = NoiseSpec::noiseless(1.0);
        let samples: Vec<Sample> = training_stream(&ch, &noise, 3, 5).unwrap().collect();
        let x0 = samples[0].regressor[0];
        let x1 = samples[1].regressor[0];
        let x2 = samples[2].regressor[0];
        assert_eq!(samples[0].regressor, vec![x0, 0.0]);
        assert_eq!(samples[1].regressor, vec![x1, x0]);
        assert_eq!(samples[2].regressor, vec![x2, x1]);
    }

    #[test]
    fn noiseless_observation_is_exact() {
        let ch = generate_channel(6, 2, 2, 1).unwrap();
        let noise = NoiseSpec::noiseless(1.0);
        for s in training_stream(&ch, &noise, 50, 2).unwrap() {
            let clean: f64 = ch.stacked.iter().zip(&s.regressor).map(|(h, x)| h * x).sum();
            assert_eq!(s.observation, clean);
        }
    }

    #[test]
    fn stream_validation() {
        let ch = generate_channel(4, 1, 1, 0).unwrap();
        let noise = NoiseSpec::noiseless(1.0);
        assert!(training_stream(&ch, &noise, 0, 0).is_err());
        assert!(NoiseSpec::from_snr(3.0, 0.0).is_err());
    }
}
