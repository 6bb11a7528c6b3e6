use super::{read_rng, SampleSet, Sampler};
use crate::error::{Error, Result};
use crate::model::{rescale, AcceptRanges, IsingModel};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::ops::Range;

// Keeps the noise stream apart from the inner sampler's stream when both are
// given the same seed.
const NOISE_STREAM_SALT: u64 = 0x6e6f_6973_655f_7361;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseDistribution {
    Gaussian,
    /// Uniform on `[-w, w]` with `w` the relative sigma times the range scale.
    Uniform,
}

/// Additive control error on the hardware scale: `delta h` has scale
/// `relative_sigma_h * max(|h_min|, h_max)`, `delta J` likewise for couplings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub relative_sigma_h: f64,
    pub relative_sigma_j: f64,
    pub distribution: NoiseDistribution,
    pub seed: u64,
}

impl NoiseModel {
    pub fn gaussian(relative_sigma: f64, seed: u64) -> Self {
        NoiseModel {
            relative_sigma_h: relative_sigma,
            relative_sigma_j: relative_sigma,
            distribution: NoiseDistribution::Gaussian,
            seed,
        }
    }

    pub fn none() -> Self {
        Self::gaussian(0.0, 0)
    }

    fn validate(&self) -> Result<()> {
        for s in [self.relative_sigma_h, self.relative_sigma_j] {
            if !(s >= 0.0) || !s.is_finite() {
                return Err(Error::param(format!("noise sigma must be finite and >= 0, got {s}")));
            }
        }
        Ok(())
    }

    fn draw(&self, scale: f64, rng: &mut ChaCha8Rng) -> f64 {
        match self.distribution {
            NoiseDistribution::Gaussian => Normal::new(0.0, scale)
                .expect("scale checked non-negative")
                .sample(rng),
            NoiseDistribution::Uniform => Uniform::new_inclusive(-scale, scale)
                .expect("scale checked non-negative")
                .sample(rng),
        }
    }

    /// One noisy copy of `base`. Every variable gets a field perturbation;
    /// only existing couplers get coupling perturbations.
    pub fn perturb(&self, base: &IsingModel, ranges: &AcceptRanges, read: u64) -> IsingModel {
        let mut out = base.clone();
        let mut rng = read_rng(self.seed ^ NOISE_STREAM_SALT, read);
        let sh = self.relative_sigma_h * ranges.h_scale();
        let sj = self.relative_sigma_j * ranges.j_scale();
        if sh > 0.0 {
            for &v in base.variables() {
                out.add_field(v, self.draw(sh, &mut rng));
            }
        }
        if sj > 0.0 {
            for ((a, b), _) in base.couplings() {
                out.add_coupling(a, b, self.draw(sj, &mut rng));
            }
        }
        out
    }
}

/// Samples `rescale(H) + delta` with fresh noise per read, then reports
/// energies on the noiseless `rescale(H)`.
#[derive(Debug, Clone)]
pub struct NoisySampler<S> {
    pub ranges: AcceptRanges,
    pub noise: NoiseModel,
    pub inner: S,
}

impl<S: Sampler> NoisySampler<S> {
    pub fn new(ranges: AcceptRanges, noise: NoiseModel, inner: S) -> Self {
        NoisySampler { ranges, noise, inner }
    }
}

impl<S: Sampler> Sampler for NoisySampler<S> {
    fn sample_reads(&self, model: &IsingModel, seed: u64, reads: Range<u64>) -> Result<SampleSet> {
        self.noise.validate()?;
        let base = rescale(model, &self.ranges);
        let compiled = base.compile();
        let parts: Vec<Result<SampleSet>> = reads
            .into_par_iter()
            .map(|r| {
                let noisy = self.noise.perturb(&base, &self.ranges, r);
                self.inner.sample_reads(&noisy, seed, r..r + 1)
            })
            .collect();
        let mut out = SampleSet::for_model(&base);
        for part in parts {
            for mut rec in part?.records().iter().cloned() {
                rec.energy = compiled.energy(&rec.spins);
                out.push(rec)?;
            }
        }
        Ok(out)
    }
}

pub fn noisy_sample<S: Sampler>(
    model: &IsingModel,
    ranges: &AcceptRanges,
    noise: &NoiseModel,
    inner: &S,
    num_reads: u64,
    seed: u64,
) -> Result<SampleSet> {
    NoisySampler::new(*ranges, *noise, inner).sample(model, num_reads, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ground_states, Var};
    use crate::sampling::{ExactSampler, SimulatedAnnealer};

    fn trivial(j: f64) -> IsingModel {
        let mut m = IsingModel::new();
        m.add_coupling(Var(1), Var(2), j);
        m.add_coupling(Var(2), Var(3), 1.0);
        m
    }

    #[test]
    fn zero_noise_matches_inner_on_rescaled() {
        let m = trivial(16.0);
        let r = AcceptRanges::dwave();
        let sa = SimulatedAnnealer { sweeps: 20, ..SimulatedAnnealer::default() };
        let noisy = noisy_sample(&m, &r, &NoiseModel::none(), &sa, 30, 11).unwrap();
        let plain = sa.sample(&rescale(&m, &r), 30, 11).unwrap();
        assert_eq!(noisy, plain);
    }

    #[test]
    fn large_ratio_loses_small_coupling() {
        let m = trivial(512.0);
        let gs = ground_states(&m).unwrap();
        let noise = NoiseModel::gaussian(0.03, 4);
        let s = noisy_sample(&m, &AcceptRanges::dwave(), &noise, &ExactSampler::zero_temperature(), 500, 4)
            .unwrap();
        let p = (0..s.len()).filter(|&i| gs.contains(&s.assignment(i))).count() as f64 / 500.0;
        assert!((p - 0.5).abs() <= 0.1, "p_opt {p}");
    }

    #[test]
    fn energies_are_noiseless() {
        let m = trivial(4.0);
        let r = AcceptRanges::dwave();
        let base = rescale(&m, &r);
        let s = noisy_sample(&m, &r, &NoiseModel::gaussian(0.05, 1), &ExactSampler::zero_temperature(), 40, 2)
            .unwrap();
        for i in 0..s.len() {
            assert_eq!(s.records()[i].energy, base.energy(&s.assignment(i)).unwrap());
        }
    }

    #[test]
    fn uniform_noise_bounded() {
        let m = trivial(1.0);
        let r = AcceptRanges::dwave();
        let noise = NoiseModel {
            relative_sigma_h: 0.1,
            relative_sigma_j: 0.1,
            distribution: NoiseDistribution::Uniform,
            seed: 3,
        };
        for read in 0..50 {
            let p = noise.perturb(&m, &r, read);
            for v in m.variables() {
                assert!(p.field(*v).abs() <= 0.4 + 1e-12);
            }
            assert!((p.coupling(Var(1), Var(2)) - 1.0).abs() <= 0.2 + 1e-12);
        }
    }

    #[test]
    fn negative_sigma_rejected() {
        let m = trivial(1.0);
        let noise = NoiseModel::gaussian(-0.1, 0);
        assert!(noisy_sample(&m, &AcceptRanges::dwave(), &noise, &ExactSampler::zero_temperature(), 1, 0).is_err());
    }
}
