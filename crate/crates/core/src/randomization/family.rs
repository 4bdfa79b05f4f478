use rand::rngs::SmallRng;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, StandardNormal};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distribution {
    Rademacher,
    StandardGaussian,
    /// Uniform on `[−1, 1]`.
    UniformPm,
    /// Every draw equals 1; reproduces the deterministic decomposition.
    Ones,
}

/// Index of one random coefficient `X^M_{i,j,k,l}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DrawKey {
    pub m_exp: i32,
    pub i: [i64; 3],
    pub j: [i64; 3],
    pub k: usize,
    pub l: usize,
}

/// i.i.d. coefficient law plus the master seed.
///
/// Draws are counter based: seed, trial and piece index hash into the seed of a
/// small generator, so a value never depends on the order in which draws are
/// requested.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomCoefficientFamily {
    pub distribution: Distribution,
    pub seed: u64,
}

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn prefix_hash(m_exp: i32, i: [i64; 3], k: usize, l: usize) -> u64 {
    let mut h = mix(m_exp as i64 as u64 ^ 0x9e3779b97f4a7c15);
    for v in i {
        h = mix(h ^ (v as u64));
    }
    h = mix(h ^ k as u64);
    mix(h ^ ((l as u64) << 32))
}

/// Draws sharing `(M, i, k, l)` within one realization; only `j` varies.
#[derive(Debug, Clone, Copy)]
pub struct DrawRow {
    family: RandomCoefficientFamily,
    base: u64,
}

impl DrawRow {
    pub fn at(&self, j: [i64; 3]) -> f64 {
        if self.family.distribution == Distribution::Ones {
            return 1.0;
        }
        let mut h = self.base;
        for v in j {
            h = mix(h ^ (v as u64));
        }
        match self.family.distribution {
            Distribution::Rademacher => {
                if h >> 63 == 0 {
                    1.0
                } else {
                    -1.0
                }
            }
            Distribution::UniformPm => ((h >> 11) as f64 * (1.0 / (1u64 << 52) as f64)) - 1.0,
            _ => self.family.sample(&mut SmallRng::seed_from_u64(h)),
        }
    }
}

impl RandomCoefficientFamily {
    pub fn new(distribution: Distribution, seed: u64) -> Self {
        RandomCoefficientFamily { distribution, seed }
    }

    /// `c` in `∫ e^{γx} dμ ≤ e^{cγ²}`; `None` for the degenerate family.
    pub fn subgaussian_constant(&self) -> Option<f64> {
        match self.distribution {
            Distribution::Rademacher | Distribution::StandardGaussian => Some(0.5),
            // sinh(γ)/γ ≤ e^{γ²/6}
            Distribution::UniformPm => Some(1.0 / 6.0),
            Distribution::Ones => None,
        }
    }

    pub fn mean(&self) -> f64 {
        if self.distribution == Distribution::Ones {
            1.0
        } else {
            0.0
        }
    }

    /// `E X²`.
    pub fn second_moment(&self) -> f64 {
        match self.distribution {
            Distribution::UniformPm => 1.0 / 3.0,
            _ => 1.0,
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match self.distribution {
            Distribution::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            Distribution::StandardGaussian => StandardNormal.sample(rng),
            Distribution::UniformPm => rng.random_range(-1.0..1.0),
            Distribution::Ones => 1.0,
        }
    }

    fn stream(&self, trial: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial);
        rng
    }

    pub fn row(&self, trial: u64, m_exp: i32, i: [i64; 3], k: usize, l: usize) -> DrawRow {
        let t = mix(mix(self.seed ^ 0x2545f4914f6cdd1d) ^ trial.wrapping_mul(0x9e3779b97f4a7c15));
        DrawRow {
            family: *self,
            base: mix(t ^ prefix_hash(m_exp, i, k, l)),
        }
    }

    /// The coefficient attached to `key` in realization `trial`.
    pub fn draw(&self, trial: u64, key: &DrawKey) -> f64 {
        self.row(trial, key.m_exp, key.i, key.k, key.l).at(key.j)
    }

    /// `n` consecutive draws of realization `trial`, for flat coefficient vectors.
    pub fn sequence(&self, trial: u64, n: usize) -> Vec<f64> {
        let mut rng = self.stream(trial);
        (0..n).map(|_| self.sample(&mut rng)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(j: i64) -> DrawKey {
        DrawKey { m_exp: 1, i: [0, 2, 0], j: [j, 0, 0], k: 3, l: 2 }
    }

    #[test]
    fn draws_are_order_independent() {
        let fam = RandomCoefficientFamily::new(Distribution::StandardGaussian, 42);
        let forward: Vec<f64> = (0..20).map(|j| fam.draw(3, &key(j))).collect();
        let backward: Vec<f64> = (0..20).rev().map(|j| fam.draw(3, &key(j))).collect();
        assert!(forward.iter().eq(backward.iter().rev()));
        assert_ne!(fam.draw(3, &key(0)), fam.draw(4, &key(0)));
    }

    #[test]
    fn empirical_mean_and_variance() {
        for dist in [Distribution::Rademacher, Distribution::StandardGaussian, Distribution::UniformPm] {
            let fam = RandomCoefficientFamily::new(dist, 7);
            let trials = 20_000;
            let xs: Vec<f64> = (0..trials).map(|t| fam.draw(t, &key(1))).collect();
            let mean = xs.iter().sum::<f64>() / trials as f64;
            let m2 = xs.iter().map(|x| x * x).sum::<f64>() / trials as f64;
            assert!(mean.abs() < 5.0 / (trials as f64).sqrt(), "{dist:?} mean {mean}");
            assert!((m2 - fam.second_moment()).abs() < 0.05, "{dist:?} m2 {m2}");
        }
    }

    #[test]
    fn moment_generating_bound() {
        // empirical MGF against e^{cγ²} with slack for sampling noise
        for dist in [Distribution::Rademacher, Distribution::UniformPm] {
            let fam = RandomCoefficientFamily::new(dist, 11);
            let xs = fam.sequence(0, 50_000);
            let c = fam.subgaussian_constant().unwrap();
            for g in [0.25, 0.5, 1.0, 2.0] {
                let mgf = xs.iter().map(|x| (g * x).exp()).sum::<f64>() / xs.len() as f64;
                assert!(mgf <= (c * g * g).exp() * 1.02, "{dist:?} γ={g}: {mgf}");
            }
        }
    }
}
