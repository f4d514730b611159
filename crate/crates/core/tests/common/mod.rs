#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wiretap_bounds::probmodel::{DiscreteChannel, FiniteDist, JointDist};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Positive weights summing to one. With `sparse`, about a quarter of the
/// entries are zeroed (at least one survives).
pub fn weights(rng: &mut impl Rng, n: usize, sparse: bool) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n)
        .map(|_| -rng.random_range(1e-12..1.0f64).ln())
        .collect();
    if sparse {
        let keep = rng.random_range(0..n);
        for (i, x) in w.iter_mut().enumerate() {
            if i != keep && rng.random_bool(0.25) {
                *x = 0.0;
            }
        }
    }
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s).collect()
}

pub fn dist(rng: &mut impl Rng, n: usize, sparse: bool) -> FiniteDist {
    FiniteDist::from_weights(&weights(rng, n, sparse)).unwrap()
}

pub fn channel(rng: &mut impl Rng, inputs: usize, outputs: usize, sparse: bool) -> DiscreteChannel {
    DiscreteChannel::new(
        (0..inputs)
            .map(|_| dist(rng, outputs, sparse).masses().to_vec())
            .collect(),
    )
    .unwrap()
}

/// Joint distribution with the given `P_X` and a random channel.
pub fn joint_with(rng: &mut impl Rng, p_x: &FiniteDist, nz: usize) -> JointDist {
    let ch = channel(rng, p_x.len(), nz, false);
    JointDist::from_input_channel(p_x, &ch).unwrap()
}
