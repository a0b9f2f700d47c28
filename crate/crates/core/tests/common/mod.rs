#![allow(dead_code)]

use exciton_walk::model::{BathSpec, NetworkSpec, SystemSpec};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random 3 to 5 site network with one trap, recombination and a warm bath.
pub fn random_system(seed: u64) -> SystemSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(3..=5);
    let energies: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..400.0)).collect();
    let mut j = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in (a + 1)..n {
            let v = rng.random_range(-100.0..100.0);
            j[(a, b)] = v;
            j[(b, a)] = v;
        }
    }
    let mut trap = vec![0.0; n];
    trap[rng.random_range(0..n)] = rng.random_range(0.1..5.0);
    let loss = rng.random_range(1e-3..1e-2);
    let network = NetworkSpec::new(energies, j, trap, loss).unwrap();
    let bath = BathSpec::new(
        rng.random_range(77.0..350.0),
        rng.random_range(10.0..100.0),
        rng.random_range(50.0..200.0),
    )
    .unwrap();
    SystemSpec { network, bath }
}
