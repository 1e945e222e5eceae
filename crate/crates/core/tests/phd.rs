use std::sync::Arc;

use coopsearch::env::{EnvironmentMap, Point};
use coopsearch::phd::oracle::{cardinality_monte_carlo, entropy_monte_carlo, particle_counts};
use coopsearch::phd::{ParticleGrid, Phd};
use coopsearch::sensing::{MeasurementSet, SensorModel};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// 99th percentile of the chi-square distribution with 5 degrees of freedom.
const CHI2_99_DF5: f64 = 15.086;

fn row_belief(spacing: f64, weights: &[f64]) -> Phd {
    let cells = (0..weights.len() as u32).map(|i| (i, 0)).collect();
    let grid = Arc::new(ParticleGrid::from_cells(spacing, cells).unwrap());
    Phd::from_weights(grid, weights.to_vec()).unwrap()
}

#[test]
fn sampled_points_follow_particle_weights() {
    let belief = row_belief(1.0, &[0.3, 1.2, 0.05, 0.8, 0.65]);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let n = 20_000;
    let counts = particle_counts(&belief, n, &mut rng);
    // per-particle counts are independent Poisson(n·w_p)
    let chi2: f64 = counts
        .iter()
        .zip(belief.weights())
        .map(|(&c, &w)| {
            let e = n as f64 * w;
            (c as f64 - e).powi(2) / e
        })
        .sum();
    assert!(chi2 < CHI2_99_DF5, "chi-square {chi2}");
}

#[test]
fn cardinality_is_lambda() {
    let belief = row_belief(0.5, &[0.3, 1.2, 0.05, 0.8, 0.65]);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let est = cardinality_monte_carlo(&belief, 100_000, &mut rng);
    assert!(est.agrees_with(belief.lambda(), 3.0), "{est:?} vs {}", belief.lambda());
}

#[test]
fn five_particle_entropy_matches_monte_carlo() {
    let belief = row_belief(0.5, &[0.4, 0.1, 0.9, 0.25, 0.35]);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let est = entropy_monte_carlo(&belief, 1_000_000, &mut rng);
    assert!(est.agrees_with(belief.entropy(), 3.0), "{est:?} vs {}", belief.entropy());
}

#[test]
fn entropy_of_uniform_unit_area_belief() {
    for (spacing, n) in [(1.0, 1usize), (0.5, 4), (0.2, 25)] {
        for lambda in [0.3, 1.0, 2.5, 20.0] {
            let belief = row_belief(spacing, &vec![lambda / n as f64; n]);
            let expected = lambda * (1.0 - lambda.ln());
            assert!((belief.entropy() - expected).abs() < 1e-12 * expected.abs().max(1.0));
        }
    }
}

#[test]
fn missed_detection_only_shrinks_mass() {
    let map = EnvironmentMap::open(12, 12, 1.0).unwrap();
    let sensor = SensorModel::default();
    let belief = Phd::init_uniform(&map, 0.5, 10.0).unwrap();
    let q = Point::new(6.0, 6.0);
    let after = belief.update(q, &MeasurementSet::empty(q, 1), &sensor, &map);
    for p in 0..belief.len() {
        let pd = sensor.detection_prob(belief.grid().position(p), q, &map);
        assert!((after.weight(p) - belief.weight(p) * (1.0 - pd)).abs() < 1e-15);
    }
    assert!(after.entropy() < belief.entropy());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn downsampling_preserves_mass(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut obstacle = vec![false; 8 * 6];
        for o in obstacle.iter_mut() {
            *o = rng.random::<f64>() < 0.2;
        }
        obstacle[0] = false;
        let map = EnvironmentMap::new(8, 6, 1.0, obstacle).unwrap();
        let fine_grid = Arc::new(ParticleGrid::from_map(&map, 0.25).unwrap());
        let coarse_grid = Arc::new(ParticleGrid::from_map(&map, 1.0).unwrap());
        let weights: Vec<f64> = (0..fine_grid.len()).map(|_| rng.random::<f64>()).collect();
        let fine = Phd::from_weights(fine_grid, weights).unwrap();
        let coarse = fine.downsample_to(&coarse_grid).unwrap();
        let direct: f64 = fine.weights().iter().sum();
        prop_assert!((coarse.lambda() - direct).abs() < 1e-9 * direct.max(1.0));
        prop_assert!((coarse.weights().iter().sum::<f64>() - direct).abs() < 1e-9 * direct.max(1.0));
    }
}
